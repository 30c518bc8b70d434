// Copyright 2026 The Flicker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flicker/fidelity.hpp"

#include <cmath>

namespace flicker::fidelity {

namespace {

double real_trace(const complex& t, const char* what) {
  if (std::abs(t.imag()) > 1e-10 * std::max(1.0, std::abs(t.real())))
    throw NumericalError(std::string(what) +
                         ": trace has a non-negligible imaginary part");
  return t.real();
}

}  // namespace

double state_fidelity(const QubitOperator& rho_f, const QubitOperator& rho) {
  require(is_hermitian(rho_f), "state_fidelity: target must be Hermitian");
  require(is_hermitian(rho), "state_fidelity: state must be Hermitian");
  return real_trace((rho_f.adjoint() * rho).trace(), "state_fidelity");
}

double gate_fidelity(const QubitOperator& u_target,
                     const std::array<QubitOperator, 3>& evolved) {
  require(is_unitary(u_target), "gate_fidelity: target must be unitary");
  const std::array<QubitOperator, 3> paulis{pauli_x(), pauli_y(), pauli_z()};
  complex acc = 0.0;
  for (std::size_t k = 0; k < 3; ++k)
    acc += (u_target * paulis[k] * u_target.adjoint() * evolved[k]).trace();
  return 0.5 + real_trace(acc, "gate_fidelity") / 12.0;
}

double memory_fidelity(const noise::NoiseModel& model,
                       const pulses::PulseSequence& pulse) {
  return gate_fidelity(identity_op(),
                       dynamics::evolve_operator_basis(model, pulse));
}

double not_fidelity(const noise::NoiseModel& model,
                    const pulses::PulseSequence& pulse) {
  return gate_fidelity(pauli_x(),
                       dynamics::evolve_operator_basis(model, pulse));
}

FidelityReport report(const noise::NoiseModel& model,
                      const pulses::PulseSequence& pulse,
                      const QubitOperator& u_target,
                      std::string target_label) {
  FidelityReport r;
  r.value =
      gate_fidelity(u_target, dynamics::evolve_operator_basis(model, pulse));
  r.target = std::move(target_label);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu segments, duration %.6g",
                pulse.segments.size(), pulse.duration());
  r.pulse = buf;
  std::snprintf(buf, sizeof(buf),
                "%d states, alpha %.3g, strength %.6g", model.M, model.alpha,
                model.average_strength());
  r.noise = buf;
  return r;
}

}  // namespace flicker::fidelity
