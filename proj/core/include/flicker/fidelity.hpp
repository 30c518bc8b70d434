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

#pragma once

#include <array>
#include <string>

#include "flicker/dynamics.hpp"
#include "flicker/noise.hpp"
#include "flicker/pulses.hpp"
#include "flicker/types.hpp"

namespace flicker::fidelity {

/// Overlap tr(rho_f^dagger rho) between Hermitian operators; the trace is
/// mathematically real and the imaginary residue is asserted small.
double state_fidelity(const QubitOperator& rho_f, const QubitOperator& rho);

/// Average gate fidelity of the evolution E against the unitary target:
/// 1/2 + (1/12) sum_{k=x,y,z} tr(U sigma_k U^dagger E(sigma_k)).
/// Invariant under a global phase of the target.
double gate_fidelity(const QubitOperator& u_target,
                     const std::array<QubitOperator, 3>& evolved);

/// Gate fidelity of the noisy averaged evolution against the identity
/// (quantum memory) or sigma_x (NOT gate).
double memory_fidelity(const noise::NoiseModel& model,
                       const pulses::PulseSequence& pulse);
double not_fidelity(const noise::NoiseModel& model,
                    const pulses::PulseSequence& pulse);

struct FidelityReport {
  double value = 0.0;
  std::string target;
  std::string pulse;
  std::string noise;
};

/// Scores a pulse against the identity or sigma_x target and labels the
/// result with human-readable pulse and noise descriptors.
FidelityReport report(const noise::NoiseModel& model,
                      const pulses::PulseSequence& pulse,
                      const QubitOperator& u_target,
                      std::string target_label);

}  // namespace flicker::fidelity
