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

#include "flicker/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "flicker/dynamics.hpp"
#include "flicker/parallel.hpp"

namespace flicker::optimizer {

namespace {

constexpr double kStepUnderflow = 1e-14;
constexpr double kStepCeiling = 1e6;

// Pauli-frame rotation of the target: R(q, p) = tr(sigma_q U sigma_p U^+)/2.
Eigen::Matrix3d target_rotation(const QubitOperator& u_target) {
  require(is_unitary(u_target), "optimizer: target must be unitary");
  const std::array<QubitOperator, 3> paulis{pauli_x(), pauli_y(), pauli_z()};
  Eigen::Matrix3d r;
  for (int q = 0; q < 3; ++q)
    for (int p = 0; p < 3; ++p)
      r(q, p) =
          0.5 *
          (paulis[static_cast<std::size_t>(q)] * u_target *
           paulis[static_cast<std::size_t>(p)] * u_target.adjoint())
              .trace()
              .real();
  return r;
}

// Shared state for repeated fidelity and gradient evaluations on one
// (model, target, grid) triple.
struct Workspace {
  Workspace(const noise::NoiseModel& model, const QubitOperator& u_target,
            int n_segments, double dt)
      : gen(model), rotation(target_rotation(u_target)), n(n_segments), dt(dt) {
    const int m = gen.states();
    basis0 = Eigen::MatrixXd::Zero(gen.dim(), 3);
    costate0.resize(gen.dim(), 3);
    for (int q = 0; q < 3; ++q) {
      basis0.block(q * m, q, m, 1).setConstant(2.0 / m);
      for (int p = 0; p < 3; ++p)
        costate0.block(q * m, p, m, 1).setConstant(rotation(q, p));
    }
  }

  double fidelity_of_final(const Eigen::MatrixXd& final_basis) const {
    const int m = gen.states();
    double acc = 0.0;
    for (int q = 0; q < 3; ++q)
      for (int p = 0; p < 3; ++p)
        acc += rotation(q, p) * final_basis.block(q * m, p, m, 1).sum();
    return 0.5 + acc / 12.0;
  }

  double fidelity(const Eigen::VectorXd& amps) const {
    Eigen::MatrixXd s = basis0;
    for (int j = 0; j < n; ++j) s = gen.propagator(amps(j), dt) * s;
    if (!s.allFinite())
      throw NumericalError("optimizer: non-finite fidelity evaluation");
    return fidelity_of_final(s);
  }

  // Gradient via stored forward states and backward costates; each
  // segment contributes <costate, dP/da forward>.
  Eigen::VectorXd gradient(const Eigen::VectorXd& amps) const {
    std::vector<Eigen::MatrixXd> forward(static_cast<std::size_t>(n + 1));
    std::vector<Eigen::MatrixXd> props(static_cast<std::size_t>(n));
    std::vector<Eigen::MatrixXd> derivs(static_cast<std::size_t>(n));
    forward[0] = basis0;
    for (int j = 0; j < n; ++j) {
      auto [p, d] = gen.propagator_with_derivative(amps(j), dt);
      props[static_cast<std::size_t>(j)] = std::move(p);
      derivs[static_cast<std::size_t>(j)] = std::move(d);
      forward[static_cast<std::size_t>(j + 1)] =
          props[static_cast<std::size_t>(j)] * forward[static_cast<std::size_t>(j)];
    }

    Eigen::VectorXd grad(n);
    Eigen::MatrixXd costate = costate0;
    for (int j = n - 1; j >= 0; --j) {
      grad(j) = costate
                    .cwiseProduct(derivs[static_cast<std::size_t>(j)] *
                                  forward[static_cast<std::size_t>(j)])
                    .sum() /
                12.0;
      costate = props[static_cast<std::size_t>(j)].transpose() * costate;
    }
    if (!grad.allFinite())
      throw NumericalError("optimizer: non-finite gradient");
    return grad;
  }

  dynamics::StackedGenerator gen;
  Eigen::Matrix3d rotation;
  Eigen::MatrixXd basis0;
  Eigen::MatrixXd costate0;
  int n;
  double dt;
};

struct AscentOutcome {
  Eigen::VectorXd amps;
  double fidelity = 0.0;
  int iterations = 0;
  std::vector<double> trace;
  StopReason stop_reason = StopReason::max_iterations;
};

// Monotone projected gradient ascent with backtracking step halving.
AscentOutcome ascend(const Workspace& ws, Eigen::VectorXd amps,
                     const OptimizerConfig& config) {
  const double bound = config.amplitude_bound;
  AscentOutcome out;
  double phi = ws.fidelity(amps);
  out.trace.push_back(phi);
  double step = config.initial_step;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd grad = ws.gradient(amps);

    // At the box boundary only inward components count.
    double projected_norm = 0.0;
    for (int j = 0; j < grad.size(); ++j) {
      const bool blocked = (amps(j) >= bound && grad(j) > 0.0) ||
                           (amps(j) <= -bound && grad(j) < 0.0);
      if (!blocked) projected_norm = std::max(projected_norm, std::abs(grad(j)));
    }
    if (projected_norm < config.gradient_tolerance) {
      out.stop_reason = StopReason::gradient_converged;
      out.iterations = iter - 1;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      const Eigen::VectorXd trial =
          (amps + step * grad).cwiseMax(-bound).cwiseMin(bound);
      const double phi_trial = ws.fidelity(trial);
      if (phi_trial >= phi) {
        amps = trial;
        phi = phi_trial;
        out.trace.push_back(phi);
        step = std::min(step * 2.0, kStepCeiling);
        accepted = true;
      } else {
        step *= 0.5;
        if (step < kStepUnderflow) {
          out.stop_reason = StopReason::step_underflow;
          break;
        }
      }
    }
    if (!accepted) break;
  }

  out.amps = std::move(amps);
  out.fidelity = phi;
  return out;
}

Eigen::VectorXd amplitudes_of(const pulses::PulseSequence& pulse) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(pulse.segments.size()));
  for (std::size_t j = 0; j < pulse.segments.size(); ++j)
    a(static_cast<Eigen::Index>(j)) = pulse.segments[j].amplitude;
  return a;
}

pulses::PulseSequence pulse_of(const Eigen::VectorXd& amps, double dt,
                               double a_max) {
  pulses::PulseSequence p;
  p.a_max = a_max;
  for (int j = 0; j < amps.size(); ++j) p.segments.push_back({amps(j), dt});
  p.validate();
  return p;
}

}  // namespace

void OptimizerConfig::validate() const {
  require(n_segments >= 1, "optimizer config: n_segments must be >= 1");
  require(max_iterations > 0, "optimizer config: max_iterations must be positive");
  require(gradient_tolerance > 0.0,
          "optimizer config: gradient_tolerance must be positive");
  require(initial_step > 0.0, "optimizer config: initial_step must be positive");
  require(n_starts > 0, "optimizer config: n_starts must be positive");
  require(amplitude_bound > 0.0,
          "optimizer config: amplitude_bound must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::gradient_converged:
      return "gradient_converged";
    case StopReason::max_iterations:
      return "max_iterations";
    case StopReason::step_underflow:
      return "step_underflow";
  }
  return "unknown";
}

Eigen::VectorXd fidelity_gradient(const noise::NoiseModel& model,
                                  const QubitOperator& target,
                                  const pulses::PulseSequence& pulse) {
  model.validate();
  pulse.validate();
  require(!pulse.segments.empty(), "fidelity_gradient: empty pulse");
  const double dt = pulse.segments.front().duration;
  for (const auto& seg : pulse.segments)
    require(std::abs(seg.duration - dt) <= 1e-12 * dt,
            "fidelity_gradient: segments must have equal durations");

  Workspace ws(model, target, static_cast<int>(pulse.segments.size()), dt);
  return ws.gradient(amplitudes_of(pulse));
}

OptimizationResult optimize(const noise::NoiseModel& model,
                            const QubitOperator& target, double T,
                            const OptimizerConfig& config, int n_threads) {
  model.validate();
  config.validate();
  require(T > 0.0, "optimize: duration must be positive");

  const int n = config.n_segments;
  const double dt = T / n;
  const double bound = config.amplitude_bound;
  const Workspace ws(model, target, n, dt);

  // Start 0 is the zero pulse and start 1 the constant a_max pulse; the
  // remaining n_starts come from seeded uniform initializations.
  const int total_starts = config.n_starts + 2;
  std::vector<AscentOutcome> outcomes(static_cast<std::size_t>(total_starts));
  parallel_for(total_starts, n_threads, [&](int s) {
    Eigen::VectorXd amps;
    if (s == 0) {
      amps = Eigen::VectorXd::Zero(n);
    } else if (s == 1) {
      amps = Eigen::VectorXd::Constant(n, bound);
    } else {
      amps = amplitudes_of(pulses::uniform_random_pulse(
          T, n, rng::derive_seed(config.seed, static_cast<std::uint64_t>(s)),
          bound, bound));
    }
    outcomes[static_cast<std::size_t>(s)] = ascend(ws, std::move(amps), config);
  });

  int best = 0;
  for (int s = 1; s < total_starts; ++s)
    if (outcomes[static_cast<std::size_t>(s)].fidelity >
        outcomes[static_cast<std::size_t>(best)].fidelity)
      best = s;

  auto& chosen = outcomes[static_cast<std::size_t>(best)];
  OptimizationResult result;
  result.pulse = pulse_of(chosen.amps, dt, bound);
  result.fidelity = chosen.fidelity;
  result.iterations = chosen.iterations;
  result.start_index = best;
  result.fidelity_trace = std::move(chosen.trace);
  result.stop_reason = chosen.stop_reason;
  return result;
}

}  // namespace flicker::optimizer
