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
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "flicker/noise.hpp"
#include "flicker/pulses.hpp"
#include "flicker/types.hpp"

namespace flicker::dynamics {

/// The M conditional qubit operators rho_k(t), evolved jointly. Each
/// rho_k is the system operator averaged over noise paths occupying state
/// k at time t; its trace is the probability of that state (for
/// density-operator inputs). The physical average state is the sum.
struct ConditionalState {
  std::vector<QubitOperator> rhos;
  double time = 0.0;

  QubitOperator total() const;
  Eigen::VectorXd traces() const;  // real part of tr(rho_k)
};

/// H_k = (1/2) a sigma_x + (1/2) b_k sigma_z for noise state k (0-based).
QubitOperator conditional_hamiltonian(const noise::NoiseModel& model, int k,
                                      double a);

/// Coefficients (c, x, y, z) of A = (c I + x sx + y sy + z sz) / 2 for
/// Hermitian A, and the inverse map.
Eigen::Vector4d bloch_coefficients(const QubitOperator& op);
QubitOperator operator_from_bloch(const Eigen::Vector4d& w);

/// Linear generator of the coupled master equations in the Bloch
/// parametrization. The traceless coefficients of the M conditional
/// operators are stacked as [x_1..x_M, y_1..y_M, z_1..z_M]; the control
/// amplitude enters linearly. Trace coefficients evolve under the
/// transition-rate generator alone and are handled separately.
class StackedGenerator {
 public:
  explicit StackedGenerator(const noise::NoiseModel& model);

  int states() const { return m_; }
  int dim() const { return 3 * m_; }

  const Eigen::MatrixXd& control() const { return control_; }
  Eigen::MatrixXd traceless(double a) const;

  /// exp(traceless(a) dt), computed with Pade scaling-and-squaring.
  Eigen::MatrixXd propagator(double a, double dt) const;

  /// {P, dP/da} for P = exp(traceless(a) dt). The derivative is the exact
  /// directional derivative obtained from the exponential of the augmented
  /// block matrix [[A, E], [0, A]] dt with E the control generator.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> propagator_with_derivative(
      double a, double dt) const;

  /// exp(gamma dt) acting on the stacked trace coefficients.
  Eigen::MatrixXd trace_propagator(double dt) const;

 private:
  int m_;
  Eigen::MatrixXd gamma_;
  Eigen::MatrixXd drift_;
  Eigen::MatrixXd control_;
};

/// Evolves an initial Hermitian operator through the coupled master
/// equations: rho_k(0) = initial / M (stationary noise law), then the
/// exact propagator of each constant segment. Total trace is conserved.
ConditionalState propagate_master(const noise::NoiseModel& model,
                                  const pulses::PulseSequence& pulse,
                                  const QubitOperator& initial);

/// Same evolution, recording the state at every segment boundary
/// (including t = 0).
std::vector<ConditionalState> propagate_master_history(
    const noise::NoiseModel& model, const pulses::PulseSequence& pulse,
    const QubitOperator& initial);

/// Exact unitary evolution conditioned on one noise sample path: on each
/// maximal interval with constant control and noise state the closed-form
/// 2x2 rotation is applied. Requires traj.total_time == pulse duration.
QubitOperator propagate_trajectory(const pulses::PulseSequence& pulse,
                                   const noise::NoiseTrajectory& traj,
                                   const noise::NoiseModel& model,
                                   const QubitOperator& initial);

struct MonteCarloResult {
  QubitOperator mean;
  /// Standard error of each matrix entry (combined real and imaginary
  /// spread of the trajectory average).
  Eigen::Matrix2d entry_std_error;
  /// Standard errors of the Bloch coefficient means (c, x, y, z); c is
  /// conserved per trajectory so its entry is zero.
  Eigen::Vector4d bloch_std_error;
  int n_trajectories = 0;
};

/// Mean of n trajectory evolutions with per-trajectory seeds derived from
/// the given seed; bit-identical for a fixed seed regardless of thread
/// count. Requires n >= 100.
MonteCarloResult monte_carlo_average(const noise::NoiseModel& model,
                                     const pulses::PulseSequence& pulse,
                                     const QubitOperator& initial, int n,
                                     std::uint64_t seed, int n_threads = 1);

/// The noisy average evolution applied to the three Pauli operators;
/// enough to evaluate any gate fidelity.
std::array<QubitOperator, 3> evolve_operator_basis(
    const noise::NoiseModel& model, const pulses::PulseSequence& pulse);

/// CSV rows (t, Re/Im of the total rho entries, P_1..P_M) at segment
/// boundaries.
void write_time_series_csv(std::ostream& out, const noise::NoiseModel& model,
                           const pulses::PulseSequence& pulse,
                           const QubitOperator& initial);

}  // namespace flicker::dynamics
