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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "flicker/types.hpp"

namespace flicker::noise {

/// An M-state continuous-time Markov fluctuator with per-state amplitudes.
///
/// gamma(k, j) is the transition rate from state j to state k. The
/// generator is symmetric with zero column sums and non-negative
/// off-diagonal entries, so the stationary law is uniform over the M
/// states. The amplitudes b sum to zero, which makes the noise unbiased.
/// Models are immutable after construction and safe to share across
/// threads.
struct NoiseModel {
  int M = 0;
  Eigen::MatrixXd gamma;           // M x M generator, rates in a_max/hbar
  Eigen::VectorXd b;               // per-state noise amplitudes
  double alpha = 1.0;              // target spectral exponent, 0 < alpha < 2
  std::vector<double> gamma_grid;  // switching rates underlying the spectrum
  double A = 1.0;                  // nominal 1/f^alpha prefactor

  // (1/M) sum_k |b_k|: stationary mean of |eta|.
  double average_strength() const;

  // Throws std::invalid_argument if any structural invariant is violated.
  void validate() const;
};

/// Eigensystem of the generator: gamma = V diag(lambda) V^T with the
/// eigenvalues sorted descending (lambda[0] == 0 for a valid model) and
/// chi = V^T b / sqrt(M). The autocorrelation is sum_k chi_k^2
/// exp(lambda_k |t|).
struct SpectralDecomposition {
  Eigen::VectorXd lambda;
  Eigen::VectorXd chi;
  Eigen::MatrixXd V;

  double correlation(double t) const;
};

/// Piecewise-constant sample path of the noise state over [0, total_time].
/// state_indices has one more entry than switch_times: state_indices[i]
/// is occupied on [switch_times[i-1], switch_times[i]) with the
/// conventions switch_times[-1] = 0 and switch_times[n] = total_time.
/// State indices are 0-based.
struct NoiseTrajectory {
  std::vector<double> switch_times;
  std::vector<int> state_indices;
  double total_time = 0.0;

  int state_at(double t) const;
};

/// Builds the 2^m-state fluctuator whose nonzero generator eigenvalues are
/// -2 * {gamma_min, gamma_min + delta, ..., gamma_max} with
/// gamma_max = (2^m - 2) * delta + gamma_min, diagonalized by the m-fold
/// tensor power of the 2x2 Hadamard matrix. The spectral weights are
/// chi_1 = 0 and chi_k = gamma_k^(-alpha/2), which yields an approximate
/// 1/f^alpha spectrum between gamma_min and gamma_max.
/// Requires m >= 2, 0 < delta <= gamma_min and 0 < alpha < 2.
NoiseModel build_multistate_fluctuator(int m, double gamma_min, double delta,
                                       double alpha);

/// Product of K independent two-state symmetric fluctuators with
/// amplitudes +-deltas[k] and switching rates 1/taus[k]. The state space
/// has 2^K states; K is capped (default 12) because of the exponential
/// blowup.
NoiseModel build_rtn_ensemble(const std::vector<double>& deltas,
                              const std::vector<double>& taus,
                              int cap = 12);

/// Single-state model with zero amplitude; evolution under it is
/// noise-free.
NoiseModel noise_free();

SpectralDecomposition spectral_decomposition(const NoiseModel& model);

/// C(t) = (1/M) b^T exp(gamma |t|) b, evaluated with a dense matrix
/// exponential.
double autocorrelation(const NoiseModel& model, double t);

/// Two-sided power spectral density at frequency f (cycles per unit time):
/// S(f) = sum_{lambda_k < 0} chi_k^2 (-2 lambda_k) / (lambda_k^2 + (2 pi f)^2).
/// Rejects models with weight on the zero eigenvalue (a DC delta component
/// is not representable). The overload taking a decomposition avoids
/// rediagonalizing inside frequency sweeps.
double psd(const NoiseModel& model, double f);
double psd(const SpectralDecomposition& decomp, double f);

/// Reference curve A / f^alpha, f > 0.
double ideal_psd(double A, double alpha, double f);

/// Copy of the model with b rescaled by one positive constant so that
/// (1/M) sum_k |b_k| = target. gamma is unchanged; the PSD scales by the
/// square of the constant.
NoiseModel scale_to_strength(const NoiseModel& model, double target);

/// Samples one continuous-time Markov path: uniform initial state,
/// exponential holding times with rate -gamma(k, k), jump probabilities
/// gamma(j, k) / (-gamma(k, k)). Deterministic for a given seed.
NoiseTrajectory sample_trajectory(const NoiseModel& model, double total_time,
                                  std::uint64_t seed);

/// JSON document {M, alpha, gamma_grid, b, A}; the generator is
/// reconstructed from the rate grid, not stored.
std::string to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(std::string_view text);

}  // namespace flicker::noise
