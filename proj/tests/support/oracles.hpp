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

// Test-side oracles, written independently of the library code paths they
// check: plain std::complex 2x2 arithmetic for constant-Hamiltonian
// evolution, scalar spectral formulas, and a least-squares slope fit.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracles {

using cd = std::complex<double>;
using Mat2 = std::array<cd, 4>;  // row-major [00, 01, 10, 11]

inline Mat2 mat2_identity() { return {1.0, 0.0, 0.0, 1.0}; }

inline Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// exp(-i H dt) for H = (a sx + b sz) / 2, from the axis-angle formula.
inline Mat2 constant_unitary(double a, double b, double dt) {
  const double omega = std::hypot(a, b);
  if (omega == 0.0) return mat2_identity();
  const double theta = 0.5 * omega * dt;
  const double c = std::cos(theta);
  const cd ms(0.0, -std::sin(theta) / omega);
  return {c + ms * b, ms * a, ms * a, c - ms * b};
}

struct Segment {
  double amplitude;
  double duration;
};

inline Mat2 sequence_unitary(const std::vector<Segment>& segments,
                             double bias) {
  Mat2 u = mat2_identity();
  for (const auto& s : segments)
    u = mat2_mul(constant_unitary(s.amplitude, bias, s.duration), u);
  return u;
}

// Survival probability of |0><0| under a biased pulse sequence.
inline double north_pole_fidelity(const std::vector<Segment>& segments,
                                  double bias) {
  const Mat2 u = sequence_unitary(segments, bias);
  return std::norm(u[0]);
}

// Transfer probability |0> -> |1> (NOT-gate state fidelity from the pole).
inline double pole_flip_fidelity(const std::vector<Segment>& segments,
                                 double bias) {
  const Mat2 u = sequence_unitary(segments, bias);
  return std::norm(u[2]);
}

// Scalar Rabi formula for the survival probability of a constant pulse of
// amplitude 1 and duration t under static bias delta.
inline double rabi_survival(double delta, double t) {
  const double omega = std::sqrt(1.0 + delta * delta);
  const double c = std::cos(0.5 * omega * t);
  const double s = std::sin(0.5 * omega * t);
  return c * c + delta * delta / (omega * omega) * s * s;
}

// Lorentzian-sum spectrum of independent two-state fluctuators.
inline double rtn_sum_psd(const std::vector<double>& amplitudes,
                          const std::vector<double>& rates, double f) {
  const double pf = std::numbers::pi * f;
  double s = 0.0;
  for (std::size_t k = 0; k < amplitudes.size(); ++k)
    s += amplitudes[k] * amplitudes[k] * rates[k] /
         (rates[k] * rates[k] + pf * pf);
  return s;
}

inline double rtn_sum_autocorrelation(const std::vector<double>& amplitudes,
                                      const std::vector<double>& rates,
                                      double t) {
  double c = 0.0;
  for (std::size_t k = 0; k < amplitudes.size(); ++k)
    c += amplitudes[k] * amplitudes[k] * std::exp(-2.0 * rates[k] * std::abs(t));
  return c;
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracles
