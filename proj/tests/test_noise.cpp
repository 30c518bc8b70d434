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

#include "flicker/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <doctest.h>

#include "flicker/types.hpp"
#include "support/oracles.hpp"

using namespace flicker;
using namespace flicker::noise;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("multistate fluctuator: fig-1 scale model") {
  // m = 5 with delta = (29/30) gamma_min puts the 31 nonzero eigenvalues
  // uniformly on [-60, -2] in units of gamma_min.
  const auto model = build_multistate_fluctuator(5, 1.0, 29.0 / 30.0, 1.0);
  CHECK(model.M == 32);
  const auto d = spectral_decomposition(model);
  CHECK(std::abs(d.lambda(0)) < 1e-10);
  CHECK(std::abs(d.lambda(1) + 2.0) < 1e-10);
  CHECK(std::abs(d.lambda(31) + 60.0) < 1e-9);
  for (int k = 2; k < 32; ++k)
    CHECK(d.lambda(k) - d.lambda(k - 1) ==
          doctest::Approx(-2.0 * 29.0 / 30.0).epsilon(1e-9));
  // chi_k = 1 / sqrt(-lambda_k / 2) up to eigenvector sign.
  for (int k = 1; k < 32; ++k)
    CHECK(std::abs(d.chi(k)) ==
          doctest::Approx(1.0 / std::sqrt(-d.lambda(k) / 2.0)).epsilon(1e-9));
}

TEST_CASE("multistate fluctuator: m=2 eigenvalues and column sums") {
  const auto model = build_multistate_fluctuator(2, 1.0, 1.0, 1.0);
  CHECK(model.M == 4);
  const auto d = spectral_decomposition(model);
  const double expected[] = {0.0, -2.0, -4.0, -6.0};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(d.lambda(k) - expected[k]) < 1e-12);
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(model.gamma.col(j).sum()) < 1e-12);
}

TEST_CASE("multistate fluctuator: explicit 8x8 construction") {
  // Independent reconstruction: literal 8x8 Hadamard tensor power, the
  // eigenvalue grid, and b = sqrt(M) V chi, compared entry by entry.
  const int m_states = 8;
  const double alpha = 1.5;
  const double gamma_min = 1.0;
  const double delta = 0.5;
  const auto model = build_multistate_fluctuator(3, gamma_min, delta, alpha);

  const double r = 1.0 / std::sqrt(8.0);
  double v[8][8];
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      int bits = i & j;
      bits = (bits & 1) + ((bits >> 1) & 1) + ((bits >> 2) & 1);
      v[i][j] = (bits % 2 == 0 ? r : -r);
    }

  double lambda[8];
  double chi[8];
  lambda[0] = 0.0;
  chi[0] = 0.0;
  for (int k = 1; k < 8; ++k) {
    const double rate = gamma_min + (k - 1) * delta;
    lambda[k] = -2.0 * rate;
    chi[k] = std::pow(rate, -alpha / 2.0);
  }

  for (int i = 0; i < 8; ++i) {
    double b_i = 0.0;
    for (int k = 0; k < 8; ++k) b_i += std::sqrt(8.0) * v[i][k] * chi[k];
    CHECK(std::abs(model.b(i) - b_i) < 1e-12);
    for (int j = 0; j < 8; ++j) {
      double g_ij = 0.0;
      for (int k = 0; k < 8; ++k) g_ij += v[i][k] * lambda[k] * v[j][k];
      CHECK(std::abs(model.gamma(i, j) - g_ij) < 1e-12);
      if (i != j) CHECK(model.gamma(i, j) >= -1e-12);
    }
  }
  CHECK(m_states == model.M);
  CHECK(std::abs(model.b.sum()) < 1e-12);
}

TEST_CASE("multistate fluctuator: precondition violations") {
  CHECK_THROWS_AS(build_multistate_fluctuator(1, 1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_multistate_fluctuator(3, 1.0, 1.5, 1.0),
                  std::invalid_argument);  // delta > gamma_min
  CHECK_THROWS_AS(build_multistate_fluctuator(3, -1.0, 0.5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_multistate_fluctuator(3, 1.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_multistate_fluctuator(3, 1.0, 0.5, 2.5),
                  std::invalid_argument);
}

TEST_CASE("rtn ensemble: single fluctuator autocorrelation") {
  const double delta = 0.7;
  const double tau_c = 2.5;
  const auto model = build_rtn_ensemble({delta}, {tau_c});
  CHECK(model.M == 2);
  for (double t : {0.0, 0.3, 1.0, 4.0})
    CHECK(autocorrelation(model, t) ==
          doctest::Approx(delta * delta * std::exp(-2.0 * t / tau_c))
              .epsilon(1e-12));
}

TEST_CASE("rtn ensemble: two-fluctuator amplitudes") {
  const auto model = build_rtn_ensemble({1.0, 1.0}, {1.0, 1.0});
  CHECK(model.M == 4);
  Eigen::VectorXd b = model.b;
  std::sort(b.data(), b.data() + b.size());
  CHECK(b(0) == doctest::Approx(-2.0));
  CHECK(b(1) == doctest::Approx(0.0));
  CHECK(b(2) == doctest::Approx(0.0));
  CHECK(b(3) == doctest::Approx(2.0));
  CHECK(std::abs(model.b.sum()) < 1e-12);
}

TEST_CASE("rtn ensemble: five-fluctuator psd is the lorentzian sum") {
  // Rates evenly spaced on [g0, 30 g0] with amplitudes 1/sqrt(rate).
  std::vector<double> deltas, taus, rates;
  for (int k = 0; k < 5; ++k) {
    const double rate = 1.0 + k * 29.0 / 4.0;
    rates.push_back(rate);
    deltas.push_back(1.0 / std::sqrt(rate));
    taus.push_back(1.0 / rate);
  }
  const auto model = build_rtn_ensemble(deltas, taus);
  CHECK(model.M == 32);
  const auto d = spectral_decomposition(model);
  for (double f : {0.05, 0.2, 0.5, 1.3, 4.0, 11.0})
    CHECK(psd(d, f) ==
          doctest::Approx(oracles::rtn_sum_psd(deltas, rates, f)).epsilon(1e-10));
}

TEST_CASE("rtn ensemble: rejects bad input") {
  CHECK_THROWS_AS(build_rtn_ensemble({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_rtn_ensemble({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_rtn_ensemble({1.0, -1.0}, {1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_rtn_ensemble({1.0, 1.0}, {1.0, 0.0}),
                  std::invalid_argument);
  std::vector<double> many(13, 1.0);
  CHECK_THROWS_AS(build_rtn_ensemble(many, many), std::invalid_argument);
}

TEST_CASE("spectral decomposition: two-state rtn eigenvalues") {
  const double gamma = 1.7;
  const auto model = build_rtn_ensemble({1.0}, {1.0 / gamma});
  const auto d = spectral_decomposition(model);
  CHECK(std::abs(d.lambda(0)) < 1e-12);
  CHECK(std::abs(d.lambda(1) + 2.0 * gamma) < 1e-12);
}

TEST_CASE("spectral decomposition: reconstruction and orthogonality") {
  const auto model = build_multistate_fluctuator(3, 0.8, 0.37, 1.2);
  const auto d = spectral_decomposition(model);
  const Eigen::MatrixXd vvt = d.V * d.V.transpose();
  CHECK((vvt - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd rebuilt = d.V * d.lambda.asDiagonal() * d.V.transpose();
  CHECK((rebuilt - model.gamma).cwiseAbs().maxCoeff() < 1e-10);
  // chi has no weight on the zero eigenvalue for unbiased models.
  CHECK(std::abs(d.chi(0)) < 1e-12);
}

TEST_CASE("autocorrelation: t = 0 equals the mean square amplitude") {
  const auto model = build_multistate_fluctuator(3, 1.0, 0.5, 1.0);
  CHECK(autocorrelation(model, 0.0) ==
        doctest::Approx(model.b.squaredNorm() / model.M).epsilon(1e-12));
}

TEST_CASE("autocorrelation: matrix exponential agrees with the eigen-form") {
  const auto model = build_multistate_fluctuator(3, 1.0, 0.9, 1.3);
  const auto d = spectral_decomposition(model);
  CHECK(autocorrelation(model, 0.7) ==
        doctest::Approx(d.correlation(0.7)).epsilon(1e-10));
  std::uint64_t state = 99;
  for (int i = 0; i < 20; ++i) {
    const double t = 5.0 * rng::to_unit_double(rng::splitmix64(state));
    CHECK(std::abs(autocorrelation(model, t) - d.correlation(t)) < 1e-10);
  }
}

TEST_CASE("psd: single rtn closed forms") {
  const double delta = 0.9;
  const double tau_c = 3.0;
  const auto model = build_rtn_ensemble({delta}, {tau_c});
  CHECK(psd(model, 0.0) == doctest::Approx(delta * delta * tau_c).epsilon(1e-12));
  for (double f : {0.1, 0.7, 2.0}) {
    const double expected =
        delta * delta * tau_c / (1.0 + std::pow(kPi * f * tau_c, 2));
    CHECK(psd(model, f) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("psd: fig-1 model has unit log-log slope in the quoted band") {
  const auto model = build_multistate_fluctuator(5, 1.0, 29.0 / 30.0, 1.0);
  const auto d = spectral_decomposition(model);
  std::vector<double> logf, logs;
  for (int i = 0; i < 50; ++i) {
    const double w = 3.0 * std::pow(16.0 / 3.0, i / 49.0);
    const double f = w / (2.0 * kPi);
    logf.push_back(std::log10(f));
    logs.push_back(std::log10(psd(d, f)));
  }
  CHECK(std::abs(oracles::fit_slope(logf, logs) + 1.0) < 0.1);
}

TEST_CASE("psd: rejects a biased model") {
  auto model = build_rtn_ensemble({1.0}, {1.0});
  model.b = Eigen::Vector2d(1.0, 0.0);  // biased: nonzero DC weight
  CHECK_THROWS_AS(psd(model, 0.3), std::invalid_argument);
}

TEST_CASE("ideal psd") {
  CHECK(ideal_psd(1.0, 1.0, 10.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(ideal_psd(2.0, 1.5, 4.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(ideal_psd(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ideal_psd(1.0, 1.0, -2.0), std::invalid_argument);

  // Bracketed arctan spectrum in the regime gamma_min << pi f << gamma_max,
  // evaluated at the geometric midpoint of a wide band.
  const double a_factor = 1.0;
  const double gamma_min = 1.0;
  const double gamma_max = 1e4;
  const double pf = std::sqrt(gamma_min * gamma_max);
  const double f = pf / kPi;
  const double s = 2.0 * a_factor / (kPi * f) *
                   (std::atan(gamma_max / pf) - std::atan(gamma_min / pf));
  CHECK(std::abs(s - ideal_psd(a_factor, 1.0, f)) / ideal_psd(a_factor, 1.0, f) <
        0.05);
}

TEST_CASE("scale_to_strength") {
  const auto model = build_multistate_fluctuator(4, 1.0, 0.5, 1.0);
  const auto scaled = scale_to_strength(model, 0.125);
  CHECK(scaled.average_strength() == doctest::Approx(0.125).epsilon(1e-12));
  const auto twice = scale_to_strength(scaled, 0.125);
  CHECK((twice.b - scaled.b).cwiseAbs().maxCoeff() < 1e-14);
  // Spectral shape is preserved: the psd ratio between two frequencies is
  // unchanged by rescaling.
  const double r_before = psd(model, 0.4) / psd(model, 2.0);
  const double r_after = psd(scaled, 0.4) / psd(scaled, 2.0);
  CHECK(r_before == doctest::Approx(r_after).epsilon(1e-10));
  CHECK_THROWS_AS(scale_to_strength(noise_free(), 0.1), std::invalid_argument);
}

TEST_CASE("sample_trajectory: single state never switches") {
  const auto traj = sample_trajectory(noise_free(), 10.0, 42);
  CHECK(traj.switch_times.empty());
  CHECK(traj.state_indices.size() == 1);
  CHECK(traj.state_indices[0] == 0);
}

TEST_CASE("sample_trajectory: exponential holding times") {
  const double gamma = 2.0;
  const auto model = build_rtn_ensemble({1.0}, {1.0 / gamma});
  // One long path; interior sojourns are exponential with mean 1/gamma.
  const double total = 120000.0 / gamma;
  const auto traj = sample_trajectory(model, total, 7);
  REQUIRE(traj.switch_times.size() > 100000);
  double mean = traj.switch_times[0];
  for (std::size_t i = 1; i < traj.switch_times.size(); ++i)
    mean += traj.switch_times[i] - traj.switch_times[i - 1];
  mean /= static_cast<double>(traj.switch_times.size());
  CHECK(std::abs(mean - 1.0 / gamma) / (1.0 / gamma) < 0.02);
  bool increasing = true, in_range = true, alternating = true;
  for (std::size_t i = 1; i < traj.switch_times.size(); ++i)
    increasing &= traj.switch_times[i] > traj.switch_times[i - 1];
  for (double t : traj.switch_times) in_range &= t > 0.0 && t < total;
  for (std::size_t i = 1; i < traj.state_indices.size(); ++i)
    alternating &= traj.state_indices[i] != traj.state_indices[i - 1];
  CHECK(increasing);
  CHECK(in_range);
  CHECK(alternating);
}

TEST_CASE("sample_trajectory: uniform occupancy") {
  const auto model = build_multistate_fluctuator(2, 1.0, 1.0, 1.0);
  const double total = 40000.0;
  const auto traj = sample_trajectory(model, total, 11);
  Eigen::Vector4d occupancy = Eigen::Vector4d::Zero();
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.switch_times.size(); ++i) {
    occupancy(traj.state_indices[i]) += traj.switch_times[i] - prev;
    prev = traj.switch_times[i];
  }
  occupancy(traj.state_indices.back()) += total - prev;
  occupancy /= total;
  for (int k = 0; k < 4; ++k) CHECK(std::abs(occupancy(k) - 0.25) < 0.02 * 0.25 + 0.005);
}

TEST_CASE("trajectory periodogram matches the analytic psd") {
  // 8-state model with rates 1..7, so the band [2 gamma_min, gamma_max/2]
  // in angular frequency is [2, 3.5].
  const auto model = build_multistate_fluctuator(3, 1.0, 1.0, 1.0);
  const auto d = spectral_decomposition(model);

  const double total = 200.0;
  const double dt = 0.02;
  const int n_samples = static_cast<int>(total / dt);
  const int n_paths = 400;
  const std::vector<double> omegas{2.0, 2.4, 2.9, 3.5};

  std::vector<double> estimate(omegas.size(), 0.0);
  for (int p = 0; p < n_paths; ++p) {
    const auto traj = sample_trajectory(model, total, 1000 + static_cast<std::uint64_t>(p));
    // eta(t) sampled on the uniform grid.
    std::vector<double> eta(static_cast<std::size_t>(n_samples));
    std::size_t idx = 0;
    for (int i = 0; i < n_samples; ++i) {
      const double t = (i + 0.5) * dt;
      while (idx < traj.switch_times.size() && traj.switch_times[idx] <= t)
        ++idx;
      eta[static_cast<std::size_t>(i)] = model.b(traj.state_indices[idx]);
    }
    for (std::size_t q = 0; q < omegas.size(); ++q) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        const double phase = -omegas[q] * (i + 0.5) * dt;
        acc += eta[static_cast<std::size_t>(i)] *
               std::complex<double>(std::cos(phase), std::sin(phase));
      }
      estimate[q] += std::norm(acc * dt) / total;
    }
  }
  for (std::size_t q = 0; q < omegas.size(); ++q) {
    estimate[q] /= n_paths;
    const double expected = psd(d, omegas[q] / (2.0 * kPi));
    CHECK(std::abs(estimate[q] - expected) / expected < 0.15);
  }
}

TEST_CASE("hadamard model is equivalent to the matched rtn lorentzian sum") {
  const auto model = build_multistate_fluctuator(4, 1.0, 0.8, 1.0);
  const auto d = spectral_decomposition(model);
  std::vector<double> amps, rates;
  for (std::size_t k = 0; k < model.gamma_grid.size(); ++k) {
    rates.push_back(model.gamma_grid[k]);
    amps.push_back(std::pow(model.gamma_grid[k], -0.5));
  }
  for (double t : {0.0, 0.2, 1.0, 3.7})
    CHECK(autocorrelation(model, t) ==
          doctest::Approx(oracles::rtn_sum_autocorrelation(amps, rates, t))
              .epsilon(1e-10));
  for (int i = 0; i < 50; ++i) {
    const double f = 0.01 * std::pow(1000.0, i / 49.0);
    CHECK(psd(d, f) ==
          doctest::Approx(oracles::rtn_sum_psd(amps, rates, f)).epsilon(1e-10));
  }
}

TEST_CASE("noise model json round trip") {
  const auto check_roundtrip = [](const NoiseModel& model) {
    const auto restored = noise_model_from_json(to_json(model));
    CHECK(restored.M == model.M);
    CHECK(restored.alpha == model.alpha);
    CHECK(restored.A == model.A);
    CHECK((restored.b - model.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((restored.gamma - model.gamma).cwiseAbs().maxCoeff() == 0.0);
  };
  check_roundtrip(build_multistate_fluctuator(3, 1.0, 0.5, 1.5));
  check_roundtrip(scale_to_strength(
      build_multistate_fluctuator(5, 1.0 / 3.0, 29.0 / 90.0, 1.0), 0.125));
  check_roundtrip(build_rtn_ensemble({1.0, 0.5}, {1.0, 2.0}));
  check_roundtrip(noise_free());

  CHECK_THROWS_AS(noise_model_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(noise_model_from_json("{\"M\": 4}"), std::invalid_argument);
}

TEST_CASE("constructed models satisfy the structural invariants") {
  std::uint64_t state = 5;
  for (int i = 0; i < 20; ++i) {
    const int m = 2 + static_cast<int>(rng::to_unit_double(rng::splitmix64(state)) * 4);
    const double gamma_min =
        0.05 + 3.0 * rng::to_unit_double(rng::splitmix64(state));
    const double delta =
        gamma_min * (0.05 + 0.95 * rng::to_unit_double(rng::splitmix64(state)));
    const double alpha =
        0.1 + 1.8 * rng::to_unit_double(rng::splitmix64(state));
    const auto model = build_multistate_fluctuator(m, gamma_min, delta, alpha);
    CHECK((model.gamma - model.gamma.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(model.gamma.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    for (int a = 0; a < model.M; ++a)
      for (int c = 0; c < model.M; ++c)
        if (a != c) CHECK(model.gamma(a, c) >= -1e-12);
    CHECK(std::abs(model.b.sum()) < 1e-12);
  }
}
