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
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include <nlohmann/json.hpp>

namespace flicker::noise {

namespace {

using json = nlohmann::ordered_json;

// Validation tolerances scale with the largest rate; fast-noise models
// carry rates of order 10^3.
double rate_scale(const Eigen::MatrixXd& gamma) {
  return std::max(1.0, gamma.cwiseAbs().maxCoeff());
}

Eigen::MatrixXd hadamard_power(int m) {
  Eigen::MatrixXd h(2, 2);
  const double r = 1.0 / std::numbers::sqrt2;
  h << r, r, r, -r;
  Eigen::MatrixXd v = h;
  for (int i = 1; i < m; ++i) {
    Eigen::MatrixXd next(v.rows() * 2, v.cols() * 2);
    next.topLeftCorner(v.rows(), v.cols()) = r * v;
    next.topRightCorner(v.rows(), v.cols()) = r * v;
    next.bottomLeftCorner(v.rows(), v.cols()) = r * v;
    next.bottomRightCorner(v.rows(), v.cols()) = -r * v;
    v = next;
  }
  return v;
}

Eigen::MatrixXd rtn_kronecker_sum(const std::vector<double>& rates) {
  const int k_count = static_cast<int>(rates.size());
  const int m_states = 1 << k_count;
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(m_states, m_states);
  // Fluctuator k toggles bit (k_count - 1 - k); bit 0 is the fastest
  // varying index in the Kronecker ordering.
  for (int k = 0; k < k_count; ++k) {
    const int bit = 1 << (k_count - 1 - k);
    for (int i = 0; i < m_states; ++i) {
      gamma(i ^ bit, i) += rates[static_cast<std::size_t>(k)];
      gamma(i, i) -= rates[static_cast<std::size_t>(k)];
    }
  }
  return gamma;
}

NoiseModel reconstruct_hadamard(int m_states, double alpha,
                                const std::vector<double>& grid,
                                const Eigen::VectorXd& b, double a_factor) {
  int m = 0;
  while ((1 << m) < m_states) ++m;
  require((1 << m) == m_states && m >= 2, "noise model: M must be 2^m, m >= 2");
  Eigen::VectorXd lambda(m_states);
  lambda(0) = 0.0;
  for (int k = 1; k < m_states; ++k)
    lambda(k) = -2.0 * grid[static_cast<std::size_t>(k - 1)];
  const Eigen::MatrixXd v = hadamard_power(m);
  Eigen::MatrixXd gamma = v * lambda.asDiagonal() * v.transpose();
  gamma = 0.5 * (gamma + gamma.transpose().eval());

  NoiseModel model;
  model.M = m_states;
  model.gamma = std::move(gamma);
  model.b = b;
  model.alpha = alpha;
  model.gamma_grid = grid;
  model.A = a_factor;
  model.validate();
  return model;
}

}  // namespace

double NoiseModel::average_strength() const {
  return b.cwiseAbs().sum() / static_cast<double>(M);
}

void NoiseModel::validate() const {
  require(M >= 1, "noise model: M must be positive");
  require(gamma.rows() == M && gamma.cols() == M,
          "noise model: generator must be M x M");
  require(b.size() == M, "noise model: amplitude vector must have length M");
  require(gamma.allFinite() && b.allFinite(),
          "noise model: non-finite entries");
  require(alpha > 0.0 && alpha < 2.0,
          "noise model: alpha must lie in (0, 2)");
  require(A > 0.0, "noise model: spectral prefactor must be positive");
  for (double g : gamma_grid)
    require(g > 0.0, "noise model: rate grid entries must be positive");

  const double tol = 1e-12 * rate_scale(gamma);
  require((gamma - gamma.transpose()).cwiseAbs().maxCoeff() <= tol,
          "noise model: generator must be symmetric");
  require(gamma.colwise().sum().cwiseAbs().maxCoeff() <= tol,
          "noise model: generator columns must sum to zero");
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      require(i == j || gamma(i, j) >= -tol,
              "noise model: negative off-diagonal transition rate");
  require(std::abs(b.sum()) <= 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()),
          "noise model: amplitudes must sum to zero");

  // Real spectrum, non-positive, with a simple zero eigenvalue carried by
  // the uniform vector (already implied by the zero column sums).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma,
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  require(ev.maxCoeff() <= tol, "noise model: positive generator eigenvalue");
  int zero_count = 0;
  for (int i = 0; i < M; ++i)
    if (std::abs(ev(i)) <= tol) ++zero_count;
  require(zero_count == 1,
          "noise model: generator must have exactly one zero eigenvalue");
}

double SpectralDecomposition::correlation(double t) const {
  const double at = std::abs(t);
  double c = 0.0;
  for (int k = 0; k < lambda.size(); ++k)
    c += chi(k) * chi(k) * std::exp(lambda(k) * at);
  return c;
}

int NoiseTrajectory::state_at(double t) const {
  const auto it =
      std::upper_bound(switch_times.begin(), switch_times.end(), t);
  return state_indices[static_cast<std::size_t>(it - switch_times.begin())];
}

NoiseModel build_multistate_fluctuator(int m, double gamma_min, double delta,
                                       double alpha) {
  require(m >= 2, "build_multistate_fluctuator: m must be at least 2");
  require(gamma_min > 0.0 && delta > 0.0,
          "build_multistate_fluctuator: rates must be positive");
  require(delta <= gamma_min,
          "build_multistate_fluctuator: requires delta <= gamma_min");
  require(alpha > 0.0 && alpha < 2.0,
          "build_multistate_fluctuator: alpha must lie in (0, 2)");

  const int m_states = 1 << m;
  std::vector<double> grid(static_cast<std::size_t>(m_states - 1));
  for (int k = 0; k < m_states - 1; ++k) grid[static_cast<std::size_t>(k)] = gamma_min + k * delta;

  Eigen::VectorXd chi(m_states);
  chi(0) = 0.0;
  for (int k = 1; k < m_states; ++k)
    chi(k) = std::pow(grid[static_cast<std::size_t>(k - 1)], -alpha / 2.0);
  const Eigen::VectorXd b =
      std::sqrt(static_cast<double>(m_states)) * (hadamard_power(m) * chi);

  // chi_k^2 = 2 A gamma_k^(-alpha) delta on the uniform rate grid.
  return reconstruct_hadamard(m_states, alpha, grid, b, 1.0 / (2.0 * delta));
}

NoiseModel build_rtn_ensemble(const std::vector<double>& deltas,
                              const std::vector<double>& taus, int cap) {
  const int k_count = static_cast<int>(deltas.size());
  require(k_count >= 1, "build_rtn_ensemble: need at least one fluctuator");
  require(taus.size() == deltas.size(),
          "build_rtn_ensemble: amplitude and time lists differ in length");
  require(k_count <= cap,
          "build_rtn_ensemble: fluctuator count exceeds cap (state space "
          "grows as 2^K)");
  for (int k = 0; k < k_count; ++k) {
    require(deltas[static_cast<std::size_t>(k)] > 0.0,
            "build_rtn_ensemble: amplitudes must be positive");
    require(taus[static_cast<std::size_t>(k)] > 0.0,
            "build_rtn_ensemble: correlation times must be positive");
  }

  std::vector<double> rates(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k)
    rates[static_cast<std::size_t>(k)] = 1.0 / taus[static_cast<std::size_t>(k)];

  const int m_states = 1 << k_count;
  Eigen::VectorXd b(m_states);
  for (int i = 0; i < m_states; ++i) {
    double amp = 0.0;
    for (int k = 0; k < k_count; ++k) {
      const int bit = 1 << (k_count - 1 - k);
      amp += (i & bit) ? -deltas[static_cast<std::size_t>(k)] : deltas[static_cast<std::size_t>(k)];
    }
    b(i) = amp;
  }

  NoiseModel model;
  model.M = m_states;
  model.gamma = rtn_kronecker_sum(rates);
  model.b = b;
  model.alpha = 1.0;
  model.gamma_grid = rates;

  // Nominal prefactor from Delta^2(gamma) g(gamma) = 2 A gamma^(-alpha),
  // with the rate density taken as 1/spacing on the given grid.
  double mean_weight = 0.0;
  for (int k = 0; k < k_count; ++k)
    mean_weight += deltas[static_cast<std::size_t>(k)] * deltas[static_cast<std::size_t>(k)] *
                   rates[static_cast<std::size_t>(k)];
  mean_weight /= k_count;
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  const double spacing =
      (k_count > 1 && *hi > *lo) ? (*hi - *lo) / (k_count - 1) : rates.front();
  model.A = mean_weight / (2.0 * spacing);

  model.validate();
  return model;
}

NoiseModel noise_free() {
  NoiseModel model;
  model.M = 1;
  model.gamma = Eigen::MatrixXd::Zero(1, 1);
  model.b = Eigen::VectorXd::Zero(1);
  model.alpha = 1.0;
  model.A = 1.0;
  model.validate();
  return model;
}

SpectralDecomposition spectral_decomposition(const NoiseModel& model) {
  model.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.gamma);
  SpectralDecomposition d;
  d.lambda = es.eigenvalues().reverse();
  d.V = es.eigenvectors().rowwise().reverse();
  d.chi = d.V.transpose() * model.b / std::sqrt(static_cast<double>(model.M));
  return d;
}

double autocorrelation(const NoiseModel& model, double t) {
  const Eigen::MatrixXd propagator = (model.gamma * std::abs(t)).exp();
  return model.b.dot(propagator * model.b) / static_cast<double>(model.M);
}

double psd(const SpectralDecomposition& decomp, double f) {
  const int m_states = static_cast<int>(decomp.lambda.size());
  const double chi_scale = std::max(1.0, decomp.chi.cwiseAbs().maxCoeff());
  const double rate_tol =
      1e-9 * std::max(1.0, decomp.lambda.cwiseAbs().maxCoeff());
  const double w = 2.0 * std::numbers::pi * f;
  double s = 0.0;
  for (int k = 0; k < m_states; ++k) {
    const double lambda = decomp.lambda(k);
    if (lambda >= -rate_tol) {
      require(std::abs(decomp.chi(k)) <= 1e-9 * chi_scale,
              "psd: nonzero weight on the zero eigenvalue (DC component not "
              "representable)");
      continue;
    }
    s += decomp.chi(k) * decomp.chi(k) * (-2.0 * lambda) /
         (lambda * lambda + w * w);
  }
  return s;
}

double psd(const NoiseModel& model, double f) {
  return psd(spectral_decomposition(model), f);
}

double ideal_psd(double A, double alpha, double f) {
  require(f > 0.0, "ideal_psd: frequency must be positive");
  require(A > 0.0, "ideal_psd: prefactor must be positive");
  return A / std::pow(f, alpha);
}

NoiseModel scale_to_strength(const NoiseModel& model, double target) {
  require(target > 0.0, "scale_to_strength: target must be positive");
  const double current = model.average_strength();
  require(current > 0.0, "scale_to_strength: model has all-zero amplitudes");
  const double factor = target / current;
  NoiseModel scaled = model;
  scaled.b *= factor;
  scaled.A *= factor * factor;
  return scaled;
}

NoiseTrajectory sample_trajectory(const NoiseModel& model, double total_time,
                                  std::uint64_t seed) {
  require(total_time > 0.0, "sample_trajectory: total_time must be positive");
  model.validate();

  std::uint64_t state = seed;
  NoiseTrajectory traj;
  traj.total_time = total_time;

  // Stationary initial law: uniform over the M states.
  int k = std::min(model.M - 1,
                   static_cast<int>(rng::to_unit_double(rng::splitmix64(state)) *
                                    model.M));
  traj.state_indices.push_back(k);

  double t = 0.0;
  while (true) {
    const double exit_rate = -model.gamma(k, k);
    if (exit_rate <= 0.0) break;
    t += -std::log(rng::to_open_unit_double(rng::splitmix64(state))) /
         exit_rate;
    if (t >= total_time) break;

    const double u = rng::to_unit_double(rng::splitmix64(state)) * exit_rate;
    double acc = 0.0;
    int next = -1;
    for (int j = 0; j < model.M; ++j) {
      if (j == k) continue;
      acc += model.gamma(j, k);
      if (u < acc) {
        next = j;
        break;
      }
    }
    if (next < 0) {
      // Round-off overshoot: take the last state with positive rate.
      for (int j = model.M - 1; j >= 0; --j) {
        if (j != k && model.gamma(j, k) > 0.0) {
          next = j;
          break;
        }
      }
      if (next < 0) break;
    }
    traj.switch_times.push_back(t);
    traj.state_indices.push_back(next);
    k = next;
  }
  return traj;
}

std::string to_json(const NoiseModel& model) {
  json doc;
  doc["M"] = model.M;
  doc["alpha"] = model.alpha;
  doc["gamma_grid"] = model.gamma_grid;
  doc["b"] = std::vector<double>(model.b.data(), model.b.data() + model.b.size());
  doc["A"] = model.A;
  return doc.dump(2);
}

NoiseModel noise_model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("noise model JSON: ") + e.what());
  }
  for (const auto& key : {"M", "alpha", "gamma_grid", "b", "A"})
    require(doc.contains(key),
            std::string("noise model JSON: missing field ") + key);

  const int m_states = doc["M"].get<int>();
  const double alpha = doc["alpha"].get<double>();
  const auto grid = doc["gamma_grid"].get<std::vector<double>>();
  const auto b_vec = doc["b"].get<std::vector<double>>();
  const double a_factor = doc["A"].get<double>();
  require(static_cast<int>(b_vec.size()) == m_states,
          "noise model JSON: b must have length M");
  Eigen::VectorXd b =
      Eigen::Map<const Eigen::VectorXd>(b_vec.data(), static_cast<Eigen::Index>(b_vec.size()));

  if (m_states == 1) {
    require(grid.empty(), "noise model JSON: single-state model with rates");
    NoiseModel model = noise_free();
    model.alpha = alpha;
    model.A = a_factor;
    model.b = b;
    model.validate();
    return model;
  }

  // The construction is identified by the grid length: K rates span 2^K
  // product states, whereas a Hadamard-built model carries M - 1 rates.
  if (grid.size() < 31 && (1 << grid.size()) == m_states) {
    NoiseModel model;
    model.M = m_states;
    model.gamma = rtn_kronecker_sum(grid);
    model.b = std::move(b);
    model.alpha = alpha;
    model.gamma_grid = grid;
    model.A = a_factor;
    model.validate();
    return model;
  }
  if (static_cast<int>(grid.size()) == m_states - 1)
    return reconstruct_hadamard(m_states, alpha, grid, b, a_factor);

  throw std::invalid_argument(
      "noise model JSON: gamma_grid length matches neither construction");
}

}  // namespace flicker::noise
