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

#include "flicker/dynamics.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "flicker/parallel.hpp"

namespace flicker::dynamics {

namespace {

void check_master_inputs(const noise::NoiseModel& model,
                         const pulses::PulseSequence& pulse,
                         const QubitOperator& initial) {
  model.validate();
  pulse.validate();
  require(initial.allFinite(), "propagate_master: non-finite initial operator");
  const double scale = std::max(1.0, initial.cwiseAbs().maxCoeff());
  require((initial - initial.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "propagate_master: initial operator must be Hermitian");
}

// Propagators for the repeated (amplitude, duration) pairs of a sequence;
// reference pulses reuse +-a_max and 0.
class PropagatorCache {
 public:
  explicit PropagatorCache(const StackedGenerator& gen) : gen_(gen) {}

  const Eigen::MatrixXd& traceless(double a, double dt) {
    auto [it, inserted] = traceless_.try_emplace({a, dt});
    if (inserted) it->second = gen_.propagator(a, dt);
    return it->second;
  }

  const Eigen::MatrixXd& trace(double dt) {
    auto [it, inserted] = trace_.try_emplace(dt);
    if (inserted) it->second = gen_.trace_propagator(dt);
    return it->second;
  }

 private:
  const StackedGenerator& gen_;
  std::map<std::pair<double, double>, Eigen::MatrixXd> traceless_;
  std::map<double, Eigen::MatrixXd> trace_;
};

// exp(-i H dt) for H = (a sx + b sz) / 2, in closed form.
QubitOperator interval_unitary(double a, double b, double dt) {
  const double omega = std::hypot(a, b);
  if (omega == 0.0) return QubitOperator::Identity();
  const double theta = 0.5 * omega * dt;
  const double c = std::cos(theta);
  const complex ms(0.0, -std::sin(theta) / omega);
  QubitOperator u;
  u << c + ms * b, ms * a, ms * a, c - ms * b;
  return u;
}

ConditionalState assemble_state(const Eigen::VectorXd& traces,
                                const Eigen::VectorXd& stacked, double time) {
  const int m = static_cast<int>(traces.size());
  ConditionalState state;
  state.time = time;
  state.rhos.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k)
    state.rhos.push_back(operator_from_bloch(
        {traces(k), stacked(k), stacked(m + k), stacked(2 * m + k)}));
  return state;
}

std::vector<ConditionalState> propagate_master_impl(
    const noise::NoiseModel& model, const pulses::PulseSequence& pulse,
    const QubitOperator& initial, bool keep_history) {
  check_master_inputs(model, pulse, initial);

  const StackedGenerator gen(model);
  PropagatorCache cache(gen);
  const int m = model.M;

  const Eigen::Vector4d w0 = bloch_coefficients(initial);
  Eigen::VectorXd traces = Eigen::VectorXd::Constant(m, w0(0) / m);
  Eigen::VectorXd stacked(3 * m);
  for (int q = 0; q < 3; ++q)
    stacked.segment(q * m, m).setConstant(w0(q + 1) / m);

  std::vector<ConditionalState> history;
  double t = 0.0;
  if (keep_history) history.push_back(assemble_state(traces, stacked, t));

  for (const auto& seg : pulse.segments) {
    stacked = cache.traceless(seg.amplitude, seg.duration) * stacked;
    traces = cache.trace(seg.duration) * traces;
    t += seg.duration;
    if (keep_history) history.push_back(assemble_state(traces, stacked, t));
  }

  if (!stacked.allFinite() || !traces.allFinite())
    throw NumericalError("propagate_master: evolution produced non-finite values");
  const double trace_error = std::abs(traces.sum() - w0(0));
  if (trace_error > 1e-10 * std::max(1.0, std::abs(w0(0))))
    throw NumericalError("propagate_master: total trace not conserved");

  if (!keep_history) history.push_back(assemble_state(traces, stacked, t));
  return history;
}

}  // namespace

QubitOperator ConditionalState::total() const {
  QubitOperator sum = QubitOperator::Zero();
  for (const auto& r : rhos) sum += r;
  return sum;
}

Eigen::VectorXd ConditionalState::traces() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(rhos.size()));
  for (std::size_t k = 0; k < rhos.size(); ++k)
    p(static_cast<Eigen::Index>(k)) = rhos[k].trace().real();
  return p;
}

QubitOperator conditional_hamiltonian(const noise::NoiseModel& model, int k,
                                      double a) {
  require(k >= 0 && k < model.M,
          "conditional_hamiltonian: state index out of range");
  return 0.5 * a * pauli_x() + 0.5 * model.b(k) * pauli_z();
}

Eigen::Vector4d bloch_coefficients(const QubitOperator& op) {
  Eigen::Vector4d w;
  w(0) = (op(0, 0) + op(1, 1)).real();
  w(1) = (op(0, 1) + op(1, 0)).real();
  w(2) = (op(1, 0) - op(0, 1)).imag();
  w(3) = (op(0, 0) - op(1, 1)).real();
  return w;
}

QubitOperator operator_from_bloch(const Eigen::Vector4d& w) {
  QubitOperator op;
  op(0, 0) = 0.5 * (w(0) + w(3));
  op(1, 1) = 0.5 * (w(0) - w(3));
  op(0, 1) = 0.5 * complex(w(1), -w(2));
  op(1, 0) = 0.5 * complex(w(1), w(2));
  return op;
}

StackedGenerator::StackedGenerator(const noise::NoiseModel& model)
    : m_(model.M), gamma_(model.gamma) {
  const int d = 3 * m_;
  drift_ = Eigen::MatrixXd::Zero(d, d);
  control_ = Eigen::MatrixXd::Zero(d, d);

  // Bloch vector of state k rotates about (a, 0, b_k); every component
  // additionally mixes across states through the transition rates.
  for (int q = 0; q < 3; ++q)
    drift_.block(q * m_, q * m_, m_, m_) = gamma_;
  for (int k = 0; k < m_; ++k) {
    drift_(k, m_ + k) -= model.b(k);      // x' -= b y
    drift_(m_ + k, k) += model.b(k);      // y' += b x
    control_(m_ + k, 2 * m_ + k) = -1.0;  // y' -= a z
    control_(2 * m_ + k, m_ + k) = 1.0;   // z' += a y
  }
}

Eigen::MatrixXd StackedGenerator::traceless(double a) const {
  return drift_ + a * control_;
}

Eigen::MatrixXd StackedGenerator::propagator(double a, double dt) const {
  return (traceless(a) * dt).exp();
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
StackedGenerator::propagator_with_derivative(double a, double dt) const {
  const int d = dim();
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  augmented.topLeftCorner(d, d) = traceless(a);
  augmented.bottomRightCorner(d, d) = augmented.topLeftCorner(d, d);
  augmented.topRightCorner(d, d) = control_;
  const Eigen::MatrixXd big = (augmented * dt).exp();
  return {big.topLeftCorner(d, d), big.topRightCorner(d, d)};
}

Eigen::MatrixXd StackedGenerator::trace_propagator(double dt) const {
  return (gamma_ * dt).exp();
}

ConditionalState propagate_master(const noise::NoiseModel& model,
                                  const pulses::PulseSequence& pulse,
                                  const QubitOperator& initial) {
  return propagate_master_impl(model, pulse, initial, false).back();
}

std::vector<ConditionalState> propagate_master_history(
    const noise::NoiseModel& model, const pulses::PulseSequence& pulse,
    const QubitOperator& initial) {
  return propagate_master_impl(model, pulse, initial, true);
}

QubitOperator propagate_trajectory(const pulses::PulseSequence& pulse,
                                   const noise::NoiseTrajectory& traj,
                                   const noise::NoiseModel& model,
                                   const QubitOperator& initial) {
  pulse.validate();
  const double total = pulse.duration();
  require(std::abs(traj.total_time - total) <= 1e-9 * std::max(1.0, total),
          "propagate_trajectory: trajectory and pulse durations differ");

  const double tiny = 1e-15 * (1.0 + total);
  QubitOperator u = QubitOperator::Identity();
  std::size_t seg = 0;
  std::size_t sw = 0;
  double seg_end = pulse.segments.empty() ? total : pulse.segments[0].duration;
  double t = 0.0;
  while (t < total - tiny) {
    double t_next = std::min(seg_end, total);
    if (sw < traj.switch_times.size())
      t_next = std::min(t_next, traj.switch_times[sw]);
    if (t_next > t) {
      const double a = pulse.segments[seg].amplitude;
      const double b = model.b(traj.state_indices[sw]);
      u = interval_unitary(a, b, t_next - t) * u;
      t = t_next;
    }
    while (sw < traj.switch_times.size() && traj.switch_times[sw] <= t + tiny)
      ++sw;
    while (seg + 1 < pulse.segments.size() && seg_end <= t + tiny) {
      ++seg;
      seg_end += pulse.segments[seg].duration;
    }
  }
  return u * initial * u.adjoint();
}

MonteCarloResult monte_carlo_average(const noise::NoiseModel& model,
                                     const pulses::PulseSequence& pulse,
                                     const QubitOperator& initial, int n,
                                     std::uint64_t seed, int n_threads) {
  require(n >= 100, "monte_carlo_average: need at least 100 trajectories");
  check_master_inputs(model, pulse, initial);
  const double total = pulse.duration();
  require(total > 0.0, "monte_carlo_average: pulse has zero duration");

  // Fixed shard layout; shard partial sums are combined in shard order, so
  // the result does not depend on the thread count.
  const int n_shards = std::min(n, 64);
  std::vector<Eigen::Vector4d> shard_sum(
      static_cast<std::size_t>(n_shards), Eigen::Vector4d::Zero());
  std::vector<Eigen::Vector4d> shard_sumsq(
      static_cast<std::size_t>(n_shards), Eigen::Vector4d::Zero());

  parallel_for(n_shards, n_threads, [&](int s) {
    const int begin = static_cast<int>(static_cast<long long>(n) * s / n_shards);
    const int end =
        static_cast<int>(static_cast<long long>(n) * (s + 1) / n_shards);
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    Eigen::Vector4d sumsq = Eigen::Vector4d::Zero();
    for (int i = begin; i < end; ++i) {
      const auto traj =
          noise::sample_trajectory(model, total, rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
      const Eigen::Vector4d w =
          bloch_coefficients(propagate_trajectory(pulse, traj, model, initial));
      sum += w;
      sumsq += w.cwiseProduct(w);
    }
    shard_sum[static_cast<std::size_t>(s)] = sum;
    shard_sumsq[static_cast<std::size_t>(s)] = sumsq;
  });

  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  Eigen::Vector4d sumsq = Eigen::Vector4d::Zero();
  for (int s = 0; s < n_shards; ++s) {
    sum += shard_sum[static_cast<std::size_t>(s)];
    sumsq += shard_sumsq[static_cast<std::size_t>(s)];
  }

  const double dn = static_cast<double>(n);
  const Eigen::Vector4d mean = sum / dn;
  Eigen::Vector4d se;
  for (int q = 0; q < 4; ++q) {
    const double var =
        std::max(0.0, (sumsq(q) - dn * mean(q) * mean(q)) / (dn - 1.0));
    se(q) = std::sqrt(var / dn);
  }

  MonteCarloResult result;
  result.mean = operator_from_bloch(mean);
  result.bloch_std_error = se;
  result.n_trajectories = n;
  // rho00/rho11 = (c +- z)/2 and rho01 = (x - i y)/2; c is conserved by
  // unitary trajectories, so entry errors reduce to the x, y, z spreads.
  const double se_diag = 0.5 * se(3);
  const double se_off = 0.5 * std::hypot(se(1), se(2));
  result.entry_std_error << se_diag, se_off, se_off, se_diag;
  return result;
}

std::array<QubitOperator, 3> evolve_operator_basis(
    const noise::NoiseModel& model, const pulses::PulseSequence& pulse) {
  model.validate();
  pulse.validate();

  const StackedGenerator gen(model);
  PropagatorCache cache(gen);
  const int m = model.M;

  // Columns: the stacked coefficients of sigma_x, sigma_y, sigma_z split
  // uniformly over the M noise states.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(3 * m, 3);
  for (int q = 0; q < 3; ++q)
    basis.block(q * m, q, m, 1).setConstant(2.0 / m);

  for (const auto& seg : pulse.segments)
    basis = cache.traceless(seg.amplitude, seg.duration) * basis;
  if (!basis.allFinite())
    throw NumericalError("evolve_operator_basis: non-finite evolution");

  std::array<QubitOperator, 3> out;
  for (int p = 0; p < 3; ++p) {
    Eigen::Vector4d w;
    w(0) = 0.0;
    for (int q = 0; q < 3; ++q) w(q + 1) = basis.block(q * m, p, m, 1).sum();
    out[static_cast<std::size_t>(p)] = operator_from_bloch(w);
  }
  return out;
}

void write_time_series_csv(std::ostream& out, const noise::NoiseModel& model,
                           const pulses::PulseSequence& pulse,
                           const QubitOperator& initial) {
  const auto history = propagate_master_history(model, pulse, initial);
  out << "t,re00,im00,re01,im01,re10,im10,re11,im11";
  for (int k = 1; k <= model.M; ++k) out << ",P_" << k;
  out << "\n";
  char buf[64];
  auto put = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof(buf), lead_comma ? ",%.17g" : "%.17g", v);
    out << buf;
  };
  for (const auto& state : history) {
    const QubitOperator rho = state.total();
    put(state.time, false);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        put(rho(i, j).real(), true);
        put(rho(i, j).imag(), true);
      }
    const Eigen::VectorXd p = state.traces();
    for (int k = 0; k < model.M; ++k) put(p(k), true);
    out << "\n";
  }
}

}  // namespace flicker::dynamics
