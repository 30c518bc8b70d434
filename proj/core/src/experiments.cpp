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

#include "flicker/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flicker/dynamics.hpp"
#include "flicker/fidelity.hpp"
#include "flicker/optimizer.hpp"
#include "flicker/parallel.hpp"
#include "flicker/pulses.hpp"
#include "flicker/types.hpp"

namespace flicker::experiments {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kDefaultSeed = 12345;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------
// Configuration handling
// ---------------------------------------------------------------------

json parse_config(const std::string& text) {
  if (text.empty()) return json::object();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: document must be an object");
  return doc;
}

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : doc.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key \"" + key + "\"");
}

template <typename T>
T get_or(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: key \"" + key + "\" has the wrong type");
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 1)
    throw ConfigError("config: grid bounds must satisfy 0 < min < max, points >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double step = (std::log(hi) - std::log(lo)) / (n - 1);
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + i * step);
  return g;
}

std::vector<double> grid_from_config(const json& doc, const std::string& name,
                                     double def_lo, double def_hi, int def_n) {
  if (doc.contains(name + "_grid")) {
    const auto g = get_or<std::vector<double>>(doc, name + "_grid", {});
    if (g.empty()) throw ConfigError("config: " + name + "_grid must be nonempty");
    for (double v : g)
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError("config: " + name + "_grid entries must be positive");
    return g;
  }
  return log_grid(get_or<double>(doc, name + "_min", def_lo),
                  get_or<double>(doc, name + "_max", def_hi),
                  get_or<int>(doc, name + "_points", def_n));
}

struct OptimizerSettings {
  int segments_per_pi = 4;
  int n_starts = 8;
  int max_iterations = 2000;
  double gradient_tolerance = 1e-7;
  double initial_step = 1.0;

  static OptimizerSettings from_config(const json& doc) {
    OptimizerSettings s;
    s.segments_per_pi = get_or<int>(doc, "segments_per_pi", s.segments_per_pi);
    s.n_starts = get_or<int>(doc, "n_starts", s.n_starts);
    s.max_iterations = get_or<int>(doc, "max_iterations", s.max_iterations);
    s.gradient_tolerance =
        get_or<double>(doc, "gradient_tolerance", s.gradient_tolerance);
    s.initial_step = get_or<double>(doc, "initial_step", s.initial_step);
    if (s.segments_per_pi < 1)
      throw ConfigError("config: segments_per_pi must be >= 1");
    return s;
  }

  int segments_for(double T) const {
    return std::max(1, static_cast<int>(std::llround(segments_per_pi * T / kPi)));
  }
};

const std::set<std::string> kOptimizerKeys = {
    "segments_per_pi", "n_starts", "max_iterations", "gradient_tolerance",
    "initial_step"};

std::set<std::string> with_optimizer_keys(std::set<std::string> keys) {
  keys.insert(kOptimizerKeys.begin(), kOptimizerKeys.end());
  return keys;
}

// ---------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header)
      : out_(out) {
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << fmt(values[i]);
    out_ << "\n";
  }

 private:
  std::ostream& out_;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

// ---------------------------------------------------------------------
// Shared model and optimization plumbing
// ---------------------------------------------------------------------

struct OptimizationTask {
  std::string target_name;  // "identity" or "not"
  double T = 0.0;
  int m = 5;
  double alpha = 1.0;
  double strength = 0.125;
  double tau_c = 1.0;
  OptimizerSettings settings;

  // Canonical name; identical computations reached from different
  // subcommands derive the same seed and cache slot.
  std::string key() const {
    return "opt|target=" + target_name + "|T=" + fmt(T) +
           "|n=" + std::to_string(settings.segments_for(T)) +
           "|m=" + std::to_string(m) + "|alpha=" + fmt(alpha) +
           "|strength=" + fmt(strength) + "|tau=" + fmt(tau_c) +
           "|starts=" + std::to_string(settings.n_starts) +
           "|iters=" + std::to_string(settings.max_iterations) +
           "|gtol=" + fmt(settings.gradient_tolerance) +
           "|step=" + fmt(settings.initial_step);
  }

  QubitOperator target() const {
    return target_name == "not" ? pauli_x() : identity_op();
  }
};

json result_to_json(const optimizer::OptimizationResult& result) {
  json doc;
  doc["fidelity"] = result.fidelity;
  doc["iterations"] = result.iterations;
  doc["start_index"] = result.start_index;
  doc["stop_reason"] = optimizer::to_string(result.stop_reason);
  auto& segs = doc["segments"] = json::array();
  for (const auto& s : result.pulse.segments)
    segs.push_back({{"amplitude", s.amplitude}, {"duration", s.duration}});
  doc["trace"] = result.fidelity_trace;
  return doc;
}

optimizer::OptimizationResult result_from_json(const json& doc, double a_max) {
  optimizer::OptimizationResult result;
  result.fidelity = doc.at("fidelity").get<double>();
  result.iterations = doc.at("iterations").get<int>();
  result.start_index = doc.at("start_index").get<int>();
  const auto reason = doc.at("stop_reason").get<std::string>();
  result.stop_reason = reason == "gradient_converged"
                           ? optimizer::StopReason::gradient_converged
                       : reason == "step_underflow"
                           ? optimizer::StopReason::step_underflow
                           : optimizer::StopReason::max_iterations;
  result.pulse.a_max = a_max;
  for (const auto& s : doc.at("segments"))
    result.pulse.segments.push_back(
        {s.at("amplitude").get<double>(), s.at("duration").get<double>()});
  result.fidelity_trace = doc.at("trace").get<std::vector<double>>();
  return result;
}

class OptimizationRunner {
 public:
  OptimizationRunner(std::uint64_t seed, std::string cache_dir)
      : seed_(seed), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) std::filesystem::create_directories(cache_dir_);
  }

  optimizer::OptimizationResult run(const OptimizationTask& task,
                                    const noise::NoiseModel& model,
                                    int n_threads) const {
    const std::string key = task.key();
    const std::string cache_file = cache_path(key);
    if (!cache_file.empty()) {
      std::ifstream in(cache_file, std::ios::binary);
      if (in) {
        json doc = json::parse(in, nullptr, false);
        if (!doc.is_discarded()) return result_from_json(doc, 1.0);
      }
    }

    optimizer::OptimizerConfig config;
    config.n_segments = task.settings.segments_for(task.T);
    config.max_iterations = task.settings.max_iterations;
    config.gradient_tolerance = task.settings.gradient_tolerance;
    config.initial_step = task.settings.initial_step;
    config.n_starts = task.settings.n_starts;
    config.amplitude_bound = 1.0;
    config.seed = rng::derive_seed(seed_, key);
    auto result =
        optimizer::optimize(model, task.target(), task.T, config, n_threads);

    if (!cache_file.empty()) {
      std::ofstream out(cache_file, std::ios::binary | std::ios::trunc);
      if (out) out << result_to_json(result).dump(2);
    }
    return result;
  }

 private:
  std::string cache_path(const std::string& key) const {
    if (cache_dir_.empty()) return {};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.json",
                  static_cast<unsigned long long>(h));
    return (std::filesystem::path(cache_dir_) / name).string();
  }

  std::uint64_t seed_;
  std::string cache_dir_;
};

struct CommonParams {
  int m = 5;
  double alpha = 1.0;
  double strength = 0.125;

  static CommonParams from_config(const json& doc) {
    CommonParams p;
    p.m = get_or<int>(doc, "m", p.m);
    p.alpha = get_or<double>(doc, "alpha", p.alpha);
    p.strength = get_or<double>(doc, "strength", p.strength);
    if (p.m < 2) throw ConfigError("config: m must be >= 2");
    if (!(p.alpha > 0.0 && p.alpha < 2.0))
      throw ConfigError("config: alpha must lie in (0, 2)");
    if (!(p.strength > 0.0)) throw ConfigError("config: strength must be positive");
    return p;
  }
};

// The Fig.-2 reference set evaluated at total duration 12 pi.
std::vector<double> memory_reference_fidelities(const noise::NoiseModel& model) {
  using namespace pulses;
  return {
      fidelity::memory_fidelity(model, repeat(two_pi_pulse(), 6)),
      fidelity::memory_fidelity(model, repeat(corpse_identity(), 3)),
      fidelity::memory_fidelity(model, repeat(cpmg_block(kPi), 3)),
      fidelity::memory_fidelity(model, repeat(cpmg_block(2.0 * kPi), 2)),
      fidelity::memory_fidelity(model, zero_pulse(12.0 * kPi)),
  };
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

void cmd_psd(const json& doc, std::uint64_t, const std::string& out_path,
             int n_threads, const std::string&, std::ostream& log) {
  reject_unknown_keys(doc, {"seed", "gamma0", "m", "alpha", "rtn_count",
                            "omega_min", "omega_max", "f_points"});
  const double gamma0 = get_or<double>(doc, "gamma0", 1.0);
  const int m = get_or<int>(doc, "m", 5);
  const double alpha = get_or<double>(doc, "alpha", 1.0);
  const int rtn_count = get_or<int>(doc, "rtn_count", 5);
  if (!(gamma0 > 0.0)) throw ConfigError("config: gamma0 must be positive");
  if (rtn_count < 1 || rtn_count > 12)
    throw ConfigError("config: rtn_count must lie in [1, 12]");
  const auto omega =
      log_grid(get_or<double>(doc, "omega_min", 0.1) * gamma0,
               get_or<double>(doc, "omega_max", 100.0) * gamma0,
               get_or<int>(doc, "f_points", 50));

  // RTN ensemble: rates evenly spaced on [gamma0, 30 gamma0] and
  // amplitudes 1/sqrt(rate), so both models target the same spectrum.
  std::vector<double> deltas, taus;
  for (int k = 0; k < rtn_count; ++k) {
    const double rate =
        rtn_count == 1
            ? gamma0
            : gamma0 + k * (29.0 * gamma0) / (rtn_count - 1);
    deltas.push_back(std::pow(rate, -alpha / 2.0));
    taus.push_back(1.0 / rate);
  }
  const auto rtn = noise::build_rtn_ensemble(deltas, taus);
  const auto markov = noise::build_multistate_fluctuator(
      m, gamma0, std::min(gamma0, gamma0 * 29.0 / ((1 << m) - 2)), alpha);
  const auto rtn_decomp = noise::spectral_decomposition(rtn);
  const auto markov_decomp = noise::spectral_decomposition(markov);

  std::vector<std::vector<double>> rows(omega.size());
  parallel_for(static_cast<int>(omega.size()), n_threads, [&](int i) {
    const double f = omega[static_cast<std::size_t>(i)] / (2.0 * kPi);
    rows[static_cast<std::size_t>(i)] = {f, noise::psd(rtn_decomp, f),
                                         noise::psd(markov_decomp, f),
                                         noise::ideal_psd(markov.A, alpha, f)};
  });

  auto out = open_output(out_path);
  CsvWriter csv(out, {"f", "S_rtn5", "S_markov32", "S_ideal"});
  for (const auto& r : rows) csv.row(r);
  log << "psd: wrote " << rows.size() << " rows to " << out_path << "\n";
}

void cmd_memory_sweep(const json& doc, std::uint64_t seed,
                      const std::string& out_path, int n_threads,
                      const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "alpha", "strength", "tau_grid",
                                "tau_min", "tau_max", "tau_points"}));
  const auto params = CommonParams::from_config(doc);
  const auto settings = OptimizerSettings::from_config(doc);
  const auto taus = grid_from_config(doc, "tau", 0.1, 300.0, 20);
  const OptimizationRunner runner(seed, cache_dir);

  std::vector<std::vector<double>> rows(taus.size());
  parallel_for(static_cast<int>(taus.size()), n_threads, [&](int i) {
    const double tau = taus[static_cast<std::size_t>(i)];
    const auto model = one_over_f_model(params.m, tau, params.alpha, params.strength);

    // Optimize the half-duration memory pulse and repeat it twice.
    OptimizationTask task{"identity", 6.0 * kPi,    params.m, params.alpha,
                          params.strength, tau, settings};
    const auto result = runner.run(task, model, 1);
    const double phi_opt =
        fidelity::memory_fidelity(model, pulses::repeat(result.pulse, 2));

    auto& row = rows[static_cast<std::size_t>(i)];
    row = {tau, phi_opt};
    const auto refs = memory_reference_fidelities(model);
    row.insert(row.end(), refs.begin(), refs.end());
  });

  auto out = open_output(out_path);
  CsvWriter csv(out, {"tau_c", "phi_optimized", "phi_2pi_x6", "phi_corpse_x3",
                      "phi_cpmg1_x3", "phi_cpmg2_x2", "phi_zero"});
  for (const auto& r : rows) csv.row(r);
  log << "memory-sweep: wrote " << rows.size() << " rows to " << out_path << "\n";
}

void cmd_duration_sweep(const json& doc, std::uint64_t seed,
                        const std::string& out_path, int n_threads,
                        const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "alpha", "strength", "tau_c",
                                "T_over_pi_grid"}));
  const auto params = CommonParams::from_config(doc);
  const auto settings = OptimizerSettings::from_config(doc);
  const double tau = get_or<double>(doc, "tau_c", 3.0);
  if (!(tau > 0.0)) throw ConfigError("config: tau_c must be positive");

  std::vector<double> t_grid;
  if (doc.contains("T_over_pi_grid")) {
    t_grid = get_or<std::vector<double>>(doc, "T_over_pi_grid", {});
    if (t_grid.empty()) throw ConfigError("config: T_over_pi_grid must be nonempty");
    for (double v : t_grid)
      if (!(v > 0.0)) throw ConfigError("config: durations must be positive");
  } else {
    for (double t = 1.0; t <= 8.0 + 1e-12; t += 0.25) t_grid.push_back(t);
  }

  const auto model = one_over_f_model(params.m, tau, params.alpha, params.strength);
  const OptimizationRunner runner(seed, cache_dir);

  std::vector<std::vector<double>> rows(t_grid.size());
  parallel_for(static_cast<int>(t_grid.size()), n_threads, [&](int i) {
    const double T = t_grid[static_cast<std::size_t>(i)] * kPi;
    OptimizationTask task{"identity", T,   params.m, params.alpha,
                          params.strength, tau, settings};
    const auto result = runner.run(task, model, 1);
    rows[static_cast<std::size_t>(i)] = {T, result.fidelity};
  });

  auto out = open_output(out_path);
  CsvWriter csv(out, {"T", "phi_optimized"});
  for (const auto& r : rows) csv.row(r);
  log << "duration-sweep: wrote " << rows.size() << " rows to " << out_path << "\n";
}

void cmd_strength_sweep(const json& doc, std::uint64_t seed,
                        const std::string& out_path, int n_threads,
                        const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "alpha", "tau_c", "strength_grid"}));
  const int m = get_or<int>(doc, "m", 5);
  const double alpha = get_or<double>(doc, "alpha", 1.0);
  const double tau = get_or<double>(doc, "tau_c", 30.0);
  if (m < 2) throw ConfigError("config: m must be >= 2");
  if (!(tau > 0.0)) throw ConfigError("config: tau_c must be positive");
  const auto settings = OptimizerSettings::from_config(doc);

  std::vector<double> strengths =
      get_or<std::vector<double>>(doc, "strength_grid", {});
  if (strengths.empty() && doc.contains("strength_grid"))
    throw ConfigError("config: strength_grid must be nonempty");
  if (strengths.empty())
    for (int i = 1; i <= 12; ++i) strengths.push_back(0.05 * i);
  for (double s : strengths)
    if (!(s > 0.0)) throw ConfigError("config: strengths must be positive");

  const OptimizationRunner runner(seed, cache_dir);
  std::vector<std::vector<double>> rows(strengths.size());
  parallel_for(static_cast<int>(strengths.size()), n_threads, [&](int i) {
    const double strength = strengths[static_cast<std::size_t>(i)];
    const auto model = one_over_f_model(m, tau, alpha, strength);
    OptimizationTask task{"identity", 6.0 * kPi, m, alpha, strength, tau,
                          settings};
    const auto result = runner.run(task, model, 1);
    const double phi_opt =
        fidelity::memory_fidelity(model, pulses::repeat(result.pulse, 2));
    auto& row = rows[static_cast<std::size_t>(i)];
    row = {strength, phi_opt};
    const auto refs = memory_reference_fidelities(model);
    row.insert(row.end(), refs.begin(), refs.end());
  });

  auto out = open_output(out_path);
  CsvWriter csv(out, {"strength", "phi_optimized", "phi_2pi_x6",
                      "phi_corpse_x3", "phi_cpmg1_x3", "phi_cpmg2_x2",
                      "phi_zero"});
  for (const auto& r : rows) csv.row(r);
  log << "strength-sweep: wrote " << rows.size() << " rows to " << out_path
      << "\n";
}

std::string alpha_column_name(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  std::string name(buf);
  std::replace(name.begin(), name.end(), '.', '_');
  return "phi_alpha_" + name;
}

void cmd_alpha_sweep(const json& doc, std::uint64_t seed,
                     const std::string& out_path, int n_threads,
                     const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "strength", "alphas", "tau_grid",
                                "tau_min", "tau_max", "tau_points"}));
  const int m = get_or<int>(doc, "m", 5);
  const double strength = get_or<double>(doc, "strength", 0.125);
  if (m < 2) throw ConfigError("config: m must be >= 2");
  if (!(strength > 0.0)) throw ConfigError("config: strength must be positive");
  const auto settings = OptimizerSettings::from_config(doc);
  const auto alphas =
      get_or<std::vector<double>>(doc, "alphas", {1.0, 1.25, 1.5, 1.75});
  if (alphas.empty()) throw ConfigError("config: alphas must be nonempty");
  for (double a : alphas)
    if (!(a > 0.0 && a < 2.0))
      throw ConfigError("config: alphas must lie in (0, 2)");
  const auto taus = grid_from_config(doc, "tau", 0.1, 300.0, 20);

  const OptimizationRunner runner(seed, cache_dir);
  const int n_cols = static_cast<int>(alphas.size());
  std::vector<std::vector<double>> cells(taus.size() * alphas.size());
  parallel_for(static_cast<int>(cells.size()), n_threads, [&](int idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / static_cast<std::size_t>(n_cols);
    const std::size_t a = static_cast<std::size_t>(idx) % static_cast<std::size_t>(n_cols);
    const double tau = taus[i];
    const double alpha = alphas[a];
    const auto model = one_over_f_model(m, tau, alpha, strength);
    OptimizationTask task{"identity", 6.0 * kPi, m, alpha, strength, tau,
                          settings};
    const auto result = runner.run(task, model, 1);
    cells[static_cast<std::size_t>(idx)] = {result.fidelity};
  });

  auto out = open_output(out_path);
  std::vector<std::string> header{"tau_c"};
  for (double a : alphas) header.push_back(alpha_column_name(a));
  CsvWriter csv(out, header);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::vector<double> row{taus[i]};
    for (std::size_t a = 0; a < alphas.size(); ++a)
      row.push_back(cells[i * alphas.size() + a][0]);
    csv.row(row);
  }
  log << "alpha-sweep: wrote " << taus.size() << " rows to " << out_path << "\n";
}

void cmd_not_sweep(const json& doc, std::uint64_t seed,
                   const std::string& out_path, int n_threads,
                   const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "alpha", "strength", "tau_grid",
                                "tau_min", "tau_max", "tau_points",
                                "T_over_pi"}));
  const auto params = CommonParams::from_config(doc);
  const auto settings = OptimizerSettings::from_config(doc);
  const auto taus = grid_from_config(doc, "tau", 0.1, 300.0, 20);
  const double T = get_or<double>(doc, "T_over_pi", 7.0 / 3.0) * kPi;
  if (!(T > 0.0)) throw ConfigError("config: T_over_pi must be positive");

  const OptimizationRunner runner(seed, cache_dir);
  std::vector<std::vector<double>> rows(taus.size());
  parallel_for(static_cast<int>(taus.size()), n_threads, [&](int i) {
    const double tau = taus[static_cast<std::size_t>(i)];
    const auto model = one_over_f_model(params.m, tau, params.alpha, params.strength);
    OptimizationTask task{"not", T,       params.m, params.alpha,
                          params.strength, tau, settings};
    const auto result = runner.run(task, model, 1);
    rows[static_cast<std::size_t>(i)] = {
        tau,
        fidelity::not_fidelity(model, pulses::pi_pulse()),
        fidelity::not_fidelity(model, pulses::corpse_not()),
        fidelity::not_fidelity(model, pulses::short_corpse_not()),
        result.fidelity,
    };
  });

  auto out = open_output(out_path);
  CsvWriter csv(out, {"tau_c", "phi_pi", "phi_corpse", "phi_short_corpse",
                      "phi_optimized"});
  for (const auto& r : rows) csv.row(r);
  log << "not-sweep: wrote " << rows.size() << " rows to " << out_path << "\n";
}

void cmd_optimize(const json& doc, std::uint64_t seed,
                  const std::string& out_dir, int n_threads,
                  const std::string& cache_dir, std::ostream& log) {
  reject_unknown_keys(
      doc, with_optimizer_keys({"seed", "m", "alpha", "strength", "target",
                                "tau_grid", "T_over_pi"}));
  const auto params = CommonParams::from_config(doc);
  const auto settings = OptimizerSettings::from_config(doc);
  const auto target = get_or<std::string>(doc, "target", "not");
  if (target != "not" && target != "identity")
    throw ConfigError("config: target must be \"not\" or \"identity\"");
  const double default_T = target == "not" ? 7.0 / 3.0 : 6.0;
  const double T = get_or<double>(doc, "T_over_pi", default_T) * kPi;
  if (!(T > 0.0)) throw ConfigError("config: T_over_pi must be positive");
  const auto taus =
      get_or<std::vector<double>>(doc, "tau_grid", {45.0, 100.0, 150.0});
  if (taus.empty()) throw ConfigError("config: tau_grid must be nonempty");
  for (double t : taus)
    if (!(t > 0.0)) throw ConfigError("config: tau_grid entries must be positive");

  std::filesystem::create_directories(out_dir);
  const OptimizationRunner runner(seed, cache_dir);
  for (double tau : taus) {
    const auto model = one_over_f_model(params.m, tau, params.alpha, params.strength);
    OptimizationTask task{target, T,       params.m, params.alpha,
                          params.strength, tau, settings};
    const auto result = runner.run(task, model, n_threads);

    json doc_out;
    auto& config_echo = doc_out["config"] = json::object();
    config_echo["target"] = target;
    config_echo["T"] = T;
    config_echo["tau_c"] = tau;
    config_echo["m"] = params.m;
    config_echo["alpha"] = params.alpha;
    config_echo["strength"] = params.strength;
    config_echo["n_segments"] = settings.segments_for(T);
    config_echo["n_starts"] = settings.n_starts;
    config_echo["max_iterations"] = settings.max_iterations;
    config_echo["gradient_tolerance"] = settings.gradient_tolerance;
    config_echo["initial_step"] = settings.initial_step;
    config_echo["seed"] = rng::derive_seed(seed, task.key());
    doc_out.update(result_to_json(result));

    char label[40];
    std::snprintf(label, sizeof(label), "%g", tau);
    const auto base =
        std::filesystem::path(out_dir) / ("optimize_tau_" + std::string(label));
    {
      auto out = open_output(base.string() + ".json");
      out << doc_out.dump(2) << "\n";
    }
    {
      auto out = open_output(base.string() + ".csv");
      pulses::write_csv(out, result.pulse);
    }
    log << "optimize: tau_c=" << label << " fidelity=" << fmt(result.fidelity)
        << " -> " << base.string() << ".{json,csv}\n";
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "psd",          "memory-sweep",  "duration-sweep", "strength-sweep",
      "alpha-sweep",  "not-sweep",     "optimize"};
  return names;
}

noise::NoiseModel one_over_f_model(int m, double tau_c, double alpha,
                                   double strength) {
  require(tau_c > 0.0, "one_over_f_model: tau_c must be positive");
  const double gamma_min = 1.0 / tau_c;
  const int m_states = 1 << m;
  // Rates span [gamma_min, 30 gamma_min] when the grid is long enough;
  // smaller grids use the widest legal spacing delta = gamma_min.
  const double delta = std::min(gamma_min, 29.0 * gamma_min / (m_states - 2));
  return noise::scale_to_strength(
      noise::build_multistate_fluctuator(m, gamma_min, delta, alpha), strength);
}

void run(const RunOptions& options, std::ostream& log) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), options.command) == names.end())
    throw ConfigError("unknown subcommand: " + options.command);

  const json doc = parse_config(options.config_text);
  std::uint64_t seed = kDefaultSeed;
  if (doc.contains("seed")) seed = get_or<std::uint64_t>(doc, "seed", seed);
  if (options.seed) seed = *options.seed;

  const int n_threads =
      options.n_threads > 0
          ? options.n_threads
          : std::max(1u, std::thread::hardware_concurrency());

  std::string out_path = options.out_path;
  if (out_path.empty())
    out_path = options.command == "optimize" ? "optimize_out"
                                             : options.command + ".csv";

  if (options.command == "psd")
    cmd_psd(doc, seed, out_path, n_threads, options.cache_dir, log);
  else if (options.command == "memory-sweep")
    cmd_memory_sweep(doc, seed, out_path, n_threads, options.cache_dir, log);
  else if (options.command == "duration-sweep")
    cmd_duration_sweep(doc, seed, out_path, n_threads, options.cache_dir, log);
  else if (options.command == "strength-sweep")
    cmd_strength_sweep(doc, seed, out_path, n_threads, options.cache_dir, log);
  else if (options.command == "alpha-sweep")
    cmd_alpha_sweep(doc, seed, out_path, n_threads, options.cache_dir, log);
  else if (options.command == "not-sweep")
    cmd_not_sweep(doc, seed, out_path, n_threads, options.cache_dir, log);
  else
    cmd_optimize(doc, seed, out_path, n_threads, options.cache_dir, log);
}

}  // namespace flicker::experiments
