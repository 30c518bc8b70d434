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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "support/oracles.hpp"

using namespace flicker;
using namespace flicker::experiments;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "flicker_experiments_test";
  fs::create_directories(dir);
  return dir;
}

void run_to_file(const std::string& command, const std::string& config,
                 const fs::path& out, const std::string& cache = "") {
  RunOptions options;
  options.command = command;
  options.config_text = config;
  options.out_path = out.string();
  options.n_threads = 2;
  options.cache_dir = cache;
  std::ostringstream log;
  run(options, log);
}

// Small enough to optimize in milliseconds.
const char* kTinySweepConfig = R"({
  "m": 2,
  "tau_grid": [1.0, 10.0],
  "segments_per_pi": 1,
  "n_starts": 1,
  "max_iterations": 25
})";

}  // namespace

TEST_CASE("config validation failures") {
  RunOptions options;
  options.command = "nonsense";
  std::ostringstream log;
  CHECK_THROWS_AS(run(options, log), ConfigError);

  options.command = "memory-sweep";
  options.out_path = (temp_dir() / "x.csv").string();
  options.config_text = "{\"tau_gri\": [1.0]}";
  CHECK_THROWS_AS(run(options, log), ConfigError);

  options.config_text = "{\"tau_grid\": []}";
  CHECK_THROWS_AS(run(options, log), ConfigError);

  options.config_text = "{\"tau_grid\": [-1.0]}";
  CHECK_THROWS_AS(run(options, log), ConfigError);

  options.config_text = "{\"m\": \"five\"}";
  CHECK_THROWS_AS(run(options, log), ConfigError);

  options.config_text = "not json";
  CHECK_THROWS_AS(run(options, log), ConfigError);
}

TEST_CASE("psd command: schema and analytic columns") {
  const auto out = temp_dir() / "psd.csv";
  run_to_file("psd", "", out);
  std::string header;
  const auto rows = parse_csv(slurp(out), &header);
  CHECK(header == "f,S_rtn5,S_markov32,S_ideal");
  REQUIRE(rows.size() == 50);

  // The RTN column is the five-term Lorentzian sum and the ideal column
  // is A/f with A fixed by the rate-grid spacing.
  std::vector<double> amps, rates;
  for (int k = 0; k < 5; ++k) {
    const double rate = 1.0 + k * 29.0 / 4.0;
    rates.push_back(rate);
    amps.push_back(1.0 / std::sqrt(rate));
  }
  const double a_factor = 1.0 / (2.0 * 29.0 / 30.0);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 4);
    CHECK(std::abs(row[1] - oracles::rtn_sum_psd(amps, rates, row[0])) < 1e-10);
    CHECK(row[3] == doctest::Approx(a_factor / row[0]).epsilon(1e-12));
  }
}

TEST_CASE("memory sweep: schema, bounds and byte determinism") {
  const auto out1 = temp_dir() / "memory1.csv";
  const auto out2 = temp_dir() / "memory2.csv";
  run_to_file("memory-sweep", kTinySweepConfig, out1);
  run_to_file("memory-sweep", kTinySweepConfig, out2);
  CHECK(slurp(out1) == slurp(out2));

  std::string header;
  const auto rows = parse_csv(slurp(out1), &header);
  CHECK(header ==
        "tau_c,phi_optimized,phi_2pi_x6,phi_corpse_x3,phi_cpmg1_x3,"
        "phi_cpmg2_x2,phi_zero");
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 7);
    for (std::size_t c = 1; c < row.size(); ++c) {
      CHECK(row[c] >= -1e-9);
      CHECK(row[c] <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("memory sweep: different seed may move the optimized column only") {
  const auto out1 = temp_dir() / "memory_s1.csv";
  const auto out2 = temp_dir() / "memory_s2.csv";
  RunOptions options;
  options.command = "memory-sweep";
  options.config_text = kTinySweepConfig;
  options.out_path = out1.string();
  options.n_threads = 2;
  options.seed = 1;
  std::ostringstream log;
  run(options, log);
  options.out_path = out2.string();
  options.seed = 2;
  run(options, log);

  const auto rows1 = parse_csv(slurp(out1));
  const auto rows2 = parse_csv(slurp(out2));
  REQUIRE(rows1.size() == rows2.size());
  for (std::size_t i = 0; i < rows1.size(); ++i)
    for (std::size_t c = 2; c < rows1[i].size(); ++c)
      CHECK(rows1[i][c] == rows2[i][c]);  // reference columns are seed-free
}

TEST_CASE("motional narrowing limit in the sweep pipeline") {
  const auto out = temp_dir() / "memory_narrow.csv";
  run_to_file("memory-sweep", R"({
    "m": 5,
    "tau_grid": [0.005],
    "segments_per_pi": 1,
    "n_starts": 1,
    "max_iterations": 3
  })",
              out);
  const auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 1);
  // Every column approaches unit fidelity in the fast-noise limit.
  for (std::size_t c = 1; c < rows[0].size(); ++c)
    CHECK(rows[0][c] > 1.0 - 1e-3);
}

TEST_CASE("duration sweep: schema") {
  const auto out = temp_dir() / "duration.csv";
  run_to_file("duration-sweep", R"({
    "m": 2,
    "tau_c": 3.0,
    "T_over_pi_grid": [2.0, 3.0],
    "segments_per_pi": 1,
    "n_starts": 1,
    "max_iterations": 25
  })",
              out);
  std::string header;
  const auto rows = parse_csv(slurp(out), &header);
  CHECK(header == "T,phi_optimized");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == doctest::Approx(2.0 * 3.14159265358979).epsilon(1e-6));
}

TEST_CASE("strength sweep: schema") {
  const auto out = temp_dir() / "strength.csv";
  run_to_file("strength-sweep", R"({
    "m": 2,
    "tau_c": 30.0,
    "strength_grid": [0.1, 0.5],
    "segments_per_pi": 1,
    "n_starts": 1,
    "max_iterations": 25
  })",
              out);
  std::string header;
  const auto rows = parse_csv(slurp(out), &header);
  CHECK(header ==
        "strength,phi_optimized,phi_2pi_x6,phi_corpse_x3,phi_cpmg1_x3,"
        "phi_cpmg2_x2,phi_zero");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == 0.1);
}

TEST_CASE("alpha sweep: schema and column naming") {
  const auto out = temp_dir() / "alpha.csv";
  run_to_file("alpha-sweep", R"({
    "m": 2,
    "alphas": [1.0, 1.25, 1.5, 1.75],
    "tau_grid": [2.0],
    "segments_per_pi": 1,
    "n_starts": 1,
    "max_iterations": 20
  })",
              out);
  std::string header;
  const auto rows = parse_csv(slurp(out), &header);
  CHECK(header ==
        "tau_c,phi_alpha_1,phi_alpha_1_25,phi_alpha_1_5,phi_alpha_1_75");
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].size() == 5);
}

TEST_CASE("not sweep and optimize share the optimization pipeline") {
  const char* config = R"({
    "m": 2,
    "tau_grid": [20.0],
    "segments_per_pi": 3,
    "n_starts": 2,
    "max_iterations": 60
  })";
  const auto sweep_out = temp_dir() / "not.csv";
  run_to_file("not-sweep", config, sweep_out);
  std::string header;
  const auto rows = parse_csv(slurp(sweep_out), &header);
  CHECK(header == "tau_c,phi_pi,phi_corpse,phi_short_corpse,phi_optimized");
  REQUIRE(rows.size() == 1);

  const auto opt_dir = temp_dir() / "opt_out";
  run_to_file("optimize", R"({
    "m": 2,
    "tau_grid": [20.0],
    "target": "not",
    "segments_per_pi": 3,
    "n_starts": 2,
    "max_iterations": 60
  })",
              opt_dir);
  const auto dump =
      nlohmann::json::parse(slurp(opt_dir / "optimize_tau_20.json"));
  // Same task key, same derived seed: the dumped pulse scores exactly the
  // sweep's optimized column.
  CHECK(dump.at("fidelity").get<double>() == rows[0][4]);

  CHECK(fs::exists(opt_dir / "optimize_tau_20.csv"));
  const auto pulse_csv = slurp(opt_dir / "optimize_tau_20.csv");
  CHECK(pulse_csv.rfind("t_start,t_end,amplitude\n", 0) == 0);
}

TEST_CASE("optimize command honors the cache") {
  const auto cache = temp_dir() / "cache";
  fs::remove_all(cache);
  const char* config = R"({
    "m": 2,
    "tau_grid": [5.0],
    "target": "identity",
    "T_over_pi": 2.0,
    "segments_per_pi": 1,
    "n_starts": 1,
    "max_iterations": 30
  })";
  const auto out1 = temp_dir() / "opt_cache1";
  const auto out2 = temp_dir() / "opt_cache2";
  run_to_file("optimize", config, out1, cache.string());
  REQUIRE(!fs::is_empty(cache));
  run_to_file("optimize", config, out2, cache.string());
  CHECK(slurp(out1 / "optimize_tau_5.json") == slurp(out2 / "optimize_tau_5.json"));
  CHECK(slurp(out1 / "optimize_tau_5.csv") == slurp(out2 / "optimize_tau_5.csv"));
}

TEST_CASE("one_over_f_model rate span") {
  const auto m5 = one_over_f_model(5, 2.0, 1.0, 0.125);
  CHECK(m5.gamma_grid.front() == doctest::Approx(0.5));
  CHECK(m5.gamma_grid.back() == doctest::Approx(15.0));
  CHECK(m5.average_strength() == doctest::Approx(0.125).epsilon(1e-12));

  const auto m3 = one_over_f_model(3, 1.0, 1.0, 0.125);
  CHECK(m3.gamma_grid.front() == doctest::Approx(1.0));
  CHECK(m3.gamma_grid.back() == doctest::Approx(7.0));
}
