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

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "flicker/experiments.hpp"
#include "flicker/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-qubit control workbench under 1/f^alpha noise"};
  app.require_subcommand(1);

  flicker::experiments::RunOptions options;
  std::string config_path;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  options.n_threads = 0;  // 0 = all hardware threads

  for (const auto& name : flicker::experiments::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", options.out_path,
                    "output CSV path (directory for `optimize`)");
    sub->add_option("--seed", seed_flag, "top-level seed (overrides config)")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--threads", options.n_threads, "worker thread count");
    sub->add_option("--cache", options.cache_dir,
                    "directory for cached optimization results");
    sub->callback([&, name] { options.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in)
        throw flicker::experiments::ConfigError("cannot read config file: " +
                                                config_path);
      std::ostringstream text;
      text << in.rdbuf();
      options.config_text = text.str();
    }
    if (seed_given) options.seed = seed_flag;

    flicker::experiments::run(options, std::cout);
    return kExitOk;
  } catch (const flicker::experiments::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const flicker::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
}
