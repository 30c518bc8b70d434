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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flicker/noise.hpp"

namespace flicker::experiments {

/// Invalid or malformed run configuration; the driver maps it to exit
/// code 2 (numerical failures map to 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string command;
  std::string config_text;            // JSON document; empty means defaults
  std::string out_path;               // output file (directory for `optimize`)
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int n_threads = 1;
  std::string cache_dir;              // optional optimized-pulse cache
};

/// Available subcommands: psd, memory-sweep, duration-sweep,
/// strength-sweep, alpha-sweep, not-sweep, optimize.
const std::vector<std::string>& command_names();

/// Runs one subcommand; outputs are CSV (JSON + CSV for `optimize`)
/// written with full floating precision, one row per grid point, in grid
/// order. Identical options produce byte-identical outputs.
void run(const RunOptions& options, std::ostream& log);

/// The noise source used throughout the sweeps: a 2^m-state fluctuator
/// with rates on [1/tau_c, 30/tau_c] (uniform grid, clipped to the
/// delta <= gamma_min constraint for m < 5), scaled to the requested
/// average strength.
noise::NoiseModel one_over_f_model(int m, double tau_c, double alpha,
                                   double strength);

}  // namespace flicker::experiments
