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
#include <vector>

#include <Eigen/Dense>

#include "flicker/noise.hpp"
#include "flicker/pulses.hpp"
#include "flicker/types.hpp"

namespace flicker::optimizer {

struct OptimizerConfig {
  int n_segments = 1;
  int max_iterations = 2000;
  double gradient_tolerance = 1e-7;
  double initial_step = 1.0;
  int n_starts = 8;
  std::uint64_t seed = 0;
  double amplitude_bound = 1.0;

  void validate() const;
};

enum class StopReason { gradient_converged, max_iterations, step_underflow };

std::string to_string(StopReason reason);

struct OptimizationResult {
  pulses::PulseSequence pulse;
  double fidelity = 0.0;
  int iterations = 0;
  int start_index = 0;
  std::vector<double> fidelity_trace;  // non-decreasing by construction
  StopReason stop_reason = StopReason::max_iterations;

  bool converged() const { return stop_reason == StopReason::gradient_converged; }
};

/// Exact gradient of the gate fidelity with respect to the segment
/// amplitudes, via forward/backward propagation and the augmented
/// block-matrix exponential for each segment propagator derivative.
/// Requires equal-duration segments.
Eigen::VectorXd fidelity_gradient(const noise::NoiseModel& model,
                                  const QubitOperator& target,
                                  const pulses::PulseSequence& pulse);

/// Projected gradient ascent over n_segments equal-duration amplitudes on
/// [0, T], maximizing the gate fidelity under the given noise model.
/// Runs n_starts random initializations plus a zero-pulse and a constant
/// a_max start; each accepted iterate never decreases the fidelity
/// (backtracking step halving), amplitudes are clipped to the bound, and
/// the best start wins with ties broken by the lowest start index.
/// Deterministic for a given config.
OptimizationResult optimize(const noise::NoiseModel& model,
                            const QubitOperator& target, double T,
                            const OptimizerConfig& config, int n_threads = 1);

}  // namespace flicker::optimizer
