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

#include <benchmark/benchmark.h>

#include <numbers>

#include "flicker/dynamics.hpp"
#include "flicker/experiments.hpp"
#include "flicker/fidelity.hpp"
#include "flicker/noise.hpp"
#include "flicker/optimizer.hpp"
#include "flicker/pulses.hpp"

namespace {

using namespace flicker;
constexpr double kPi = std::numbers::pi;

void BM_BuildFluctuator(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto model = noise::build_multistate_fluctuator(m, 1.0, 0.9, 1.0);
    benchmark::DoNotOptimize(model.gamma.data());
  }
}
BENCHMARK(BM_BuildFluctuator)->Arg(3)->Arg(5);

void BM_Psd(benchmark::State& state) {
  const auto model = noise::build_multistate_fluctuator(5, 1.0, 29.0 / 30.0, 1.0);
  const auto decomp = noise::spectral_decomposition(model);
  double f = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(noise::psd(decomp, f));
    f += 1e-6;
  }
}
BENCHMARK(BM_Psd);

void BM_PropagateMaster(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto model = experiments::one_over_f_model(m, 3.0, 1.0, 0.125);
  const auto pulse = pulses::repeat(pulses::two_pi_pulse(), 6);
  const QubitOperator rho0 = (identity_op() + pauli_z()) / 2.0;
  for (auto _ : state) {
    auto final_state = dynamics::propagate_master(model, pulse, rho0);
    benchmark::DoNotOptimize(final_state.rhos.data());
  }
}
BENCHMARK(BM_PropagateMaster)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SampleTrajectory(benchmark::State& state) {
  const auto model = experiments::one_over_f_model(3, 3.0, 1.0, 0.125);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto traj = noise::sample_trajectory(model, 12.0 * kPi, seed++);
    benchmark::DoNotOptimize(traj.switch_times.data());
  }
}
BENCHMARK(BM_SampleTrajectory);

void BM_FidelityGradient(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto model = experiments::one_over_f_model(m, 3.0, 1.0, 0.125);
  const auto pulse = pulses::uniform_random_pulse(6.0 * kPi, 24, 7, 1.0);
  for (auto _ : state) {
    auto grad = optimizer::fidelity_gradient(model, identity_op(), pulse);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_FidelityGradient)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_MemoryFidelity(benchmark::State& state) {
  const auto model = experiments::one_over_f_model(
      static_cast<int>(state.range(0)), 3.0, 1.0, 0.125);
  const auto pulse = pulses::repeat(pulses::corpse_identity(), 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(fidelity::memory_fidelity(model, pulse));
}
BENCHMARK(BM_MemoryFidelity)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
