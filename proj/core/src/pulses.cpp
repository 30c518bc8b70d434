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

#include "flicker/pulses.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flicker/types.hpp"

namespace flicker::pulses {

namespace {
constexpr double kPi = std::numbers::pi;
}

double PulseSequence::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

double PulseSequence::amplitude_at(double t) const {
  double edge = 0.0;
  for (const auto& s : segments) {
    edge += s.duration;
    if (t < edge) return s.amplitude;
  }
  return segments.empty() ? 0.0 : segments.back().amplitude;
}

void PulseSequence::validate() const {
  require(a_max > 0.0, "pulse: a_max must be positive");
  for (const auto& s : segments) {
    require(std::isfinite(s.amplitude) && std::isfinite(s.duration),
            "pulse: non-finite segment");
    require(s.duration > 0.0, "pulse: segment durations must be positive");
    require(std::abs(s.amplitude) <= a_max,
            "pulse: amplitude exceeds the bound a_max");
  }
}

PulseSequence zero_pulse(double T, double a_max) {
  require(T > 0.0, "zero_pulse: duration must be positive");
  PulseSequence p{{{0.0, T}}, a_max};
  p.validate();
  return p;
}

PulseSequence two_pi_pulse(double a_max) {
  PulseSequence p{{{a_max, 2.0 * kPi / a_max}}, a_max};
  p.validate();
  return p;
}

PulseSequence corpse_identity(double a_max) {
  PulseSequence p{{{a_max, kPi / a_max},
                   {-a_max, 2.0 * kPi / a_max},
                   {a_max, kPi / a_max}},
                  a_max};
  p.validate();
  return p;
}

PulseSequence pi_pulse(double a_max) {
  PulseSequence p{{{a_max, kPi / a_max}}, a_max};
  p.validate();
  return p;
}

PulseSequence corpse_not(double a_max) {
  PulseSequence p{{{a_max, kPi / 3.0 / a_max},
                   {-a_max, 5.0 * kPi / 3.0 / a_max},
                   {a_max, 7.0 * kPi / 3.0 / a_max}},
                  a_max};
  p.validate();
  return p;
}

PulseSequence short_corpse_not(double a_max) {
  PulseSequence p{{{-a_max, kPi / 3.0 / a_max},
                   {a_max, 5.0 * kPi / 3.0 / a_max},
                   {-a_max, kPi / 3.0 / a_max}},
                  a_max};
  p.validate();
  return p;
}

PulseSequence cpmg_block(double t_p, double a_max) {
  require(t_p > 0.0, "cpmg_block: gap must be positive");
  PulseSequence p{{{a_max, kPi / 2.0 / a_max},
                   {0.0, t_p},
                   {a_max, kPi / a_max},
                   {0.0, t_p},
                   {a_max, kPi / 2.0 / a_max}},
                  a_max};
  p.validate();
  return p;
}

PulseSequence repeat(const PulseSequence& seq, int n) {
  require(n >= 1, "repeat: count must be at least 1");
  PulseSequence out;
  out.a_max = seq.a_max;
  out.segments.reserve(seq.segments.size() * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.segments.insert(out.segments.end(), seq.segments.begin(),
                        seq.segments.end());
  return out;
}

PulseSequence uniform_random_pulse(double T, int n_segments,
                                   std::uint64_t seed, double max_amp,
                                   double a_max) {
  require(T > 0.0, "uniform_random_pulse: duration must be positive");
  require(n_segments >= 1, "uniform_random_pulse: need at least one segment");
  require(max_amp >= 0.0 && max_amp <= a_max,
          "uniform_random_pulse: max_amp must lie in [0, a_max]");

  std::uint64_t state = seed;
  PulseSequence p;
  p.a_max = a_max;
  const double dt = T / n_segments;
  for (int i = 0; i < n_segments; ++i) {
    const double u = rng::to_unit_double(rng::splitmix64(state));
    p.segments.push_back({max_amp * (2.0 * u - 1.0), dt});
  }
  p.validate();
  return p;
}

std::string to_json(const PulseSequence& pulse) {
  nlohmann::ordered_json doc;
  doc["a_max"] = pulse.a_max;
  auto& segs = doc["segments"] = nlohmann::ordered_json::array();
  for (const auto& s : pulse.segments)
    segs.push_back({{"amplitude", s.amplitude}, {"duration", s.duration}});
  return doc.dump(2);
}

PulseSequence pulse_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("pulse JSON: ") + e.what());
  }
  require(doc.contains("a_max") && doc.contains("segments"),
          "pulse JSON: missing fields");
  PulseSequence p;
  p.a_max = doc["a_max"].get<double>();
  for (const auto& s : doc["segments"])
    p.segments.push_back(
        {s.at("amplitude").get<double>(), s.at("duration").get<double>()});
  p.validate();
  return p;
}

void write_csv(std::ostream& out, const PulseSequence& pulse) {
  out << "t_start,t_end,amplitude\n";
  char buf[96];
  double t = 0.0;
  for (const auto& s : pulse.segments) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", t, t + s.duration,
                  s.amplitude);
    out << buf;
    t += s.duration;
  }
}

}  // namespace flicker::pulses
