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
#include <string>
#include <string_view>
#include <vector>

namespace flicker::pulses {

struct PulseSegment {
  double amplitude = 0.0;
  double duration = 0.0;
};

/// Piecewise-constant control a(t) along x, bounded by |a| <= a_max.
/// Segment boundaries are expressed in the dimensionless time
/// t' = a_max t / hbar. An empty segment list is the zero-duration pulse.
struct PulseSequence {
  std::vector<PulseSegment> segments;
  double a_max = 1.0;

  double duration() const;
  double amplitude_at(double t) const;
  void validate() const;
};

/// No drive for a duration T.
PulseSequence zero_pulse(double T, double a_max = 1.0);

/// Constant a_max for a 2 pi rotation; identity up to global phase.
PulseSequence two_pi_pulse(double a_max = 1.0);

/// Composite identity: (+a_max, pi), (-a_max, 2 pi), (+a_max, pi).
PulseSequence corpse_identity(double a_max = 1.0);

/// Constant a_max for a pi rotation; NOT gate up to global phase.
PulseSequence pi_pulse(double a_max = 1.0);

/// Composite NOT: (+a_max, pi/3), (-a_max, 5 pi/3), (+a_max, 7 pi/3).
PulseSequence corpse_not(double a_max = 1.0);

/// Short composite NOT: (-a_max, pi/3), (+a_max, 5 pi/3), (-a_max, pi/3).
PulseSequence short_corpse_not(double a_max = 1.0);

/// Refocusing block pi/2 | gap t_p | pi | gap t_p | pi/2, total 2 pi + 2 t_p.
PulseSequence cpmg_block(double t_p, double a_max = 1.0);

/// Concatenates n copies of a sequence.
PulseSequence repeat(const PulseSequence& seq, int n);

/// n equal-duration segments with amplitudes i.i.d. uniform in
/// [-max_amp, max_amp]; deterministic for a given seed.
PulseSequence uniform_random_pulse(double T, int n_segments,
                                   std::uint64_t seed, double max_amp,
                                   double a_max = 1.0);

std::string to_json(const PulseSequence& pulse);
PulseSequence pulse_from_json(std::string_view text);

/// CSV rows (t_start, t_end, amplitude), one per segment.
void write_csv(std::ostream& out, const PulseSequence& pulse);

}  // namespace flicker::pulses
