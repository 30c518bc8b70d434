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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace flicker {

// Units: hbar = 1 and a_max = 1, so time is measured in hbar/a_max and
// rates in a_max/hbar.
using QubitOperator = Eigen::Matrix2cd;

using complex = std::complex<double>;

inline QubitOperator identity_op() { return QubitOperator::Identity(); }

inline QubitOperator pauli_x() {
  QubitOperator s;
  s << 0, 1, 1, 0;
  return s;
}

inline QubitOperator pauli_y() {
  QubitOperator s;
  s << 0, complex(0, -1), complex(0, 1), 0;
  return s;
}

inline QubitOperator pauli_z() {
  QubitOperator s;
  s << 1, 0, 0, -1;
  return s;
}

inline bool is_hermitian(const QubitOperator& a, double tol = 1e-10) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const QubitOperator& u, double tol = 1e-10) {
  return (u * u.adjoint() - QubitOperator::Identity()).cwiseAbs().maxCoeff() <= tol;
}

// Raised when a computation violates a conservation law or produces
// non-finite values; callers treat it as a numerical failure, distinct
// from argument validation errors.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

namespace rng {

// splitmix64; used both as a generator for seed derivation and to map
// raw 64-bit draws to doubles.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for a (parent seed, index) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// FNV-1a keyed seed derivation. Keys name tasks; identical computations
// reached from different commands derive the same stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return derive_seed(seed, h);
}

// Uniform double in [0, 1); resolution 2^-53.
inline double to_unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform double in the open interval (0, 1); safe as a log() argument.
inline double to_open_unit_double(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rng
}  // namespace flicker
