// Copyright 2026 The eatnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EATNAS_RNG_HPP_
#define EATNAS_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace eatnas {

// Seeded random source. Wraps std::mt19937_64 (whose output sequence is fixed
// by the standard) and derives every distribution from raw 64-bit draws, so
// trajectories do not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling, unbiased.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform01();

  // Standard normal via Box-Muller. Consumes two draws per call.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

  // Full engine state as text; round-trips through restore().
  std::string save_state() const;
  void restore_state(std::string_view text);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a master seed and a sequence of
// integer keys (stage, purpose, ...). derive_seed(m, {a, b}) folds each key
// through mix64, so distinct key tuples give unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

inline Rng derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

// 64-bit FNV-1a.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a64& add_byte(std::uint8_t b) {
    hash_ ^= b;
    hash_ *= kPrime;
    return *this;
  }
  // Little-endian byte order regardless of host.
  Fnv1a64& add_u32(std::uint32_t v);
  Fnv1a64& add_u64(std::uint64_t v);
  Fnv1a64& add_bytes(std::string_view bytes);

  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = kOffsetBasis;
};

}  // namespace eatnas

#endif  // EATNAS_RNG_HPP_
