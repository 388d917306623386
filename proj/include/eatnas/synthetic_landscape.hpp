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

// Deterministic pseudo-accuracy landscape over genomes, with two correlated
// tasks ("small" and "large").
//
// Every (block position, primitive, value) owns a utility, and every adjacent
// pair of blocks owns an interaction utility for its two conv choices
// (weight 0.3). Each utility is built from two standard normals h1, h2:
//     small task: h1
//     large task: rho * h1 + sqrt(1 - rho^2) * h2
// so rho = 1 makes the tasks identical and rho = 0 independent.
//
// Normals are derived bit-exactly:
//   f     = FNV-1a 64 over the little-endian bytes of
//           u64 seed | u8 kind (1 unary, 2 interaction) | u32 position
//           | u32 a | u32 b | u8 stream (1 for h1, 2 for h2)
//           where unary uses a = primitive index, b = value index and
//           interaction uses a, b = conv indices of blocks position, position+1
//           (0-based position)
//   key   = mix64(f), the SplitMix64 step (add 0x9e3779b97f4a7c15, then
//           xor-shift-multiply by 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb
//           with shifts 30, 27, 31)
//   u     = ((key >> 11) + 0.5) / 2^53
//   h     = inverse_normal_cdf(u)   (Acklam's rational approximation,
//                                    relative error below 1.2e-9)
//
// The summed utility is divided by sqrt(5 n + 0.09 (n - 1)), its standard
// deviation over uniformly random genomes, giving a logit x. Then
//     accuracy = 0.05 + 0.9 * logistic(x) + 0.02 * (1 - 1 / epochs)
// With size coupling, x gains 0.25 * log2(params / 1e6).

#ifndef EATNAS_SYNTHETIC_LANDSCAPE_HPP_
#define EATNAS_SYNTHETIC_LANDSCAPE_HPP_

#include <cstdint>
#include <mutex>
#include <string>

#include "eatnas/evaluator.hpp"
#include "eatnas/model_metrics.hpp"
#include "eatnas/rng.hpp"
#include "eatnas/search_space.hpp"

namespace eatnas {

enum class Task : std::uint8_t { Small, Large };

std::string_view task_name(Task t);

struct LandscapeConfig {
  std::uint64_t seed = 0;
  // Task correlation rho in [0, 1].
  double shift = 1.0;
  double noise_std = 0.0;
  bool size_coupling = false;
};

inline constexpr double kInteractionWeight = 0.3;
inline constexpr double kSizeCouplingGain = 0.25;
inline constexpr double kSizeCouplingReference = 1.0e6;

// Inverse of the standard normal CDF for p in (0, 1).
double inverse_normal_cdf(double p);

// Maps a hash key to a standard normal variate as documented above.
double normal_from_key(std::uint64_t key);

class SyntheticLandscape {
 public:
  explicit SyntheticLandscape(LandscapeConfig cfg);

  const LandscapeConfig& config() const { return cfg_; }

  // position is 0-based.
  double unary_utility(std::size_t position, Primitive prim, std::size_t value_index, Task task) const;
  double interaction_utility(std::size_t position, ConvOp left, ConvOp right, Task task) const;

  // Sum of all utilities for the genome (interactions already weighted).
  double total_utility(const ArchCode& arch, Task task) const;

  static double normalizer(std::size_t n_blocks);
  // Maps a logit to [0.05, 0.95] and adds the epoch bonus.
  static double accuracy_from_logit(double logit, int epochs);

  // Noise-free pseudo-accuracy. `params` is only read with size coupling.
  double accuracy(const ArchCode& arch, Task task, int epochs = 1, std::int64_t params = 0) const;

 private:
  double blended(std::uint64_t kind, std::uint32_t position, std::uint32_t a, std::uint32_t b, Task task) const;

  LandscapeConfig cfg_;
  double blend_h2_;
};

// Evaluator backed by the landscape. Sizes come from model_metrics.
class SyntheticEvaluator final : public Evaluator {
 public:
  SyntheticEvaluator(SearchSpaceConfig space, LandscapeConfig cfg, Task task, CostOptions cost = {});

  EvalResult evaluate(const ArchCode& arch, const EvalBudget& budget) override;
  std::string id() const override;
  bool deterministic() const override { return landscape_.config().noise_std == 0.0; }
  bool thread_safe() const override { return true; }

  const SyntheticLandscape& landscape() const { return landscape_; }
  const SearchSpaceConfig& space() const { return space_; }
  Task task() const { return task_; }

 private:
  SearchSpaceConfig space_;
  SyntheticLandscape landscape_;
  Task task_;
  CostOptions cost_;
  std::mutex noise_mutex_;
  Rng noise_rng_;
};

}  // namespace eatnas

#endif  // EATNAS_SYNTHETIC_LANDSCAPE_HPP_
