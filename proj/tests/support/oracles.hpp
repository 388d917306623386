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

// Independent reference implementations used by the tests. None of these call
// the library's scoring or metrics code.

#ifndef EATNAS_TESTS_SUPPORT_ORACLES_HPP_
#define EATNAS_TESTS_SUPPORT_ORACLES_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "eatnas/scoring.hpp"
#include "eatnas/search_space.hpp"
#include "eatnas/synthetic_landscape.hpp"

namespace eatnas::oracle {

long double model_score(long double acc, long double size, long double target, long double omega);
long double quality(const std::vector<double>& scores, long double target_std, long double alpha, long double beta);

struct Tensor {
  std::array<std::int64_t, 4> dims;  // w, h, ch_in, ch_out
  std::int64_t norm_channels;
  std::int64_t resolution;  // spatial side the tensor is applied at
};

// Every weight tensor of the network in forward order, following the
// documented macro-skeleton.
std::vector<Tensor> tensor_walk(const ArchCode& arch, const SearchSpaceConfig& space);

struct Counts {
  std::int64_t params = 0;
  std::int64_t multadds = 0;
};

// Counts elements of the walked tensors one tensor at a time. With
// `include_norm_and_bias`, each tensor adds two values per normalized channel
// and the classifier adds one bias per class.
Counts count(const ArchCode& arch, const SearchSpaceConfig& space, bool include_norm_and_bias);

struct Optimum {
  ArchCode arch;
  double score = 0.0;
  double accuracy = 0.0;
  std::int64_t params = 0;
  std::uint64_t leaves = 0;
};

// Exhaustive maximum of acc * (params / T)^omega over every valid genome, at
// one epoch, noise free, without size coupling. The skip bit only enters the
// unary utility, so it is set to its better value per block and the search
// enumerates the remaining primitives exhaustively.
Optimum landscape_optimum(const SyntheticLandscape& landscape, const SearchSpaceConfig& space, Task task,
                          const ScoreParams& score);

}  // namespace eatnas::oracle

#endif  // EATNAS_TESTS_SUPPORT_ORACLES_HPP_
