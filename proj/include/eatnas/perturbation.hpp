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

// Architecture perturbation: in every block, pick one of the five primitives
// uniformly and redraw its value uniformly from the legal set (the old value
// may come back). Serves as the mutation operator during evolution and as the
// seeding operator when a search is started from a known architecture.

#ifndef EATNAS_PERTURBATION_HPP_
#define EATNAS_PERTURBATION_HPP_

#include <vector>

#include "eatnas/rng.hpp"
#include "eatnas/search_space.hpp"

namespace eatnas {

inline constexpr int kDefaultPerturbRetries = 1000;

struct PerturbTrace {
  ArchCode arch;
  // Primitive selected in each block on the accepted draw.
  std::vector<Primitive> selected;
  // Draws made, including the accepted one.
  int attempts = 0;
};

// One unconstrained perturbation pass over every block.
ArchCode perturb_unchecked(const ArchCode& basic, Rng& rng, std::vector<Primitive>* selected = nullptr);

// Redraws the whole perturbation until the result validates under `space`.
// `basic` only has to have space.n_blocks blocks with legal primitives; it may
// violate the space's scale constraints (seeding across task spaces).
// Throws ConstraintUnsatisfiable once max_retries draws have failed.
PerturbTrace perturb_traced(const ArchCode& basic, const SearchSpaceConfig& space, Rng& rng,
                            int max_retries = kDefaultPerturbRetries);

inline ArchCode perturb(const ArchCode& basic, const SearchSpaceConfig& space, Rng& rng,
                        int max_retries = kDefaultPerturbRetries) {
  return perturb_traced(basic, space, rng, max_retries).arch;
}

ArchCode mutate(const ArchCode& parent, const SearchSpaceConfig& space, Rng& rng,
                int max_retries = kDefaultPerturbRetries);

// `count` independent perturbations of `basic`. With include_seed_verbatim the
// first entry is `basic` itself (when it validates) and count - 1 follow.
std::vector<ArchCode> seed_population(const ArchCode& basic, int count, const SearchSpaceConfig& space,
                                      Rng& rng, bool include_seed_verbatim = false,
                                      int max_retries = kDefaultPerturbRetries);

}  // namespace eatnas

#endif  // EATNAS_PERTURBATION_HPP_
