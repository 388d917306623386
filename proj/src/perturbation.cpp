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

#include "eatnas/perturbation.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace eatnas {

ArchCode perturb_unchecked(const ArchCode& basic, Rng& rng, std::vector<Primitive>* selected) {
  ArchCode out = basic;
  if (selected) selected->clear();
  for (auto& block : out.blocks) {
    const auto prim = static_cast<Primitive>(rng.uniform_index(kNumPrimitives));
    const std::size_t value = rng.uniform_index(kPrimitiveCardinality[static_cast<std::size_t>(prim)]);
    block.set_value_index(prim, value);
    if (selected) selected->push_back(prim);
  }
  return out;
}

PerturbTrace perturb_traced(const ArchCode& basic, const SearchSpaceConfig& space, Rng& rng,
                            int max_retries) {
  if (static_cast<int>(basic.size()) != space.n_blocks) {
    throw std::invalid_argument(
        fmt::format("perturb: block count {} != {}", basic.size(), space.n_blocks));
  }
  for (const auto& b : basic.blocks) {
    for (std::size_t p = 0; p < kNumPrimitives; ++p) (void)b.value_index(static_cast<Primitive>(p));
  }
  PerturbTrace trace;
  for (trace.attempts = 1; trace.attempts <= max_retries; ++trace.attempts) {
    trace.arch = perturb_unchecked(basic, rng, &trace.selected);
    if (validate(trace.arch, space)) return trace;
  }
  throw ConstraintUnsatisfiable(
      fmt::format("no valid perturbation after {} draws", max_retries));
}

ArchCode mutate(const ArchCode& parent, const SearchSpaceConfig& space, Rng& rng, int max_retries) {
  auto trace = perturb_traced(parent, space, rng, max_retries);
  spdlog::trace("mutate: {} draw(s)", trace.attempts);
  return std::move(trace.arch);
}

std::vector<ArchCode> seed_population(const ArchCode& basic, int count, const SearchSpaceConfig& space,
                                      Rng& rng, bool include_seed_verbatim, int max_retries) {
  if (count < 1) throw std::invalid_argument("seed_population: count must be >= 1");
  std::vector<ArchCode> out;
  out.reserve(static_cast<std::size_t>(count));
  if (include_seed_verbatim && validate(basic, space)) out.push_back(basic);
  while (static_cast<int>(out.size()) < count) out.push_back(perturb(basic, space, rng, max_retries));
  return out;
}

}  // namespace eatnas
