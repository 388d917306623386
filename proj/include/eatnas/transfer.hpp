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

// Multi-stage search driver.
//
// Elastic transfer runs two stages: a random-init search on the small task,
// whose reranked winner becomes the basic architecture, then a search on the
// large task whose initial population is made of perturbations of the basic
// architecture. The scratch baseline is the second stage alone with random
// initialization. Every stage draws from the stream
// derive_stream(master_seed, {stream_key, kEngineStream}), and the scratch
// baseline uses the second stage's key, so paired runs share their randomness.

#ifndef EATNAS_TRANSFER_HPP_
#define EATNAS_TRANSFER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eatnas/evaluator.hpp"
#include "eatnas/evolution.hpp"
#include "eatnas/search_space.hpp"
#include "eatnas/weight_store.hpp"

namespace eatnas {

inline constexpr std::uint64_t kEngineStream = 0x656e67696e65ULL;

enum class StageInit : std::uint8_t { Random, SeededFromPrevious };

struct StageSpec {
  std::string name;
  SearchSpaceConfig space;
  EvolutionConfig evolution;
  Evaluator* evaluator = nullptr;
  // Rerank evaluator; the search evaluator when null.
  Evaluator* strong_evaluator = nullptr;
  StageInit init = StageInit::Random;
  std::uint64_t stream_key = 1;
};

struct StageReport {
  std::string name;
  std::int64_t steps = 0;
  bool converged = false;
  std::vector<StepRecord> history;
  ArchCode chosen;
  double chosen_accuracy = 0.0;
  std::vector<RerankCandidate> rerank;
  // Members at the end of the search, before reranking.
  std::vector<ModelRecord> final_population;
  CacheStats cache;
  // Zero unless wall time recording is enabled.
  double wall_seconds = 0.0;

  // Steps equal history length minus one.
  bool consistent() const { return steps + 1 == static_cast<std::int64_t>(history.size()); }
};

// Resumable pipeline progress.
struct PipelineState {
  std::size_t stage_index = 0;
  // Engine of the stage in progress, if it has started.
  std::optional<EngineState> engine;
  std::vector<StageReport> completed;
  bool done = false;
};

struct PipelineHooks {
  std::function<void(const PipelineState&)> checkpoint;
  // Stop once stage `first` reaches step `second` (simulated interruption).
  std::optional<std::pair<std::size_t, std::int64_t>> halt_at;
  bool record_wall_time = false;
};

struct PipelineResult {
  PipelineState state;
  // False when halted before finishing.
  bool finished = false;
};

// Runs (or resumes) the stages in order. A seeded stage starts from the
// previous stage's chosen architecture. The weight store, when given, is
// cleared at the start of each stage.
PipelineResult run_pipeline(const std::vector<StageSpec>& stages, std::uint64_t master_seed,
                            const PipelineHooks& hooks = {}, std::optional<PipelineState> resume = std::nullopt,
                            WeightStore* store = nullptr);

struct TransferConfig {
  SearchSpaceConfig space_small;
  SearchSpaceConfig space_large;
  EvolutionConfig evo_small;
  EvolutionConfig evo_large;
  Evaluator* evaluator_small = nullptr;
  Evaluator* evaluator_large = nullptr;
  Evaluator* strong_small = nullptr;
  Evaluator* strong_large = nullptr;
  // Seed the second stage from the basic architecture; random init otherwise.
  bool seed_stage2 = true;
};

struct TransferReport {
  ArchCode basic;
  ArchCode target;
  StageReport stage1;
  StageReport stage2;
};

std::vector<StageSpec> transfer_stages(const TransferConfig& cfg);
// The second transfer stage with random initialization, named "scratch".
std::vector<StageSpec> scratch_stages(const SearchSpaceConfig& space, const EvolutionConfig& evo,
                                      Evaluator& evaluator, Evaluator* strong = nullptr);

TransferReport run_eat(const TransferConfig& cfg, std::uint64_t master_seed, const PipelineHooks& hooks = {});
StageReport run_from_scratch(const SearchSpaceConfig& space, const EvolutionConfig& evo, Evaluator& evaluator,
                             std::uint64_t master_seed, Evaluator* strong = nullptr,
                             const PipelineHooks& hooks = {});

// Verifies that a transfer configuration keeps the same block count in both
// stages. Throws std::invalid_argument otherwise.
void check_transfer(const TransferConfig& cfg);

}  // namespace eatnas

#endif  // EATNAS_TRANSFER_HPP_
