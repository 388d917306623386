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

// Tournament-selection evolution.
//
// Each step samples S members without replacement, mutates the sample's best,
// evaluates and scores the mutant, removes the sample's worst and inserts the
// mutant, then recomputes population quality. Ties on score prefer the newer
// member as best and the older member as worst. The run stops when the best
// quality of the last W steps improves on the best of the W steps before by
// less than epsilon, or at max_steps.

#ifndef EATNAS_EVOLUTION_HPP_
#define EATNAS_EVOLUTION_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eatnas/evaluator.hpp"
#include "eatnas/rng.hpp"
#include "eatnas/scoring.hpp"
#include "eatnas/search_space.hpp"
#include "eatnas/weight_store.hpp"

namespace eatnas {

enum class SizeMetric : std::uint8_t { Params, MultAdds };

std::string_view size_metric_name(SizeMetric m);
SizeMetric parse_size_metric(std::string_view name);

struct EvolutionConfig {
  int population_size = 64;
  int sample_size = 16;
  int rerank_k = 8;
  int max_steps = 2000;
  int window = 20;
  double epsilon = 1e-4;
  // Steps between checkpoints during run_until_converged (0 disables).
  int checkpoint_every = 10;
  // Extra attempts for a failed evaluation before giving up on it.
  int eval_retries = 2;
  // Consecutive discarded mutants tolerated in one step.
  int max_resamples = 10;
  int search_epochs = 1;
  int rerank_epoch_multiple = 5;
  SizeMetric size_metric = SizeMetric::Params;
  ScoreParams score;
  QualityParams quality;
  bool cache = true;
  bool include_seed_verbatim = false;
  int perturb_retries = 1000;
  int random_arch_retries = 10000;
  // Derive each mutant's weights from the engine's weight store and commit
  // them after a successful evaluation.
  bool share_weights = false;
  WeightInitSpec weight_init;
  // Concurrent evaluations during initialization and reranking.
  int parallel_evaluations = 1;
  // Store evaluation wall time in records (makes checkpoints nondeterministic).
  bool record_wall_time = false;

  friend bool operator==(const EvolutionConfig&, const EvolutionConfig&) = default;
};

// Defaults with multiply-add size and a 500M target.
inline EvolutionConfig large_task_evolution() {
  EvolutionConfig c;
  c.size_metric = SizeMetric::MultAdds;
  c.score.target_size = 5.0e8;
  return c;
}

// Throws std::invalid_argument for out-of-range settings.
void check_config(const EvolutionConfig& cfg);

struct EvalMeta {
  std::string evaluator;
  int epochs = 0;
  double wall_seconds = 0.0;
  bool cache_hit = false;

  friend bool operator==(const EvalMeta&, const EvalMeta&) = default;
};

struct ModelRecord {
  ArchCode arch;
  double accuracy = 0.0;
  // Value of the configured size metric.
  double size = 0.0;
  double score = 0.0;
  std::int64_t params = 0;
  std::int64_t multadds = 0;
  std::int64_t birth_step = 0;
  EvalMeta meta;

  friend bool operator==(const ModelRecord&, const ModelRecord&) = default;
};

// One history entry; entry 0 describes the initial population.
struct StepRecord {
  std::int64_t step = 0;
  double mean_score = 0.0;
  double std = 0.0;
  double quality = 0.0;
  double best_score = 0.0;
  double mean_accuracy = 0.0;
  bool degenerate = false;
  // Unset for the initial entry.
  std::optional<double> mutant_score;
  std::optional<double> sample_best_score;
  std::optional<double> removed_score;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Population {
  std::vector<ModelRecord> members;
  std::int64_t step = 0;
  std::int64_t next_birth = 0;
  std::vector<StepRecord> history;
  // Architectures generated for initialization but not yet evaluated.
  std::vector<ArchCode> pending;

  std::vector<std::pair<std::int64_t, double>> quality_history() const;
  const ModelRecord& best() const;
  double mean_accuracy() const;

  friend bool operator==(const Population&, const Population&) = default;
};

// True once the history holds at least 2 * window steps and the best quality of
// the last `window` entries exceeds the best of the previous `window` by less
// than epsilon.
bool quality_converged(const std::vector<StepRecord>& history, int window, double epsilon);

struct CacheStats {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

enum class EnginePhase : std::uint8_t { Empty, Initializing, Evolving };

// Everything needed to continue a run bit-identically.
struct EngineState {
  EnginePhase phase = EnginePhase::Empty;
  Population population;
  std::string rng_state;
  std::map<std::string, EvalResult> cache;
  CacheStats cache_stats;
  bool converged = false;

  friend bool operator==(const EngineState&, const EngineState&) = default;
};

class EvaluationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunHooks {
  // Called every cfg.checkpoint_every steps and when the run ends.
  std::function<void(const EngineState&)> checkpoint;
  // Stop (without converging) once the population reaches this step.
  std::optional<std::int64_t> halt_at_step;
};

struct RunOutcome {
  bool converged = false;
  bool halted = false;
  std::int64_t steps = 0;
};

struct RerankCandidate {
  ArchCode arch;
  double search_score = 0.0;
  std::int64_t birth_step = 0;
  EvalResult result;
};

struct RerankResult {
  ArchCode best;
  double best_accuracy = 0.0;
  std::vector<RerankCandidate> candidates;
};

class EvolutionEngine {
 public:
  // `store` is only used when cfg.share_weights is set. The engine does not own
  // the evaluator or the store.
  EvolutionEngine(EvolutionConfig cfg, SearchSpaceConfig space, Evaluator& evaluator, Rng rng,
                  WeightStore* store = nullptr);

  // Random initialization: P draws from random_arch, each evaluated once.
  void init_random();
  // Seeded initialization: P perturbations of `basic`.
  void init_seeded(const ArchCode& basic);
  // Evaluates architectures still pending after an interrupted initialization.
  void finish_init();

  void step();

  RunOutcome run_until_converged(const RunHooks& hooks = {});

  // Re-evaluates the k best-scoring members with `strong` at
  // search_epochs * rerank_epoch_multiple epochs and returns the member with
  // the highest re-evaluated accuracy.
  RerankResult rerank_topk(Evaluator& strong) const;

  const Population& population() const { return state_.population; }
  const EvolutionConfig& config() const { return cfg_; }
  const SearchSpaceConfig& space() const { return space_; }
  const CacheStats& cache_stats() const { return state_.cache_stats; }
  EnginePhase phase() const { return state_.phase; }
  bool converged() const { return state_.converged; }

  EngineState state() const;
  void restore(const EngineState& state);

 private:
  // Cached, retried search-budget evaluation. Returns nullopt once every
  // attempt has failed.
  std::optional<EvalResult> evaluate_search(const ArchCode& arch, EvalMeta& meta);
  std::optional<EvalResult> evaluate_uncached(const ArchCode& arch, double& wall_seconds);
  ModelRecord make_record(const ArchCode& arch, const EvalResult& r, EvalMeta meta);
  void begin_init(std::vector<ArchCode> archs);
  StepRecord summarize() const;

  EvolutionConfig cfg_;
  SearchSpaceConfig space_;
  Evaluator* evaluator_;
  WeightStore* store_;
  Rng rng_;
  EngineState state_;
};

}  // namespace eatnas

#endif  // EATNAS_EVOLUTION_HPP_
