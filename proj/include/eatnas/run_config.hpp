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

// Experiment configuration shared by the CLI and tests.

#ifndef EATNAS_RUN_CONFIG_HPP_
#define EATNAS_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "eatnas/checkpoint.hpp"
#include "eatnas/evaluator.hpp"
#include "eatnas/evolution.hpp"
#include "eatnas/external_evaluator.hpp"
#include "eatnas/model_metrics.hpp"
#include "eatnas/search_space.hpp"
#include "eatnas/synthetic_landscape.hpp"

namespace eatnas {

enum class EvaluatorKind : std::uint8_t { Synthetic, External };

std::string_view evaluator_kind_name(EvaluatorKind k);
EvaluatorKind parse_evaluator_kind(std::string_view name);

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  SearchSpaceConfig space_small = small_task_space();
  SearchSpaceConfig space_large = large_task_space();
  EvolutionConfig evo_small;
  EvolutionConfig evo_large = large_task_evolution();
  EvaluatorKind evaluator = EvaluatorKind::Synthetic;
  // "stdio:CMD" or "HOST:PORT"; external evaluator only.
  std::string endpoint;
  double search_timeout_seconds = 900.0;
  double rerank_timeout_seconds = 3600.0;
  LandscapeConfig landscape{0, 0.8, 0.0, false};
  CostOptions cost;
  // Seed the second transfer stage from the first stage's choice.
  bool seed_stage2 = true;
  bool record_wall_time = false;
};

// Full config as JSON (every field present).
Json to_json(const ExperimentConfig& c);
// Overrides the fields of `base` present in `j`. Throws SchemaError.
ExperimentConfig experiment_from_json(const Json& j, ExperimentConfig base = {});
// Reads and parses a config file. Throws std::runtime_error naming the path.
ExperimentConfig load_experiment(const std::filesystem::path& path, ExperimentConfig base = {});

// Throws std::invalid_argument for inconsistent settings.
void check_experiment(const ExperimentConfig& c);

// 16 hex digits of FNV-1a over the compact JSON of the config and the mode.
std::string config_hash(const ExperimentConfig& c, std::string_view mode);

// Evaluators for one task, owned together.
struct EvaluatorPair {
  std::unique_ptr<Evaluator> search;
  // Null when the search evaluator also serves reranking.
  std::unique_ptr<Evaluator> strong;

  Evaluator* strong_or_null() const { return strong.get(); }
};

EvaluatorPair make_evaluators(const ExperimentConfig& c, Task task);

}  // namespace eatnas

#endif  // EATNAS_RUN_CONFIG_HPP_
