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

#include "eatnas/run_config.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace eatnas {

std::string_view evaluator_kind_name(EvaluatorKind k) {
  return k == EvaluatorKind::Synthetic ? "synthetic" : "external";
}

EvaluatorKind parse_evaluator_kind(std::string_view name) {
  if (name == "synthetic") return EvaluatorKind::Synthetic;
  if (name == "external") return EvaluatorKind::External;
  throw std::invalid_argument(fmt::format("unknown evaluator '{}' (expected synthetic or external)", name));
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["master_seed"] = c.master_seed;
  j["space_small"] = to_json(c.space_small);
  j["space_large"] = to_json(c.space_large);
  j["evo_small"] = to_json(c.evo_small);
  j["evo_large"] = to_json(c.evo_large);
  j["evaluator"] = evaluator_kind_name(c.evaluator);
  j["endpoint"] = c.endpoint;
  j["search_timeout_seconds"] = c.search_timeout_seconds;
  j["rerank_timeout_seconds"] = c.rerank_timeout_seconds;
  j["landscape"] = {{"seed", c.landscape.seed},
                    {"shift", c.landscape.shift},
                    {"noise_std", c.landscape.noise_std},
                    {"size_coupling", c.landscape.size_coupling}};
  j["include_norm_and_bias"] = c.cost.include_norm_and_bias;
  j["seed_stage2"] = c.seed_stage2;
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

namespace {

void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw SchemaError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <typename T>
void read_scalar(const Json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const std::string path = where.empty() ? std::string(key) : where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw SchemaError(path, "expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!it->is_string()) throw SchemaError(path, "expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw SchemaError(path, "expected an integer");
    if (std::is_unsigned_v<T> && !it->is_number_unsigned()) throw SchemaError(path, "expected a non-negative integer");
  } else {
    if (!it->is_number()) throw SchemaError(path, "expected a number");
  }
  out = it->get<T>();
}

}  // namespace

ExperimentConfig experiment_from_json(const Json& j, ExperimentConfig c) {
  reject_unknown(j,
                 {"master_seed", "space_small", "space_large", "evo_small", "evo_large", "evaluator", "endpoint",
                  "search_timeout_seconds", "rerank_timeout_seconds", "landscape", "include_norm_and_bias",
                  "seed_stage2", "record_wall_time"},
                 "");
  read_scalar(j, "master_seed", c.master_seed, "");
  if (auto it = j.find("space_small"); it != j.end()) c.space_small = space_from_json(*it, c.space_small, "space_small");
  if (auto it = j.find("space_large"); it != j.end()) c.space_large = space_from_json(*it, c.space_large, "space_large");
  if (auto it = j.find("evo_small"); it != j.end()) c.evo_small = evolution_from_json(*it, c.evo_small, "evo_small");
  if (auto it = j.find("evo_large"); it != j.end()) c.evo_large = evolution_from_json(*it, c.evo_large, "evo_large");
  if (auto it = j.find("evaluator"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("evaluator", "expected a string");
    try {
      c.evaluator = parse_evaluator_kind(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError("evaluator", e.what());
    }
  }
  read_scalar(j, "endpoint", c.endpoint, "");
  read_scalar(j, "search_timeout_seconds", c.search_timeout_seconds, "");
  read_scalar(j, "rerank_timeout_seconds", c.rerank_timeout_seconds, "");
  if (auto it = j.find("landscape"); it != j.end()) {
    reject_unknown(*it, {"seed", "shift", "noise_std", "size_coupling"}, "landscape");
    read_scalar(*it, "seed", c.landscape.seed, "landscape");
    read_scalar(*it, "shift", c.landscape.shift, "landscape");
    read_scalar(*it, "noise_std", c.landscape.noise_std, "landscape");
    read_scalar(*it, "size_coupling", c.landscape.size_coupling, "landscape");
  }
  read_scalar(j, "include_norm_and_bias", c.cost.include_norm_and_bias, "");
  read_scalar(j, "seed_stage2", c.seed_stage2, "");
  read_scalar(j, "record_wall_time", c.record_wall_time, "");
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path, ExperimentConfig base) {
  if (!std::filesystem::exists(path)) throw std::runtime_error(fmt::format("config file not found: {}", path.string()));
  const std::string text = read_text_file(path);
  try {
    return experiment_from_json(parse_json(text, ""), std::move(base));
  } catch (const SchemaError& e) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void check_experiment(const ExperimentConfig& c) {
  check_space(c.space_small);
  check_space(c.space_large);
  check_config(c.evo_small);
  check_config(c.evo_large);
  if (c.space_small.n_blocks != c.space_large.n_blocks) {
    throw std::invalid_argument(fmt::format("space_small and space_large block counts differ ({} vs {})",
                                            c.space_small.n_blocks, c.space_large.n_blocks));
  }
  if (c.landscape.shift < 0.0 || c.landscape.shift > 1.0) {
    throw std::invalid_argument(fmt::format("landscape.shift {} outside [0, 1]", c.landscape.shift));
  }
  if (!(c.landscape.noise_std >= 0.0)) throw std::invalid_argument("landscape.noise_std must be >= 0");
  if (c.evaluator == EvaluatorKind::External) {
    if (c.endpoint.empty()) throw std::invalid_argument("external evaluator requires an endpoint");
    Endpoint::parse(c.endpoint);
  }
  if (!(c.search_timeout_seconds > 0.0) || !(c.rerank_timeout_seconds > 0.0)) {
    throw std::invalid_argument("timeouts must be positive");
  }
}

std::string config_hash(const ExperimentConfig& c, std::string_view mode) {
  Fnv1a64 h;
  h.add_bytes(to_json(c).dump());
  h.add_byte(0);
  h.add_bytes(mode);
  return fmt::format("{:016x}", h.value());
}

EvaluatorPair make_evaluators(const ExperimentConfig& c, Task task) {
  const SearchSpaceConfig& space = task == Task::Small ? c.space_small : c.space_large;
  EvaluatorPair pair;
  if (c.evaluator == EvaluatorKind::Synthetic) {
    pair.search = std::make_unique<SyntheticEvaluator>(space, c.landscape, task, c.cost);
    return pair;
  }
  ExternalTimeouts t;
  t.search = std::chrono::milliseconds(std::llround(c.search_timeout_seconds * 1000.0));
  t.rerank = std::chrono::milliseconds(std::llround(c.rerank_timeout_seconds * 1000.0));
  pair.search = std::make_unique<ExternalEvaluator>(Endpoint::parse(c.endpoint), space, t);
  return pair;
}

}  // namespace eatnas
