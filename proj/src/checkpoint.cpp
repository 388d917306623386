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


#include "eatnas/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace eatnas {
namespace {

std::string join_path(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where, "expected an object");
}

void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw SchemaError(join_path(where, key), "unknown key");
  }
}

const Json& need(const Json& j, std::string_view key, const std::string& where) {
  require_object(j, where);
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(join_path(where, key), "missing");
  return *it;
}

std::int64_t as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw SchemaError(path, "integer out of range");
  }
  return v.get<std::int64_t>();
}

int as_int32(const Json& v, const std::string& path) {
  const auto x = as_int(v, path);
  if (x < INT32_MIN || x > INT32_MAX) throw SchemaError(path, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t as_u64(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw SchemaError(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const Json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  return v;
}

// Overrides `out` when `key` is present.
template <typename T, typename F>
void maybe(const Json& j, std::string_view key, const std::string& where, T& out, F convert) {
  auto it = j.find(key);
  if (it != j.end()) out = convert(*it, join_path(where, key));
}

std::string index_path(const std::string& where, std::size_t i) { return fmt::format("{}[{}]", where, i); }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& v, const std::string& path) {
  if (v.is_null()) return std::nullopt;
  return as_double(v, path);
}

std::string_view phase_name(EnginePhase p) {
  switch (p) {
    case EnginePhase::Empty: return "empty";
    case EnginePhase::Initializing: return "initializing";
    case EnginePhase::Evolving: return "evolving";
  }
  return "empty";
}

EnginePhase parse_phase(const std::string& s, const std::string& path) {
  if (s == "empty") return EnginePhase::Empty;
  if (s == "initializing") return EnginePhase::Initializing;
  if (s == "evolving") return EnginePhase::Evolving;
  throw SchemaError(path, fmt::format("unknown phase '{}'", s));
}

}  // namespace

Json to_json(const SearchSpaceConfig& s) {
  Json j;
  j["n_blocks"] = s.n_blocks;
  j["stem_channels"] = s.stem_channels;
  j["stem_downsample"] = s.stem_downsample;
  j["downsample_blocks"] = s.downsample_blocks;
  j["expansion_ratio_range"] = Json::array({s.expansion_ratio_range.lo, s.expansion_ratio_range.hi});
  j["layer_count_range"] =
      s.layer_count_range ? Json::array({s.layer_count_range->lo, s.layer_count_range->hi}) : Json(nullptr);
  j["input_resolution"] = s.input_resolution;
  j["num_classes"] = s.num_classes;
  return j;
}

SearchSpaceConfig space_from_json(const Json& j, SearchSpaceConfig s, const std::string& where) {
  check_keys(j,
             {"n_blocks", "stem_channels", "stem_downsample", "downsample_blocks", "expansion_ratio_range",
              "layer_count_range", "input_resolution", "num_classes"},
             where);
  maybe(j, "n_blocks", where, s.n_blocks, as_int32);
  maybe(j, "stem_channels", where, s.stem_channels, as_int32);
  maybe(j, "stem_downsample", where, s.stem_downsample, as_bool);
  maybe(j, "input_resolution", where, s.input_resolution, as_int32);
  maybe(j, "num_classes", where, s.num_classes, as_int32);
  if (auto it = j.find("downsample_blocks"); it != j.end()) {
    const auto path = join_path(where, "downsample_blocks");
    s.downsample_blocks.clear();
    for (std::size_t i = 0; i < as_array(*it, path).size(); ++i) {
      s.downsample_blocks.push_back(as_int32((*it)[i], index_path(path, i)));
    }
  }
  if (auto it = j.find("expansion_ratio_range"); it != j.end()) {
    const auto path = join_path(where, "expansion_ratio_range");
    if (as_array(*it, path).size() != 2) throw SchemaError(path, "expected [lo, hi]");
    s.expansion_ratio_range = {as_double((*it)[0], path + "[0]"), as_double((*it)[1], path + "[1]")};
  }
  if (auto it = j.find("layer_count_range"); it != j.end()) {
    const auto path = join_path(where, "layer_count_range");
    if (it->is_null()) {
      s.layer_count_range.reset();
    } else {
      if (as_array(*it, path).size() != 2) throw SchemaError(path, "expected [lo, hi] or null");
      s.layer_count_range = IntRange{as_int32((*it)[0], path + "[0]"), as_int32((*it)[1], path + "[1]")};
    }
  }
  return s;
}

Json to_json(const EvolutionConfig& c) {
  Json j;
  j["population_size"] = c.population_size;
  j["sample_size"] = c.sample_size;
  j["rerank_k"] = c.rerank_k;
  j["max_steps"] = c.max_steps;
  j["window"] = c.window;
  j["epsilon"] = c.epsilon;
  j["checkpoint_every"] = c.checkpoint_every;
  j["eval_retries"] = c.eval_retries;
  j["max_resamples"] = c.max_resamples;
  j["search_epochs"] = c.search_epochs;
  j["rerank_epoch_multiple"] = c.rerank_epoch_multiple;
  j["size_metric"] = size_metric_name(c.size_metric);
  j["score"] = {{"target_size", c.score.target_size}, {"omega", c.score.omega}};
  j["quality"] = {{"target_std", c.quality.target_std}, {"alpha", c.quality.alpha}, {"beta", c.quality.beta}};
  j["cache"] = c.cache;
  j["include_seed_verbatim"] = c.include_seed_verbatim;
  j["perturb_retries"] = c.perturb_retries;
  j["random_arch_retries"] = c.random_arch_retries;
  j["share_weights"] = c.share_weights;
  j["weight_init"] = {{"mean", c.weight_init.mean},
                      {"std", c.weight_init.std},
                      {"seed", c.weight_init.seed},
                      {"fan_in_scaled", c.weight_init.fan_in_scaled}};
  j["parallel_evaluations"] = c.parallel_evaluations;
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

EvolutionConfig evolution_from_json(const Json& j, EvolutionConfig c, const std::string& where) {
  check_keys(j,
             {"population_size", "sample_size", "rerank_k", "max_steps", "window", "epsilon", "checkpoint_every",
              "eval_retries", "max_resamples", "search_epochs", "rerank_epoch_multiple", "size_metric", "score",
              "quality", "cache", "include_seed_verbatim", "perturb_retries", "random_arch_retries",
              "share_weights", "weight_init", "parallel_evaluations", "record_wall_time"},
             where);
  maybe(j, "population_size", where, c.population_size, as_int32);
  maybe(j, "sample_size", where, c.sample_size, as_int32);
  maybe(j, "rerank_k", where, c.rerank_k, as_int32);
  maybe(j, "max_steps", where, c.max_steps, as_int32);
  maybe(j, "window", where, c.window, as_int32);
  maybe(j, "epsilon", where, c.epsilon, as_double);
  maybe(j, "checkpoint_every", where, c.checkpoint_every, as_int32);
  maybe(j, "eval_retries", where, c.eval_retries, as_int32);
  maybe(j, "max_resamples", where, c.max_resamples, as_int32);
  maybe(j, "search_epochs", where, c.search_epochs, as_int32);
  maybe(j, "rerank_epoch_multiple", where, c.rerank_epoch_multiple, as_int32);
  if (auto it = j.find("size_metric"); it != j.end()) {
    const auto path = join_path(where, "size_metric");
    try {
      c.size_metric = parse_size_metric(as_string(*it, path));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(path, e.what());
    }
  }
  if (auto it = j.find("score"); it != j.end()) {
    const auto path = join_path(where, "score");
    check_keys(*it, {"target_size", "omega"}, path);
    maybe(*it, "target_size", path, c.score.target_size, as_double);
    maybe(*it, "omega", path, c.score.omega, as_double);
  }
  if (auto it = j.find("quality"); it != j.end()) {
    const auto path = join_path(where, "quality");
    check_keys(*it, {"target_std", "alpha", "beta"}, path);
    maybe(*it, "target_std", path, c.quality.target_std, as_double);
    maybe(*it, "alpha", path, c.quality.alpha, as_double);
    maybe(*it, "beta", path, c.quality.beta, as_double);
  }
  maybe(j, "cache", where, c.cache, as_bool);
  maybe(j, "include_seed_verbatim", where, c.include_seed_verbatim, as_bool);
  maybe(j, "perturb_retries", where, c.perturb_retries, as_int32);
  maybe(j, "random_arch_retries", where, c.random_arch_retries, as_int32);
  maybe(j, "share_weights", where, c.share_weights, as_bool);
  if (auto it = j.find("weight_init"); it != j.end()) {
    const auto path = join_path(where, "weight_init");
    check_keys(*it, {"mean", "std", "seed", "fan_in_scaled"}, path);
    maybe(*it, "mean", path, c.weight_init.mean, as_double);
    maybe(*it, "std", path, c.weight_init.std, as_double);
    maybe(*it, "seed", path, c.weight_init.seed, as_u64);
    maybe(*it, "fan_in_scaled", path, c.weight_init.fan_in_scaled, as_bool);
  }
  maybe(j, "parallel_evaluations", where, c.parallel_evaluations, as_int32);
  maybe(j, "record_wall_time", where, c.record_wall_time, as_bool);
  return c;
}

Json to_json(const ArchCode& a) { return Json::parse(encode(a)); }

ArchCode arch_from_json(const Json& j, const std::string& where) {
  try {
    return decode(j.dump());
  } catch (const DecodeError& e) {
    throw SchemaError(where, e.what());
  }
}

Json to_json(const EvalResult& r) {
  Json j;
  j["status"] = r.ok() ? "ok" : "failed";
  j["accuracy"] = r.accuracy;
  j["params"] = r.params;
  j["multadds"] = r.multadds;
  j["detail"] = r.detail;
  return j;
}

EvalResult eval_result_from_json(const Json& j, const std::string& where) {
  EvalResult r;
  const auto status = as_string(need(j, "status", where), join_path(where, "status"));
  if (status == "ok") {
    r.status = EvalStatus::Ok;
  } else if (status == "failed") {
    r.status = EvalStatus::Failed;
  } else {
    throw SchemaError(join_path(where, "status"), fmt::format("unknown status '{}'", status));
  }
  r.accuracy = as_double(need(j, "accuracy", where), join_path(where, "accuracy"));
  r.params = as_int(need(j, "params", where), join_path(where, "params"));
  r.multadds = as_int(need(j, "multadds", where), join_path(where, "multadds"));
  r.detail = as_string(need(j, "detail", where), join_path(where, "detail"));
  return r;
}

Json to_json(const ModelRecord& m) {
  Json j;
  j["arch"] = to_json(m.arch);
  j["accuracy"] = m.accuracy;
  j["size"] = m.size;
  j["score"] = m.score;
  j["params"] = m.params;
  j["multadds"] = m.multadds;
  j["birth_step"] = m.birth_step;
  j["eval_meta"] = {{"evaluator", m.meta.evaluator},
                    {"epochs", m.meta.epochs},
                    {"wall_seconds", m.meta.wall_seconds},
                    {"cache_hit", m.meta.cache_hit}};
  return j;
}

ModelRecord model_record_from_json(const Json& j, const std::string& where) {
  ModelRecord m;
  m.arch = arch_from_json(need(j, "arch", where), join_path(where, "arch"));
  m.accuracy = as_double(need(j, "accuracy", where), join_path(where, "accuracy"));
  m.size = as_double(need(j, "size", where), join_path(where, "size"));
  m.score = as_double(need(j, "score", where), join_path(where, "score"));
  m.params = as_int(need(j, "params", where), join_path(where, "params"));
  m.multadds = as_int(need(j, "multadds", where), join_path(where, "multadds"));
  m.birth_step = as_int(need(j, "birth_step", where), join_path(where, "birth_step"));
  const auto meta_path = join_path(where, "eval_meta");
  const Json& meta = need(j, "eval_meta", where);
  m.meta.evaluator = as_string(need(meta, "evaluator", meta_path), meta_path + ".evaluator");
  m.meta.epochs = as_int32(need(meta, "epochs", meta_path), meta_path + ".epochs");
  m.meta.wall_seconds = as_double(need(meta, "wall_seconds", meta_path), meta_path + ".wall_seconds");
  m.meta.cache_hit = as_bool(need(meta, "cache_hit", meta_path), meta_path + ".cache_hit");
  return m;
}

Json to_json(const StepRecord& s) {
  Json j;
  j["step"] = s.step;
  j["mean_score"] = s.mean_score;
  j["std"] = s.std;
  j["quality"] = s.quality;
  j["best_score"] = s.best_score;
  j["mean_accuracy"] = s.mean_accuracy;
  j["degenerate"] = s.degenerate;
  j["mutant_score"] = optional_number(s.mutant_score);
  j["sample_best_score"] = optional_number(s.sample_best_score);
  j["removed_score"] = optional_number(s.removed_score);
  return j;
}

StepRecord step_record_from_json(const Json& j, const std::string& where) {
  StepRecord s;
  s.step = as_int(need(j, "step", where), join_path(where, "step"));
  s.mean_score = as_double(need(j, "mean_score", where), join_path(where, "mean_score"));
  s.std = as_double(need(j, "std", where), join_path(where, "std"));
  s.quality = as_double(need(j, "quality", where), join_path(where, "quality"));
  s.best_score = as_double(need(j, "best_score", where), join_path(where, "best_score"));
  s.mean_accuracy = as_double(need(j, "mean_accuracy", where), join_path(where, "mean_accuracy"));
  s.degenerate = as_bool(need(j, "degenerate", where), join_path(where, "degenerate"));
  s.mutant_score = optional_from(need(j, "mutant_score", where), join_path(where, "mutant_score"));
  s.sample_best_score = optional_from(need(j, "sample_best_score", where), join_path(where, "sample_best_score"));
  s.removed_score = optional_from(need(j, "removed_score", where), join_path(where, "removed_score"));
  return s;
}

namespace {

template <typename T>
Json array_of(const std::vector<T>& items) {
  Json a = Json::array();
  for (const auto& x : items) a.push_back(to_json(x));
  return a;
}

template <typename T, typename F>
std::vector<T> vector_from(const Json& j, std::string_view key, const std::string& where, F convert) {
  const auto path = join_path(where, key);
  const Json& a = as_array(need(j, key, where), path);
  std::vector<T> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(convert(a[i], index_path(path, i)));
  return out;
}

}  // namespace

Json to_json(const EngineState& e) {
  Json j;
  j["phase"] = phase_name(e.phase);
  j["step"] = e.population.step;
  j["next_birth"] = e.population.next_birth;
  j["converged"] = e.converged;
  j["members"] = array_of(e.population.members);
  Json pending = Json::array();
  for (const auto& a : e.population.pending) pending.push_back(to_json(a));
  j["pending"] = std::move(pending);
  j["history"] = array_of(e.population.history);
  j["rng_state"] = e.rng_state;
  Json cache = Json::array();
  for (const auto& [key, result] : e.cache) cache.push_back({{"key", key}, {"result", to_json(result)}});
  j["cache"] = std::move(cache);
  j["cache_stats"] = {{"hits", e.cache_stats.hits}, {"misses", e.cache_stats.misses}};
  return j;
}

EngineState engine_state_from_json(const Json& j, const std::string& where) {
  EngineState e;
  e.phase = parse_phase(as_string(need(j, "phase", where), join_path(where, "phase")), join_path(where, "phase"));
  e.population.step = as_int(need(j, "step", where), join_path(where, "step"));
  e.population.next_birth = as_int(need(j, "next_birth", where), join_path(where, "next_birth"));
  e.converged = as_bool(need(j, "converged", where), join_path(where, "converged"));
  e.population.members = vector_from<ModelRecord>(j, "members", where, model_record_from_json);
  e.population.pending = vector_from<ArchCode>(j, "pending", where, arch_from_json);
  e.population.history = vector_from<StepRecord>(j, "history", where, step_record_from_json);
  e.rng_state = as_string(need(j, "rng_state", where), join_path(where, "rng_state"));
  const auto cache_path = join_path(where, "cache");
  const Json& cache = as_array(need(j, "cache", where), cache_path);
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto p = index_path(cache_path, i);
    e.cache.emplace(as_string(need(cache[i], "key", p), p + ".key"),
                    eval_result_from_json(need(cache[i], "result", p), p + ".result"));
  }
  const auto stats_path = join_path(where, "cache_stats");
  const Json& stats = need(j, "cache_stats", where);
  e.cache_stats.hits = as_int(need(stats, "hits", stats_path), stats_path + ".hits");
  e.cache_stats.misses = as_int(need(stats, "misses", stats_path), stats_path + ".misses");
  return e;
}

Json to_json(const RerankCandidate& c) {
  Json j;
  j["arch"] = to_json(c.arch);
  j["search_score"] = c.search_score;
  j["birth_step"] = c.birth_step;
  j["result"] = to_json(c.result);
  return j;
}

namespace {

RerankCandidate rerank_candidate_from_json(const Json& j, const std::string& where) {
  RerankCandidate c;
  c.arch = arch_from_json(need(j, "arch", where), join_path(where, "arch"));
  c.search_score = as_double(need(j, "search_score", where), join_path(where, "search_score"));
  c.birth_step = as_int(need(j, "birth_step", where), join_path(where, "birth_step"));
  c.result = eval_result_from_json(need(j, "result", where), join_path(where, "result"));
  return c;
}

}  // namespace

Json to_json(const StageReport& r) {
  Json j;
  j["name"] = r.name;
  j["steps"] = r.steps;
  j["converged"] = r.converged;
  j["chosen"] = to_json(r.chosen);
  j["chosen_accuracy"] = r.chosen_accuracy;
  j["cache"] = {{"hits", r.cache.hits}, {"misses", r.cache.misses}};
  j["wall_seconds"] = r.wall_seconds;
  j["history"] = array_of(r.history);
  Json rerank = Json::array();
  for (const auto& c : r.rerank) rerank.push_back(to_json(c));
  j["rerank"] = std::move(rerank);
  j["final_population"] = array_of(r.final_population);
  return j;
}

StageReport stage_report_from_json(const Json& j, const std::string& where) {
  StageReport r;
  r.name = as_string(need(j, "name", where), join_path(where, "name"));
  r.steps = as_int(need(j, "steps", where), join_path(where, "steps"));
  r.converged = as_bool(need(j, "converged", where), join_path(where, "converged"));
  r.chosen = arch_from_json(need(j, "chosen", where), join_path(where, "chosen"));
  r.chosen_accuracy = as_double(need(j, "chosen_accuracy", where), join_path(where, "chosen_accuracy"));
  const auto cache_path = join_path(where, "cache");
  const Json& cache = need(j, "cache", where);
  r.cache.hits = as_int(need(cache, "hits", cache_path), cache_path + ".hits");
  r.cache.misses = as_int(need(cache, "misses", cache_path), cache_path + ".misses");
  r.wall_seconds = as_double(need(j, "wall_seconds", where), join_path(where, "wall_seconds"));
  r.history = vector_from<StepRecord>(j, "history", where, step_record_from_json);
  r.rerank = vector_from<RerankCandidate>(j, "rerank", where, rerank_candidate_from_json);
  r.final_population = vector_from<ModelRecord>(j, "final_population", where, model_record_from_json);
  if (!r.consistent()) throw SchemaError(where, "step count does not match history length");
  return r;
}

Json to_json(const PipelineState& p) {
  Json j;
  j["stage_index"] = p.stage_index;
  j["done"] = p.done;
  j["engine"] = p.engine ? to_json(*p.engine) : Json(nullptr);
  j["completed"] = array_of(p.completed);
  return j;
}

PipelineState pipeline_state_from_json(const Json& j, const std::string& where) {
  PipelineState p;
  p.stage_index = as_u64(need(j, "stage_index", where), join_path(where, "stage_index"));
  p.done = as_bool(need(j, "done", where), join_path(where, "done"));
  const Json& engine = need(j, "engine", where);
  if (!engine.is_null()) p.engine = engine_state_from_json(engine, join_path(where, "engine"));
  p.completed = vector_from<StageReport>(j, "completed", where, stage_report_from_json);
  return p;
}

Json checkpoint_to_json(const CheckpointFile& c) {
  Json j;
  j["schema"] = kCheckpointSchema;
  j["mode"] = c.mode;
  j["config_hash"] = c.config_hash;
  j["pipeline"] = to_json(c.state);
  return j;
}

CheckpointFile checkpoint_from_json(const Json& j) {
  const auto schema = as_string(need(j, "schema", ""), "schema");
  if (schema != kCheckpointSchema) {
    throw SchemaError("schema", fmt::format("unsupported checkpoint version '{}' (expected '{}')", schema,
                                            kCheckpointSchema));
  }
  CheckpointFile c;
  c.mode = as_string(need(j, "mode", ""), "mode");
  c.config_hash = as_string(need(j, "config_hash", ""), "config_hash");
  c.state = pipeline_state_from_json(need(j, "pipeline", ""), "pipeline");
  return c;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(std::string_view text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(where, fmt::format("byte {}: syntax error", e.byte));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << text;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace eatnas
