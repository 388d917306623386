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

#include "eatnas/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "eatnas/perturbation.hpp"

namespace eatnas {

std::string_view size_metric_name(SizeMetric m) { return m == SizeMetric::Params ? "params" : "multadds"; }

SizeMetric parse_size_metric(std::string_view name) {
  if (name == "params") return SizeMetric::Params;
  if (name == "multadds") return SizeMetric::MultAdds;
  throw std::invalid_argument(fmt::format("unknown size metric \"{}\"", name));
}

void check_config(const EvolutionConfig& cfg) {
  if (cfg.population_size < 2) throw std::invalid_argument("population size must be >= 2");
  if (cfg.sample_size < 2 || cfg.sample_size > cfg.population_size) {
    throw std::invalid_argument(
        fmt::format("sample size {} outside [2, {}]", cfg.sample_size, cfg.population_size));
  }
  if (cfg.rerank_k < 1 || cfg.rerank_k > cfg.population_size) {
    throw std::invalid_argument(fmt::format("rerank k {} outside [1, {}]", cfg.rerank_k, cfg.population_size));
  }
  if (cfg.max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (cfg.window < 1) throw std::invalid_argument("convergence window must be >= 1");
  if (cfg.eval_retries < 0 || cfg.max_resamples < 1) throw std::invalid_argument("bad retry settings");
  if (cfg.search_epochs < 1 || cfg.rerank_epoch_multiple < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.parallel_evaluations < 1) throw std::invalid_argument("parallel_evaluations must be >= 1");
  check_params(cfg.score);
  check_params(cfg.quality);
  if (!(cfg.weight_init.std > 0.0)) throw std::invalid_argument("weight init std must be > 0");
}

std::vector<std::pair<std::int64_t, double>> Population::quality_history() const {
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(history.size());
  for (const auto& h : history) out.emplace_back(h.step, h.quality);
  return out;
}

const ModelRecord& Population::best() const {
  if (members.empty()) throw std::logic_error("empty population");
  return *std::max_element(members.begin(), members.end(), [](const ModelRecord& a, const ModelRecord& b) {
    return a.score != b.score ? a.score < b.score : a.birth_step < b.birth_step;
  });
}

double Population::mean_accuracy() const {
  if (members.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : members) sum += m.accuracy;
  return sum / static_cast<double>(members.size());
}

bool quality_converged(const std::vector<StepRecord>& history, int window, double epsilon) {
  const auto w = static_cast<std::size_t>(window);
  // history[0] is the initial population, so steps taken = size - 1.
  if (history.size() < 2 * w + 1) return false;
  const auto end = history.end();
  auto quality_less = [](const StepRecord& a, const StepRecord& b) { return a.quality < b.quality; };
  const double recent = std::max_element(end - static_cast<std::ptrdiff_t>(w), end, quality_less)->quality;
  const double earlier = std::max_element(end - static_cast<std::ptrdiff_t>(2 * w),
                                          end - static_cast<std::ptrdiff_t>(w), quality_less)->quality;
  return recent - earlier < epsilon;
}

EvolutionEngine::EvolutionEngine(EvolutionConfig cfg, SearchSpaceConfig space, Evaluator& evaluator, Rng rng,
                                 WeightStore* store)
    : cfg_(std::move(cfg)), space_(std::move(space)), evaluator_(&evaluator), store_(store), rng_(std::move(rng)) {
  check_config(cfg_);
  check_space(space_);
  if (cfg_.share_weights && store_ == nullptr) {
    throw std::invalid_argument("share_weights requires a weight store");
  }
}

std::optional<EvalResult> EvolutionEngine::evaluate_uncached(const ArchCode& arch, double& wall_seconds) {
  const EvalBudget budget{cfg_.search_epochs, EvalPurpose::Search};
  std::vector<std::string> share;
  WeightMap weights;
  if (cfg_.share_weights) {
    WeightInitSpec init = cfg_.weight_init;
    init.seed = derive_seed(cfg_.weight_init.seed, {static_cast<std::uint64_t>(state_.population.next_birth)});
    weights = derive_weights(arch, space_, *store_, init);
    for (const auto& [sig, m] : weights) {
      if (store_->lookup(sig)) share.push_back(to_string(sig));
    }
  }
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 0; attempt <= cfg_.eval_retries; ++attempt) {
    EvalResult r = cfg_.share_weights ? evaluator_->evaluate_shared(arch, budget, share)
                                      : evaluator_->evaluate(arch, budget);
    if (r.ok()) {
      wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (cfg_.share_weights) store_->commit_all(weights);
      return r;
    }
    spdlog::warn("evaluation attempt {} of {} failed: {}", attempt + 1, cfg_.eval_retries + 1, r.detail);
  }
  return std::nullopt;
}

std::optional<EvalResult> EvolutionEngine::evaluate_search(const ArchCode& arch, EvalMeta& meta) {
  meta.evaluator = evaluator_->id();
  meta.epochs = cfg_.search_epochs;
  std::string key;
  if (cfg_.cache) {
    key = encode(arch);
    if (const auto it = state_.cache.find(key); it != state_.cache.end()) {
      ++state_.cache_stats.hits;
      meta.cache_hit = true;
      return it->second;
    }
  }
  double wall = 0.0;
  auto r = evaluate_uncached(arch, wall);
  if (cfg_.record_wall_time) meta.wall_seconds = wall;
  if (r && cfg_.cache) {
    ++state_.cache_stats.misses;
    state_.cache.emplace(std::move(key), *r);
  }
  return r;
}

ModelRecord EvolutionEngine::make_record(const ArchCode& arch, const EvalResult& r, EvalMeta meta) {
  ModelRecord rec;
  rec.arch = arch;
  rec.accuracy = r.accuracy;
  rec.params = r.params;
  rec.multadds = r.multadds;
  rec.size = static_cast<double>(cfg_.size_metric == SizeMetric::Params ? r.params : r.multadds);
  rec.score = model_score(r.accuracy, rec.size, cfg_.score);
  rec.birth_step = state_.population.next_birth++;
  rec.meta = std::move(meta);
  return rec;
}

StepRecord EvolutionEngine::summarize() const {
  const auto& members = state_.population.members;
  std::vector<double> scores;
  scores.reserve(members.size());
  for (const auto& m : members) scores.push_back(m.score);
  const auto q = population_quality_breakdown(scores, cfg_.quality);
  StepRecord rec;
  rec.step = state_.population.step;
  rec.mean_score = q.mean;
  rec.std = q.std;
  rec.quality = q.quality;
  rec.degenerate = q.degenerate;
  rec.best_score = *std::max_element(scores.begin(), scores.end());
  rec.mean_accuracy = state_.population.mean_accuracy();
  if (q.degenerate) spdlog::info("step {}: degenerate population (all scores equal)", rec.step);
  return rec;
}

void EvolutionEngine::begin_init(std::vector<ArchCode> archs) {
  if (state_.phase != EnginePhase::Empty) throw std::logic_error("population already initialized");
  state_.phase = EnginePhase::Initializing;
  state_.population = Population{};
  state_.population.pending = std::move(archs);
  finish_init();
}

void EvolutionEngine::init_random() {
  std::vector<ArchCode> archs;
  archs.reserve(static_cast<std::size_t>(cfg_.population_size));
  for (int i = 0; i < cfg_.population_size; ++i) {
    archs.push_back(random_arch(space_, rng_, cfg_.random_arch_retries));
  }
  begin_init(std::move(archs));
}

void EvolutionEngine::init_seeded(const ArchCode& basic) {
  begin_init(seed_population(basic, cfg_.population_size, space_, rng_, cfg_.include_seed_verbatim,
                             cfg_.perturb_retries));
}

void EvolutionEngine::finish_init() {
  if (state_.phase != EnginePhase::Initializing) throw std::logic_error("no initialization in progress");
  auto& pop = state_.population;
  const bool parallel = cfg_.parallel_evaluations > 1 && evaluator_->thread_safe() && !cfg_.share_weights;

  while (!pop.pending.empty()) {
    const std::size_t batch =
        parallel ? std::min(pop.pending.size(), static_cast<std::size_t>(cfg_.parallel_evaluations)) : 1;

    if (parallel) {
      // Evaluate the batch's distinct uncached genomes concurrently, then fold
      // the results in order so cache accounting matches the sequential path.
      std::vector<std::string> keys;
      std::vector<ArchCode> todo;
      std::set<std::string> seen;
      for (std::size_t i = 0; i < batch; ++i) {
        std::string key = encode(pop.pending[i]);
        if (cfg_.cache && (state_.cache.contains(key) || seen.contains(key))) continue;
        seen.insert(key);
        keys.push_back(std::move(key));
        todo.push_back(pop.pending[i]);
      }
      const EvalBudget budget{cfg_.search_epochs, EvalPurpose::Search};
      std::vector<std::future<EvalResult>> futures;
      for (const auto& arch : todo) {
        futures.push_back(std::async(std::launch::async, [this, arch, budget] {
          EvalResult r;
          for (int attempt = 0; attempt <= cfg_.eval_retries; ++attempt) {
            r = evaluator_->evaluate(arch, budget);
            if (r.ok()) break;
          }
          return r;
        }));
      }
      std::map<std::string, EvalResult> fresh;
      for (std::size_t i = 0; i < futures.size(); ++i) fresh.emplace(keys[i], futures[i].get());

      std::size_t done = 0;
      for (; done < batch; ++done) {
        const ArchCode& arch = pop.pending[done];
        const std::string key = encode(arch);
        EvalMeta meta{evaluator_->id(), cfg_.search_epochs, 0.0, false};
        std::optional<EvalResult> r;
        if (cfg_.cache && state_.cache.contains(key)) {
          ++state_.cache_stats.hits;
          meta.cache_hit = true;
          r = state_.cache.at(key);
        } else if (auto it = fresh.find(key); it != fresh.end() && it->second.ok()) {
          r = it->second;
          if (cfg_.cache) {
            ++state_.cache_stats.misses;
            state_.cache.emplace(key, *r);
          } else {
            fresh.erase(it);
          }
        }
        if (!r) break;
        pop.members.push_back(make_record(arch, *r, std::move(meta)));
      }
      pop.pending.erase(pop.pending.begin(), pop.pending.begin() + static_cast<std::ptrdiff_t>(done));
      if (done < batch) {
        throw EvaluationFailed(fmt::format("initialization: evaluation of {} failed after {} attempts",
                                           encode(pop.pending.front()), cfg_.eval_retries + 1));
      }
      continue;
    }

    EvalMeta meta;
    const auto r = evaluate_search(pop.pending.front(), meta);
    if (!r) {
      throw EvaluationFailed(fmt::format("initialization: evaluation of {} failed after {} attempts",
                                         encode(pop.pending.front()), cfg_.eval_retries + 1));
    }
    pop.members.push_back(make_record(pop.pending.front(), *r, std::move(meta)));
    pop.pending.erase(pop.pending.begin());
  }

  pop.step = 0;
  pop.history.clear();
  pop.history.push_back(summarize());
  state_.phase = EnginePhase::Evolving;
  spdlog::debug("initialized population of {} (Q = {:.6f})", pop.members.size(), pop.history.back().quality);
}

void EvolutionEngine::step() {
  if (state_.phase != EnginePhase::Evolving) throw std::logic_error("population not initialized");
  auto& pop = state_.population;
  auto& members = pop.members;
  const std::size_t n = members.size();
  const auto s = static_cast<std::size_t>(cfg_.sample_size);

  for (int resample = 0; resample < cfg_.max_resamples; ++resample) {
    // Partial Fisher-Yates: the first s entries become a uniform sample.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) std::swap(idx[i], idx[i + rng_.uniform_index(n - i)]);

    std::size_t best = idx[0];
    std::size_t worst = idx[0];
    for (std::size_t i = 1; i < s; ++i) {
      const auto& c = members[idx[i]];
      const auto& b = members[best];
      const auto& w = members[worst];
      if (c.score > b.score || (c.score == b.score && c.birth_step > b.birth_step)) best = idx[i];
      if (c.score < w.score || (c.score == w.score && c.birth_step < w.birth_step)) worst = idx[i];
    }

    const ArchCode child = mutate(members[best].arch, space_, rng_, cfg_.perturb_retries);
    EvalMeta meta;
    const auto r = evaluate_search(child, meta);
    if (!r) {
      spdlog::warn("step {}: mutant discarded after {} failed attempts; resampling", pop.step + 1,
                   cfg_.eval_retries + 1);
      continue;
    }

    ModelRecord mutant = make_record(child, *r, std::move(meta));
    const double sample_best_score = members[best].score;
    const double removed_score = members[worst].score;
    const double mutant_score = mutant.score;
    members.erase(members.begin() + static_cast<std::ptrdiff_t>(worst));
    members.push_back(std::move(mutant));
    ++pop.step;

    StepRecord rec = summarize();
    rec.mutant_score = mutant_score;
    rec.sample_best_score = sample_best_score;
    rec.removed_score = removed_score;
    pop.history.push_back(rec);
    spdlog::debug("step={} mutant={:.6f} sample_best={:.6f} removed={:.6f} mean={:.6f} std={:.6f} Q={:.6f}",
                  rec.step, mutant_score, sample_best_score, removed_score, rec.mean_score, rec.std, rec.quality);
    return;
  }
  throw EvaluationFailed(
      fmt::format("step {}: {} consecutive mutants failed evaluation", pop.step + 1, cfg_.max_resamples));
}

RunOutcome EvolutionEngine::run_until_converged(const RunHooks& hooks) {
  if (state_.phase == EnginePhase::Initializing) finish_init();
  if (state_.phase != EnginePhase::Evolving) throw std::logic_error("population not initialized");
  auto& pop = state_.population;
  RunOutcome out;
  auto checkpoint = [&] {
    if (hooks.checkpoint) hooks.checkpoint(state());
  };

  for (;;) {
    if (state_.converged || quality_converged(pop.history, cfg_.window, cfg_.epsilon)) {
      state_.converged = true;
      out.converged = true;
      break;
    }
    if (pop.step >= cfg_.max_steps) break;
    if (hooks.halt_at_step && pop.step >= *hooks.halt_at_step) {
      out.halted = true;
      break;
    }
    step();
    if (cfg_.checkpoint_every > 0 && pop.step % cfg_.checkpoint_every == 0) checkpoint();
  }
  out.steps = pop.step;
  checkpoint();
  return out;
}

RerankResult EvolutionEngine::rerank_topk(Evaluator& strong) const {
  const auto& members = state_.population.members;
  const auto k = static_cast<std::size_t>(cfg_.rerank_k);
  if (members.size() < k) throw std::logic_error("rerank: population smaller than k");

  std::vector<const ModelRecord*> order;
  order.reserve(members.size());
  for (const auto& m : members) order.push_back(&m);
  std::stable_sort(order.begin(), order.end(), [](const ModelRecord* a, const ModelRecord* b) {
    return a->score != b->score ? a->score > b->score : a->birth_step > b->birth_step;
  });
  order.resize(k);

  const EvalBudget budget{cfg_.search_epochs * cfg_.rerank_epoch_multiple, EvalPurpose::Rerank};
  RerankResult out;
  out.candidates.resize(k);
  auto run = [&](std::size_t i) {
    EvalResult r;
    for (int attempt = 0; attempt <= cfg_.eval_retries; ++attempt) {
      r = strong.evaluate(order[i]->arch, budget);
      if (r.ok()) break;
    }
    return r;
  };
  if (cfg_.parallel_evaluations > 1 && strong.thread_safe()) {
    std::vector<std::future<EvalResult>> futures;
    for (std::size_t i = 0; i < k; ++i) futures.push_back(std::async(std::launch::async, run, i));
    for (std::size_t i = 0; i < k; ++i) out.candidates[i].result = futures[i].get();
  } else {
    for (std::size_t i = 0; i < k; ++i) out.candidates[i].result = run(i);
  }

  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < k; ++i) {
    auto& c = out.candidates[i];
    c.arch = order[i]->arch;
    c.search_score = order[i]->score;
    c.birth_step = order[i]->birth_step;
    if (!c.result.ok()) {
      spdlog::warn("rerank: candidate {} excluded: {}", i + 1, c.result.detail);
      continue;
    }
    if (!winner || c.result.accuracy > out.candidates[*winner].result.accuracy) winner = i;
  }
  if (!winner) throw EvaluationFailed(fmt::format("rerank: all {} candidates failed", k));
  out.best = out.candidates[*winner].arch;
  out.best_accuracy = out.candidates[*winner].result.accuracy;
  return out;
}

EngineState EvolutionEngine::state() const {
  EngineState s = state_;
  s.rng_state = rng_.save_state();
  return s;
}

void EvolutionEngine::restore(const EngineState& state) {
  state_ = state;
  rng_.restore_state(state.rng_state);
}

}  // namespace eatnas
