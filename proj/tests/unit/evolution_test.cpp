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


#include <algorithm>
#include <atomic>
#include <set>
#include <string>

#include <doctest.h>

#include "builders.hpp"
#include "eatnas/evolution.hpp"
#include "eatnas/synthetic_landscape.hpp"

using namespace eatnas;
using namespace eatnas::testing;

namespace {

// Counts calls and fails the ones listed in `fail_calls` (0-based).
class CountingEvaluator final : public Evaluator {
 public:
  CountingEvaluator(Evaluator& inner, std::set<int> fail_calls = {}) : inner_(inner), fail_(std::move(fail_calls)) {}
  EvalResult evaluate(const ArchCode& arch, const EvalBudget& budget) override {
    const int n = calls_++;
    if (fail_.contains(n)) return EvalResult::failed("injected");
    return inner_.evaluate(arch, budget);
  }
  std::string id() const override { return "counting"; }
  bool deterministic() const override { return true; }
  bool thread_safe() const override { return false; }
  int calls() const { return calls_; }

 private:
  Evaluator& inner_;
  std::set<int> fail_;
  int calls_ = 0;
};

class ConstantEvaluator final : public Evaluator {
 public:
  EvalResult evaluate(const ArchCode&, const EvalBudget&) override {
    EvalResult r;
    r.status = EvalStatus::Ok;
    r.accuracy = 0.5;
    r.params = 1000;
    r.multadds = 1000;
    return r;
  }
  std::string id() const override { return "constant"; }
  bool deterministic() const override { return true; }
  bool thread_safe() const override { return true; }
};

EvolutionConfig quiet_config() {
  EvolutionConfig c;
  c.checkpoint_every = 0;
  return c;
}

SyntheticEvaluator landscape_evaluator(const SearchSpaceConfig& s, std::uint64_t seed = 3) {
  return SyntheticEvaluator(s, LandscapeConfig{seed, 1.0, 0.0, false}, Task::Small);
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("initialization and steps keep the population size") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s);
    EvolutionEngine engine(quiet_config(), s, ev, Rng(1));
    engine.init_random();
    CHECK(engine.population().members.size() == 64);
    CHECK(engine.population().history.size() == 1);
    for (int i = 0; i < 30; ++i) {
      engine.step();
      CHECK(engine.population().members.size() == 64);
    }
    CHECK(engine.population().step == 30);
    CHECK(engine.population().history.size() == 31);
    for (const auto& m : engine.population().members) {
      CHECK(m.score == model_score(m.accuracy, m.size, engine.config().score));
    }
  }

  TEST_CASE("duplicate genomes in the initial population hit the cache") {
    const SearchSpaceConfig s = open_space(1);
    auto inner = landscape_evaluator(s);
    CountingEvaluator ev(inner);
    EvolutionEngine engine(quiet_config(), s, ev, Rng(2));
    engine.init_seeded(uniform_arch(1));
    std::set<std::string> distinct;
    for (const auto& m : engine.population().members) distinct.insert(encode(m.arch));
    CHECK(engine.cache_stats().hits == 64 - static_cast<std::int64_t>(distinct.size()));
    CHECK(engine.cache_stats().misses == static_cast<std::int64_t>(distinct.size()));
    CHECK(ev.calls() == static_cast<int>(distinct.size()));

    EvolutionConfig nocache = quiet_config();
    nocache.cache = false;
    CountingEvaluator ev2(inner);
    EvolutionEngine engine2(nocache, s, ev2, Rng(2));
    engine2.init_seeded(uniform_arch(1));
    CHECK(ev2.calls() == 64);
    CHECK(engine2.cache_stats().hits == 0);
  }

  TEST_CASE("full-population sampling never removes the global best") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s, 8);
    EvolutionConfig c = quiet_config();
    c.sample_size = c.population_size;
    EvolutionEngine engine(c, s, ev, Rng(3));
    engine.init_random();
    for (int i = 0; i < 200; ++i) {
      const ModelRecord best = engine.population().best();
      engine.step();
      const auto& members = engine.population().members;
      CHECK(std::any_of(members.begin(), members.end(), [&](const ModelRecord& m) { return m == best; }));
      CHECK(engine.population().history.back().removed_score <= engine.population().history.back().sample_best_score);
    }
  }

  TEST_CASE("best score is non-decreasing over 500 steps") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s, 4);
    EvolutionConfig c = quiet_config();
    c.max_steps = 500;
    c.epsilon = -1.0;
    EvolutionEngine engine(c, s, ev, Rng(4));
    engine.init_random();
    const RunOutcome out = engine.run_until_converged();
    CHECK(out.steps == 500);
    const auto& h = engine.population().history;
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i].best_score >= h[i - 1].best_score);
  }

  TEST_CASE("constant quality stops after two windows") {
    ConstantEvaluator ev;
    EvolutionEngine engine(quiet_config(), small_task_space(), ev, Rng(5));
    engine.init_random();
    const RunOutcome out = engine.run_until_converged();
    CHECK(out.converged);
    CHECK(out.steps == 2 * engine.config().window);
    CHECK(engine.population().history.back().degenerate);
  }

  TEST_CASE("step cap dominates the window") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s);
    EvolutionConfig c = quiet_config();
    c.max_steps = 5;
    EvolutionEngine engine(c, s, ev, Rng(6));
    engine.init_random();
    const RunOutcome out = engine.run_until_converged();
    CHECK(out.steps == 5);
    CHECK_FALSE(out.converged);
  }

  TEST_CASE("convergence test on hand-built histories") {
    std::vector<StepRecord> h(40);
    for (std::size_t i = 0; i < h.size(); ++i) h[i].quality = 1.0;
    CHECK_FALSE(quality_converged(h, 20, 1e-4));
    h.emplace_back().quality = 1.0;
    CHECK(quality_converged(h, 20, 1e-4));
    h.back().quality = 1.001;
    CHECK_FALSE(quality_converged(h, 20, 1e-4));
  }

  TEST_CASE("rerank with k=1 returns the score-best member") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s);
    EvolutionConfig c = quiet_config();
    c.rerank_k = 1;
    EvolutionEngine engine(c, s, ev, Rng(7));
    engine.init_random();
    const RerankResult r = engine.rerank_topk(ev);
    CHECK(r.best == engine.population().best().arch);
    CHECK(r.candidates.size() == 1);
    CHECK(r.best_accuracy == ev.evaluate(r.best, {5, EvalPurpose::Rerank}).accuracy);
  }

  TEST_CASE("rerank picks the accuracy argmax of the top k") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s, 11);
    EvolutionEngine engine(quiet_config(), s, ev, Rng(8));
    engine.init_random();
    for (int i = 0; i < 50; ++i) engine.step();
    std::vector<ModelRecord> members = engine.population().members;
    std::sort(members.begin(), members.end(), [](const ModelRecord& a, const ModelRecord& b) {
      return a.score != b.score ? a.score > b.score : a.birth_step > b.birth_step;
    });
    const ModelRecord* expected = &members[0];
    for (std::size_t i = 1; i < 8; ++i) {
      if (members[i].accuracy > expected->accuracy) expected = &members[i];
    }
    const RerankResult r = engine.rerank_topk(ev);
    CHECK(r.best == expected->arch);
  }

  TEST_CASE("engine runs are reproducible") {
    const SearchSpaceConfig s = small_task_space();
    auto ev = landscape_evaluator(s);
    EvolutionConfig c = quiet_config();
    c.max_steps = 120;
    EvolutionEngine a(c, s, ev, Rng(9)), b(c, s, ev, Rng(9));
    a.init_random();
    b.init_random();
    a.run_until_converged();
    b.run_until_converged();
    CHECK(a.state() == b.state());
  }

  TEST_CASE("failed mutants are retried, then discarded") {
    const SearchSpaceConfig s = small_task_space();
    auto inner = landscape_evaluator(s);
    EvolutionConfig c = quiet_config();
    c.cache = false;
    CountingEvaluator ev(inner, {64, 65, 66, 67});
    EvolutionEngine engine(c, s, ev, Rng(10));
    engine.init_random();
    CHECK(ev.calls() == 64);
    engine.step();
    // 3 failed attempts discard the first mutant; the resampled one fails once more.
    CHECK(ev.calls() == 64 + 3 + 2);
    CHECK(engine.population().step == 1);
  }

  TEST_CASE("initialization failure raises") {
    const SearchSpaceConfig s = small_task_space();
    auto inner = landscape_evaluator(s);
    EvolutionConfig c = quiet_config();
    c.cache = false;
    CountingEvaluator ev(inner, {0, 1, 2});
    EvolutionEngine engine(c, s, ev, Rng(11));
    CHECK_THROWS_AS(engine.init_random(), EvaluationFailed);
  }

  TEST_CASE("config checks") {
    EvolutionConfig c;
    c.sample_size = 1;
    CHECK_THROWS(check_config(c));
    c = EvolutionConfig{};
    c.rerank_k = 65;
    CHECK_THROWS(check_config(c));
    CHECK_NOTHROW(check_config(EvolutionConfig{}));
  }
}
