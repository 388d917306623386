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


#include <doctest.h>

#include "eatnas/synthetic_landscape.hpp"
#include "eatnas/transfer.hpp"

using namespace eatnas;

namespace {

struct Fixture {
  SearchSpaceConfig small = small_task_space();
  SearchSpaceConfig large = large_task_space();
  SyntheticEvaluator ev_small;
  SyntheticEvaluator ev_large;
  TransferConfig cfg;

  explicit Fixture(double rho, std::uint64_t seed = 3)
      : ev_small(small, LandscapeConfig{seed, rho, 0.0, false}, Task::Small),
        ev_large(large, LandscapeConfig{seed, rho, 0.0, false}, Task::Large) {
    cfg.space_small = small;
    cfg.space_large = large;
    cfg.evo_small.checkpoint_every = 0;
    cfg.evo_small.max_steps = 150;
    cfg.evo_large = large_task_evolution();
    cfg.evo_large.checkpoint_every = 0;
    cfg.evo_large.max_steps = 150;
    cfg.evaluator_small = &ev_small;
    cfg.evaluator_large = &ev_large;
  }
};

}  // namespace

TEST_SUITE("transfer") {
  TEST_CASE("stage two starts from perturbations of the basic architecture") {
    Fixture f(0.8);
    PipelineHooks hooks;
    hooks.halt_at = std::pair<std::size_t, std::int64_t>{1, 0};
    const PipelineResult r = run_pipeline(transfer_stages(f.cfg), 5, hooks);
    REQUIRE_FALSE(r.finished);
    REQUIRE(r.state.engine.has_value());
    const ArchCode& basic = r.state.completed.at(0).chosen;
    CHECK(r.state.engine->population.members.size() == 64);
    for (const auto& m : r.state.engine->population.members) {
      CHECK(blocks_beyond_one_edit(basic, m.arch) == 0);
      CHECK(validate(m.arch, f.large).ok());
    }
  }

  TEST_CASE("same seed gives identical reports") {
    Fixture f(0.8);
    const TransferReport a = run_eat(f.cfg, 9);
    const TransferReport b = run_eat(f.cfg, 9);
    CHECK(a.basic == b.basic);
    CHECK(a.target == b.target);
    CHECK(a.stage1.history == b.stage1.history);
    CHECK(a.stage2.history == b.stage2.history);
    CHECK(a.stage2.final_population == b.stage2.final_population);
    CHECK(a.stage1.consistent());
    CHECK(a.stage2.consistent());
  }

  TEST_CASE("random stage two equals the scratch baseline") {
    Fixture f(0.3);
    f.cfg.seed_stage2 = false;
    const TransferReport eat = run_eat(f.cfg, 11);
    const StageReport scratch = run_from_scratch(f.large, f.cfg.evo_large, f.ev_large, 11);
    CHECK(eat.stage2.history == scratch.history);
    CHECK(eat.stage2.chosen == scratch.chosen);
  }

  TEST_CASE("identical tasks keep the seed's accuracy") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Fixture f(1.0, seed);
      f.cfg.space_large = f.small;
      f.cfg.evo_large = f.cfg.evo_small;
      f.cfg.evo_large.include_seed_verbatim = true;
      SyntheticEvaluator same(f.small, LandscapeConfig{seed, 1.0, 0.0, false}, Task::Large);
      f.cfg.evaluator_large = &same;
      const TransferReport r = run_eat(f.cfg, seed);
      CHECK(r.stage2.chosen_accuracy >= r.stage1.chosen_accuracy);
    }
  }

  TEST_CASE("halted pipelines resume to the same result") {
    Fixture f(0.8);
    const PipelineResult full = run_pipeline(transfer_stages(f.cfg), 21);
    REQUIRE(full.finished);
    PipelineHooks hooks;
    hooks.halt_at = std::pair<std::size_t, std::int64_t>{0, 40};
    const PipelineResult part = run_pipeline(transfer_stages(f.cfg), 21, hooks);
    REQUIRE_FALSE(part.finished);
    const PipelineResult rest = run_pipeline(transfer_stages(f.cfg), 21, {}, part.state);
    REQUIRE(rest.finished);
    REQUIRE(rest.state.completed.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(rest.state.completed[i].history == full.state.completed[i].history);
      CHECK(rest.state.completed[i].chosen == full.state.completed[i].chosen);
    }
  }

  TEST_CASE("stage block counts must agree") {
    Fixture f(0.8);
    f.cfg.space_large.n_blocks = 6;
    CHECK_THROWS_AS(check_transfer(f.cfg), std::invalid_argument);
    Fixture g(0.8);
    g.cfg.evaluator_large = nullptr;
    CHECK_THROWS_AS(check_transfer(g.cfg), std::invalid_argument);
  }
}
