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

#include "eatnas/transfer.hpp"

#include <chrono>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace eatnas {

PipelineResult run_pipeline(const std::vector<StageSpec>& stages, std::uint64_t master_seed,
                            const PipelineHooks& hooks, std::optional<PipelineState> resume, WeightStore* store) {
  PipelineState st = resume.value_or(PipelineState{});
  auto checkpoint = [&] {
    if (hooks.checkpoint) hooks.checkpoint(st);
  };

  while (st.stage_index < stages.size()) {
    const StageSpec& spec = stages[st.stage_index];
    if (spec.evaluator == nullptr) throw std::invalid_argument(fmt::format("stage {}: no evaluator", spec.name));
    const auto start = std::chrono::steady_clock::now();

    EvolutionEngine engine(spec.evolution, spec.space, *spec.evaluator,
                           derive_stream(master_seed, {spec.stream_key, kEngineStream}), store);
    if (st.engine) {
      engine.restore(*st.engine);
    } else {
      if (store) store->clear();
      try {
        if (spec.init == StageInit::Random) {
          engine.init_random();
        } else {
          if (st.completed.empty()) {
            throw std::invalid_argument(fmt::format("stage {}: seeded init needs a previous stage", spec.name));
          }
          engine.init_seeded(st.completed.back().chosen);
        }
      } catch (const EvaluationFailed&) {
        st.engine = engine.state();
        checkpoint();
        throw;
      }
    }
    spdlog::info("stage {}: population ready at step {}", spec.name, engine.population().step);

    RunHooks rh;
    rh.checkpoint = [&](const EngineState& es) {
      st.engine = es;
      checkpoint();
    };
    if (hooks.halt_at && hooks.halt_at->first == st.stage_index) rh.halt_at_step = hooks.halt_at->second;

    RunOutcome outcome;
    try {
      outcome = engine.run_until_converged(rh);
    } catch (const EvaluationFailed&) {
      st.engine = engine.state();
      checkpoint();
      throw;
    }
    if (outcome.halted) {
      st.engine = engine.state();
      checkpoint();
      return {st, false};
    }

    Evaluator& strong = spec.strong_evaluator ? *spec.strong_evaluator : *spec.evaluator;
    RerankResult rerank = engine.rerank_topk(strong);

    StageReport report;
    report.name = spec.name;
    report.steps = engine.population().step;
    report.converged = outcome.converged;
    report.history = engine.population().history;
    report.chosen = rerank.best;
    report.chosen_accuracy = rerank.best_accuracy;
    report.rerank = std::move(rerank.candidates);
    report.final_population = engine.population().members;
    report.cache = engine.cache_stats();
    if (hooks.record_wall_time) {
      report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    spdlog::info("stage {}: {} steps, converged={}, chosen accuracy {:.4f}", spec.name, report.steps,
                 report.converged, report.chosen_accuracy);

    st.completed.push_back(std::move(report));
    st.engine.reset();
    ++st.stage_index;
    checkpoint();
  }
  st.done = true;
  checkpoint();
  return {st, true};
}

void check_transfer(const TransferConfig& cfg) {
  check_space(cfg.space_small);
  check_space(cfg.space_large);
  if (cfg.space_small.n_blocks != cfg.space_large.n_blocks) {
    throw std::invalid_argument(fmt::format("transfer: stage block counts differ ({} vs {})",
                                            cfg.space_small.n_blocks, cfg.space_large.n_blocks));
  }
  if (!cfg.evaluator_small || !cfg.evaluator_large) throw std::invalid_argument("transfer: missing evaluator");
}

std::vector<StageSpec> transfer_stages(const TransferConfig& cfg) {
  check_transfer(cfg);
  StageSpec s1{"stage1", cfg.space_small, cfg.evo_small, cfg.evaluator_small, cfg.strong_small, StageInit::Random, 1};
  StageSpec s2{"stage2", cfg.space_large, cfg.evo_large, cfg.evaluator_large, cfg.strong_large,
               cfg.seed_stage2 ? StageInit::SeededFromPrevious : StageInit::Random, 2};
  return {s1, s2};
}

std::vector<StageSpec> scratch_stages(const SearchSpaceConfig& space, const EvolutionConfig& evo,
                                      Evaluator& evaluator, Evaluator* strong) {
  return {StageSpec{"scratch", space, evo, &evaluator, strong, StageInit::Random, 2}};
}

TransferReport run_eat(const TransferConfig& cfg, std::uint64_t master_seed, const PipelineHooks& hooks) {
  const auto result = run_pipeline(transfer_stages(cfg), master_seed, hooks);
  if (!result.finished) throw std::runtime_error("transfer halted before completion");
  TransferReport report;
  report.stage1 = result.state.completed.at(0);
  report.stage2 = result.state.completed.at(1);
  report.basic = report.stage1.chosen;
  report.target = report.stage2.chosen;
  return report;
}

StageReport run_from_scratch(const SearchSpaceConfig& space, const EvolutionConfig& evo, Evaluator& evaluator,
                             std::uint64_t master_seed, Evaluator* strong, const PipelineHooks& hooks) {
  const auto result = run_pipeline(scratch_stages(space, evo, evaluator, strong), master_seed, hooks);
  if (!result.finished) throw std::runtime_error("scratch run halted before completion");
  return result.state.completed.at(0);
}

}  // namespace eatnas
