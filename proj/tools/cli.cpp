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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "eatnas/external_evaluator.hpp"
#include "eatnas/logging.hpp"
#include "eatnas/run_config.hpp"
#include "eatnas/transfer.hpp"
#include "eatnas/weight_store.hpp"

namespace eatnas::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for anything the user can fix in flags or files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string mode;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string checkpoint_dir;
  std::string out;
  std::string report;
  std::optional<std::string> evaluator;
  std::optional<std::string> endpoint;
  std::optional<int> max_steps;
  bool resume = false;
  std::optional<std::string> log_level;
  std::string halt_at;
};

const std::vector<std::string> kModes = {"search", "transfer", "scratch-baseline", "rerank", "export-curves"};

bool is_run_mode(const std::string& m) { return m == "search" || m == "transfer" || m == "scratch-baseline"; }

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    try {
      c = load_experiment(o.config_path, c);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.seed) c.master_seed = *o.seed;
  try {
    if (o.evaluator) c.evaluator = parse_evaluator_kind(*o.evaluator);
    if (o.endpoint) c.endpoint = *o.endpoint;
    if (o.max_steps) {
      c.evo_small.max_steps = *o.max_steps;
      c.evo_large.max_steps = *o.max_steps;
    }
    check_experiment(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::optional<std::pair<std::size_t, std::int64_t>> parse_halt(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    return std::make_pair(static_cast<std::size_t>(std::stoul(text.substr(0, colon))),
                          static_cast<std::int64_t>(std::stoll(text.substr(colon + 1))));
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("--halt-at expects STAGE:STEP, got '{}'", text));
  }
}

struct Stages {
  EvaluatorPair small;
  EvaluatorPair large;
  std::vector<StageSpec> specs;
};

Stages build_stages(const ExperimentConfig& c, const std::string& mode) {
  Stages s;
  if (mode == "search") {
    s.small = make_evaluators(c, Task::Small);
    s.specs.push_back(StageSpec{"search", c.space_small, c.evo_small, s.small.search.get(),
                                s.small.strong_or_null(), StageInit::Random, 1});
  } else if (mode == "transfer") {
    s.small = make_evaluators(c, Task::Small);
    s.large = make_evaluators(c, Task::Large);
    TransferConfig t;
    t.space_small = c.space_small;
    t.space_large = c.space_large;
    t.evo_small = c.evo_small;
    t.evo_large = c.evo_large;
    t.evaluator_small = s.small.search.get();
    t.evaluator_large = s.large.search.get();
    t.strong_small = s.small.strong_or_null();
    t.strong_large = s.large.strong_or_null();
    t.seed_stage2 = c.seed_stage2;
    s.specs = transfer_stages(t);
  } else {
    s.large = make_evaluators(c, Task::Large);
    s.specs = scratch_stages(c.space_large, c.evo_large, *s.large.search, s.large.strong_or_null());
  }
  return s;
}

Json make_report(const ExperimentConfig& c, const std::string& mode, const std::string& hash,
                 const PipelineState& state) {
  Json j;
  j["schema"] = kReportSchema;
  j["mode"] = mode;
  j["config_hash"] = hash;
  j["config"] = to_json(c);
  Json stages = Json::array();
  for (const auto& r : state.completed) stages.push_back(to_json(r));
  j["stages"] = std::move(stages);
  j["chosen"] = state.completed.empty() ? Json(nullptr) : to_json(state.completed.back().chosen);
  if (mode == "transfer" && state.completed.size() == 2) {
    j["basic"] = to_json(state.completed[0].chosen);
    j["target"] = to_json(state.completed[1].chosen);
  }
  return j;
}

fs::path report_path(const Options& o) {
  if (!o.report.empty()) return o.report;
  return fs::path(o.out.empty() ? "." : o.out) / "report.json";
}

void ensure_dir(const fs::path& dir, const char* what) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError(fmt::format("cannot create {} {}", what, dir.string()));
}

int run_search_mode(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const std::string hash = config_hash(cfg, o.mode);
  const auto halt = parse_halt(o.halt_at);
  const fs::path report_file = report_path(o);
  ensure_dir(report_file.has_parent_path() ? report_file.parent_path() : fs::path("."), "output directory");

  std::optional<fs::path> ckpt_file;
  if (!o.checkpoint_dir.empty()) {
    ensure_dir(o.checkpoint_dir, "checkpoint directory");
    ckpt_file = fs::path(o.checkpoint_dir) / "checkpoint.json";
  }

  std::optional<PipelineState> resume_state;
  if (o.resume) {
    if (!ckpt_file) throw ConfigError("--resume requires --checkpoint-dir");
    if (!fs::exists(*ckpt_file)) throw ConfigError(fmt::format("no checkpoint at {}", ckpt_file->string()));
    CheckpointFile ck;
    try {
      ck = checkpoint_from_json(parse_json(read_text_file(*ckpt_file), ckpt_file->string()));
    } catch (const SchemaError& e) {
      throw ConfigError(fmt::format("{}: {}", ckpt_file->string(), e.what()));
    }
    if (ck.mode != o.mode) {
      throw ConfigError(fmt::format("checkpoint {} was written by mode '{}', not '{}'", ckpt_file->string(), ck.mode,
                                    o.mode));
    }
    if (ck.config_hash != hash) {
      throw ConfigError(fmt::format("checkpoint {} has config hash {} but the current config hashes to {}; refusing "
                                    "to resume",
                                    ckpt_file->string(), ck.config_hash, hash));
    }
    if (ck.state.done) {
      spdlog::info("run already complete; nothing to do");
      if (!fs::exists(report_file)) write_text_file_atomic(report_file, dump_json(make_report(cfg, o.mode, hash, ck.state)));
      return kExitOk;
    }
    resume_state = std::move(ck.state);
    spdlog::info("resuming at stage {}", resume_state->stage_index);
  }

  Stages stages;
  try {
    stages = build_stages(cfg, o.mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  WeightStore store;
  const bool share = std::any_of(stages.specs.begin(), stages.specs.end(),
                                 [](const StageSpec& s) { return s.evolution.share_weights; });

  PipelineHooks hooks;
  hooks.halt_at = halt;
  hooks.record_wall_time = cfg.record_wall_time;
  if (ckpt_file) {
    hooks.checkpoint = [&](const PipelineState& st) {
      write_text_file_atomic(*ckpt_file, dump_json(checkpoint_to_json({o.mode, hash, st})));
    };
  }

  const PipelineResult result =
      run_pipeline(stages.specs, cfg.master_seed, hooks, std::move(resume_state), share ? &store : nullptr);
  if (!result.finished) {
    spdlog::info("halted at stage {} step {}", result.state.stage_index,
                 result.state.engine ? result.state.engine->population.step : 0);
    return kExitOk;
  }
  write_text_file_atomic(report_file, dump_json(make_report(cfg, o.mode, hash, result.state)));
  spdlog::info("report written to {}", report_file.string());
  return kExitOk;
}

Json load_report(const Options& o) {
  if (o.report.empty()) throw ConfigError(fmt::format("mode {} requires --report", o.mode));
  if (!fs::exists(o.report)) throw ConfigError(fmt::format("report file not found: {}", o.report));
  Json j;
  try {
    j = parse_json(read_text_file(o.report), o.report);
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kReportSchema) {
    throw ConfigError(fmt::format("{}: not a report (expected schema '{}')", o.report, kReportSchema));
  }
  return j;
}

int run_export_mode(const Options& o) {
  const Json report = load_report(o);
  std::string csv;
  try {
    csv = curves_csv(report);
  } catch (const SchemaError& e) {
    throw ConfigError(fmt::format("{}: {}", o.report, e.what()));
  }
  if (o.out.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    const fs::path out(o.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path(), "output directory");
    write_text_file_atomic(out, csv);
  }
  return kExitOk;
}

int run_rerank_mode(const Options& o) {
  const Json report = load_report(o);
  ExperimentConfig cfg;
  std::vector<StageReport> stages;
  try {
    cfg = experiment_from_json(report.at("config"));
    for (std::size_t i = 0; i < report.at("stages").size(); ++i) {
      stages.push_back(stage_report_from_json(report["stages"][i], fmt::format("stages[{}]", i)));
    }
  } catch (const SchemaError& e) {
    throw ConfigError(fmt::format("{}: {}", o.report, e.what()));
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", o.report, e.what()));
  }
  if (stages.empty()) throw ConfigError(fmt::format("{}: report has no completed stages", o.report));
  if (o.evaluator) cfg.evaluator = parse_evaluator_kind(*o.evaluator);
  if (o.endpoint) cfg.endpoint = *o.endpoint;
  try {
    check_experiment(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const StageReport& last = stages.back();
  const bool small = last.name == "search" || last.name == "stage1";
  const Task task = small ? Task::Small : Task::Large;
  const SearchSpaceConfig& space = small ? cfg.space_small : cfg.space_large;
  const EvolutionConfig& evo = small ? cfg.evo_small : cfg.evo_large;
  EvaluatorPair ev = make_evaluators(cfg, task);

  EvolutionEngine engine(evo, space, *ev.search, Rng(0));
  EngineState st;
  st.phase = EnginePhase::Evolving;
  st.population.members = last.final_population;
  st.population.step = last.steps;
  st.population.history = last.history;
  st.rng_state = Rng(0).save_state();
  engine.restore(st);
  const RerankResult r = engine.rerank_topk(ev.strong ? *ev.strong : *ev.search);

  Json j;
  j["stage"] = last.name;
  j["chosen"] = to_json(r.best);
  j["chosen_accuracy"] = r.best_accuracy;
  Json cands = Json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  j["candidates"] = std::move(cands);
  const fs::path out = fs::path(o.out.empty() ? "." : o.out) / "rerank.json";
  ensure_dir(out.parent_path(), "output directory");
  write_text_file_atomic(out, dump_json(j));
  spdlog::info("rerank written to {}", out.string());
  return kExitOk;
}

}  // namespace

std::string curves_csv(const Json& report) {
  std::string out = "stage,step,mean_score,std,quality,best_score,mean_accuracy\n";
  const Json& stages = report.at("stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const StageReport r = stage_report_from_json(stages[i], fmt::format("stages[{}]", i));
    for (const auto& h : r.history) {
      out += fmt::format("{},{},{},{},{},{},{}\n", r.name, h.step, h.mean_score, h.std, h.quality, h.best_score,
                         h.mean_accuracy);
    }
  }
  return out;
}

int run(std::vector<std::string> args) {
  Options o;
  CLI::App app{"Evolutionary architecture search with elastic transfer"};
  app.set_version_flag("--version", "eatnas 0.1.0");
  std::string positional_mode;
  app.add_option("mode_positional", positional_mode, "Mode (same as --mode)")
      ->check(CLI::IsMember(kModes));
  app.add_option("--mode", o.mode, "search | transfer | scratch-baseline | rerank | export-curves")
      ->check(CLI::IsMember(kModes));
  app.add_option("--config", o.config_path, "Experiment config (JSON)");
  app.add_option("--seed", o.seed, "Master seed (overrides the config)");
  app.add_option("--checkpoint-dir", o.checkpoint_dir, "Directory for checkpoint.json");
  app.add_option("--out", o.out, "Output directory (run modes) or CSV path (export-curves)");
  app.add_option("--report", o.report, "Report path (input for rerank/export-curves)");
  app.add_option("--evaluator", o.evaluator, "synthetic | external")
      ->check(CLI::IsMember({"synthetic", "external"}));
  app.add_option("--endpoint", o.endpoint, "HOST:PORT or stdio:CMD");
  app.add_option("--max-steps", o.max_steps, "Cap on evolution steps per stage")->check(CLI::NonNegativeNumber);
  app.add_flag("--resume", o.resume, "Continue from the checkpoint in --checkpoint-dir");
  app.add_option("--log-level", o.log_level, "trace | debug | info | warn | error | off (default: EATNAS_LOG)");
  app.add_option("--halt-at", o.halt_at, "STAGE:STEP")->group("");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    init_logging(o.log_level);
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "eatnas: error: {}\n", e.what());
    return kExitConfigError;
  }

  if (!positional_mode.empty() && !o.mode.empty() && positional_mode != o.mode) {
    fmt::print(stderr, "eatnas: error: conflicting modes '{}' and '{}'\n", positional_mode, o.mode);
    return kExitConfigError;
  }
  if (o.mode.empty()) o.mode = positional_mode;
  if (o.mode.empty()) {
    fmt::print(stderr, "eatnas: error: a mode is required ({})\n", fmt::join(kModes, ", "));
    return kExitConfigError;
  }

  try {
    if (is_run_mode(o.mode)) return run_search_mode(o);
    if (o.mode == "export-curves") return run_export_mode(o);
    return run_rerank_mode(o);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "eatnas: error: {}\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "eatnas: runtime failure: {}\n", e.what());
    return kExitRuntimeError;
  }
}

}  // namespace eatnas::cli
