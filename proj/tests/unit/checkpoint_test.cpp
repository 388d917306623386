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


#include <string>

#include <doctest.h>

#include "eatnas/checkpoint.hpp"
#include "eatnas/run_config.hpp"
#include "eatnas/synthetic_landscape.hpp"
#include "eatnas/transfer.hpp"
#include "temp_dir.hpp"

using namespace eatnas;
using namespace eatnas::testing;

namespace {

EngineState sample_state(int steps) {
  const SearchSpaceConfig s = small_task_space();
  SyntheticEvaluator ev(s, LandscapeConfig{1, 1.0, 0.0, false}, Task::Small);
  EvolutionConfig c;
  c.checkpoint_every = 0;
  c.max_steps = steps;
  EvolutionEngine engine(c, s, ev, Rng(1));
  engine.init_random();
  engine.run_until_converged();
  return engine.state();
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("engine state survives a text round trip") {
    const EngineState st = sample_state(25);
    const std::string text = dump_json(to_json(st));
    const EngineState back = engine_state_from_json(parse_json(text, "test"));
    CHECK(back == st);
    CHECK(dump_json(to_json(back)) == text);
  }

  TEST_CASE("resumed engine matches an uninterrupted one") {
    const SearchSpaceConfig s = small_task_space();
    SyntheticEvaluator ev(s, LandscapeConfig{1, 1.0, 0.0, false}, Task::Small);
    EvolutionConfig c;
    c.checkpoint_every = 0;
    c.max_steps = 60;
    EvolutionEngine full(c, s, ev, Rng(1));
    full.init_random();
    full.run_until_converged();

    const EngineState half = sample_state(25);
    EvolutionEngine resumed(c, s, ev, Rng(999));
    resumed.restore(engine_state_from_json(parse_json(dump_json(to_json(half)), "test")));
    resumed.run_until_converged();
    CHECK(resumed.state() == full.state());
  }

  TEST_CASE("checkpoint files carry schema, mode and hash") {
    CheckpointFile f;
    f.mode = "transfer";
    f.config_hash = "0123456789abcdef";
    f.state.stage_index = 1;
    f.state.engine = sample_state(5);
    const Json j = checkpoint_to_json(f);
    CHECK(j.at("schema") == kCheckpointSchema);
    const CheckpointFile back = checkpoint_from_json(j);
    CHECK(back.mode == "transfer");
    CHECK(back.config_hash == f.config_hash);
    CHECK(back.state.stage_index == 1);
    CHECK(*back.state.engine == *f.state.engine);

    Json wrong = j;
    wrong["schema"] = "eatnas.checkpoint/0";
    CHECK_THROWS_AS(checkpoint_from_json(wrong), SchemaError);
  }

  TEST_CASE("parse errors name the byte offset") {
    try {
      parse_json("{\"a\": ", "cfg.json");
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("cfg.json") != std::string::npos);
    }
  }

  TEST_CASE("atomic write replaces file content") {
    TempDir dir;
    const auto path = dir / "x.json";
    write_text_file_atomic(path, "one\n");
    write_text_file_atomic(path, "two\n");
    CHECK(read_text_file(path) == "two\n");
    CHECK_THROWS(read_text_file(dir / "missing.json"));
  }
}

TEST_SUITE("run_config") {
  TEST_CASE("defaults follow the two task presets") {
    const ExperimentConfig c;
    CHECK(c.evo_small.size_metric == SizeMetric::Params);
    CHECK(c.evo_small.score.target_size == 3.0e6);
    CHECK(c.evo_large.size_metric == SizeMetric::MultAdds);
    CHECK(c.evo_large.score.target_size == 5.0e8);
    CHECK(c.space_small == small_task_space());
    CHECK(c.space_large == large_task_space());
    CHECK_NOTHROW(check_experiment(c));
  }

  TEST_CASE("config round trip and partial overrides") {
    ExperimentConfig c;
    c.master_seed = 17;
    c.evo_small.max_steps = 123;
    c.landscape.shift = 0.5;
    CHECK(to_json(experiment_from_json(to_json(c))) == to_json(c));
    const ExperimentConfig partial = experiment_from_json(Json::parse(R"({"evo_large": {"window": 7}})"));
    CHECK(partial.evo_large.window == 7);
    CHECK(partial.evo_large.size_metric == SizeMetric::MultAdds);
    CHECK(partial.evo_small == ExperimentConfig{}.evo_small);
  }

  TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"sed": 1})")), SchemaError);
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"evo_small": {"windw": 1}})")), SchemaError);
  }

  TEST_CASE("config hash depends on config and mode") {
    ExperimentConfig a, b;
    b.master_seed = 1;
    CHECK(config_hash(a, "transfer") == config_hash(a, "transfer"));
    CHECK(config_hash(a, "transfer") != config_hash(b, "transfer"));
    CHECK(config_hash(a, "transfer") != config_hash(a, "search"));
    CHECK(config_hash(a, "search").size() == 16);
  }

  TEST_CASE("missing config file names the path") {
    try {
      load_experiment("/nonexistent/eatnas.json");
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("/nonexistent/eatnas.json") != std::string::npos);
    }
  }
}
