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
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "cli.hpp"
#include "eatnas/checkpoint.hpp"
#include "temp_dir.hpp"

using namespace eatnas;
using namespace eatnas::testing;

namespace {

constexpr const char* kSmallConfig = R"({
  "master_seed": 3,
  "evo_small": {"max_steps": 60, "checkpoint_every": 10},
  "evo_large": {"max_steps": 60, "checkpoint_every": 10}
})";

std::string write_config(const TempDir& dir, const std::string& text = kSmallConfig) {
  const auto path = dir / "config.json";
  std::ofstream(path) << text;
  return path;
}

long count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("transfer twice gives byte-identical reports") {
    TempDir dir;
    const auto cfg = write_config(dir);
    CHECK(cli::run({"transfer", "--config", cfg, "--seed", "7", "--out", dir / "a", "--log-level", "off"}) ==
          cli::kExitOk);
    CHECK(cli::run({"--mode", "transfer", "--config", cfg, "--seed", "7", "--out", dir / "b", "--log-level",
                    "off"}) == cli::kExitOk);
    const std::string a = read_text_file(dir / "a/report.json");
    CHECK(a == read_text_file(dir / "b/report.json"));
    const Json report = Json::parse(a);
    CHECK(report.at("schema") == kReportSchema);
    CHECK(report.at("config").at("master_seed") == 7);
  }

  TEST_CASE("exported curves have one row per history entry") {
    TempDir dir;
    const auto cfg = write_config(dir);
    REQUIRE(cli::run({"transfer", "--config", cfg, "--out", dir.path().string(), "--log-level", "off"}) == 0);
    REQUIRE(cli::run({"export-curves", "--report", dir / "report.json", "--out", dir / "curves.csv",
                      "--log-level", "off"}) == 0);
    const std::string csv = read_text_file(dir / "curves.csv");
    const Json report = Json::parse(read_text_file(dir / "report.json"));
    long steps = 0;
    for (const auto& st : report.at("stages")) steps += st.at("steps").get<long>();
    CHECK(count_lines(csv) == 1 + steps + 2);
    CHECK(csv.rfind("stage,step,mean_score,std,quality,best_score,mean_accuracy\n", 0) == 0);
    CHECK(csv == cli::curves_csv(report));
  }

  TEST_CASE("search and scratch modes write reports") {
    TempDir dir;
    const auto cfg = write_config(dir);
    CHECK(cli::run({"search", "--config", cfg, "--out", dir / "s", "--log-level", "off"}) == 0);
    CHECK(Json::parse(read_text_file(dir / "s/report.json")).at("stages").size() == 1);
    CHECK(cli::run({"scratch-baseline", "--config", cfg, "--out", dir / "b", "--log-level", "off"}) == 0);
    CHECK(Json::parse(read_text_file(dir / "b/report.json")).at("stages")[0].at("name") == "scratch");
    CHECK(cli::run({"rerank", "--report", dir / "s/report.json", "--out", dir / "r", "--log-level", "off"}) == 0);
    const Json rr = Json::parse(read_text_file(dir / "r/rerank.json"));
    CHECK(rr.at("candidates").size() == 8);
  }

  TEST_CASE("max-steps flag caps every stage") {
    TempDir dir;
    const auto cfg = write_config(dir);
    REQUIRE(cli::run({"transfer", "--config", cfg, "--max-steps", "12", "--out", dir.path().string(),
                      "--log-level", "off"}) == 0);
    const Json report = Json::parse(read_text_file(dir / "report.json"));
    for (const auto& st : report.at("stages")) CHECK(st.at("steps") == 12);
  }

  TEST_CASE("config errors exit with 1") {
    TempDir dir;
    CHECK(cli::run({"transfer", "--config", dir / "missing.json", "--log-level", "off"}) == cli::kExitConfigError);
    CHECK(cli::run({"bogus-mode", "--log-level", "off"}) == cli::kExitConfigError);
    CHECK(cli::run({"transfer", "--evaluator", "quantum", "--log-level", "off"}) == cli::kExitConfigError);
    const auto bad = write_config(dir, R"({"unknown_key": 1})");
    CHECK(cli::run({"transfer", "--config", bad, "--log-level", "off"}) == cli::kExitConfigError);
    CHECK(cli::run({"export-curves", "--report", dir / "nope.json", "--log-level", "off"}) ==
          cli::kExitConfigError);
  }

  TEST_CASE("runtime failures exit with 2") {
    TempDir dir;
    const auto cfg = write_config(dir);
    CHECK(cli::run({"search", "--config", cfg, "--evaluator", "external", "--endpoint", "127.0.0.1:1", "--out",
                    dir.path().string(), "--log-level", "off"}) == cli::kExitRuntimeError);
  }

  TEST_CASE("resume continues, refuses mismatches and is a no-op when done") {
    TempDir dir;
    const auto cfg = write_config(dir);
    const auto ck = dir / "ck";
    REQUIRE(cli::run({"transfer", "--config", cfg, "--out", dir / "full", "--log-level", "off"}) == 0);
    REQUIRE(cli::run({"transfer", "--config", cfg, "--checkpoint-dir", ck, "--out", dir / "part", "--halt-at",
                      "0:25", "--log-level", "off"}) == 0);
    CHECK_FALSE(std::filesystem::exists(dir / "part/report.json"));

    CHECK(cli::run({"transfer", "--config", cfg, "--seed", "99", "--checkpoint-dir", ck, "--out", dir / "part",
                    "--resume", "--log-level", "off"}) == cli::kExitConfigError);
    CHECK(cli::run({"scratch-baseline", "--config", cfg, "--checkpoint-dir", ck, "--out", dir / "part",
                    "--resume", "--log-level", "off"}) == cli::kExitConfigError);

    REQUIRE(cli::run({"transfer", "--config", cfg, "--checkpoint-dir", ck, "--out", dir / "part", "--resume",
                      "--log-level", "off"}) == 0);
    const std::string resumed = read_text_file(dir / "part/report.json");
    CHECK(resumed == read_text_file(dir / "full/report.json"));

    CHECK(cli::run({"transfer", "--config", cfg, "--checkpoint-dir", ck, "--out", dir / "part", "--resume",
                    "--log-level", "off"}) == 0);
    CHECK(read_text_file(dir / "part/report.json") == resumed);
  }
}
