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

// JSON serialization of configs, engine state, checkpoints and reports.
//
// Readers of config objects start from a caller-supplied base and override
// only the keys present, so partial files work. Unknown keys are rejected.

#ifndef EATNAS_CHECKPOINT_HPP_
#define EATNAS_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

#include "eatnas/evolution.hpp"
#include "eatnas/search_space.hpp"
#include "eatnas/transfer.hpp"

namespace eatnas {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kCheckpointSchema = "eatnas.checkpoint/1";
inline constexpr std::string_view kReportSchema = "eatnas.report/1";

// Malformed or unsupported serialized content. `where` is a key path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

Json to_json(const SearchSpaceConfig& s);
SearchSpaceConfig space_from_json(const Json& j, SearchSpaceConfig base, const std::string& where = "space");

Json to_json(const EvolutionConfig& c);
EvolutionConfig evolution_from_json(const Json& j, EvolutionConfig base, const std::string& where = "evolution");

Json to_json(const ArchCode& a);
ArchCode arch_from_json(const Json& j, const std::string& where = "arch");

Json to_json(const EvalResult& r);
EvalResult eval_result_from_json(const Json& j, const std::string& where);

Json to_json(const ModelRecord& m);
ModelRecord model_record_from_json(const Json& j, const std::string& where);

Json to_json(const StepRecord& s);
StepRecord step_record_from_json(const Json& j, const std::string& where);

Json to_json(const RerankCandidate& c);

Json to_json(const EngineState& e);
EngineState engine_state_from_json(const Json& j, const std::string& where = "engine");

Json to_json(const StageReport& r);
StageReport stage_report_from_json(const Json& j, const std::string& where = "stage");

Json to_json(const PipelineState& p);
PipelineState pipeline_state_from_json(const Json& j, const std::string& where = "pipeline");

struct CheckpointFile {
  std::string mode;
  std::string config_hash;
  PipelineState state;
};

Json checkpoint_to_json(const CheckpointFile& c);
// Throws SchemaError on a missing or different schema tag.
CheckpointFile checkpoint_from_json(const Json& j);

// Pretty-printed, newline-terminated.
std::string dump_json(const Json& j);
// Throws SchemaError with the byte offset on syntax errors.
Json parse_json(std::string_view text, const std::string& where);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace eatnas

#endif  // EATNAS_CHECKPOINT_HPP_
