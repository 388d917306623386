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

#include "eatnas/protocol.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"

namespace eatnas {

using nlohmann::json;

namespace {

json parse_line(std::string_view line) {
  try {
    return json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ProtocolError(fmt::format("malformed message: {}", e.what()));
  }
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

template <typename T>
T field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ProtocolError(fmt::format("missing field \"{}\"", key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(fmt::format("field \"{}\" has the wrong type", key));
  }
}

SearchSpaceConfig space_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("space must be an object");
  SearchSpaceConfig s;
  s.n_blocks = field<int>(j, "n_blocks");
  s.stem_channels = field<int>(j, "stem_channels");
  s.stem_downsample = field<bool>(j, "stem_downsample");
  s.downsample_blocks = field<std::vector<int>>(j, "downsample_blocks");
  const auto er = field<std::vector<double>>(j, "expansion_ratio_range");
  if (er.size() != 2) throw ProtocolError("expansion_ratio_range must have two entries");
  s.expansion_ratio_range = {er[0], er[1]};
  const auto lc = j.find("layer_count_range");
  if (lc == j.end()) throw ProtocolError("missing field \"layer_count_range\"");
  if (!lc->is_null()) {
    const auto v = field<std::vector<int>>(j, "layer_count_range");
    if (v.size() != 2) throw ProtocolError("layer_count_range must have two entries");
    s.layer_count_range = IntRange{v[0], v[1]};
  }
  s.input_resolution = field<int>(j, "input_resolution");
  s.num_classes = field<int>(j, "num_classes");
  try {
    check_space(s);
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(fmt::format("invalid space: {}", e.what()));
  }
  return s;
}

}  // namespace

std::string encode_space(const SearchSpaceConfig& s) {
  const std::string layers =
      s.layer_count_range ? fmt::format("[{}, {}]", s.layer_count_range->lo, s.layer_count_range->hi) : "null";
  return fmt::format(
      "{{\"n_blocks\": {}, \"stem_channels\": {}, \"stem_downsample\": {}, \"downsample_blocks\": [{}], "
      "\"expansion_ratio_range\": [{}, {}], \"layer_count_range\": {}, \"input_resolution\": {}, "
      "\"num_classes\": {}}}",
      s.n_blocks, s.stem_channels, s.stem_downsample ? "true" : "false", fmt::join(s.downsample_blocks, ", "),
      format_real(s.expansion_ratio_range.lo), format_real(s.expansion_ratio_range.hi), layers,
      s.input_resolution, s.num_classes);
}

SearchSpaceConfig decode_space(std::string_view text) { return space_from_json(parse_line(text)); }

std::string hello_line() {
  return fmt::format("{{\"hello\": {}, \"proto\": {}}}", json_string(kWorkerName), kProtocolVersion);
}

void check_hello(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object() || !j.contains("hello")) throw ProtocolError("expected worker hello");
  if (field<std::string>(j, "hello") != kWorkerName) throw ProtocolError("unknown worker name in hello");
  const int proto = field<int>(j, "proto");
  if (proto != kProtocolVersion) {
    throw ProtocolError(fmt::format("unsupported protocol version {} (engine speaks {})", proto, kProtocolVersion));
  }
}

std::string encode_request(const EvalRequestMessage& req) {
  std::string share = "null";
  if (req.share) {
    std::vector<std::string> quoted;
    quoted.reserve(req.share->size());
    for (const auto& s : *req.share) quoted.push_back(json_string(s));
    share = fmt::format("[{}]", fmt::join(quoted, ", "));
  }
  return fmt::format("{{\"id\": {}, \"cmd\": \"eval\", \"arch\": {}, \"epochs\": {}, \"space\": {}, \"share\": {}}}",
                     req.id, encode(req.arch), req.epochs, encode_space(req.space), share);
}

EvalRequestMessage decode_request(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object()) throw ProtocolError("request must be an object");
  if (field<std::string>(j, "cmd") != "eval") throw ProtocolError("unknown command");
  EvalRequestMessage req;
  req.id = field<std::uint64_t>(j, "id");
  req.epochs = field<int>(j, "epochs");
  const auto arch = j.find("arch");
  if (arch == j.end()) throw ProtocolError("missing field \"arch\"");
  try {
    req.arch = decode(arch->dump());
  } catch (const DecodeError& e) {
    throw ProtocolError(fmt::format("bad arch: {}", e.what()));
  }
  const auto space = j.find("space");
  if (space == j.end()) throw ProtocolError("missing field \"space\"");
  req.space = space_from_json(*space);
  if (const auto share = j.find("share"); share != j.end() && !share->is_null()) {
    req.share = field<std::vector<std::string>>(j, "share");
  }
  return req;
}

std::string encode_response(const EvalResponseMessage& resp) {
  const auto& r = resp.result;
  return fmt::format(
      "{{\"id\": {}, \"status\": \"{}\", \"accuracy\": {}, \"params\": {}, \"multadds\": {}, \"detail\": {}}}",
      resp.id, r.ok() ? "ok" : "failed", json(r.accuracy).dump(), r.params, r.multadds, json_string(r.detail));
}

EvalResponseMessage decode_response(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object()) throw ProtocolError("response must be an object");
  EvalResponseMessage resp;
  resp.id = field<std::uint64_t>(j, "id");
  const auto status = field<std::string>(j, "status");
  if (status == "ok") {
    resp.result.status = EvalStatus::Ok;
    resp.result.accuracy = field<double>(j, "accuracy");
    if (!(resp.result.accuracy >= 0.0 && resp.result.accuracy <= 1.0)) {
      throw ProtocolError("accuracy outside [0,1]");
    }
    resp.result.params = field<std::int64_t>(j, "params");
    resp.result.multadds = field<std::int64_t>(j, "multadds");
  } else if (status == "failed") {
    resp.result.status = EvalStatus::Failed;
  } else {
    throw ProtocolError(fmt::format("unknown status \"{}\"", status));
  }
  if (const auto d = j.find("detail"); d != j.end() && d->is_string()) resp.result.detail = d->get<std::string>();
  return resp;
}

}  // namespace eatnas
