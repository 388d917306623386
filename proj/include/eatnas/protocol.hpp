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

// Evaluator wire protocol. Every message is one line of JSON text, UTF-8,
// terminated by a single LF. Fields appear in the order shown.
//
//   worker hello:  {"hello": "eatnas-worker", "proto": 1}
//   request:       {"id": 7, "cmd": "eval", "arch": <arch>, "epochs": 1,
//                   "space": <space>, "share": null}
//   response:      {"id": 7, "status": "ok", "accuracy": 0.5, "params": 1234,
//                   "multadds": 56789, "detail": ""}
//
// <arch> is the canonical architecture text; <space> is encode_space().

#ifndef EATNAS_PROTOCOL_HPP_
#define EATNAS_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eatnas/evaluator.hpp"
#include "eatnas/search_space.hpp"

namespace eatnas {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kWorkerName = "eatnas-worker";

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical object text for a search space, e.g.
// {"n_blocks": 7, "stem_channels": 32, "stem_downsample": false,
//  "downsample_blocks": [3, 5], "expansion_ratio_range": [4.0, 10.0],
//  "layer_count_range": null, "input_resolution": 32, "num_classes": 10}
std::string encode_space(const SearchSpaceConfig& space);
SearchSpaceConfig decode_space(std::string_view text);

struct EvalRequestMessage {
  std::uint64_t id = 0;
  ArchCode arch;
  int epochs = 1;
  SearchSpaceConfig space;
  std::optional<std::vector<std::string>> share;
};

struct EvalResponseMessage {
  std::uint64_t id = 0;
  EvalResult result;
};

std::string hello_line();
// Throws ProtocolError unless `line` is a hello with a supported version.
void check_hello(std::string_view line);

std::string encode_request(const EvalRequestMessage& req);
EvalRequestMessage decode_request(std::string_view line);

std::string encode_response(const EvalResponseMessage& resp);
EvalResponseMessage decode_response(std::string_view line);

}  // namespace eatnas

#endif  // EATNAS_PROTOCOL_HPP_
