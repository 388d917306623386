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

#ifndef EATNAS_LOGGING_HPP_
#define EATNAS_LOGGING_HPP_

#include <optional>
#include <string>

namespace eatnas {

// Routes the default logger to stderr. The level comes from `level` when
// given, else from EATNAS_LOG (trace, debug, info, warn, error, off), else
// `fallback`. Throws std::invalid_argument for an unknown level name.
void init_logging(std::optional<std::string> level = std::nullopt, const std::string& fallback = "info");

}  // namespace eatnas

#endif  // EATNAS_LOGGING_HPP_
