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

#ifndef EATNAS_TOOLS_CLI_HPP_
#define EATNAS_TOOLS_CLI_HPP_

#include <string>
#include <vector>

#include "eatnas/checkpoint.hpp"

namespace eatnas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

// Arguments exclude the program name.
int run(std::vector<std::string> args);

// CSV with columns stage,step,mean_score,std,quality,best_score,mean_accuracy
// and one row per history entry of every stage in the report.
std::string curves_csv(const Json& report);

}  // namespace eatnas::cli

#endif  // EATNAS_TOOLS_CLI_HPP_
