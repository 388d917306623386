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

#ifndef EATNAS_EVALUATOR_HPP_
#define EATNAS_EVALUATOR_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eatnas/search_space.hpp"

namespace eatnas {

enum class EvalPurpose : std::uint8_t { Search, Rerank };

struct EvalBudget {
  int epochs = 1;
  EvalPurpose purpose = EvalPurpose::Search;
};

enum class EvalStatus : std::uint8_t { Ok, Failed };

struct EvalResult {
  EvalStatus status = EvalStatus::Failed;
  double accuracy = 0.0;
  std::int64_t params = 0;
  std::int64_t multadds = 0;
  std::string detail;

  bool ok() const { return status == EvalStatus::Ok; }

  static EvalResult failed(std::string detail) {
    EvalResult r;
    r.status = EvalStatus::Failed;
    r.detail = std::move(detail);
    return r;
  }

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

// Trains (or scores) one architecture under a budget. Implementations report
// failures through EvalResult::failed rather than throwing; the engine owns
// retry policy.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual EvalResult evaluate(const ArchCode& arch, const EvalBudget& budget) = 0;

  // Same as evaluate(), naming the weight-store signatures the child inherits.
  // Evaluators without access to the store ignore the list.
  virtual EvalResult evaluate_shared(const ArchCode& arch, const EvalBudget& budget,
                                     const std::vector<std::string>& /*share*/) {
    return evaluate(arch, budget);
  }

  virtual std::string id() const = 0;

  // Pure function of (arch, budget).
  virtual bool deterministic() const = 0;

  // evaluate() may be called from several threads at once.
  virtual bool thread_safe() const = 0;
};

}  // namespace eatnas

#endif  // EATNAS_EVALUATOR_HPP_
