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

#ifndef EATNAS_SCORING_HPP_
#define EATNAS_SCORING_HPP_

#include <span>

namespace eatnas {

// Accuracy/size trade-off: score = acc * (size / target_size)^omega.
struct ScoreParams {
  double target_size = 3.0e6;
  double omega = -0.07;
  friend bool operator==(const ScoreParams&, const ScoreParams&) = default;
};

// Population quality: Q = mean * (std / target_std)^w, where w = alpha when
// std < target_std and beta otherwise.
struct QualityParams {
  double target_std = 0.1;
  double alpha = -0.07;
  double beta = -0.07;
  friend bool operator==(const QualityParams&, const QualityParams&) = default;
};

inline constexpr double kStdFloor = 1e-8;

// Throws std::domain_error if size <= 0 or acc is outside [0, 1].
double model_score(double acc, double size, const ScoreParams& p);

struct QualityBreakdown {
  double mean = 0.0;
  // Population (divide-by-N) standard deviation, before flooring.
  double std = 0.0;
  double omega = 0.0;
  double quality = 0.0;
  // All scores equal up to kStdFloor.
  bool degenerate = false;
};

// Throws std::invalid_argument for fewer than two scores.
QualityBreakdown population_quality_breakdown(std::span<const double> scores, const QualityParams& q);

inline double population_quality(std::span<const double> scores, const QualityParams& q) {
  return population_quality_breakdown(scores, q).quality;
}

void check_params(const ScoreParams& p);
void check_params(const QualityParams& q);

}  // namespace eatnas

#endif  // EATNAS_SCORING_HPP_
