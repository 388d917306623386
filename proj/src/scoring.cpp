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

#include "eatnas/scoring.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace eatnas {

void check_params(const ScoreParams& p) {
  if (!(p.target_size > 0.0)) throw std::invalid_argument("score target size must be > 0");
}

void check_params(const QualityParams& q) {
  if (!(q.target_std > 0.0)) throw std::invalid_argument("quality target_std must be > 0");
}

double model_score(double acc, double size, const ScoreParams& p) {
  if (!(size > 0.0)) throw std::domain_error(fmt::format("model size {} must be > 0", size));
  if (!(acc >= 0.0 && acc <= 1.0)) throw std::domain_error(fmt::format("accuracy {} outside [0,1]", acc));
  check_params(p);
  if (size == p.target_size) return acc;
  return acc * std::pow(size / p.target_size, p.omega);
}

QualityBreakdown population_quality_breakdown(std::span<const double> scores, const QualityParams& q) {
  if (scores.size() < 2) throw std::invalid_argument("population quality needs at least 2 scores");
  check_params(q);
  const double n = static_cast<double>(scores.size());
  double sum = 0.0;
  for (double s : scores) sum += s;
  QualityBreakdown out;
  out.mean = sum / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - out.mean) * (s - out.mean);
  out.std = std::sqrt(ss / n);
  out.degenerate = out.std < kStdFloor;
  const double std = out.degenerate ? kStdFloor : out.std;
  out.omega = std < q.target_std ? q.alpha : q.beta;
  out.quality = std == q.target_std ? out.mean : out.mean * std::pow(std / q.target_std, out.omega);
  return out;
}

}  // namespace eatnas
