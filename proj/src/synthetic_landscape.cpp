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

#include "eatnas/synthetic_landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace eatnas {

std::string_view task_name(Task t) { return t == Task::Small ? "small" : "large"; }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p outside (0, 1)");
  // Peter J. Acklam's coefficients.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  constexpr double kHigh = 1.0 - kLow;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > kHigh) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_from_key(std::uint64_t key) {
  const double u = (static_cast<double>(key >> 11) + 0.5) * 0x1.0p-53;
  return inverse_normal_cdf(u);
}

SyntheticLandscape::SyntheticLandscape(LandscapeConfig cfg) : cfg_(cfg) {
  if (!(cfg.shift >= 0.0 && cfg.shift <= 1.0)) {
    throw std::invalid_argument(fmt::format("landscape shift {} outside [0,1]", cfg.shift));
  }
  if (!(cfg.noise_std >= 0.0)) throw std::invalid_argument("landscape noise_std must be >= 0");
  blend_h2_ = std::sqrt(std::max(0.0, 1.0 - cfg.shift * cfg.shift));
}

double SyntheticLandscape::blended(std::uint64_t kind, std::uint32_t position, std::uint32_t a,
                                   std::uint32_t b, Task task) const {
  auto variate = [&](std::uint8_t stream) {
    Fnv1a64 h;
    h.add_u64(cfg_.seed).add_byte(static_cast<std::uint8_t>(kind)).add_u32(position).add_u32(a).add_u32(b);
    h.add_byte(stream);
    return normal_from_key(mix64(h.value()));
  };
  const double h1 = variate(1);
  if (task == Task::Small || cfg_.shift == 1.0) return h1;
  return cfg_.shift * h1 + blend_h2_ * variate(2);
}

double SyntheticLandscape::unary_utility(std::size_t position, Primitive prim, std::size_t value_index,
                                         Task task) const {
  return blended(1, static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(prim),
                 static_cast<std::uint32_t>(value_index), task);
}

double SyntheticLandscape::interaction_utility(std::size_t position, ConvOp left, ConvOp right, Task task) const {
  return kInteractionWeight * blended(2, static_cast<std::uint32_t>(position), static_cast<std::uint32_t>(left),
                                      static_cast<std::uint32_t>(right), task);
}

double SyntheticLandscape::total_utility(const ArchCode& arch, Task task) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    for (std::size_t p = 0; p < kNumPrimitives; ++p) {
      const auto prim = static_cast<Primitive>(p);
      sum += unary_utility(i, prim, arch.blocks[i].value_index(prim), task);
    }
    if (i + 1 < arch.size()) sum += interaction_utility(i, arch.blocks[i].conv, arch.blocks[i + 1].conv, task);
  }
  return sum;
}

double SyntheticLandscape::normalizer(std::size_t n_blocks) {
  const double n = static_cast<double>(n_blocks);
  const double pairs = n_blocks > 0 ? n - 1.0 : 0.0;
  return std::sqrt(static_cast<double>(kNumPrimitives) * n + kInteractionWeight * kInteractionWeight * pairs);
}

double SyntheticLandscape::accuracy_from_logit(double logit, int epochs) {
  const double mapped = 0.05 + 0.9 / (1.0 + std::exp(-logit));
  const double bonus = 0.02 * (1.0 - 1.0 / static_cast<double>(std::max(1, epochs)));
  return std::min(1.0, mapped + bonus);
}

double SyntheticLandscape::accuracy(const ArchCode& arch, Task task, int epochs, std::int64_t params) const {
  double logit = total_utility(arch, task) / normalizer(arch.size());
  if (cfg_.size_coupling && params > 0) {
    logit += kSizeCouplingGain * std::log2(static_cast<double>(params) / kSizeCouplingReference);
  }
  return accuracy_from_logit(logit, epochs);
}

SyntheticEvaluator::SyntheticEvaluator(SearchSpaceConfig space, LandscapeConfig cfg, Task task, CostOptions cost)
    : space_(std::move(space)),
      landscape_(cfg),
      task_(task),
      cost_(cost),
      noise_rng_(derive_seed(cfg.seed, {0x6e6f697365ULL, static_cast<std::uint64_t>(task)})) {
  check_space(space_);
}

EvalResult SyntheticEvaluator::evaluate(const ArchCode& arch, const EvalBudget& budget) {
  if (budget.epochs < 1) return EvalResult::failed("epochs >= 1 required");
  if (static_cast<int>(arch.size()) != space_.n_blocks) {
    return EvalResult::failed(fmt::format("block count {} != {}", arch.size(), space_.n_blocks));
  }
  if (const auto verdict = validate(arch, space_); !verdict) {
    return EvalResult::failed(fmt::format("invalid architecture: {}", fmt::join(verdict.violations, "; ")));
  }
  EvalResult r;
  r.status = EvalStatus::Ok;
  r.params = arch_params(arch, space_, cost_);
  r.multadds = arch_multadds(arch, space_, cost_);
  r.accuracy = landscape_.accuracy(arch, task_, budget.epochs, r.params);
  if (landscape_.config().noise_std > 0.0) {
    std::lock_guard lock(noise_mutex_);
    r.accuracy = std::clamp(r.accuracy + noise_rng_.normal(0.0, landscape_.config().noise_std), 0.0, 1.0);
  }
  return r;
}

std::string SyntheticEvaluator::id() const {
  return fmt::format("synthetic:{}:seed={}:rho={}", task_name(task_), landscape_.config().seed,
                     landscape_.config().shift);
}

}  // namespace eatnas
