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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eatnas::oracle {

long double model_score(long double acc, long double size, long double target, long double omega) {
  return acc * std::pow(size / target, omega);
}

long double quality(const std::vector<double>& scores, long double target_std, long double alpha, long double beta) {
  long double sum = 0.0L;
  for (double s : scores) sum += s;
  const long double mean = sum / static_cast<long double>(scores.size());
  long double ss = 0.0L;
  for (double s : scores) ss += (s - mean) * (s - mean);
  long double sd = std::sqrt(ss / static_cast<long double>(scores.size()));
  if (sd < 1e-8L) sd = 1e-8L;
  const long double w = sd < target_std ? alpha : beta;
  return mean * std::pow(sd / target_std, w);
}

namespace {

std::int64_t scaled_channels(std::int64_t c, WidthFactor w) {
  // Twice the width factor: 1, 2, 3, 4.
  const std::int64_t twice = static_cast<std::int64_t>(w) + 1;
  return std::max<std::int64_t>(1, (c * twice + 1) / 2);
}

std::int64_t expansion(ConvOp op) {
  switch (op) {
    case ConvOp::SepConv: return 1;
    case ConvOp::MBConv3: return 3;
    case ConvOp::MBConv6: return 6;
  }
  throw std::logic_error("bad op");
}

std::int64_t halve(std::int64_t r) { return r / 2 + r % 2; }

bool is_downsample_block(const SearchSpaceConfig& space, std::size_t index0) {
  return std::find(space.downsample_blocks.begin(), space.downsample_blocks.end(),
                   static_cast<int>(index0) + 1) != space.downsample_blocks.end();
}

void layer(std::vector<Tensor>& out, ConvOp op, std::int64_t k, std::int64_t cin, std::int64_t cout,
           std::int64_t in_res, std::int64_t out_res) {
  if (op == ConvOp::SepConv) {
    out.push_back({{k, k, 1, cin}, cin, out_res});
    out.push_back({{1, 1, cin, cout}, cout, out_res});
    return;
  }
  const std::int64_t hidden = expansion(op) * cin;
  out.push_back({{1, 1, cin, hidden}, hidden, in_res});
  out.push_back({{k, k, 1, hidden}, hidden, out_res});
  out.push_back({{1, 1, hidden, cout}, cout, out_res});
}

}  // namespace

std::vector<Tensor> tensor_walk(const ArchCode& arch, const SearchSpaceConfig& space) {
  std::vector<Tensor> out;
  std::int64_t res = space.input_resolution;
  if (space.stem_downsample) res = halve(res);
  std::int64_t c = space.stem_channels;
  out.push_back({{3, 3, 3, c}, c, res});
  for (std::size_t i = 0; i < arch.blocks.size(); ++i) {
    const BlockCode& b = arch.blocks[i];
    const std::int64_t cout = scaled_channels(c, b.width);
    for (int l = 0; l < b.depth; ++l) {
      const std::int64_t in_res = res;
      if (l == 0 && is_downsample_block(space, i)) res = halve(res);
      layer(out, b.conv, b.kernel, l == 0 ? c : cout, cout, in_res, res);
    }
    c = cout;
  }
  out.push_back({{1, 1, c, space.num_classes}, 0, 1});
  return out;
}

Counts count(const ArchCode& arch, const SearchSpaceConfig& space, bool include_norm_and_bias) {
  Counts total;
  for (const Tensor& t : tensor_walk(arch, space)) {
    std::int64_t elements = 0;
    // Element-by-element over the two outer axes, rows of the inner two.
    for (std::int64_t x = 0; x < t.dims[0]; ++x) {
      for (std::int64_t y = 0; y < t.dims[1]; ++y) {
        for (std::int64_t ci = 0; ci < t.dims[2]; ++ci) elements += t.dims[3];
      }
    }
    if (include_norm_and_bias) elements += 2 * t.norm_channels;
    total.params += elements;
    total.multadds += elements * t.resolution * t.resolution;
  }
  if (include_norm_and_bias) {
    total.params += space.num_classes;
    total.multadds += space.num_classes;
  }
  return total;
}

namespace {

struct Choice {
  ConvOp conv;
  int kernel_index;
  WidthFactor width;
  int depth;
};

std::int64_t layer_weights(ConvOp op, std::int64_t k, std::int64_t cin, std::int64_t cout) {
  if (op == ConvOp::SepConv) return k * k * cin + cin * cout;
  const std::int64_t hidden = expansion(op) * cin;
  return cin * hidden + k * k * hidden + hidden * cout;
}

struct Search {
  const SyntheticLandscape& landscape;
  const SearchSpaceConfig& space;
  Task task;
  ScoreParams score;
  std::vector<Choice> choices;
  std::vector<double> best_skip_utility;
  std::vector<bool> best_skip;
  double normalizer = 0.0;
  std::vector<Choice> path;
  Optimum best;
  bool found = false;

  void leaf(double utility, std::int64_t params, std::int64_t final_channels) {
    ++best.leaves;
    const std::int64_t total = params + final_channels * space.num_classes;
    const double acc = 0.05 + 0.9 / (1.0 + std::exp(-utility / normalizer));
    const double s = acc * std::pow(static_cast<double>(total) / score.target_size, score.omega);
    if (!found || s > best.score) {
      found = true;
      best.score = s;
      best.accuracy = acc;
      best.params = total;
      best.arch.blocks.clear();
      for (std::size_t i = 0; i < path.size(); ++i) {
        BlockCode b;
        b.conv = path[i].conv;
        b.kernel = kKernelSizes[static_cast<std::size_t>(path[i].kernel_index)];
        b.skip = best_skip[i];
        b.width = path[i].width;
        b.depth = path[i].depth;
        best.arch.blocks.push_back(b);
      }
    }
  }

  void visit(std::size_t i, double utility, std::int64_t params, std::int64_t channels, double ratio, int layers) {
    const std::size_t n = static_cast<std::size_t>(space.n_blocks);
    if (i == n) {
      if (!space.expansion_ratio_range.contains(ratio)) return;
      if (space.layer_count_range && !space.layer_count_range->contains(layers)) return;
      leaf(utility, params, channels);
      return;
    }
    for (const Choice& c : choices) {
      double u = utility + best_skip_utility[i] +
                 landscape.unary_utility(i, Primitive::Conv, static_cast<std::size_t>(c.conv), task) +
                 landscape.unary_utility(i, Primitive::Kernel, static_cast<std::size_t>(c.kernel_index), task) +
                 landscape.unary_utility(i, Primitive::Width, static_cast<std::size_t>(c.width), task) +
                 landscape.unary_utility(i, Primitive::Depth, static_cast<std::size_t>(c.depth - 1), task);
      if (i > 0) u += landscape.interaction_utility(i - 1, path[i - 1].conv, c.conv, task);
      const std::int64_t k = kKernelSizes[static_cast<std::size_t>(c.kernel_index)];
      const std::int64_t cout = scaled_channels(channels, c.width);
      std::int64_t p = layer_weights(c.conv, k, channels, cout);
      p += (c.depth - 1) * layer_weights(c.conv, k, cout, cout);
      path[i] = c;
      visit(i + 1, u, params + p, cout, ratio * (static_cast<double>(c.width) + 1.0) / 2.0, layers + c.depth);
    }
  }
};

}  // namespace

Optimum landscape_optimum(const SyntheticLandscape& landscape, const SearchSpaceConfig& space, Task task,
                          const ScoreParams& score) {
  Search s{landscape, space, task, score, {}, {}, {}, 0.0, {}, {}, false};
  for (int conv = 0; conv < 3; ++conv) {
    for (int k = 0; k < 3; ++k) {
      for (int w = 0; w < 4; ++w) {
        for (int d = 1; d <= kMaxDepth; ++d) {
          s.choices.push_back({static_cast<ConvOp>(conv), k, static_cast<WidthFactor>(w), d});
        }
      }
    }
  }
  const std::size_t n = static_cast<std::size_t>(space.n_blocks);
  for (std::size_t i = 0; i < n; ++i) {
    const double off = landscape.unary_utility(i, Primitive::Skip, 0, task);
    const double on = landscape.unary_utility(i, Primitive::Skip, 1, task);
    s.best_skip.push_back(on > off);
    s.best_skip_utility.push_back(std::max(on, off));
  }
  const double nd = static_cast<double>(n);
  s.normalizer = std::sqrt(5.0 * nd + 0.09 * (nd - 1.0));
  s.path.resize(n);
  const std::int64_t stem = 27LL * space.stem_channels;
  s.visit(0, 0.0, stem, space.stem_channels, 1.0, 0);
  if (!s.found) throw std::runtime_error("no valid genome");
  return s.best;
}

}  // namespace eatnas::oracle
