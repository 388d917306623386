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

#include "eatnas/model_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace eatnas {

int round_channels(double channels) {
  return std::max(1, static_cast<int>(std::floor(channels + 0.5)));
}

std::string_view part_name(TensorPart part) {
  switch (part) {
    case TensorPart::Expand: return "expand";
    case TensorPart::Depthwise: return "depthwise";
    case TensorPart::Project: return "project";
    case TensorPart::Pointwise: return "pointwise";
  }
  return "?";
}

ChannelPlan resolve_channel_plan(const ArchCode& arch, const SearchSpaceConfig& space) {
  ChannelPlan plan;
  const int stem_stride = space.stem_downsample ? 2 : 1;
  plan.stem = LayerPlan{3, space.stem_channels, space.input_resolution,
                        downsampled(space.input_resolution, stem_stride), stem_stride, false};

  int channels = space.stem_channels;
  int resolution = plan.stem.out_resolution;
  plan.blocks.reserve(arch.size());
  for (std::size_t i = 0; i < arch.size(); ++i) {
    const auto& code = arch.blocks[i];
    BlockPlan block;
    block.in_channels = channels;
    block.out_channels = round_channels(channels * code.width_factor());
    for (int l = 0; l < code.depth; ++l) {
      LayerPlan layer;
      layer.in_channels = l == 0 ? block.in_channels : block.out_channels;
      layer.out_channels = block.out_channels;
      layer.stride = (l == 0 && space.downsamples(static_cast<int>(i) + 1)) ? 2 : 1;
      layer.in_resolution = resolution;
      layer.out_resolution = downsampled(resolution, layer.stride);
      // No residual on the first layer of a block.
      layer.residual = code.skip && l > 0 && layer.stride == 1 &&
                       layer.in_channels == layer.out_channels;
      resolution = layer.out_resolution;
      block.layers.push_back(layer);
    }
    channels = block.out_channels;
    plan.blocks.push_back(std::move(block));
  }
  plan.final_channels = channels;
  plan.final_resolution = resolution;
  return plan;
}

std::vector<LayerTensor> layer_tensors(ConvOp op, int kernel, int c_in, int c_out) {
  if (std::find(kKernelSizes.begin(), kKernelSizes.end(), kernel) == kKernelSizes.end()) {
    throw std::invalid_argument(fmt::format("kernel {} not in {{3,5,7}}", kernel));
  }
  if (c_in < 1 || c_out < 1) throw std::invalid_argument("channel counts must be >= 1");
  if (op == ConvOp::SepConv) {
    return {
        {TensorPart::Depthwise, {kernel, kernel, 1, c_in}, c_in, false},
        {TensorPart::Pointwise, {1, 1, c_in, c_out}, c_out, false},
    };
  }
  const int hidden = expansion_of(op) * c_in;
  return {
      {TensorPart::Expand, {1, 1, c_in, hidden}, hidden, true},
      {TensorPart::Depthwise, {kernel, kernel, 1, hidden}, hidden, false},
      {TensorPart::Project, {1, 1, hidden, c_out}, c_out, false},
  };
}

namespace {

std::int64_t tensor_params(const LayerTensor& t, CostOptions opts) {
  return t.shape.elements() + (opts.include_norm_and_bias ? 2LL * t.norm_channels : 0);
}

std::int64_t positions(int resolution) {
  return static_cast<std::int64_t>(resolution) * resolution;
}

}  // namespace

std::int64_t layer_params(ConvOp op, int kernel, int c_in, int c_out, CostOptions opts) {
  std::int64_t total = 0;
  for (const auto& t : layer_tensors(op, kernel, c_in, c_out)) total += tensor_params(t, opts);
  return total;
}

std::vector<LayerCost> layer_costs(const ArchCode& arch, const SearchSpaceConfig& space,
                                   CostOptions opts) {
  const ChannelPlan plan = resolve_channel_plan(arch, space);
  std::vector<LayerCost> costs;

  const std::int64_t stem_weights = 9LL * plan.stem.in_channels * plan.stem.out_channels;
  const std::int64_t stem_params =
      stem_weights + (opts.include_norm_and_bias ? 2LL * plan.stem.out_channels : 0);
  costs.push_back({"stem", stem_params, stem_params * positions(plan.stem.out_resolution)});

  for (std::size_t i = 0; i < plan.blocks.size(); ++i) {
    const auto& code = arch.blocks[i];
    const auto& block = plan.blocks[i];
    for (std::size_t l = 0; l < block.layers.size(); ++l) {
      const auto& layer = block.layers[l];
      LayerCost cost;
      cost.name = fmt::format("block{}.layer{}", i + 1, l + 1);
      for (const auto& t : layer_tensors(code.conv, code.kernel, layer.in_channels, layer.out_channels)) {
        const std::int64_t p = tensor_params(t, opts);
        cost.params += p;
        cost.multadds +=
            p * positions(t.at_input_resolution ? layer.in_resolution : layer.out_resolution);
      }
      costs.push_back(std::move(cost));
    }
  }

  const std::int64_t fc = static_cast<std::int64_t>(plan.final_channels) * space.num_classes +
                          (opts.include_norm_and_bias ? space.num_classes : 0);
  costs.push_back({"classifier", fc, fc});
  return costs;
}

std::int64_t arch_params(const ArchCode& arch, const SearchSpaceConfig& space, CostOptions opts) {
  const auto costs = layer_costs(arch, space, opts);
  return std::accumulate(costs.begin(), costs.end(), std::int64_t{0},
                         [](std::int64_t acc, const LayerCost& c) { return acc + c.params; });
}

std::int64_t arch_multadds(const ArchCode& arch, const SearchSpaceConfig& space, CostOptions opts) {
  const auto costs = layer_costs(arch, space, opts);
  return std::accumulate(costs.begin(), costs.end(), std::int64_t{0},
                         [](std::int64_t acc, const LayerCost& c) { return acc + c.multadds; });
}

}  // namespace eatnas
