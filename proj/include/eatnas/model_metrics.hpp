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

// Analytic size objectives for a genome: parameter count and multiply-adds.
//
// Macro-skeleton: a 3x3 stem convolution (3 -> stem_channels, stride 2 when
// the space says so), the blocks in order, global average pooling and a
// linear classifier. Within a block the first layer carries the stride and the
// width change; the remaining layers map out_channels -> out_channels.
//
// Cost model per layer (weights only):
//   SepConv:  depthwise k*k*c_in  + pointwise c_in*c_out
//   MBConv-t: expand c_in*(t*c_in) + depthwise k*k*(t*c_in) + project (t*c_in)*c_out
// Each tensor is applied once per output position of its stage. The 1x1
// expansion runs at the layer's input resolution; the depthwise stage carries
// the stride, so it and the projection run at the output resolution.
//
// With include_norm_and_bias, every convolution output is followed by a batch
// norm (scale and shift, 2 per channel, each applied per position) and the
// classifier gains its bias vector.

#ifndef EATNAS_MODEL_METRICS_HPP_
#define EATNAS_MODEL_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "eatnas/search_space.hpp"

namespace eatnas {

struct CostOptions {
  bool include_norm_and_bias = false;
};

// Half-up rounding, minimum 1.
int round_channels(double channels);

struct LayerPlan {
  int in_channels = 0;
  int out_channels = 0;
  int in_resolution = 0;
  int out_resolution = 0;
  int stride = 1;
  bool residual = false;
};

struct BlockPlan {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<LayerPlan> layers;
};

struct ChannelPlan {
  LayerPlan stem;
  std::vector<BlockPlan> blocks;
  int final_channels = 0;
  int final_resolution = 0;
};

// Output side of a stride-s stage with "same" padding.
inline int downsampled(int resolution, int stride) { return (resolution + stride - 1) / stride; }

ChannelPlan resolve_channel_plan(const ArchCode& arch, const SearchSpaceConfig& space);

// Which sub-tensor of a layer a weight matrix belongs to.
enum class TensorPart : std::uint8_t { Expand = 0, Depthwise = 1, Project = 2, Pointwise = 3 };

std::string_view part_name(TensorPart part);

struct TensorShape {
  int w = 1;
  int h = 1;
  int ch_in = 1;
  int ch_out = 1;

  std::int64_t elements() const {
    return static_cast<std::int64_t>(w) * h * ch_in * ch_out;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct LayerTensor {
  TensorPart part;
  TensorShape shape;
  // Channels normalized after this stage.
  int norm_channels = 0;
  // True when the stage runs at the layer's input resolution.
  bool at_input_resolution = false;
};

// Weight tensors of one searchable layer, in execution order. A depthwise
// kernel is stored as (k, k, 1, channels). Throws std::invalid_argument for a
// kernel outside {3, 5, 7} or non-positive channel counts.
std::vector<LayerTensor> layer_tensors(ConvOp op, int kernel, int c_in, int c_out);

std::int64_t layer_params(ConvOp op, int kernel, int c_in, int c_out, CostOptions opts = {});

struct LayerCost {
  std::string name;
  std::int64_t params = 0;
  std::int64_t multadds = 0;
};

// Per-stage breakdown: "stem", "block<i>.layer<j>" (1-based), "classifier".
std::vector<LayerCost> layer_costs(const ArchCode& arch, const SearchSpaceConfig& space,
                                   CostOptions opts = {});

std::int64_t arch_params(const ArchCode& arch, const SearchSpaceConfig& space, CostOptions opts = {});
std::int64_t arch_multadds(const ArchCode& arch, const SearchSpaceConfig& space, CostOptions opts = {});

}  // namespace eatnas

#endif  // EATNAS_MODEL_METRICS_HPP_
