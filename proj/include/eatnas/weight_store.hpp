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

// Parameter inheritance between architectures.
//
// Width sharing copies the leading (w, h, min(ch_in), min(ch_out)) corner of a
// stored kernel into the new kernel and draws the remainder from a normal
// initializer. Depth sharing copies the first min(new, old) layers of a block
// (each through width sharing) and initializes any extra layers fresh.
// Matrices are keyed by (block, layer, op, kernel, part); a layer inherits only
// when op and kernel both match.

#ifndef EATNAS_WEIGHT_STORE_HPP_
#define EATNAS_WEIGHT_STORE_HPP_

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "eatnas/model_metrics.hpp"
#include "eatnas/rng.hpp"
#include "eatnas/search_space.hpp"

namespace eatnas {

// Row-major 4-D tensor over (w, h, ch_in, ch_out); ch_out varies fastest.
class ParamMatrix {
 public:
  ParamMatrix() = default;
  explicit ParamMatrix(TensorShape shape);
  ParamMatrix(TensorShape shape, std::vector<float> values);

  const TensorShape& shape() const { return shape_; }
  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  std::size_t offset(int x, int y, int ci, int co) const {
    return ((static_cast<std::size_t>(x) * shape_.h + y) * shape_.ch_in + ci) * shape_.ch_out + co;
  }
  float at(int x, int y, int ci, int co) const { return values_[offset(x, y, ci, co)]; }
  float& at(int x, int y, int ci, int co) { return values_[offset(x, y, ci, co)]; }

  friend bool operator==(const ParamMatrix&, const ParamMatrix&) = default;

 private:
  TensorShape shape_;
  std::vector<float> values_;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Normal initializer for parameters that are not inherited. The generator is
// passed separately so one spec can drive many draws.
struct WeightInitSpec {
  double mean = 0.0;
  double std = 0.01;
  std::uint64_t seed = 0;
  // Replace std with sqrt(2 / fan_in), fan_in = w * h * ch_in.
  bool fan_in_scaled = false;

  double stddev_for(const TensorShape& shape) const;
  friend bool operator==(const WeightInitSpec&, const WeightInitSpec&) = default;
};

ParamMatrix fresh_matrix(const TensorShape& shape, const WeightInitSpec& init, Rng& rng);

// Throws ShapeError when spatial sizes differ.
ParamMatrix share_width(const TensorShape& new_shape, const ParamMatrix& old,
                        const WeightInitSpec& init, Rng& rng);

struct BlockWeights {
  std::vector<ParamMatrix> layers;
};

BlockWeights share_depth(std::span<const TensorShape> new_block, const BlockWeights& old_block,
                         const WeightInitSpec& init, Rng& rng);

struct LayerSignature {
  int block_index = 0;  // 1-based
  int layer_index = 0;  // 1-based
  ConvOp op = ConvOp::SepConv;
  int kernel = 3;
  TensorPart part = TensorPart::Depthwise;

  friend auto operator<=>(const LayerSignature&, const LayerSignature&) = default;
};

std::string to_string(const LayerSignature& sig);

using WeightMap = std::map<LayerSignature, ParamMatrix>;

// Latest-wins store of committed matrices. Concurrent lookups are allowed;
// commits take an exclusive lock. Committed matrices are never mutated.
class WeightStore {
 public:
  void commit(const LayerSignature& sig, ParamMatrix m);
  void commit_all(const WeightMap& weights);
  std::optional<ParamMatrix> lookup(const LayerSignature& sig) const;
  std::size_t size() const;
  void clear();

  // Consistent copy of the current contents.
  std::map<LayerSignature, std::shared_ptr<const ParamMatrix>> snapshot() const;

  // Binary dump, all integers and floats little-endian:
  //   "EATNSTOR" | u32 version (1) | u32 entry count
  //   per entry: i32 block | i32 layer | u8 op | u8 kernel | u8 part | u8 0
  //              | u32 w | u32 h | u32 ch_in | u32 ch_out
  //   then, per entry in header order, w*h*ch_in*ch_out f32 values.
  // Entries are ordered by signature.
  void dump(std::ostream& os) const;
  // Replaces the contents with a dump read from `is`.
  void load(std::istream& is);

 private:
  mutable std::shared_mutex mutex_;
  std::map<LayerSignature, std::shared_ptr<const ParamMatrix>> entries_;
};

// Weight tensors of every searchable layer of `child`. A layer whose
// (block, layer, op, kernel, part) signature is in `store` is width-shared from
// the stored matrix; any other layer, including layers past the stored depth,
// is initialized fresh. Deterministic given (child, store contents, init.seed).
WeightMap derive_weights(const ArchCode& child, const SearchSpaceConfig& space, const WeightStore& store,
                         const WeightInitSpec& init);

}  // namespace eatnas

#endif  // EATNAS_WEIGHT_STORE_HPP_
