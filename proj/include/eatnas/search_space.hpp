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

// Block-coded architecture genome.
//
// A network is a stem, a fixed number of blocks, global pooling and a linear
// classifier. Each block is described by five primitives: the convolution
// operator, the spatial kernel, whether shape-compatible layers carry a
// residual add, the ratio of output to input channels, and the number of
// layers. Downsampling and width change happen in the first layer of a block.

#ifndef EATNAS_SEARCH_SPACE_HPP_
#define EATNAS_SEARCH_SPACE_HPP_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eatnas/rng.hpp"

namespace eatnas {

enum class ConvOp : std::uint8_t { SepConv = 0, MBConv3 = 1, MBConv6 = 2 };

// SepConv -> 1, MBConv3 -> 3, MBConv6 -> 6.
int expansion_of(ConvOp op);
std::string_view conv_name(ConvOp op);

enum class WidthFactor : std::uint8_t { Half = 0, One = 1, OneAndHalf = 2, Two = 3 };

double width_value(WidthFactor w);

// The five per-block primitives, in canonical order.
enum class Primitive : std::uint8_t { Conv = 0, Kernel = 1, Skip = 2, Width = 3, Depth = 4 };

inline constexpr std::size_t kNumPrimitives = 5;
inline constexpr std::array<std::size_t, kNumPrimitives> kPrimitiveCardinality = {3, 3, 2, 4, 4};
inline constexpr std::array<int, 3> kKernelSizes = {3, 5, 7};
inline constexpr int kMaxDepth = 4;

std::string_view primitive_name(Primitive p);

struct BlockCode {
  ConvOp conv = ConvOp::MBConv3;
  int kernel = 3;
  bool skip = false;
  WidthFactor width = WidthFactor::One;
  int depth = 1;

  double width_factor() const { return width_value(width); }

  // Index of this block's value for primitive p within the primitive's
  // legal set. Throws std::out_of_range if a field holds an illegal value.
  std::size_t value_index(Primitive p) const;
  void set_value_index(Primitive p, std::size_t index);

  friend auto operator<=>(const BlockCode&, const BlockCode&) = default;
};

struct ArchCode {
  std::vector<BlockCode> blocks;

  std::size_t size() const { return blocks.size(); }
  friend auto operator<=>(const ArchCode&, const ArchCode&) = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const { return v >= lo && v <= hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct SearchSpaceConfig {
  int n_blocks = 7;
  int stem_channels = 32;
  // Whether the stem convolution has stride 2.
  bool stem_downsample = false;
  // 1-based block indices whose first layer has stride 2.
  std::vector<int> downsample_blocks = {3, 5};
  Range expansion_ratio_range = {4.0, 10.0};
  std::optional<IntRange> layer_count_range;
  int input_resolution = 32;
  int num_classes = 10;

  bool downsamples(int block_index_1based) const;
  friend bool operator==(const SearchSpaceConfig&, const SearchSpaceConfig&) = default;
};

// Small-image task: 7 blocks, stride 2 in blocks 3 and 5, total width
// expansion in [4, 10].
SearchSpaceConfig small_task_space();
// Large-image task: stride-2 stem plus blocks 2, 3, 4 and 6, total width
// expansion in [8, 16], 16 to 18 layers.
SearchSpaceConfig large_task_space();

// Throws std::invalid_argument describing the first problem found.
void check_space(const SearchSpaceConfig& space);

double total_expansion_ratio(const ArchCode& arch);
int total_layers(const ArchCode& arch);

struct Verdict {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
};

Verdict validate(const ArchCode& arch, const SearchSpaceConfig& space);

// Thrown when a sampler cannot produce a genome that satisfies the scale
// constraints within its retry budget.
class ConstraintUnsatisfiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultRandomArchRetries = 10000;

// Draws every primitive uniformly and rejects whole genomes that violate the
// scale constraints.
ArchCode random_arch(const SearchSpaceConfig& space, Rng& rng,
                     int max_retries = kDefaultRandomArchRetries);

// Unconstrained uniform draw of one block.
BlockCode random_block(Rng& rng);

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  // Byte offset ("byte 17") for syntax errors, or a field path
  // ("blocks[2].kernel") for semantic errors.
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// Canonical text form, e.g.
// { "blocks": [ { "conv": "mbconv6", "kernel": 5, "skip": true, "width": 1.5, "depth": 3 } ] }
// Byte-identical for equal genomes; used as cache key and on the wire.
std::string encode(const ArchCode& arch);
ArchCode decode(std::string_view text);

// Primitives that differ between two genomes of equal length.
int hamming_distance(const ArchCode& a, const ArchCode& b);

// Number of blocks whose codes differ in more than one primitive.
int blocks_beyond_one_edit(const ArchCode& a, const ArchCode& b);

// Formats a real with at least one fractional digit ("1.0", "0.5", "12.25").
std::string format_real(double v);

}  // namespace eatnas

#endif  // EATNAS_SEARCH_SPACE_HPP_
