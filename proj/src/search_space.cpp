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

#include "eatnas/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "json.hpp"

namespace eatnas {

int expansion_of(ConvOp op) {
  switch (op) {
    case ConvOp::SepConv: return 1;
    case ConvOp::MBConv3: return 3;
    case ConvOp::MBConv6: return 6;
  }
  throw std::out_of_range("unknown conv op");
}

std::string_view conv_name(ConvOp op) {
  switch (op) {
    case ConvOp::SepConv: return "sepconv";
    case ConvOp::MBConv3: return "mbconv3";
    case ConvOp::MBConv6: return "mbconv6";
  }
  throw std::out_of_range("unknown conv op");
}

double width_value(WidthFactor w) {
  switch (w) {
    case WidthFactor::Half: return 0.5;
    case WidthFactor::One: return 1.0;
    case WidthFactor::OneAndHalf: return 1.5;
    case WidthFactor::Two: return 2.0;
  }
  throw std::out_of_range("unknown width factor");
}

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::Conv: return "conv";
    case Primitive::Kernel: return "kernel";
    case Primitive::Skip: return "skip";
    case Primitive::Width: return "width";
    case Primitive::Depth: return "depth";
  }
  throw std::out_of_range("unknown primitive");
}

std::size_t BlockCode::value_index(Primitive p) const {
  switch (p) {
    case Primitive::Conv: {
      const auto i = static_cast<std::size_t>(conv);
      if (i >= 3) break;
      return i;
    }
    case Primitive::Kernel: {
      const auto it = std::find(kKernelSizes.begin(), kKernelSizes.end(), kernel);
      if (it == kKernelSizes.end()) break;
      return static_cast<std::size_t>(it - kKernelSizes.begin());
    }
    case Primitive::Skip:
      return skip ? 1 : 0;
    case Primitive::Width: {
      const auto i = static_cast<std::size_t>(width);
      if (i >= 4) break;
      return i;
    }
    case Primitive::Depth:
      if (depth < 1 || depth > kMaxDepth) break;
      return static_cast<std::size_t>(depth - 1);
  }
  throw std::out_of_range(fmt::format("block field {} holds an illegal value", primitive_name(p)));
}

void BlockCode::set_value_index(Primitive p, std::size_t index) {
  if (index >= kPrimitiveCardinality[static_cast<std::size_t>(p)]) {
    throw std::out_of_range(fmt::format("{} index {} out of range", primitive_name(p), index));
  }
  switch (p) {
    case Primitive::Conv: conv = static_cast<ConvOp>(index); break;
    case Primitive::Kernel: kernel = kKernelSizes[index]; break;
    case Primitive::Skip: skip = index == 1; break;
    case Primitive::Width: width = static_cast<WidthFactor>(index); break;
    case Primitive::Depth: depth = static_cast<int>(index) + 1; break;
  }
}

bool SearchSpaceConfig::downsamples(int block_index_1based) const {
  return std::find(downsample_blocks.begin(), downsample_blocks.end(), block_index_1based) !=
         downsample_blocks.end();
}

SearchSpaceConfig small_task_space() {
  SearchSpaceConfig s;
  s.n_blocks = 7;
  s.stem_channels = 32;
  s.stem_downsample = false;
  s.downsample_blocks = {3, 5};
  s.expansion_ratio_range = {4.0, 10.0};
  s.layer_count_range.reset();
  s.input_resolution = 32;
  s.num_classes = 10;
  return s;
}

SearchSpaceConfig large_task_space() {
  SearchSpaceConfig s;
  s.n_blocks = 7;
  s.stem_channels = 32;
  s.stem_downsample = true;
  s.downsample_blocks = {2, 3, 4, 6};
  s.expansion_ratio_range = {8.0, 16.0};
  s.layer_count_range = IntRange{16, 18};
  s.input_resolution = 224;
  s.num_classes = 1000;
  return s;
}

void check_space(const SearchSpaceConfig& space) {
  if (space.n_blocks < 1) throw std::invalid_argument("n_blocks must be >= 1");
  if (space.stem_channels < 1) throw std::invalid_argument("stem_channels must be >= 1");
  if (space.input_resolution < 1) throw std::invalid_argument("input_resolution must be >= 1");
  if (space.num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  for (int b : space.downsample_blocks) {
    if (b < 1 || b > space.n_blocks) {
      throw std::invalid_argument(
          fmt::format("downsample block {} outside 1..{}", b, space.n_blocks));
    }
  }
  if (!(space.expansion_ratio_range.lo <= space.expansion_ratio_range.hi)) {
    throw std::invalid_argument("expansion_ratio_range: lo > hi");
  }
  if (space.layer_count_range && space.layer_count_range->lo > space.layer_count_range->hi) {
    throw std::invalid_argument("layer_count_range: lo > hi");
  }
}

double total_expansion_ratio(const ArchCode& arch) {
  double r = 1.0;
  for (const auto& b : arch.blocks) r *= b.width_factor();
  return r;
}

int total_layers(const ArchCode& arch) {
  int n = 0;
  for (const auto& b : arch.blocks) n += b.depth;
  return n;
}

std::string format_real(double v) {
  std::string s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

Verdict validate(const ArchCode& arch, const SearchSpaceConfig& space) {
  Verdict v;
  if (static_cast<int>(arch.size()) != space.n_blocks) {
    v.violations.push_back(
        fmt::format("block count {} != {}", arch.size(), space.n_blocks));
  }
  bool primitives_ok = true;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    for (std::size_t p = 0; p < kNumPrimitives; ++p) {
      try {
        (void)arch.blocks[i].value_index(static_cast<Primitive>(p));
      } catch (const std::out_of_range&) {
        primitives_ok = false;
        v.violations.push_back(fmt::format("block {} {} not in its legal set", i + 1,
                                           primitive_name(static_cast<Primitive>(p))));
      }
    }
  }
  if (!primitives_ok) return v;

  const double ratio = total_expansion_ratio(arch);
  const auto& er = space.expansion_ratio_range;
  if (ratio < er.lo) {
    v.violations.push_back(fmt::format("expansion ratio {} < {}", format_real(ratio), er.lo));
  } else if (ratio > er.hi) {
    v.violations.push_back(fmt::format("expansion ratio {} > {}", format_real(ratio), er.hi));
  }
  if (space.layer_count_range) {
    const int layers = total_layers(arch);
    if (layers < space.layer_count_range->lo) {
      v.violations.push_back(fmt::format("layer count {} < {}", layers, space.layer_count_range->lo));
    } else if (layers > space.layer_count_range->hi) {
      v.violations.push_back(fmt::format("layer count {} > {}", layers, space.layer_count_range->hi));
    }
  }
  return v;
}

BlockCode random_block(Rng& rng) {
  BlockCode b;
  for (std::size_t p = 0; p < kNumPrimitives; ++p) {
    b.set_value_index(static_cast<Primitive>(p), rng.uniform_index(kPrimitiveCardinality[p]));
  }
  return b;
}

ArchCode random_arch(const SearchSpaceConfig& space, Rng& rng, int max_retries) {
  check_space(space);
  ArchCode arch;
  arch.blocks.resize(static_cast<std::size_t>(space.n_blocks));
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    for (auto& b : arch.blocks) b = random_block(rng);
    if (validate(arch, space)) return arch;
  }
  throw ConstraintUnsatisfiable(
      fmt::format("no architecture satisfying the scale constraints after {} draws", max_retries));
}

std::string encode(const ArchCode& arch) {
  std::string out = "{ \"blocks\": [";
  for (std::size_t i = 0; i < arch.size(); ++i) {
    const auto& b = arch.blocks[i];
    out += i == 0 ? " " : ", ";
    out += fmt::format(
        "{{ \"conv\": \"{}\", \"kernel\": {}, \"skip\": {}, \"width\": {:.1f}, \"depth\": {} }}",
        conv_name(b.conv), b.kernel, b.skip ? "true" : "false", b.width_factor(), b.depth);
  }
  out += arch.blocks.empty() ? "] }" : " ] }";
  return out;
}

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DecodeError(where, fmt::format("missing key \"{}\"", key));
  return *it;
}

BlockCode decode_block(const json& j, const std::string& where) {
  if (!j.is_object()) throw DecodeError(where, "block must be an object");
  static const std::set<std::string> kKeys = {"conv", "kernel", "skip", "width", "depth"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw DecodeError(where, fmt::format("unknown key \"{}\"", key));
  }
  BlockCode b;

  const auto& conv = require(j, "conv", where);
  if (!conv.is_string()) throw DecodeError(where + ".conv", "conv must be a string");
  const auto name = conv.get<std::string>();
  if (name == "sepconv") {
    b.conv = ConvOp::SepConv;
  } else if (name == "mbconv3") {
    b.conv = ConvOp::MBConv3;
  } else if (name == "mbconv6") {
    b.conv = ConvOp::MBConv6;
  } else {
    throw DecodeError(where + ".conv", fmt::format("conv \"{}\" not in {{sepconv,mbconv3,mbconv6}}", name));
  }

  const auto& kernel = require(j, "kernel", where);
  if (!kernel.is_number_integer()) throw DecodeError(where + ".kernel", "kernel must be an integer");
  b.kernel = kernel.get<int>();
  if (std::find(kKernelSizes.begin(), kKernelSizes.end(), b.kernel) == kKernelSizes.end()) {
    throw DecodeError(where + ".kernel", fmt::format("kernel {} not in {{3,5,7}}", kernel.dump()));
  }

  const auto& skip = require(j, "skip", where);
  if (!skip.is_boolean()) throw DecodeError(where + ".skip", "skip must be a boolean");
  b.skip = skip.get<bool>();

  const auto& width = require(j, "width", where);
  if (!width.is_number()) throw DecodeError(where + ".width", "width must be a number");
  const double w = width.get<double>();
  if (w == 0.5) {
    b.width = WidthFactor::Half;
  } else if (w == 1.0) {
    b.width = WidthFactor::One;
  } else if (w == 1.5) {
    b.width = WidthFactor::OneAndHalf;
  } else if (w == 2.0) {
    b.width = WidthFactor::Two;
  } else {
    throw DecodeError(where + ".width", fmt::format("width {} not in {{0.5,1.0,1.5,2.0}}", width.dump()));
  }

  const auto& depth = require(j, "depth", where);
  if (!depth.is_number_integer()) throw DecodeError(where + ".depth", "depth must be an integer");
  b.depth = depth.get<int>();
  if (b.depth < 1 || b.depth > kMaxDepth) {
    throw DecodeError(where + ".depth", fmt::format("depth {} not in [1,4]", depth.dump()));
  }
  return b;
}

}  // namespace

ArchCode decode(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw DecodeError(fmt::format("byte {}", e.byte), e.what());
  }
  if (!j.is_object()) throw DecodeError("", "architecture must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "blocks") throw DecodeError("", fmt::format("unknown key \"{}\"", key));
  }
  const auto& blocks = require(j, "blocks", "");
  if (!blocks.is_array()) throw DecodeError("blocks", "blocks must be an array");
  ArchCode arch;
  arch.blocks.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    arch.blocks.push_back(decode_block(blocks[i], fmt::format("blocks[{}]", i)));
  }
  return arch;
}

int hamming_distance(const ArchCode& a, const ArchCode& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: block counts differ");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t p = 0; p < kNumPrimitives; ++p) {
      const auto prim = static_cast<Primitive>(p);
      d += a.blocks[i].value_index(prim) != b.blocks[i].value_index(prim) ? 1 : 0;
    }
  }
  return d;
}

int blocks_beyond_one_edit(const ArchCode& a, const ArchCode& b) {
  if (a.size() != b.size()) throw std::invalid_argument("blocks_beyond_one_edit: block counts differ");
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int diff = 0;
    for (std::size_t p = 0; p < kNumPrimitives; ++p) {
      const auto prim = static_cast<Primitive>(p);
      diff += a.blocks[i].value_index(prim) != b.blocks[i].value_index(prim) ? 1 : 0;
    }
    n += diff > 1 ? 1 : 0;
  }
  return n;
}

}  // namespace eatnas
