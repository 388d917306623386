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

#include "eatnas/weight_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>

#include <fmt/format.h>

namespace eatnas {

ParamMatrix::ParamMatrix(TensorShape shape)
    : shape_(shape), values_(static_cast<std::size_t>(shape.elements()), 0.0f) {
  if (shape.w < 1 || shape.h < 1 || shape.ch_in < 1 || shape.ch_out < 1) {
    throw ShapeError("ParamMatrix: every dimension must be >= 1");
  }
}

ParamMatrix::ParamMatrix(TensorShape shape, std::vector<float> values)
    : shape_(shape), values_(std::move(values)) {
  if (shape.w < 1 || shape.h < 1 || shape.ch_in < 1 || shape.ch_out < 1) {
    throw ShapeError("ParamMatrix: every dimension must be >= 1");
  }
  if (static_cast<std::int64_t>(values_.size()) != shape.elements()) {
    throw ShapeError(fmt::format("ParamMatrix: {} values for {} elements", values_.size(), shape.elements()));
  }
}

double WeightInitSpec::stddev_for(const TensorShape& shape) const {
  if (!fan_in_scaled) return std;
  return std::sqrt(2.0 / static_cast<double>(shape.w * shape.h * shape.ch_in));
}

ParamMatrix fresh_matrix(const TensorShape& shape, const WeightInitSpec& init, Rng& rng) {
  ParamMatrix m(shape);
  const double sd = init.stddev_for(shape);
  for (float& v : m.values()) v = static_cast<float>(rng.normal(init.mean, sd));
  return m;
}

ParamMatrix share_width(const TensorShape& new_shape, const ParamMatrix& old, const WeightInitSpec& init,
                        Rng& rng) {
  const TensorShape& os = old.shape();
  if (new_shape.w != os.w || new_shape.h != os.h) {
    throw ShapeError(fmt::format("share_width: spatial size {}x{} differs from stored {}x{}", new_shape.w,
                                 new_shape.h, os.w, os.h));
  }
  const int shared_in = std::min(new_shape.ch_in, os.ch_in);
  const int shared_out = std::min(new_shape.ch_out, os.ch_out);
  const double sd = init.stddev_for(new_shape);
  ParamMatrix out(new_shape);
  // Walk in storage order so fresh draws have a fixed sequence.
  for (int x = 0; x < new_shape.w; ++x) {
    for (int y = 0; y < new_shape.h; ++y) {
      for (int ci = 0; ci < new_shape.ch_in; ++ci) {
        for (int co = 0; co < new_shape.ch_out; ++co) {
          out.at(x, y, ci, co) = (ci < shared_in && co < shared_out)
                                     ? old.at(x, y, ci, co)
                                     : static_cast<float>(rng.normal(init.mean, sd));
        }
      }
    }
  }
  return out;
}

BlockWeights share_depth(std::span<const TensorShape> new_block, const BlockWeights& old_block,
                         const WeightInitSpec& init, Rng& rng) {
  BlockWeights out;
  out.layers.reserve(new_block.size());
  // Layers 1..min(l_new, l_old) inclusive are inherited.
  const std::size_t inherited = std::min(new_block.size(), old_block.layers.size());
  for (std::size_t i = 0; i < new_block.size(); ++i) {
    out.layers.push_back(i < inherited ? share_width(new_block[i], old_block.layers[i], init, rng)
                                       : fresh_matrix(new_block[i], init, rng));
  }
  return out;
}

std::string to_string(const LayerSignature& sig) {
  return fmt::format("block{}.layer{}.{}.k{}.{}", sig.block_index, sig.layer_index, conv_name(sig.op),
                     sig.kernel, part_name(sig.part));
}

void WeightStore::commit(const LayerSignature& sig, ParamMatrix m) {
  auto entry = std::make_shared<const ParamMatrix>(std::move(m));
  std::unique_lock lock(mutex_);
  entries_[sig] = std::move(entry);
}

void WeightStore::commit_all(const WeightMap& weights) {
  std::unique_lock lock(mutex_);
  for (const auto& [sig, m] : weights) entries_[sig] = std::make_shared<const ParamMatrix>(m);
}

std::optional<ParamMatrix> WeightStore::lookup(const LayerSignature& sig) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(sig);
  if (it == entries_.end()) return std::nullopt;
  return *it->second;
}

std::size_t WeightStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void WeightStore::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

std::map<LayerSignature, std::shared_ptr<const ParamMatrix>> WeightStore::snapshot() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

namespace {

constexpr char kDumpMagic[8] = {'E', 'A', 'T', 'N', 'S', 'T', 'O', 'R'};
constexpr std::uint32_t kDumpVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("weight dump: truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint8_t get_u8(std::istream& is) {
  char c;
  if (!is.get(c)) throw std::runtime_error("weight dump: truncated");
  return static_cast<std::uint8_t>(c);
}

}  // namespace

void WeightStore::dump(std::ostream& os) const {
  const auto entries = snapshot();
  os.write(kDumpMagic, sizeof kDumpMagic);
  put_u32(os, kDumpVersion);
  put_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [sig, m] : entries) {
    put_u32(os, static_cast<std::uint32_t>(sig.block_index));
    put_u32(os, static_cast<std::uint32_t>(sig.layer_index));
    os.put(static_cast<char>(sig.op));
    os.put(static_cast<char>(sig.kernel));
    os.put(static_cast<char>(sig.part));
    os.put(0);
    const auto& s = m->shape();
    for (int d : {s.w, s.h, s.ch_in, s.ch_out}) put_u32(os, static_cast<std::uint32_t>(d));
  }
  for (const auto& [sig, m] : entries) {
    for (float v : m->values()) put_u32(os, std::bit_cast<std::uint32_t>(v));
  }
}

void WeightStore::load(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kDumpMagic, 8) != 0) {
    throw std::runtime_error("weight dump: bad magic");
  }
  if (const auto version = get_u32(is); version != kDumpVersion) {
    throw std::runtime_error(fmt::format("weight dump: unsupported version {}", version));
  }
  const std::uint32_t count = get_u32(is);
  std::vector<std::pair<LayerSignature, TensorShape>> header;
  header.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSignature sig;
    sig.block_index = static_cast<std::int32_t>(get_u32(is));
    sig.layer_index = static_cast<std::int32_t>(get_u32(is));
    sig.op = static_cast<ConvOp>(get_u8(is));
    sig.kernel = get_u8(is);
    sig.part = static_cast<TensorPart>(get_u8(is));
    (void)get_u8(is);
    TensorShape s;
    s.w = static_cast<int>(get_u32(is));
    s.h = static_cast<int>(get_u32(is));
    s.ch_in = static_cast<int>(get_u32(is));
    s.ch_out = static_cast<int>(get_u32(is));
    header.emplace_back(sig, s);
  }
  std::map<LayerSignature, std::shared_ptr<const ParamMatrix>> entries;
  for (const auto& [sig, shape] : header) {
    std::vector<float> values(static_cast<std::size_t>(shape.elements()));
    for (float& v : values) v = std::bit_cast<float>(get_u32(is));
    entries[sig] = std::make_shared<const ParamMatrix>(shape, std::move(values));
  }
  std::unique_lock lock(mutex_);
  entries_ = std::move(entries);
}

WeightMap derive_weights(const ArchCode& child, const SearchSpaceConfig& space, const WeightStore& store,
                         const WeightInitSpec& init) {
  const auto snapshot = store.snapshot();
  const ChannelPlan plan = resolve_channel_plan(child, space);
  Rng rng(init.seed);
  WeightMap out;
  for (std::size_t b = 0; b < plan.blocks.size(); ++b) {
    const auto& code = child.blocks[b];
    const auto& block = plan.blocks[b];
    for (std::size_t l = 0; l < block.layers.size(); ++l) {
      const auto& layer = block.layers[l];
      for (const auto& t : layer_tensors(code.conv, code.kernel, layer.in_channels, layer.out_channels)) {
        const LayerSignature sig{static_cast<int>(b) + 1, static_cast<int>(l) + 1, code.conv, code.kernel,
                                 t.part};
        const auto it = snapshot.find(sig);
        out.emplace(sig, it != snapshot.end() ? share_width(t.shape, *it->second, init, rng)
                                              : fresh_matrix(t.shape, init, rng));
      }
    }
  }
  return out;
}

}  // namespace eatnas
