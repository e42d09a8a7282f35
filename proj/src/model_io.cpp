// Copyright 2026 The dpkan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpkan/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dpkan {

namespace {

constexpr char kMagic[5] = {'D', 'P', 'K', 'A', 'N'};

constexpr int kMaxGridEntries = 1 << 16;

enum class LayerKind : std::uint32_t { kLinear = 0, kKan = 1, kFasterKan = 2 };

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  Vector f64s(std::uint64_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / 8) {
      throw TruncationError(std::string("model file truncated in ") + what);
    }
    Vector v(static_cast<Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Index>(i)] = f64(what);
    return v;
  }
  void magic() {
    need(sizeof(kMagic), "magic");
    if (std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) != 0) {
      throw ParseError("not a model file (bad magic)");
    }
    pos_ += sizeof(kMagic);
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw TruncationError(std::string("model file truncated in ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_layer(Writer& w, const Layer& layer) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, LinearLayer>) {
          w.u32(static_cast<std::uint32_t>(LayerKind::kLinear));
        } else if constexpr (std::is_same_v<T, KanLayer>) {
          w.u32(static_cast<std::uint32_t>(LayerKind::kKan));
        } else {
          w.u32(static_cast<std::uint32_t>(LayerKind::kFasterKan));
        }
        w.u32(static_cast<std::uint32_t>(l.n_in()));
        w.u32(static_cast<std::uint32_t>(l.n_out()));
        if constexpr (std::is_same_v<T, LinearLayer>) {
          w.u32(l.activation() == Activation::kRelu ? 1u : 0u);
        } else if constexpr (std::is_same_v<T, KanLayer>) {
          w.u32(static_cast<std::uint32_t>(l.grid().grid_size()));
          w.u32(static_cast<std::uint32_t>(l.grid().degree()));
          w.f64(l.grid().lo());
          w.f64(l.grid().hi());
        } else {
          w.u32(static_cast<std::uint32_t>(l.grid().num_grids()));
          w.f64(l.grid().grid_min());
          w.f64(l.grid().grid_max());
          w.f64(l.grid().inv_denominator());
          w.u32(l.layer_norm() ? 1u : 0u);
        }
        Vector params(l.parameter_count());
        l.get_parameters(std::span<double>(params.data(), static_cast<std::size_t>(params.size())));
        w.u64(static_cast<std::uint64_t>(params.size()));
        w.f64s(params);
      },
      layer);
}

// Builds the layer skeleton from its descriptor. Descriptor values that the
// grid or layer constructors reject are reported as format errors.
Layer read_layer_descriptor(Reader& r) {
  const std::uint32_t kind = r.u32("layer kind");
  const auto n_in = static_cast<Index>(r.u32("layer n_in"));
  const auto n_out = static_cast<Index>(r.u32("layer n_out"));
  // Every layer kind carries at least n_in * n_out parameters; reject sizes the
  // remaining payload cannot hold before allocating anything.
  if (static_cast<std::uint64_t>(n_in) * static_cast<std::uint64_t>(n_out) >
      r.remaining() / 8) {
    throw TruncationError("model file truncated: layer shape exceeds the remaining payload");
  }
  try {
    switch (kind) {
      case static_cast<std::uint32_t>(LayerKind::kLinear): {
        const std::uint32_t act = r.u32("linear activation");
        if (act > 1) throw FormatShapeError("unknown activation code " + std::to_string(act));
        return LinearLayer(n_in, n_out, act == 1 ? Activation::kRelu : Activation::kNone);
      }
      case static_cast<std::uint32_t>(LayerKind::kKan): {
        const auto g = static_cast<int>(std::min<std::uint32_t>(r.u32("kan grid size"), kMaxGridEntries + 1));
        const auto k = static_cast<int>(std::min<std::uint32_t>(r.u32("kan degree"), kMaxGridEntries + 1));
        const double lo = r.f64("kan grid lo");
        const double hi = r.f64("kan grid hi");
        if (g > kMaxGridEntries || k > kMaxGridEntries) {
          throw FormatShapeError("kan grid descriptor out of range");
        }
        return KanLayer(n_in, n_out, BSplineGrid<double>(g, k, lo, hi));
      }
      case static_cast<std::uint32_t>(LayerKind::kFasterKan): {
        const auto ng = static_cast<int>(std::min<std::uint32_t>(r.u32("fasterkan num_grids"), kMaxGridEntries + 1));
        const double gmin = r.f64("fasterkan grid_min");
        const double gmax = r.f64("fasterkan grid_max");
        const double inv = r.f64("fasterkan inv_denominator");
        const std::uint32_t ln = r.u32("fasterkan layer_norm");
        if (ng > kMaxGridEntries) throw FormatShapeError("fasterkan num_grids out of range");
        return FasterKanLayer(n_in, n_out, RswafGrid<double>(gmin, gmax, ng, inv), ln != 0);
      }
      default:
        throw FormatShapeError("unknown layer kind " + std::to_string(kind));
    }
  } catch (const ArgumentError& e) {
    throw FormatShapeError(std::string("invalid layer descriptor: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.layers().size()));
  for (const auto& layer : model.layers()) write_layer(w, layer);
  const auto& scaling = model.input_scaling();
  w.u32(scaling ? 1u : 0u);
  if (scaling) {
    w.u64(static_cast<std::uint64_t>(scaling->size()));
    w.f64s(scaling->mean);
    w.f64s(scaling->std);
  }
  return w.take();
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic();
  const std::uint32_t version = r.u32("version");
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " + std::to_string(version) +
                       " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint32_t count = r.u32("layer count");
  if (count == 0) throw FormatShapeError("model file declares zero layers");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer layer = read_layer_descriptor(r);
    const std::uint64_t n = r.u64("parameter count");
    const auto expected = static_cast<std::uint64_t>(layer_parameter_count(layer));
    if (n != expected) {
      throw FormatShapeError("layer " + std::to_string(i) + " declares " + std::to_string(n) +
                             " parameters but its shape requires " + std::to_string(expected));
    }
    const Vector params = r.f64s(n, "layer parameters");
    std::visit(
        [&](auto& l) {
          l.set_parameters(std::span<const double>(params.data(), static_cast<std::size_t>(n)));
        },
        layer);
    layers.push_back(std::move(layer));
  }
  Model model = [&] {
    try {
      return Model(std::move(layers));
    } catch (const ShapeError& e) {
      throw FormatShapeError(e.what());
    }
  }();
  if (r.u32("scaling flag") != 0) {
    const std::uint64_t d = r.u64("scaling width");
    if (d != static_cast<std::uint64_t>(model.n_in())) {
      throw FormatShapeError("feature scaling width " + std::to_string(d) +
                             " does not match model input width " + std::to_string(model.n_in()));
    }
    FeatureScaling s;
    s.mean = r.f64s(d, "scaling means");
    s.std = r.f64s(d, "scaling stds");
    model.set_input_scaling(std::move(s));
  }
  if (!r.at_end()) throw FormatShapeError("trailing bytes after model payload");
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace dpkan
