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

// Binary model container. Layout (all integers little-endian):
//
//   "DPKAN"                 5 bytes magic
//   u32 version             currently 1
//   u32 layer_count
//   per layer:
//     u32 kind              0 = linear, 1 = kan, 2 = fasterkan
//     u32 n_in, u32 n_out
//     linear:    u32 activation (0 none, 1 relu)
//     kan:       u32 grid_size, u32 degree, f64 lo, f64 hi
//     fasterkan: u32 num_grids, f64 grid_min, f64 grid_max, f64 inv_denominator,
//                u32 layer_norm (0/1)
//     u64 parameter_count
//     f64[parameter_count]  layer parameters in flatten() order
//   u32 has_scaling (0/1)
//   if 1: u64 d, f64[d] means, f64[d] stds
//
// Trailing bytes after the last field are rejected.

#ifndef DPKAN_MODEL_IO_HPP
#define DPKAN_MODEL_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dpkan/model.hpp"

namespace dpkan {

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);

/// Throws VersionError, TruncationError or FormatShapeError (all ParseError)
/// and never returns a partially built model.
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace dpkan

#endif  // DPKAN_MODEL_IO_HPP
