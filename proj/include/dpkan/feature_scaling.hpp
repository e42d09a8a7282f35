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

#ifndef DPKAN_FEATURE_SCALING_HPP
#define DPKAN_FEATURE_SCALING_HPP

#include "dpkan/numerics.hpp"

namespace dpkan {

/// Per-column z-score statistics. Zero-variance columns are stored as
/// mean 0, std 1 so the transform leaves them unchanged.
struct FeatureScaling {
  Vector mean;
  Vector std;

  Index size() const { return mean.size(); }

  /// (x - mean) / std applied row-wise.
  Matrix apply(const Matrix& x) const {
    if (x.cols() != mean.size()) {
      throw ShapeError("FeatureScaling::apply: expected " + std::to_string(mean.size()) +
                       " columns, got " + shape_string(x));
    }
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
  }

  Matrix invert(const Matrix& z) const {
    if (z.cols() != mean.size()) {
      throw ShapeError("FeatureScaling::invert: expected " + std::to_string(mean.size()) +
                       " columns, got " + shape_string(z));
    }
    return (z.array().rowwise() * std.transpose().array()).matrix().rowwise() +
           mean.transpose();
  }

  bool operator==(const FeatureScaling& other) const {
    return mean.size() == other.mean.size() && mean == other.mean && std == other.std;
  }
};

}  // namespace dpkan

#endif  // DPKAN_FEATURE_SCALING_HPP
