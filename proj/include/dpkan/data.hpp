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

#ifndef DPKAN_DATA_HPP
#define DPKAN_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpkan/feature_scaling.hpp"
#include "dpkan/loss.hpp"
#include "dpkan/numerics.hpp"

namespace dpkan {

enum class Task { kRegression, kClassification };

std::string to_string(Task task);

/// Features plus either regression targets or class labels.
struct Dataset {
  Task task = Task::kRegression;
  Matrix features;
  Vector targets;           // regression
  std::vector<int> labels;  // classification
  int num_classes = 0;
  std::vector<std::string> feature_names;
  std::optional<FeatureScaling> scaling;

  Index size() const { return features.rows(); }
  Index dims() const { return features.cols(); }

  /// Rows selected by `indices`, in that order.
  Dataset subset(std::span<const Index> indices) const;
  /// First `n` rows (all rows if n >= size()).
  Dataset head(Index n) const;

  /// Loss targets for the rows in `indices`.
  Targets targets_for(std::span<const Index> indices) const;
  Targets all_targets() const;

  /// Throws ShapeError/ArgumentError if the fields are inconsistent.
  void validate() const;
};

/// Comma-separated numeric file. Features are all non-target columns in file
/// order. Without a header, columns are named c0, c1, ... and `target_column`
/// must use that form.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 bool has_header = true);

/// Writes features then target as a headered CSV (x0..x{d-1},y) with
/// round-trip precision.
void write_csv(const Dataset& data, const std::filesystem::path& path);

inline constexpr double kMnistMean = 0.1307;
inline constexpr double kMnistStd = 0.3081;

/// Big-endian IDX pair: images (magic 2051, n x rows x cols bytes) and labels
/// (magic 2049, n bytes). Pixels are scaled to [0, 1] and standardized with
/// kMnistMean and kMnistStd.
Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

/// The standardized feature value of a raw [0, 1] pixel intensity.
inline double mnist_standardize(double unit_pixel) {
  return (unit_pixel - kMnistMean) / kMnistStd;
}

/// x ~ N(0, I_d); y = X w + noise_std * N(0, 1) with w_j = (-1)^j (1 + j/d).
Dataset gen_synthetic(Index n, Index d, double noise_std, std::uint64_t seed);

Vector synthetic_weights(Index d);

/// Z-scores every dataset with statistics computed on `train` alone and
/// records them in each result's `scaling`.
std::vector<Dataset> standardize(const Dataset& train, const std::vector<Dataset>& others);

FeatureScaling compute_scaling(const Matrix& features);

/// Seeded shuffle then split; the test side gets round(n * test_fraction) rows.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

/// Reinterprets regression targets as class labels; every target must be a
/// nonnegative integer. num_classes = max label + 1.
Dataset to_classification(Dataset data);

/// Fisher-Yates permutation of 0..n-1 drawn from `rng`.
std::vector<Index> permutation(Index n, Generator& rng);

}  // namespace dpkan

#endif  // DPKAN_DATA_HPP
