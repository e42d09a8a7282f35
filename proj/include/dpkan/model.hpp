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

#ifndef DPKAN_MODEL_HPP
#define DPKAN_MODEL_HPP

#include <optional>
#include <variant>
#include <vector>

#include "dpkan/feature_scaling.hpp"
#include "dpkan/layers.hpp"
#include "dpkan/loss.hpp"

namespace dpkan {

using Layer = std::variant<LinearLayer, KanLayer, FasterKanLayer>;

Index layer_n_in(const Layer& layer);
Index layer_n_out(const Layer& layer);
Index layer_parameter_count(const Layer& layer);

struct ForwardCache {
  std::vector<LayerCache> layers;
};

/// Ordered stack of layers. The flattened parameter vector concatenates each
/// layer's parameters in layer order.
class Model {
 public:
  Model() = default;
  explicit Model(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  Index n_in() const;
  Index n_out() const;
  Index parameter_count() const;
  /// Offset of layer `i` inside the flattened parameter vector.
  Index parameter_offset(std::size_t i) const;

  Vector flatten() const;
  void unflatten(const Vector& parameters);

  void initialize(Generator& rng);

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, ForwardCache& cache) const;

  /// Backpropagates `grad_out` (one row per example) and returns the
  /// per-example parameter gradients, shape (batch, parameter_count).
  Matrix backward(const ForwardCache& cache, const Matrix& grad_out) const;

  /// Standardization applied to raw features before `forward`, when the model
  /// was trained on standardized data.
  const std::optional<FeatureScaling>& input_scaling() const { return input_scaling_; }
  void set_input_scaling(std::optional<FeatureScaling> s) { input_scaling_ = std::move(s); }

  /// forward() after applying input_scaling (if any) to raw features.
  Matrix predict(const Matrix& raw_features) const;

 private:
  std::vector<Layer> layers_;
  std::optional<FeatureScaling> input_scaling_;
};

/// Widths list {in, h1, ..., out}. Hidden layers use `hidden_activation`; the
/// output layer has none.
Model make_mlp(const std::vector<Index>& widths, Activation hidden_activation = Activation::kRelu);
Model make_kan(const std::vector<Index>& widths, const BSplineGrid<double>& grid);
Model make_fasterkan(const std::vector<Index>& widths, const RswafGrid<double>& grid,
                     bool layer_norm = true);

Index count_parameters(const Model& model);

/// Gradient of the loss of one example with respect to every parameter.
struct FlatGradient {
  Vector values;
  Index sample_index = 0;
};

/// Per-example gradient matrix (batch, parameter_count). If `mean_loss` is
/// given it receives the batch-mean loss.
Matrix per_sample_gradient_matrix(const Model& model, const Matrix& batch_x,
                                  const Targets& batch_y, double* mean_loss = nullptr);

std::vector<FlatGradient> per_sample_gradients(const Model& model, const Matrix& batch_x,
                                               const Targets& batch_y, LossKind loss);

/// Sequential row sum divided by `divisor`. Training paths share this so the
/// private and non-private reductions agree bitwise.
Vector sum_rows_divided(const Matrix& rows, double divisor);

/// Gradient of the batch-mean loss.
Vector batch_gradient(const Model& model, const Matrix& batch_x, const Targets& batch_y,
                      double* mean_loss = nullptr);

}  // namespace dpkan

#endif  // DPKAN_MODEL_HPP
