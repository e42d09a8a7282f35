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

// Trainable layers. Each layer owns its parameters, runs a batched forward
// pass, and a backward pass that writes one gradient row per example (no
// reduction over the batch) into a caller-provided block.

#ifndef DPKAN_LAYERS_HPP
#define DPKAN_LAYERS_HPP

#include <span>
#include <string>

#include "dpkan/basis.hpp"
#include "dpkan/numerics.hpp"

namespace dpkan {

enum class Activation { kNone, kRelu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// Intermediates retained by forward for the matching backward call. Fields
/// are layer-specific; unused ones stay empty.
struct LayerCache {
  Matrix input;
  Matrix pre_activation;  // linear: affine output before the activation
  Matrix basis;           // kan/fasterkan: basis values, (B, n_in * nb)
  Matrix basis_grad;      // d basis / d input at each basis entry
  Matrix normalized;      // fasterkan: layer-normalized input (before affine)
  Vector inv_std;         // fasterkan: 1/sqrt(var + eps) per example
};

/// Per-example gradient rows for one layer's parameters: (batch, parameter_count).
using GradientBlock = Eigen::Ref<Matrix, 0, Eigen::OuterStride<>>;

/// Affine map with optional ReLU. Parameters: weights (row-major), then bias.
class LinearLayer {
 public:
  LinearLayer(Index n_in, Index n_out, Activation activation = Activation::kNone);

  Index n_in() const { return weights_.cols(); }
  Index n_out() const { return weights_.rows(); }
  Index parameter_count() const { return weights_.size() + bias_.size(); }
  Activation activation() const { return activation_; }

  Matrix& weights() { return weights_; }
  const Matrix& weights() const { return weights_; }
  Vector& bias() { return bias_; }
  const Vector& bias() const { return bias_; }

  /// weights ~ N(0, 1/n_in), bias = 0.
  void initialize(Generator& rng);

  Matrix forward(const Matrix& x, LayerCache* cache) const;
  Matrix backward(const LayerCache& cache, const Matrix& grad_out, GradientBlock grads) const;

  void get_parameters(std::span<double> out) const;
  void set_parameters(std::span<const double> in);

 private:
  Matrix weights_;
  Vector bias_;
  Activation activation_;
};

/// KAN layer: y_j = sum_i (w_b[j,i] * silu(x_i) + w_s[j,i] * spline_{j,i}(x_i)).
/// Every edge (j, i) has its own G + k spline coefficients on a shared grid.
/// Parameters: coeffs (row j * n_in + i), then w_b, then w_s.
class KanLayer {
 public:
  KanLayer(Index n_in, Index n_out, BSplineGrid<double> grid);

  Index n_in() const { return n_in_; }
  Index n_out() const { return n_out_; }
  Index num_basis() const { return grid_.num_basis(); }
  Index parameter_count() const { return coeffs_.size() + w_b_.size() + w_s_.size(); }
  const BSplineGrid<double>& grid() const { return grid_; }

  /// (n_out * n_in, G + k); row j * n_in + i holds edge (j, i).
  Matrix& coeffs() { return coeffs_; }
  const Matrix& coeffs() const { return coeffs_; }
  Matrix& w_b() { return w_b_; }
  const Matrix& w_b() const { return w_b_; }
  Matrix& w_s() { return w_s_; }
  const Matrix& w_s() const { return w_s_; }

  /// coeffs ~ N(0, 0.1), w_b = w_s = 1.
  void initialize(Generator& rng);

  Matrix forward(const Matrix& x, LayerCache* cache) const;
  Matrix backward(const LayerCache& cache, const Matrix& grad_out, GradientBlock grads) const;

  void get_parameters(std::span<double> out) const;
  void set_parameters(std::span<const double> in);

 private:
  Index n_in_;
  Index n_out_;
  BSplineGrid<double> grid_;
  Matrix coeffs_;
  Matrix w_b_;
  Matrix w_s_;
};

/// FasterKAN layer: optional input layer norm, reflectional-switch basis
/// expansion of every input, then an affine map over the concatenated basis
/// values. Parameters: [ln_gamma, ln_beta] when layer norm is on, weights
/// (n_out, n_in * num_grids) with column i * num_grids + g, then bias.
class FasterKanLayer {
 public:
  static constexpr double kLayerNormEps = 1e-5;

  FasterKanLayer(Index n_in, Index n_out, RswafGrid<double> grid, bool layer_norm = true);

  Index n_in() const { return n_in_; }
  Index n_out() const { return weights_.rows(); }
  Index parameter_count() const {
    return (layer_norm_ ? 2 * n_in_ : 0) + weights_.size() + bias_.size();
  }
  const RswafGrid<double>& grid() const { return grid_; }
  bool layer_norm() const { return layer_norm_; }

  Vector& ln_gamma() { return ln_gamma_; }
  const Vector& ln_gamma() const { return ln_gamma_; }
  Vector& ln_beta() { return ln_beta_; }
  const Vector& ln_beta() const { return ln_beta_; }
  Matrix& weights() { return weights_; }
  const Matrix& weights() const { return weights_; }
  Vector& bias() { return bias_; }
  const Vector& bias() const { return bias_; }

  /// weights ~ N(0, 1/(n_in * num_grids)), bias = 0, gamma = 1, beta = 0.
  void initialize(Generator& rng);

  Matrix forward(const Matrix& x, LayerCache* cache) const;
  Matrix backward(const LayerCache& cache, const Matrix& grad_out, GradientBlock grads) const;

  void get_parameters(std::span<double> out) const;
  void set_parameters(std::span<const double> in);

 private:
  Index n_in_;
  RswafGrid<double> grid_;
  bool layer_norm_;
  Vector ln_gamma_;
  Vector ln_beta_;
  Matrix weights_;
  Vector bias_;
};

}  // namespace dpkan

#endif  // DPKAN_LAYERS_HPP
