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

#include "dpkan/layers.hpp"

#include <algorithm>
#include <cmath>

namespace dpkan {

namespace {

void check_input(const Matrix& x, Index n_in, const char* who) {
  if (x.cols() != n_in) {
    throw ShapeError(std::string(who) + ": expected " + std::to_string(n_in) +
                     " input columns, got " + shape_string(x));
  }
}

void check_backward(const LayerCache& cache, const Matrix& grad_out, Index n_out,
                    const GradientBlock& grads, Index parameter_count, const char* who) {
  if (grad_out.rows() != cache.input.rows() || grad_out.cols() != n_out) {
    throw ShapeError(std::string(who) + ": output gradient " + shape_string(grad_out) +
                     " does not match the cached batch");
  }
  if (grads.rows() != grad_out.rows() || grads.cols() != parameter_count) {
    throw ShapeError(std::string(who) + ": gradient block " + shape_string(grads) +
                     " has the wrong shape");
  }
}

void check_span(std::size_t got, Index want, const char* who) {
  if (got != static_cast<std::size_t>(want)) {
    throw ShapeError(std::string(who) + ": expected " + std::to_string(want) +
                     " parameters, got " + std::to_string(got));
  }
}

// Copies a dense block into `out` starting at `offset`; returns the new offset.
template <typename Derived>
std::size_t put(const Eigen::DenseBase<Derived>& m, std::span<double> out, std::size_t offset) {
  const auto n = static_cast<std::size_t>(m.size());
  Eigen::Map<Matrix>(out.data() + offset, m.rows(), m.cols()) = m;
  return offset + n;
}

template <typename Derived>
std::size_t take(Eigen::PlainObjectBase<Derived>& m, std::span<const double> in,
                 std::size_t offset) {
  const auto n = static_cast<std::size_t>(m.size());
  m = Eigen::Map<const Matrix>(in.data() + offset, m.rows(), m.cols());
  return offset + n;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "none"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "none") return Activation::kNone;
  throw ArgumentError("unknown activation '" + name + "'");
}

// --- LinearLayer -------------------------------------------------------------

LinearLayer::LinearLayer(Index n_in, Index n_out, Activation activation)
    : weights_(Matrix::Zero(n_out, n_in)), bias_(Vector::Zero(n_out)), activation_(activation) {
  if (n_in < 1 || n_out < 1) throw ArgumentError("LinearLayer: widths must be positive");
}

void LinearLayer::initialize(Generator& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(n_in()));
  for (Index r = 0; r < weights_.rows(); ++r)
    for (Index c = 0; c < weights_.cols(); ++c) weights_(r, c) = stddev * rng.normal();
  bias_.setZero();
}

Matrix LinearLayer::forward(const Matrix& x, LayerCache* cache) const {
  check_input(x, n_in(), "LinearLayer::forward");
  Matrix z = x * weights_.transpose();
  z.rowwise() += bias_.transpose();
  if (cache) {
    cache->input = x;
    cache->pre_activation = z;
  }
  if (activation_ == Activation::kRelu) z = z.cwiseMax(0.0);
  return z;
}

Matrix LinearLayer::backward(const LayerCache& cache, const Matrix& grad_out,
                             GradientBlock grads) const {
  check_backward(cache, grad_out, n_out(), grads, parameter_count(), "LinearLayer::backward");
  Matrix dz = grad_out;
  if (activation_ == Activation::kRelu) {
    dz = (cache.pre_activation.array() > 0.0).select(grad_out, 0.0);
  }
  const Index nw = weights_.size();
  for (Index b = 0; b < dz.rows(); ++b) {
    Eigen::Map<Matrix> dw(grads.row(b).data(), n_out(), n_in());
    dw.noalias() = dz.row(b).transpose() * cache.input.row(b);
    grads.row(b).segment(nw, n_out()) = dz.row(b);
  }
  return dz * weights_;
}

void LinearLayer::get_parameters(std::span<double> out) const {
  check_span(out.size(), parameter_count(), "LinearLayer::get_parameters");
  put(bias_.transpose(), out, put(weights_, out, 0));
}

void LinearLayer::set_parameters(std::span<const double> in) {
  check_span(in.size(), parameter_count(), "LinearLayer::set_parameters");
  const std::size_t off = take(weights_, in, 0);
  bias_ = Eigen::Map<const Vector>(in.data() + off, bias_.size());
}

// --- KanLayer ----------------------------------------------------------------

KanLayer::KanLayer(Index n_in, Index n_out, BSplineGrid<double> grid)
    : n_in_(n_in), n_out_(n_out), grid_(std::move(grid)) {
  if (n_in < 1 || n_out < 1) throw ArgumentError("KanLayer: widths must be positive");
  coeffs_ = Matrix::Zero(n_out * n_in, grid_.num_basis());
  w_b_ = Matrix::Zero(n_out, n_in);
  w_s_ = Matrix::Zero(n_out, n_in);
}

void KanLayer::initialize(Generator& rng) {
  const double stddev = std::sqrt(0.1);
  for (Index r = 0; r < coeffs_.rows(); ++r)
    for (Index c = 0; c < coeffs_.cols(); ++c) coeffs_(r, c) = stddev * rng.normal();
  w_b_.setOnes();
  w_s_.setOnes();
}

Matrix KanLayer::forward(const Matrix& x, LayerCache* cache) const {
  check_input(x, n_in_, "KanLayer::forward");
  const Index batch = x.rows();
  const Index nb = num_basis();
  Matrix basis(batch, n_in_ * nb);
  Matrix basis_grad(batch, n_in_ * nb);
  for (Index b = 0; b < batch; ++b) {
    for (Index i = 0; i < n_in_; ++i) {
      const auto n = static_cast<std::size_t>(nb);
      bspline_basis_and_derivative(x(b, i), grid_, std::span<double>(&basis(b, i * nb), n),
                                   std::span<double>(&basis_grad(b, i * nb), n));
    }
  }
  Matrix y = Matrix::Zero(batch, n_out_);
  for (Index b = 0; b < batch; ++b) {
    for (Index j = 0; j < n_out_; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < n_in_; ++i) {
        const double spline = coeffs_.row(j * n_in_ + i).dot(basis.row(b).segment(i * nb, nb));
        acc += w_b_(j, i) * silu(x(b, i)) + w_s_(j, i) * spline;
      }
      y(b, j) = acc;
    }
  }
  if (cache) {
    cache->input = x;
    cache->basis = std::move(basis);
    cache->basis_grad = std::move(basis_grad);
  }
  return y;
}

Matrix KanLayer::backward(const LayerCache& cache, const Matrix& grad_out,
                          GradientBlock grads) const {
  check_backward(cache, grad_out, n_out_, grads, parameter_count(), "KanLayer::backward");
  const Index batch = grad_out.rows();
  const Index nb = num_basis();
  const Index n_coeff = coeffs_.size();
  const Index n_edge = n_out_ * n_in_;
  Matrix grad_in = Matrix::Zero(batch, n_in_);
  for (Index b = 0; b < batch; ++b) {
    auto row = grads.row(b);
    for (Index i = 0; i < n_in_; ++i) {
      const double xi = cache.input(b, i);
      const double s = silu(xi);
      const double ds = silu_derivative(xi);
      const auto basis = cache.basis.row(b).segment(i * nb, nb);
      const auto dbasis = cache.basis_grad.row(b).segment(i * nb, nb);
      double dx = 0.0;
      for (Index j = 0; j < n_out_; ++j) {
        const double g = grad_out(b, j);
        const Index edge = j * n_in_ + i;
        const auto c = coeffs_.row(edge);
        row.segment(edge * nb, nb) = (g * w_s_(j, i)) * basis;
        row[n_coeff + edge] = g * s;
        row[n_coeff + n_edge + edge] = g * c.dot(basis);
        dx += g * (w_b_(j, i) * ds + w_s_(j, i) * c.dot(dbasis));
      }
      grad_in(b, i) = dx;
    }
  }
  return grad_in;
}

void KanLayer::get_parameters(std::span<double> out) const {
  check_span(out.size(), parameter_count(), "KanLayer::get_parameters");
  put(w_s_, out, put(w_b_, out, put(coeffs_, out, 0)));
}

void KanLayer::set_parameters(std::span<const double> in) {
  check_span(in.size(), parameter_count(), "KanLayer::set_parameters");
  take(w_s_, in, take(w_b_, in, take(coeffs_, in, 0)));
}

// --- FasterKanLayer ----------------------------------------------------------

FasterKanLayer::FasterKanLayer(Index n_in, Index n_out, RswafGrid<double> grid, bool layer_norm)
    : n_in_(n_in), grid_(std::move(grid)), layer_norm_(layer_norm) {
  if (n_in < 1 || n_out < 1) throw ArgumentError("FasterKanLayer: widths must be positive");
  if (layer_norm_) {
    ln_gamma_ = Vector::Ones(n_in);
    ln_beta_ = Vector::Zero(n_in);
  }
  weights_ = Matrix::Zero(n_out, n_in * grid_.num_grids());
  bias_ = Vector::Zero(n_out);
}

void FasterKanLayer::initialize(Generator& rng) {
  const double stddev = 1.0 / std::sqrt(static_cast<double>(weights_.cols()));
  for (Index r = 0; r < weights_.rows(); ++r)
    for (Index c = 0; c < weights_.cols(); ++c) weights_(r, c) = stddev * rng.normal();
  bias_.setZero();
  if (layer_norm_) {
    ln_gamma_.setOnes();
    ln_beta_.setZero();
  }
}

Matrix FasterKanLayer::forward(const Matrix& x, LayerCache* cache) const {
  check_input(x, n_in_, "FasterKanLayer::forward");
  const Index batch = x.rows();
  const Index ng = grid_.num_grids();
  const double inv_den = grid_.inv_denominator();
  const auto& centers = grid_.centers();

  Matrix z = x;
  Matrix normalized;
  Vector inv_std;
  if (layer_norm_) {
    normalized.resize(batch, n_in_);
    inv_std.resize(batch);
    const double n = static_cast<double>(n_in_);
    for (Index b = 0; b < batch; ++b) {
      const double mean = x.row(b).sum() / n;
      const double var = (x.row(b).array() - mean).square().sum() / n;
      inv_std[b] = 1.0 / std::sqrt(var + kLayerNormEps);
      normalized.row(b) = (x.row(b).array() - mean) * inv_std[b];
      z.row(b) = normalized.row(b).cwiseProduct(ln_gamma_.transpose()) + ln_beta_.transpose();
    }
  }

  Matrix basis(batch, n_in_ * ng);
  Matrix basis_grad(batch, n_in_ * ng);
  for (Index b = 0; b < batch; ++b) {
    for (Index i = 0; i < n_in_; ++i) {
      for (Index g = 0; g < ng; ++g) {
        const double th = std::tanh((z(b, i) - centers[static_cast<std::size_t>(g)]) * inv_den);
        const double v = 1.0 - th * th;
        basis(b, i * ng + g) = v;
        basis_grad(b, i * ng + g) = -2.0 * th * v * inv_den;
      }
    }
  }

  Matrix y = basis * weights_.transpose();
  y.rowwise() += bias_.transpose();
  if (cache) {
    cache->input = x;
    cache->basis = std::move(basis);
    cache->basis_grad = std::move(basis_grad);
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix FasterKanLayer::backward(const LayerCache& cache, const Matrix& grad_out,
                                GradientBlock grads) const {
  check_backward(cache, grad_out, n_out(), grads, parameter_count(),
                 "FasterKanLayer::backward");
  const Index batch = grad_out.rows();
  const Index ng = grid_.num_grids();
  const Index ln_count = layer_norm_ ? 2 * n_in_ : 0;
  const Index nw = weights_.size();

  const Matrix dbasis = grad_out * weights_;
  Matrix dz(batch, n_in_);
  for (Index b = 0; b < batch; ++b) {
    for (Index i = 0; i < n_in_; ++i) {
      dz(b, i) = dbasis.row(b).segment(i * ng, ng).dot(cache.basis_grad.row(b).segment(i * ng, ng));
    }
  }

  for (Index b = 0; b < batch; ++b) {
    auto row = grads.row(b);
    Eigen::Map<Matrix> dw(row.data() + ln_count, n_out(), weights_.cols());
    dw.noalias() = grad_out.row(b).transpose() * cache.basis.row(b);
    row.segment(ln_count + nw, n_out()) = grad_out.row(b);
  }

  if (!layer_norm_) return dz;

  Matrix grad_in(batch, n_in_);
  const double n = static_cast<double>(n_in_);
  for (Index b = 0; b < batch; ++b) {
    auto row = grads.row(b);
    const auto xhat = cache.normalized.row(b);
    row.segment(0, n_in_) = dz.row(b).cwiseProduct(xhat);
    row.segment(n_in_, n_in_) = dz.row(b);
    const Eigen::RowVectorXd dxhat = dz.row(b).cwiseProduct(ln_gamma_.transpose());
    const double mean_d = dxhat.sum() / n;
    const double mean_dx = dxhat.dot(xhat) / n;
    grad_in.row(b) = cache.inv_std[b] * (dxhat.array() - mean_d - xhat.array() * mean_dx);
  }
  return grad_in;
}

void FasterKanLayer::get_parameters(std::span<double> out) const {
  check_span(out.size(), parameter_count(), "FasterKanLayer::get_parameters");
  std::size_t off = 0;
  if (layer_norm_) off = put(ln_beta_.transpose(), out, put(ln_gamma_.transpose(), out, off));
  put(bias_.transpose(), out, put(weights_, out, off));
}

void FasterKanLayer::set_parameters(std::span<const double> in) {
  check_span(in.size(), parameter_count(), "FasterKanLayer::set_parameters");
  std::size_t off = 0;
  if (layer_norm_) {
    ln_gamma_ = Eigen::Map<const Vector>(in.data(), n_in_);
    ln_beta_ = Eigen::Map<const Vector>(in.data() + n_in_, n_in_);
    off = static_cast<std::size_t>(2 * n_in_);
  }
  off = take(weights_, in, off);
  bias_ = Eigen::Map<const Vector>(in.data() + off, bias_.size());
}

}  // namespace dpkan
