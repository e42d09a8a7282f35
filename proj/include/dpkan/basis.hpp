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

// Univariate basis functions for KAN edges: uniform-knot B-splines evaluated
// by the Cox-de Boor recursion, SiLU, the residual edge activation
// phi(x) = w_b * silu(x) + w_s * spline(x), and the reflectional-switch basis
// used by FasterKAN layers. Every function has an analytic derivative.

#ifndef DPKAN_BASIS_HPP
#define DPKAN_BASIS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dpkan/error.hpp"
#include "dpkan/numerics.hpp"

namespace dpkan {

/// Uniform knot vector over [lo, hi] with G intervals, extended by `degree`
/// knots of the same spacing past each end. Holds G + degree basis functions.
template <typename Scalar = double>
class BSplineGrid {
 public:
  BSplineGrid(int grid_size, int degree, Scalar lo, Scalar hi)
      : grid_size_(grid_size), degree_(degree), lo_(lo), hi_(hi) {
    if (grid_size < 1) throw ArgumentError("BSplineGrid: grid_size must be >= 1");
    if (degree < 0) throw ArgumentError("BSplineGrid: degree must be >= 0");
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
      throw ArgumentError("BSplineGrid: domain must satisfy lo < hi");
    }
    const Scalar h = (hi - lo) / Scalar(grid_size);
    knots_.resize(static_cast<std::size_t>(grid_size + 2 * degree + 1));
    for (std::size_t j = 0; j < knots_.size(); ++j) {
      knots_[j] = lo + (Scalar(static_cast<int>(j)) - Scalar(degree)) * h;
    }
  }

  int grid_size() const { return grid_size_; }
  int degree() const { return degree_; }
  Scalar lo() const { return lo_; }
  Scalar hi() const { return hi_; }
  const std::vector<Scalar>& knots() const { return knots_; }
  int num_basis() const { return grid_size_ + degree_; }

  bool operator==(const BSplineGrid&) const = default;

 private:
  int grid_size_;
  int degree_;
  Scalar lo_;
  Scalar hi_;
  std::vector<Scalar> knots_;
};

namespace detail {

// Fills work[0 .. n0 - p) with B_{i,p}(x) for p = target degree, starting from
// degree-0 indicators over all knot intervals. `work` must hold n0 entries
// where n0 = knots.size() - 1.
template <typename Scalar>
void cox_de_boor(Scalar x, const std::vector<Scalar>& t, int degree, std::span<Scalar> work) {
  const std::size_t n0 = t.size() - 1;
  for (std::size_t i = 0; i < n0; ++i) {
    work[i] = (t[i] <= x && x < t[i + 1]) ? Scalar(1) : Scalar(0);
  }
  for (int p = 1; p <= degree; ++p) {
    const std::size_t count = n0 - static_cast<std::size_t>(p);
    for (std::size_t i = 0; i < count; ++i) {
      const Scalar left = (x - t[i]) / (t[i + p] - t[i]);
      const Scalar right = (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]);
      work[i] = left * work[i] + right * work[i + 1];
    }
  }
}

template <typename Scalar>
void require_finite(Scalar x, const char* who) {
  if (!std::isfinite(x)) throw ArgumentError(std::string(who) + ": input must be finite");
}

}  // namespace detail

/// Writes B_i(x) for all G + k basis functions into `out`.
template <typename Scalar>
void bspline_basis(Scalar x, const BSplineGrid<Scalar>& grid, std::span<Scalar> out) {
  detail::require_finite(x, "bspline_basis");
  const auto& t = grid.knots();
  if (out.size() != static_cast<std::size_t>(grid.num_basis())) {
    throw ShapeError("bspline_basis: output span has wrong length");
  }
  std::vector<Scalar> work(t.size() - 1);
  detail::cox_de_boor(x, t, grid.degree(), std::span<Scalar>(work));
  std::copy_n(work.begin(), out.size(), out.begin());
}

template <typename Scalar>
DenseVector<Scalar> bspline_basis(Scalar x, const BSplineGrid<Scalar>& grid) {
  DenseVector<Scalar> out(grid.num_basis());
  bspline_basis(x, grid, std::span<Scalar>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

/// Basis values and their x-derivatives in one pass. Derivatives use
/// B'_{i,k} = k/(t_{i+k}-t_i) B_{i,k-1} - k/(t_{i+k+1}-t_{i+1}) B_{i+1,k-1}
/// with right-continuous indicators, so knots take the right limit.
template <typename Scalar>
void bspline_basis_and_derivative(Scalar x, const BSplineGrid<Scalar>& grid,
                                  std::span<Scalar> values, std::span<Scalar> derivs) {
  detail::require_finite(x, "bspline_basis_derivative");
  const auto& t = grid.knots();
  const int k = grid.degree();
  const std::size_t nb = static_cast<std::size_t>(grid.num_basis());
  if (values.size() != nb || derivs.size() != nb) {
    throw ShapeError("bspline_basis_derivative: output span has wrong length");
  }
  std::vector<Scalar> work(t.size() - 1);
  if (k == 0) {
    detail::cox_de_boor(x, t, 0, std::span<Scalar>(work));
    std::copy_n(work.begin(), nb, values.begin());
    std::fill(derivs.begin(), derivs.end(), Scalar(0));
    return;
  }
  detail::cox_de_boor(x, t, k - 1, std::span<Scalar>(work));
  for (std::size_t i = 0; i < nb; ++i) {
    const Scalar a = Scalar(k) / (t[i + k] - t[i]);
    const Scalar b = Scalar(k) / (t[i + k + 1] - t[i + 1]);
    derivs[i] = a * work[i] - b * work[i + 1];
  }
  // Raise the degree-(k-1) values by one more step for the values themselves.
  for (std::size_t i = 0; i < nb; ++i) {
    const Scalar left = (x - t[i]) / (t[i + k] - t[i]);
    const Scalar right = (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1]);
    values[i] = left * work[i] + right * work[i + 1];
  }
}

template <typename Scalar>
DenseVector<Scalar> bspline_basis_derivative(Scalar x, const BSplineGrid<Scalar>& grid) {
  DenseVector<Scalar> values(grid.num_basis());
  DenseVector<Scalar> derivs(grid.num_basis());
  const auto n = static_cast<std::size_t>(grid.num_basis());
  bspline_basis_and_derivative(x, grid, std::span<Scalar>(values.data(), n),
                               std::span<Scalar>(derivs.data(), n));
  return derivs;
}

/// sum_i c_i B_i(x).
template <typename Scalar>
Scalar spline_eval(Scalar x, std::span<const Scalar> coeffs, const BSplineGrid<Scalar>& grid) {
  if (coeffs.size() != static_cast<std::size_t>(grid.num_basis())) {
    throw ShapeError("spline_eval: expected " + std::to_string(grid.num_basis()) +
                     " coefficients, got " + std::to_string(coeffs.size()));
  }
  const DenseVector<Scalar> basis = bspline_basis(x, grid);
  Scalar acc(0);
  for (Index i = 0; i < basis.size(); ++i) acc += coeffs[static_cast<std::size_t>(i)] * basis[i];
  return acc;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar silu(Scalar x) {
  return x * sigmoid(x);
}

template <typename Scalar>
Scalar silu_derivative(Scalar x) {
  const Scalar s = sigmoid(x);
  return s * (Scalar(1) + x * (Scalar(1) - s));
}

/// Residual edge activation w_b * silu(x) + w_s * spline(x).
template <typename Scalar>
Scalar phi_eval(Scalar x, Scalar w_b, Scalar w_s, std::span<const Scalar> coeffs,
                const BSplineGrid<Scalar>& grid) {
  return w_b * silu(x) + w_s * spline_eval(x, coeffs, grid);
}

/// Centers spaced uniformly on [grid_min, grid_max] with a fixed inverse
/// width. Neither is trained.
template <typename Scalar = double>
class RswafGrid {
 public:
  RswafGrid(Scalar grid_min, Scalar grid_max, int num_grids, Scalar inv_denominator)
      : grid_min_(grid_min), grid_max_(grid_max), inv_denominator_(inv_denominator) {
    if (num_grids < 1) throw ArgumentError("RswafGrid: num_grids must be >= 1");
    if (!(inv_denominator > Scalar(0))) {
      throw ArgumentError("RswafGrid: inv_denominator must be positive");
    }
    if (num_grids > 1 && !(grid_max > grid_min)) {
      throw ArgumentError("RswafGrid: grid_min must be below grid_max");
    }
    centers_.resize(static_cast<std::size_t>(num_grids));
    for (int g = 0; g < num_grids; ++g) {
      centers_[static_cast<std::size_t>(g)] =
          num_grids == 1 ? grid_min
                         : grid_min + (grid_max - grid_min) * Scalar(g) / Scalar(num_grids - 1);
    }
  }

  Scalar grid_min() const { return grid_min_; }
  Scalar grid_max() const { return grid_max_; }
  int num_grids() const { return static_cast<int>(centers_.size()); }
  Scalar inv_denominator() const { return inv_denominator_; }
  const std::vector<Scalar>& centers() const { return centers_; }

  bool operator==(const RswafGrid&) const = default;

 private:
  Scalar grid_min_;
  Scalar grid_max_;
  Scalar inv_denominator_;
  std::vector<Scalar> centers_;
};

/// 1 - tanh^2((x - c_g) * inv_denominator) for every center c_g.
template <typename Scalar>
DenseVector<Scalar> rswaf_basis(Scalar x, const RswafGrid<Scalar>& grid) {
  detail::require_finite(x, "rswaf_basis");
  DenseVector<Scalar> out(grid.num_grids());
  for (int g = 0; g < grid.num_grids(); ++g) {
    const Scalar th = std::tanh((x - grid.centers()[static_cast<std::size_t>(g)]) *
                                grid.inv_denominator());
    out[g] = Scalar(1) - th * th;
  }
  return out;
}

template <typename Scalar>
DenseVector<Scalar> rswaf_derivative(Scalar x, const RswafGrid<Scalar>& grid) {
  detail::require_finite(x, "rswaf_derivative");
  DenseVector<Scalar> out(grid.num_grids());
  for (int g = 0; g < grid.num_grids(); ++g) {
    const Scalar th = std::tanh((x - grid.centers()[static_cast<std::size_t>(g)]) *
                                grid.inv_denominator());
    out[g] = Scalar(-2) * th * (Scalar(1) - th * th) * grid.inv_denominator();
  }
  return out;
}

template <typename Scalar>
DenseVector<Scalar> basis_derivative(Scalar x, const BSplineGrid<Scalar>& grid) {
  return bspline_basis_derivative(x, grid);
}

template <typename Scalar>
DenseVector<Scalar> basis_derivative(Scalar x, const RswafGrid<Scalar>& grid) {
  return rswaf_derivative(x, grid);
}

}  // namespace dpkan

#endif  // DPKAN_BASIS_HPP
