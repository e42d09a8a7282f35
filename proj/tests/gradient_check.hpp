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

// Finite-difference oracle for per-example parameter gradients, shared by the
// unit and acceptance tests.

#ifndef DPKAN_TESTS_GRADIENT_CHECK_HPP
#define DPKAN_TESTS_GRADIENT_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "dpkan/model.hpp"

namespace dpkan::testing {

// Roundoff in the stencil grows like eps * |loss| / h and dominates below this
// step for gradient coordinates near 1e-7; truncation is O(h^4).
inline constexpr double kFiniteDifferenceStep = 1e-3;

/// Loss of example `row` alone at parameters `theta`.
inline double single_example_loss(Model& model, const Vector& theta, const Matrix& x,
                                  const Targets& y, Index row) {
  model.unflatten(theta);
  const Matrix xi = x.row(row);
  Targets yi = std::visit(
      [&](const auto& t) -> Targets {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Matrix>) {
          return Matrix(t.row(row));
        } else {
          return std::vector<int>{t[static_cast<std::size_t>(row)]};
        }
      },
      y);
  return per_example_loss(model.forward(xi), yi).losses[0];
}

/// Five-point central difference of the single-example loss.
inline Matrix finite_difference_gradients(Model model, const Matrix& x, const Targets& y,
                                          double h) {
  const Vector theta = model.flatten();
  Matrix out(x.rows(), theta.size());
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index p = 0; p < theta.size(); ++p) {
      auto at = [&](double offset) {
        Vector t = theta;
        t[p] += offset;
        return single_example_loss(model, t, x, y, r);
      };
      out(r, p) = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    }
  }
  return out;
}

struct GradientComparison {
  double max_relative_error = 0.0;
  Index worst_row = 0;
  Index worst_parameter = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// |a - n| / max(|a|, |n|, floor) over every coordinate.
inline GradientComparison compare_gradients(const Matrix& analytic, const Matrix& numeric,
                                            double floor = 1e-8) {
  GradientComparison c;
  for (Index r = 0; r < analytic.rows(); ++r) {
    for (Index p = 0; p < analytic.cols(); ++p) {
      const double a = analytic(r, p);
      const double n = numeric(r, p);
      const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      if (err > c.max_relative_error) c = {err, r, p, a, n};
    }
  }
  return c;
}

inline std::string describe(const GradientComparison& c) {
  return "max rel err " + std::to_string(c.max_relative_error) + " at row " +
         std::to_string(c.worst_row) + " param " + std::to_string(c.worst_parameter) +
         " (analytic " + std::to_string(c.analytic) + ", numeric " + std::to_string(c.numeric) +
         ")";
}

}  // namespace dpkan::testing

#endif  // DPKAN_TESTS_GRADIENT_CHECK_HPP
