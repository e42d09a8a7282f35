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

#include <gtest/gtest.h>

#include <cmath>

#include "dpkan/loss.hpp"
#include "dpkan/metrics.hpp"

namespace dpkan {
namespace {

TEST(Mse, PerfectFitIsZero) {
  Matrix p(2, 2);
  p << 1, 2, 3, 4;
  const LossResult r = mse_loss(p, p);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mse, UnitResidualIsOne) {
  const Matrix t = Matrix::Zero(3, 2);
  const LossResult r = mse_loss(Matrix::Ones(3, 2), t);
  EXPECT_DOUBLE_EQ(r.loss, 1.0);
  // 2 (pred - target) / (B * n_out)
  EXPECT_DOUBLE_EQ(r.grad(0, 0), 2.0 / 6.0);
}

TEST(Mse, ShapeMismatchThrows) {
  EXPECT_THROW(mse_loss(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), ShapeError);
}

TEST(CrossEntropy, UniformLogitsGiveLogClasses) {
  const Matrix logits = Matrix::Zero(4, 10);
  const std::vector<int> labels{0, 3, 9, 5};
  EXPECT_NEAR(cross_entropy_loss(logits, labels).loss, std::log(10.0), 1e-12);
  EXPECT_NEAR(cross_entropy_loss(logits, labels).loss, 2.302585, 1e-6);
}

TEST(CrossEntropy, LargeMarginSaturates) {
  Matrix logits = Matrix::Zero(1, 3);
  logits(0, 1) = 50.0;
  const double loss = cross_entropy_loss(logits, std::vector<int>{1}).loss;
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-20);
  // Exact value: log(1 + 2 e^-50).
  EXPECT_NEAR(loss / (2.0 * std::exp(-50.0)), 1.0, 1e-12);
}

TEST(CrossEntropy, HugeLogitsStayFinite) {
  Matrix logits(1, 2);
  logits << 1e4, -1e4;
  const auto r = per_example_cross_entropy(logits, std::vector<int>{1});
  EXPECT_NEAR(r.losses[0], 2e4, 1e-8);
  EXPECT_TRUE(all_finite(r.grad));
}

TEST(CrossEntropy, OutOfRangeLabelThrows) {
  EXPECT_THROW(cross_entropy_loss(Matrix::Zero(1, 3), std::vector<int>{3}), ArgumentError);
  EXPECT_THROW(cross_entropy_loss(Matrix::Zero(1, 3), std::vector<int>{-1}), ArgumentError);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Matrix logits(1, 3);
  logits << 0.5, -1.0, 2.0;
  const auto r = per_example_cross_entropy(logits, std::vector<int>{0});
  const double z = std::exp(0.5) + std::exp(-1.0) + std::exp(2.0);
  EXPECT_NEAR(r.grad(0, 0), std::exp(0.5) / z - 1.0, 1e-15);
  EXPECT_NEAR(r.grad(0, 1), std::exp(-1.0) / z, 1e-15);
  EXPECT_NEAR(r.losses[0], std::log(z) - 0.5, 1e-14);
}

TEST(PerExample, MeanOfRowsIsBatchGradient) {
  Generator rng(1);
  Matrix p(5, 2), t(5, 2);
  for (Index i = 0; i < 10; ++i) {
    p.data()[i] = rng.normal();
    t.data()[i] = rng.normal();
  }
  const auto per = per_example_mse(p, t);
  const auto batch = mse_loss(p, t);
  EXPECT_NEAR(per.losses.mean(), batch.loss, 1e-14);
  EXPECT_LT((per.grad / 5.0 - batch.grad).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Softmax, RowsSumToOne) {
  Matrix logits(2, 3);
  logits << 1000, 1001, 999, -5, 0, 5;
  const Matrix s = softmax(logits);
  EXPECT_NEAR(s.row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(s.row(1).sum(), 1.0, 1e-15);
}

TEST(R2, Examples) {
  const std::vector<double> y{1, 2, 3, 4};
  EXPECT_EQ(r2_score(y, y), 1.0);
  const std::vector<double> mean(4, 2.5);
  EXPECT_EQ(r2_score(y, mean), 0.0);
  const std::vector<double> pred{1.1, 1.9, 3.2, 3.8};
  // SS_res = 0.01 + 0.01 + 0.04 + 0.04 = 0.10; SS_tot = 5.
  EXPECT_NEAR(r2_score(y, pred), 1.0 - 0.10 / 5.0, 1e-12);
}

TEST(R2, ConstantTargetsAreUndefined) {
  const std::vector<double> y(3, 2.0);
  EXPECT_THROW(r2_score(y, y), UndefinedMetricError);
}

TEST(R2, LengthMismatchThrows) {
  EXPECT_THROW(r2_score(std::vector<double>{1, 2}, std::vector<double>{1}), ShapeError);
}

TEST(R2, NeverAboveOne) {
  Generator rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> y(10), p(10);
    for (int i = 0; i < 10; ++i) {
      y[static_cast<std::size_t>(i)] = rng.normal();
      p[static_cast<std::size_t>(i)] = rng.normal();
    }
    EXPECT_LE(r2_score(y, p), 1.0);
  }
}

TEST(Accuracy, Examples) {
  Matrix onehot = Matrix::Identity(3, 3);
  EXPECT_EQ(accuracy(onehot, std::vector<int>{0, 1, 2}), 1.0);
  EXPECT_EQ(accuracy(Matrix::Zero(4, 5), std::vector<int>{0, 0, 0, 0}), 1.0);
  Matrix logits(4, 2);
  logits << 1, 0,  // 0
      0, 1,        // 1
      1, 0,        // 0
      0, 1;        // 1
  EXPECT_EQ(accuracy(logits, std::vector<int>{0, 0, 0, 0}), 0.5);
}

TEST(Accuracy, ShapeMismatchThrows) {
  EXPECT_THROW(accuracy(Matrix::Zero(3, 2), std::vector<int>{0, 1}), ShapeError);
}

TEST(Accuracy, InUnitInterval) {
  Generator rng(5);
  Matrix logits(20, 4);
  for (Index i = 0; i < logits.size(); ++i) logits.data()[i] = rng.normal();
  std::vector<int> labels(20);
  for (auto& l : labels) l = static_cast<int>(rng.below(4));
  const double a = accuracy(logits, labels);
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

}  // namespace
}  // namespace dpkan
