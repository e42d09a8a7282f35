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

#include "dpkan/loss.hpp"

#include <cmath>

namespace dpkan {

std::string to_string(LossKind kind) {
  return kind == LossKind::kMse ? "mse" : "cross_entropy";
}

LossKind loss_kind_for(const Targets& targets) {
  return std::holds_alternative<Matrix>(targets) ? LossKind::kMse : LossKind::kCrossEntropy;
}

Index target_rows(const Targets& targets) {
  if (const auto* m = std::get_if<Matrix>(&targets)) return m->rows();
  return static_cast<Index>(std::get<std::vector<int>>(targets).size());
}

PerExampleLoss per_example_mse(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("mse_loss: prediction " + shape_string(pred) + " vs target " +
                     shape_string(target));
  }
  const double n_out = static_cast<double>(pred.cols());
  const Matrix diff = pred - target;
  PerExampleLoss out;
  out.losses = diff.array().square().rowwise().sum() / n_out;
  out.grad = diff * (2.0 / n_out);
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index b = 0; b < logits.rows(); ++b) {
    const double m = logits.row(b).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(b).array() - m).exp();
    p.row(b) = e / e.sum();
  }
  return p;
}

PerExampleLoss per_example_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw ShapeError("cross_entropy_loss: " + std::to_string(labels.size()) +
                     " labels for logits " + shape_string(logits));
  }
  const Index classes = logits.cols();
  PerExampleLoss out;
  out.losses.resize(logits.rows());
  out.grad.resize(logits.rows(), classes);
  for (Index b = 0; b < logits.rows(); ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= classes) {
      throw ArgumentError("cross_entropy_loss: label " + std::to_string(y) +
                          " outside [0, " + std::to_string(classes) + ")");
    }
    Index top = 0;
    const double m = logits.row(b).maxCoeff(&top);
    const Eigen::RowVectorXd e = (logits.row(b).array() - m).exp();
    double tail = 0.0;
    for (Index c = 0; c < classes; ++c)
      if (c != top) tail += e[c];
    const double sum = 1.0 + tail;
    // Grouped as (m - z_y) + log1p(tail) so a dominant true class keeps the tail.
    out.losses[b] = (m - logits(b, y)) + std::log1p(tail);
    out.grad.row(b) = e / sum;
    out.grad(b, y) -= 1.0;
  }
  return out;
}

PerExampleLoss per_example_loss(const Matrix& pred, const Targets& targets) {
  if (const auto* m = std::get_if<Matrix>(&targets)) return per_example_mse(pred, *m);
  return per_example_cross_entropy(pred, std::get<std::vector<int>>(targets));
}

namespace {

LossResult reduce(PerExampleLoss per) {
  const double batch = static_cast<double>(per.losses.size());
  LossResult r;
  r.loss = per.losses.sum() / batch;
  r.grad = per.grad / batch;
  return r;
}

}  // namespace

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  return reduce(per_example_mse(pred, target));
}

LossResult cross_entropy_loss(const Matrix& logits, std::span<const int> labels) {
  return reduce(per_example_cross_entropy(logits, labels));
}

}  // namespace dpkan
