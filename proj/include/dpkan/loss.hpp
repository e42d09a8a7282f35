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

#ifndef DPKAN_LOSS_HPP
#define DPKAN_LOSS_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dpkan/numerics.hpp"

namespace dpkan {

enum class LossKind { kMse, kCrossEntropy };

std::string to_string(LossKind kind);

/// Regression targets (batch, n_out) or class labels.
using Targets = std::variant<Matrix, std::vector<int>>;

LossKind loss_kind_for(const Targets& targets);
Index target_rows(const Targets& targets);

/// Batch-mean loss and its gradient with respect to the predictions.
struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

/// Unreduced single-example losses and their gradients, one row per example.
struct PerExampleLoss {
  Vector losses;
  Matrix grad;
};

/// Mean of (pred - target)^2 over batch and outputs; gradient
/// 2 (pred - target) / (B * n_out).
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// Mean negative log-softmax of the true class; gradient
/// (softmax(logits) - one_hot(label)) / B.
LossResult cross_entropy_loss(const Matrix& logits, std::span<const int> labels);

/// Row i holds the gradient of the loss of example i alone, so the batch-mean
/// gradient is the mean of the rows.
PerExampleLoss per_example_mse(const Matrix& pred, const Matrix& target);
PerExampleLoss per_example_cross_entropy(const Matrix& logits, std::span<const int> labels);
PerExampleLoss per_example_loss(const Matrix& pred, const Targets& targets);

/// Row-wise softmax computed through a max-shifted log-sum-exp.
Matrix softmax(const Matrix& logits);

}  // namespace dpkan

#endif  // DPKAN_LOSS_HPP
