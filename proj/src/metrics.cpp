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

#include "dpkan/metrics.hpp"

#include <string>

#include "dpkan/error.hpp"

namespace dpkan {

double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("r2_score: " + std::to_string(y_true.size()) + " targets vs " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw UndefinedMetricError("r2_score: no samples");
  double mean = 0.0;
  for (double y : y_true) mean += y;
  mean /= static_cast<double>(y_true.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot == 0.0) throw UndefinedMetricError("r2_score: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index r = 0; r < logits.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("accuracy: " + std::to_string(labels.size()) + " labels for logits " +
                     shape_string(logits));
  }
  if (labels.empty()) throw UndefinedMetricError("accuracy: no samples");
  const auto pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double task_metric(const Dataset& data, const Matrix& outputs) {
  if (data.task == Task::kClassification) return accuracy(outputs, data.labels);
  if (outputs.cols() != 1) throw ShapeError("task_metric: regression needs one output column");
  const Vector pred = outputs.col(0);
  return r2_score({data.targets.data(), static_cast<std::size_t>(data.targets.size())},
                  {pred.data(), static_cast<std::size_t>(pred.size())});
}

double dataset_loss(const Dataset& data, const Matrix& outputs) {
  if (data.task == Task::kClassification) return cross_entropy_loss(outputs, data.labels).loss;
  return mse_loss(outputs, Matrix(data.targets)).loss;
}

}  // namespace dpkan
