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

#ifndef DPKAN_METRICS_HPP
#define DPKAN_METRICS_HPP

#include <span>
#include <vector>

#include "dpkan/data.hpp"
#include "dpkan/model.hpp"

namespace dpkan {

/// 1 - SS_res / SS_tot. Throws UndefinedMetricError when every target is
/// identical (SS_tot = 0).
double r2_score(std::span<const double> y_true, std::span<const double> y_pred);

/// Fraction of rows whose arg-max (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, std::span<const int> labels);

/// Arg-max per row; ties resolve to the lowest index.
std::vector<int> argmax_rows(const Matrix& logits);

/// R^2 for regression, accuracy for classification. `outputs` are model
/// outputs for every row of `data`.
double task_metric(const Dataset& data, const Matrix& outputs);

/// Mean loss of `outputs` against the dataset targets.
double dataset_loss(const Dataset& data, const Matrix& outputs);

}  // namespace dpkan

#endif  // DPKAN_METRICS_HPP
