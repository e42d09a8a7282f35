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

// DP-Adam. Each step:
//
//   1. sample a batch (Poisson, rate q = B/N, in private mode)
//   2. g_i = grad of the single-example loss at theta, one per example
//   3. clip:       g_i <- g_i / max(1, ||g_i||_2 / C)
//   4. aggregate:  g   <- (1/B) sum_i g_i + (sigma C / B) N(0, I)
//   5. theta <- Adam(theta, g)
//
// Non-private training uses shuffled minibatches, the batch-mean gradient,
// optional whole-batch clipping, and AdamW.

#ifndef DPKAN_OPTIMIZER_HPP
#define DPKAN_OPTIMIZER_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpkan/data.hpp"
#include "dpkan/model.hpp"

namespace dpkan {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW) when > 0
};

struct AdamState {
  Vector m;
  Vector v;
  std::int64_t t = 0;
  AdamOptions options;

  AdamState() = default;
  AdamState(Index n, AdamOptions opts)
      : m(Vector::Zero(n)), v(Vector::Zero(n)), options(opts) {}
};

/// Bias-corrected Adam; AdamW decay theta <- theta - lr * wd * theta is applied
/// before the Adam delta.
void adam_step(AdamState& state, Vector& params, const Vector& gradient, double learning_rate);

/// A per-example gradient whose L2 norm is at most the clipping constant.
/// Only clip_gradient can create one, so unclipped gradients cannot reach
/// noisy_aggregate.
class ClippedGradient {
 public:
  const Vector& values() const { return values_; }
  Index sample_index() const { return sample_index_; }
  /// ||g||_2 before clipping.
  double original_norm() const { return original_norm_; }

 private:
  ClippedGradient(Vector values, Index sample_index, double original_norm)
      : values_(std::move(values)), sample_index_(sample_index), original_norm_(original_norm) {}

  friend ClippedGradient clip_gradient(FlatGradient g, double clip_norm);

  Vector values_;
  Index sample_index_;
  double original_norm_;
};

/// g / max(1, ||g||_2 / C). Inputs already within the bound are returned
/// unchanged.
ClippedGradient clip_gradient(FlatGradient g, double clip_norm);

/// Rescales `v` in place so that ||v||_2 <= max_norm.
void clip_in_place(Vector& v, double max_norm);

/// (1/B) sum_i g_i + N(0, (sigma C / B)^2 I). An empty list is valid when
/// sigma > 0 (an empty Poisson batch) and yields pure noise of length `dim`.
Vector noisy_aggregate(std::span<const ClippedGradient> clipped, double noise_multiplier,
                       double clip_norm, Index batch_size, Index dim, Generator& rng);

enum class BatchSampling { kPoisson, kFullBatch };

struct DpSgdConfig {
  std::int64_t epochs = 1;
  double learning_rate = 1e-3;
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  std::int64_t batch_size = 64;
  double delta = 1e-5;
  std::uint64_t seed = 0;
  bool private_mode = true;
  std::optional<double> non_private_batch_clip;
  AdamOptions adam;  // weight_decay applies to non-private mode only
  BatchSampling sampling = BatchSampling::kPoisson;
  /// Counts post-clip norms above C + 1e-9 into TrainingLog::clip_violations.
  bool check_clipping = false;

  void validate() const;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  double train_loss = 0.0;  // mean batch loss over the epoch's steps
  double metric = 0.0;      // R^2 or accuracy on the training data
  std::int64_t steps = 0;   // cumulative optimizer steps
  double epsilon = 0.0;     // cumulative; 0 for non-private runs

  bool operator==(const EpochRecord&) const = default;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::int64_t total_steps = 0;
  std::int64_t examples_processed = 0;
  std::optional<double> epsilon;
  double delta = 0.0;
  std::int64_t clip_violations = 0;
  std::int64_t clipped_examples = 0;

  bool operator==(const TrainingLog&) const = default;
};

std::string emit_training_log(const TrainingLog& log);
TrainingLog parse_training_log(const std::string& text);

struct TrainResult {
  Model model;
  TrainingLog log;
};

/// Runs epochs * ceil(N/B) optimizer steps from the given (already
/// initialized) model. `loss` must match the dataset task.
TrainResult train(Model model, const Dataset& data, const DpSgdConfig& cfg, LossKind loss);

/// MSE for regression datasets, cross-entropy for classification.
LossKind default_loss(const Dataset& data);

}  // namespace dpkan

#endif  // DPKAN_OPTIMIZER_HPP
