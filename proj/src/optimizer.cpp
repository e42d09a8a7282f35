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

#include "dpkan/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dpkan/accountant.hpp"
#include "dpkan/error.hpp"
#include "dpkan/metrics.hpp"
#include "dpkan/text_format.hpp"

namespace dpkan {

void adam_step(AdamState& state, Vector& params, const Vector& gradient, double learning_rate) {
  if (gradient.size() != params.size() || state.m.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient, and state lengths differ (" +
                     std::to_string(params.size()) + ", " + std::to_string(gradient.size()) +
                     ", " + std::to_string(state.m.size()) + ")");
  }
  const AdamOptions& o = state.options;
  ++state.t;
  state.m = o.beta1 * state.m + (1.0 - o.beta1) * gradient;
  state.v = o.beta2 * state.v + (1.0 - o.beta2) * gradient.cwiseProduct(gradient);
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  if (o.weight_decay > 0.0) params -= (learning_rate * o.weight_decay) * params;
  const Vector m_hat = state.m / bc1;
  const Vector v_hat = state.v / bc2;
  params.array() -= learning_rate * m_hat.array() / (v_hat.array().sqrt() + o.eps);
}

ClippedGradient clip_gradient(FlatGradient g, double clip_norm) {
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) {
    throw ArgumentError("clip_gradient: clip norm must be positive and finite");
  }
  if (!all_finite(g.values)) {
    throw ArgumentError("clip_gradient: gradient of sample " + std::to_string(g.sample_index) +
                        " is not finite");
  }
  const double norm = l2_norm(g.values);
  if (norm > clip_norm) g.values *= clip_norm / norm;
  return ClippedGradient(std::move(g.values), g.sample_index, norm);
}

void clip_in_place(Vector& v, double max_norm) {
  if (!(max_norm > 0.0)) throw ArgumentError("clip_in_place: bound must be positive");
  const double norm = l2_norm(v);
  if (norm > max_norm) v *= max_norm / norm;
}

Vector noisy_aggregate(std::span<const ClippedGradient> clipped, double noise_multiplier,
                       double clip_norm, Index batch_size, Index dim, Generator& rng) {
  if (batch_size < 1) throw ArgumentError("noisy_aggregate: batch size must be positive");
  if (!(noise_multiplier >= 0.0)) {
    throw ArgumentError("noisy_aggregate: noise multiplier must be nonnegative");
  }
  if (clipped.empty() && noise_multiplier == 0.0) {
    throw ArgumentError("noisy_aggregate: empty batch without noise has no defined gradient");
  }
  Vector acc = Vector::Zero(dim);
  for (const auto& g : clipped) {
    if (g.values().size() != dim) {
      throw ShapeError("noisy_aggregate: gradient of length " +
                       std::to_string(g.values().size()) + ", expected " + std::to_string(dim));
    }
    acc += g.values();
  }
  Vector out = acc / static_cast<double>(batch_size);
  if (noise_multiplier > 0.0) {
    out += gaussian_sample<double>(rng, dim,
                                   noise_multiplier * clip_norm / static_cast<double>(batch_size));
  }
  return out;
}

void DpSgdConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (private_mode) {
    if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) {
      throw ConfigError("clip_norm must be positive");
    }
    if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
      throw ConfigError("noise_multiplier must be nonnegative");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  }
  if (non_private_batch_clip && !(*non_private_batch_clip > 0.0)) {
    throw ConfigError("non-private batch clip must be positive");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("Adam eps must be positive");
  if (!(adam.weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
}

LossKind default_loss(const Dataset& data) {
  return data.task == Task::kClassification ? LossKind::kCrossEntropy : LossKind::kMse;
}

namespace {

constexpr char kLogHeader[] = "dpkan-training-log v1";

std::vector<Index> index_range(const std::vector<Index>& perm, Index begin, Index end) {
  return {perm.begin() + begin, perm.begin() + end};
}

Matrix gather_rows(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = x.row(idx[i]);
  return out;
}

}  // namespace

TrainResult train(Model model, const Dataset& data, const DpSgdConfig& cfg, LossKind loss) {
  cfg.validate();
  data.validate();
  if (loss != default_loss(data)) {
    throw ArgumentError("train: loss " + to_string(loss) + " does not fit a " +
                        to_string(data.task) + " dataset");
  }
  if (model.n_in() != data.dims()) {
    throw ShapeError("train: model takes " + std::to_string(model.n_in()) +
                     " features, dataset has " + std::to_string(data.dims()));
  }
  const Index n = data.size();
  const Index b = cfg.batch_size;
  if (n < 1) throw ArgumentError("train: empty dataset");
  if (b > n) {
    throw ArgumentError("train: batch size " + std::to_string(b) + " exceeds dataset size " +
                        std::to_string(n));
  }
  const Index steps_per_epoch = (n + b - 1) / b;
  const double q = static_cast<double>(b) / static_cast<double>(n);

  RngState rng(cfg.seed);
  Vector theta = model.flatten();
  const Index dim = theta.size();
  AdamOptions adam = cfg.adam;
  if (cfg.private_mode) adam.weight_decay = 0.0;
  AdamState state(dim, adam);

  TrainingLog log;
  log.delta = cfg.private_mode ? cfg.delta : 0.0;
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;

  for (std::int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::int64_t loss_count = 0;
    std::vector<Index> perm;
    if (!cfg.private_mode) perm = permutation(n, rng.stream(Stream::kShuffle));

    for (Index s = 0; s < steps_per_epoch; ++s) {
      const std::int64_t step = log.total_steps + 1;
      Vector grad;
      std::vector<Index> idx;
      double batch_loss = 0.0;
      if (cfg.private_mode) {
        if (cfg.sampling == BatchSampling::kPoisson) {
          Generator& sampler = rng.stream(Stream::kSampling);
          for (Index i = 0; i < n; ++i) {
            if (sampler.bernoulli(q)) idx.push_back(i);
          }
        } else {
          idx = all;
        }
        std::vector<ClippedGradient> clipped;
        if (!idx.empty()) {
          const Matrix rows = per_sample_gradient_matrix(model, gather_rows(data.features, idx),
                                                         data.targets_for(idx), &batch_loss);
          clipped.reserve(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i) {
            FlatGradient g{rows.row(static_cast<Index>(i)).transpose(), idx[i]};
            if (!all_finite(g.values) || !std::isfinite(batch_loss)) {
              throw DivergenceError(step);
            }
            clipped.push_back(clip_gradient(std::move(g), cfg.clip_norm));
            const ClippedGradient& c = clipped.back();
            if (c.original_norm() > cfg.clip_norm) ++log.clipped_examples;
            if (cfg.check_clipping && l2_norm(c.values()) > cfg.clip_norm + 1e-9) {
              ++log.clip_violations;
            }
          }
        }
        if (clipped.empty() && cfg.noise_multiplier == 0.0) {
          ++log.total_steps;  // nothing to aggregate; the step still counts
          continue;
        }
        grad = noisy_aggregate(clipped, cfg.noise_multiplier, cfg.clip_norm, b, dim,
                               rng.stream(Stream::kNoise));
      } else {
        idx = index_range(perm, s * b, std::min((s + 1) * b, n));
        // Membership comes from the shuffle; summing in index order makes a
        // full batch reduce exactly like the private path.
        std::sort(idx.begin(), idx.end());
        grad = batch_gradient(model, gather_rows(data.features, idx), data.targets_for(idx),
                              &batch_loss);
        if (!std::isfinite(batch_loss) || !all_finite(grad)) {
          throw DivergenceError(step);
        }
        if (cfg.non_private_batch_clip) clip_in_place(grad, *cfg.non_private_batch_clip);
      }
      if (!idx.empty()) {
        loss_sum += batch_loss;
        ++loss_count;
      }
      adam_step(state, theta, grad, cfg.learning_rate);
      if (!all_finite(theta)) {
        throw DivergenceError(step);
      }
      model.unflatten(theta);
      ++log.total_steps;
      log.examples_processed += static_cast<std::int64_t>(idx.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    rec.metric = task_metric(data, model.forward(data.features));
    rec.steps = log.total_steps;
    if (cfg.private_mode) {
      rec.epsilon = cfg.noise_multiplier > 0.0
                        ? compute_epsilon_steps(cfg.noise_multiplier, q, log.total_steps,
                                                cfg.delta)
                              .epsilon
                        : std::numeric_limits<double>::infinity();
    }
    log.epochs.push_back(rec);
  }
  if (cfg.private_mode) log.epsilon = log.epochs.empty() ? 0.0 : log.epochs.back().epsilon;
  return {std::move(model), std::move(log)};
}

std::string emit_training_log(const TrainingLog& log) {
  using text::format_double;
  std::ostringstream os;
  os << kLogHeader << '\n';
  os << "total_steps=" << log.total_steps << '\n';
  os << "examples_processed=" << log.examples_processed << '\n';
  os << "epsilon=" << (log.epsilon ? format_double(*log.epsilon) : std::string("none")) << '\n';
  os << "delta=" << format_double(log.delta) << '\n';
  os << "clip_violations=" << log.clip_violations << '\n';
  os << "clipped_examples=" << log.clipped_examples << '\n';
  for (const auto& e : log.epochs) {
    os << "epoch=" << e.epoch << " train_loss=" << format_double(e.train_loss)
       << " metric=" << format_double(e.metric) << " steps=" << e.steps
       << " epsilon=" << format_double(e.epsilon) << '\n';
  }
  return os.str();
}

TrainingLog parse_training_log(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || text::trim(line) != kLogHeader) {
    throw VersionError("training log: missing or unsupported header (expected '" +
                       std::string(kLogHeader) + "')");
  }
  TrainingLog log;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const std::string where = "training log line " + std::to_string(line_no);
    if (t.starts_with("epoch=")) {
      EpochRecord e;
      int seen = 0;
      for (const auto& tok : text::split(t, ' ')) {
        if (tok.empty()) continue;
        std::string key, value;
        text::split_key_value(tok, key, value, line_no);
        if (key == "epoch") e.epoch = text::parse_int(value, where);
        else if (key == "train_loss") e.train_loss = text::parse_double(value, where);
        else if (key == "metric") e.metric = text::parse_double(value, where);
        else if (key == "steps") e.steps = text::parse_int(value, where);
        else if (key == "epsilon") e.epsilon = text::parse_double(value, where);
        else throw ParseError(where + ": unknown field '" + key + "'");
        ++seen;
      }
      if (seen != 5) throw ParseError(where + ": expected 5 epoch fields");
      log.epochs.push_back(e);
      continue;
    }
    std::string key, value;
    text::split_key_value(t, key, value, line_no);
    if (key == "total_steps") log.total_steps = text::parse_int(value, where);
    else if (key == "examples_processed") log.examples_processed = text::parse_int(value, where);
    else if (key == "epsilon") {
      if (value == "none") log.epsilon.reset();
      else log.epsilon = text::parse_double(value, where);
    } else if (key == "delta") log.delta = text::parse_double(value, where);
    else if (key == "clip_violations") log.clip_violations = text::parse_int(value, where);
    else if (key == "clipped_examples") log.clipped_examples = text::parse_int(value, where);
    else throw ParseError(where + ": unknown key '" + key + "'");
  }
  return log;
}

}  // namespace dpkan
