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

#include "dpkan/model.hpp"

namespace dpkan {

Index layer_n_in(const Layer& layer) {
  return std::visit([](const auto& l) { return l.n_in(); }, layer);
}

Index layer_n_out(const Layer& layer) {
  return std::visit([](const auto& l) { return l.n_out(); }, layer);
}

Index layer_parameter_count(const Layer& layer) {
  return std::visit([](const auto& l) { return l.parameter_count(); }, layer);
}

Model::Model(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ArgumentError("Model: at least one layer is required");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layer_n_out(layers_[i - 1]) != layer_n_in(layers_[i])) {
      throw ShapeError("Model: layer " + std::to_string(i - 1) + " outputs " +
                       std::to_string(layer_n_out(layers_[i - 1])) + " but layer " +
                       std::to_string(i) + " expects " +
                       std::to_string(layer_n_in(layers_[i])));
    }
  }
}

Index Model::n_in() const { return layers_.empty() ? 0 : layer_n_in(layers_.front()); }
Index Model::n_out() const { return layers_.empty() ? 0 : layer_n_out(layers_.back()); }

Index Model::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers_) n += layer_parameter_count(l);
  return n;
}

Index Model::parameter_offset(std::size_t i) const {
  Index off = 0;
  for (std::size_t k = 0; k < i; ++k) off += layer_parameter_count(layers_[k]);
  return off;
}

Vector Model::flatten() const {
  Vector out(parameter_count());
  Index off = 0;
  for (const auto& layer : layers_) {
    const Index n = layer_parameter_count(layer);
    std::visit(
        [&](const auto& l) {
          l.get_parameters(std::span<double>(out.data() + off, static_cast<std::size_t>(n)));
        },
        layer);
    off += n;
  }
  return out;
}

void Model::unflatten(const Vector& parameters) {
  if (parameters.size() != parameter_count()) {
    throw ShapeError("Model::unflatten: expected " + std::to_string(parameter_count()) +
                     " parameters, got " + std::to_string(parameters.size()));
  }
  Index off = 0;
  for (auto& layer : layers_) {
    const Index n = layer_parameter_count(layer);
    std::visit(
        [&](auto& l) {
          l.set_parameters(
              std::span<const double>(parameters.data() + off, static_cast<std::size_t>(n)));
        },
        layer);
    off += n;
  }
}

void Model::initialize(Generator& rng) {
  for (auto& layer : layers_) std::visit([&](auto& l) { l.initialize(rng); }, layer);
}

Matrix Model::forward(const Matrix& x) const {
  Matrix h = x;
  for (const auto& layer : layers_) {
    h = std::visit([&](const auto& l) { return l.forward(h, nullptr); }, layer);
  }
  return h;
}

Matrix Model::forward(const Matrix& x, ForwardCache& cache) const {
  cache.layers.assign(layers_.size(), LayerCache{});
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = std::visit([&](const auto& l) { return l.forward(h, &cache.layers[i]); }, layers_[i]);
  }
  return h;
}

Matrix Model::backward(const ForwardCache& cache, const Matrix& grad_out) const {
  if (cache.layers.size() != layers_.size()) {
    throw ShapeError("Model::backward: cache does not belong to this model");
  }
  Matrix grads(grad_out.rows(), parameter_count());
  Matrix g = grad_out;
  Index end = grads.cols();
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Index n = layer_parameter_count(layers_[k]);
    end -= n;
    g = std::visit(
        [&](const auto& l) { return l.backward(cache.layers[k], g, grads.middleCols(end, n)); },
        layers_[k]);
  }
  return grads;
}

Matrix Model::predict(const Matrix& raw_features) const {
  if (input_scaling_) return forward(input_scaling_->apply(raw_features));
  return forward(raw_features);
}

Model make_mlp(const std::vector<Index>& widths, Activation hidden_activation) {
  if (widths.size() < 2) throw ArgumentError("make_mlp: need at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    layers.emplace_back(std::in_place_type<LinearLayer>, widths[i], widths[i + 1],
                        last ? Activation::kNone : hidden_activation);
  }
  return Model(std::move(layers));
}

Model make_kan(const std::vector<Index>& widths, const BSplineGrid<double>& grid) {
  if (widths.size() < 2) throw ArgumentError("make_kan: need at least input and output widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.emplace_back(std::in_place_type<KanLayer>, widths[i], widths[i + 1], grid);
  }
  return Model(std::move(layers));
}

Model make_fasterkan(const std::vector<Index>& widths, const RswafGrid<double>& grid,
                     bool layer_norm) {
  if (widths.size() < 2) {
    throw ArgumentError("make_fasterkan: need at least input and output widths");
  }
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.emplace_back(std::in_place_type<FasterKanLayer>, widths[i], widths[i + 1], grid,
                        layer_norm);
  }
  return Model(std::move(layers));
}

Index count_parameters(const Model& model) { return model.parameter_count(); }

Matrix per_sample_gradient_matrix(const Model& model, const Matrix& batch_x,
                                  const Targets& batch_y, double* mean_loss) {
  if (target_rows(batch_y) != batch_x.rows()) {
    throw ShapeError("per_sample_gradients: " + std::to_string(target_rows(batch_y)) +
                     " targets for batch " + shape_string(batch_x));
  }
  ForwardCache cache;
  const Matrix pred = model.forward(batch_x, cache);
  const PerExampleLoss loss = per_example_loss(pred, batch_y);
  if (mean_loss) {
    *mean_loss = loss.losses.size() ? loss.losses.sum() / static_cast<double>(loss.losses.size())
                                    : 0.0;
  }
  return model.backward(cache, loss.grad);
}

std::vector<FlatGradient> per_sample_gradients(const Model& model, const Matrix& batch_x,
                                               const Targets& batch_y, LossKind loss) {
  if (loss != loss_kind_for(batch_y)) {
    throw ArgumentError("per_sample_gradients: loss " + to_string(loss) +
                        " does not match the target type");
  }
  const Matrix grads = per_sample_gradient_matrix(model, batch_x, batch_y);
  std::vector<FlatGradient> out;
  out.reserve(static_cast<std::size_t>(grads.rows()));
  for (Index b = 0; b < grads.rows(); ++b) out.push_back({grads.row(b).transpose(), b});
  return out;
}

Vector sum_rows_divided(const Matrix& rows, double divisor) {
  Vector acc = Vector::Zero(rows.cols());
  for (Index b = 0; b < rows.rows(); ++b) acc += rows.row(b).transpose();
  return acc / divisor;
}

Vector batch_gradient(const Model& model, const Matrix& batch_x, const Targets& batch_y,
                      double* mean_loss) {
  const Matrix grads = per_sample_gradient_matrix(model, batch_x, batch_y, mean_loss);
  return sum_rows_divided(grads, static_cast<double>(grads.rows()));
}

}  // namespace dpkan
