#include "theftbench/nn/model.hpp"

#include <cmath>

#include "theftbench/error.hpp"

namespace theftbench::nn {

namespace {

bool is_softmax_head(const LayerSpec& spec) {
  const auto* dense = std::get_if<DenseSpec>(&spec);
  return dense != nullptr && dense->units == 2 && dense->activation == Activation::Softmax;
}

}  // namespace

std::vector<Shape> output_shapes(const ModelArchitecture& arch) {
  if (shape_size(arch.input_shape) != kSlotsPerDay) {
    throw ArchitectureError("input shape " + shape_to_string(arch.input_shape) +
                            " does not hold 48 readings");
  }
  if (arch.layers.empty() || !is_softmax_head(arch.layers.back())) {
    throw ArchitectureError("architecture '" + arch.name + "' must end in Dense(2, softmax)");
  }
  std::vector<Shape> shapes;
  Shape current = arch.input_shape;
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    if (i + 1 < arch.layers.size()) {
      const auto* dense = std::get_if<DenseSpec>(&arch.layers[i]);
      if (dense != nullptr && dense->activation == Activation::Softmax) {
        throw ArchitectureError("softmax is only supported on the output layer");
      }
    }
    try {
      current = make_layer(arch.layers[i], current)->output_shape();
    } catch (const ArchitectureError& e) {
      throw ArchitectureError("layer " + std::to_string(i) + ": " + e.what());
    }
    shapes.push_back(current);
  }
  return shapes;
}

Network::Network(ModelArchitecture arch) : arch_(std::move(arch)) {
  output_shapes(arch_);
  Shape current = arch_.input_shape;
  for (const auto& spec : arch_.layers) {
    layers_.push_back(make_layer(spec, current));
    current = layers_.back()->output_shape();
  }
}

Params Network::init_params(std::uint64_t seed) const {
  Params params;
  params.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::vector<Tensor> ts;
    for (const auto& s : layers_[i]->param_shapes()) ts.emplace_back(s);
    auto rng = make_rng(seed, i);
    layers_[i]->init_params(ts, rng);
    params.push_back(std::move(ts));
  }
  return params;
}

void Network::check_params(const Params& params) const {
  if (params.size() != layers_.size()) {
    throw SchemaError("expected parameters for " + std::to_string(layers_.size()) +
                      " layers, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto shapes = layers_[i]->param_shapes();
    if (params[i].size() != shapes.size()) {
      throw SchemaError("layer " + std::to_string(i) + " expects " +
                        std::to_string(shapes.size()) + " parameter tensors");
    }
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      if (params[i][k].shape != shapes[k] || params[i][k].data.size() != shape_size(shapes[k])) {
        throw SchemaError("layer " + std::to_string(i) + " parameter " + std::to_string(k) +
                          " has shape " + shape_to_string(params[i][k].shape) + ", expected " +
                          shape_to_string(shapes[k]));
      }
      if (!params[i][k].all_finite()) {
        throw SchemaError("layer " + std::to_string(i) + " has non-finite parameters");
      }
    }
  }
}

Matrix Network::forward(const Params& params, const Matrix& x, Mode mode, Rng* rng,
                        Workspace& ws) const {
  if (x.rows() != static_cast<Eigen::Index>(kSlotsPerDay)) {
    throw ArchitectureError("model input must have 48 rows, got " + std::to_string(x.rows()));
  }
  ws.caches.resize(layers_.size());
  Matrix a = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    a = layers_[i]->forward(params[i], a, mode, rng, ws.caches[i]);
    if (!a.allFinite()) {
      throw NumericError("non-finite activation at layer " + std::to_string(i) + " (" +
                         describe(arch_.layers[i]) + ")");
    }
  }
  // The head is a Dense layer: cache.mats[1] holds its logits.
  ws.logits = ws.caches.back().mats[1];
  ws.probabilities = a;
  return a;
}

Matrix Network::backward(const Params& params, Workspace& ws, const Matrix& dlogits,
                         Params* param_grads, bool want_input_grad) const {
  const std::size_t n = layers_.size();
  auto grads_for = [&](std::size_t i) -> std::span<Tensor> {
    return param_grads == nullptr ? std::span<Tensor>{} : std::span<Tensor>((*param_grads)[i]);
  };
  const auto& head = static_cast<const DenseLayer&>(*layers_[n - 1]);
  Matrix d = head.backward_from_logits(params[n - 1], ws.caches[n - 1], dlogits, grads_for(n - 1),
                                       want_input_grad || n > 1);
  for (std::size_t i = n - 1; i-- > 0;) {
    const bool need_input = want_input_grad || i > 0;
    d = layers_[i]->backward(params[i], ws.caches[i], d, grads_for(i), need_input);
    if (need_input && !d.allFinite()) {
      throw NumericError("non-finite gradient at layer " + std::to_string(i) + " (" +
                         describe(arch_.layers[i]) + ")");
    }
  }
  return d;
}

std::vector<int> Network::activation_pattern(const Workspace& ws, Eigen::Index column) const {
  std::vector<int> pattern;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->append_pattern(ws.caches[i], column, pattern);
  }
  return pattern;
}

Matrix to_matrix(std::span<const DailyLoadVector> xs) {
  Matrix m(static_cast<Eigen::Index>(kSlotsPerDay), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto& r = xs[j].readings();
    std::copy(r.begin(), r.end(), m.col(static_cast<Eigen::Index>(j)).data());
  }
  return m;
}

Eigen::VectorXd cross_entropy(const Matrix& logits, std::span<const Label> labels) {
  Eigen::VectorXd loss(logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto col = logits.col(j);
    const double mx = col.maxCoeff();
    const double lse = mx + std::log((col.array() - mx).exp().sum());
    loss[j] = lse - col[static_cast<int>(labels[static_cast<std::size_t>(j)])];
  }
  return loss;
}

TrainedModel::TrainedModel(ModelArchitecture arch, Params params, TrainMeta meta)
    : network_(std::make_shared<const Network>(std::move(arch))),
      params_(std::move(params)),
      meta_(meta) {
  network_->check_params(params_);
}

ProbabilityPair TrainedModel::forward(const DailyLoadVector& x) const {
  Workspace ws;
  const DailyLoadVector one[] = {x};
  const Matrix p = network_->forward(params_, to_matrix(one), Mode::Infer, nullptr, ws);
  return {p(0, 0), p(1, 0)};
}

ProbabilityPair TrainedModel::forward(const DailyLoadVector& x, Rng& rng) const {
  Workspace ws;
  const DailyLoadVector one[] = {x};
  const Matrix p = network_->forward(params_, to_matrix(one), Mode::Train, &rng, ws);
  return {p(0, 0), p(1, 0)};
}

Matrix TrainedModel::predict_proba(const Matrix& xs) const {
  Workspace ws;
  return network_->forward(params_, xs, Mode::Infer, nullptr, ws);
}

std::vector<Label> TrainedModel::classify(std::span<const DailyLoadVector> xs,
                                          std::size_t chunk) const {
  std::vector<Label> out;
  out.reserve(xs.size());
  for (std::size_t start = 0; start < xs.size(); start += chunk) {
    const auto part = xs.subspan(start, std::min(chunk, xs.size() - start));
    const Matrix p = predict_proba(to_matrix(part));
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      out.push_back(p(1, j) > p(0, j) ? Label::Theft : Label::Normal);
    }
  }
  return out;
}

LossGradient TrainedModel::loss_and_input_gradient(const DailyLoadVector& x, Label y) const {
  const DailyLoadVector one[] = {x};
  const Label labels[] = {y};
  Matrix grads;
  const Eigen::VectorXd loss = loss_and_input_gradient(to_matrix(one), labels, grads);
  LossGradient out;
  out.loss = loss[0];
  std::copy(grads.data(), grads.data() + kSlotsPerDay, out.gradient.begin());
  return out;
}

Eigen::VectorXd TrainedModel::loss_and_input_gradient(const Matrix& xs,
                                                      std::span<const Label> labels,
                                                      Matrix& grads,
                                                      Matrix* probabilities) const {
  if (labels.size() != static_cast<std::size_t>(xs.cols())) {
    throw SizeError("one label per input column required");
  }
  Workspace ws;
  const Matrix p = network_->forward(params_, xs, Mode::Infer, nullptr, ws);
  Matrix dlogits = p;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    dlogits(static_cast<int>(labels[static_cast<std::size_t>(j)]), j) -= 1.0;
  }
  grads = network_->backward(params_, ws, dlogits, nullptr, true);
  if (probabilities != nullptr) *probabilities = p;
  return cross_entropy(ws.logits, labels);
}

}  // namespace theftbench::nn
