#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "theftbench/load_vector.hpp"
#include "theftbench/nn/layers.hpp"
#include "theftbench/nn/tensor.hpp"

namespace theftbench::nn {

// The 48 readings are viewed through input_shape: {48} for dense stacks,
// {48, 1} for recurrent ones, {6, 8} for convolutional ones (reading i at
// row i / 8, column i % 8).
struct ModelArchitecture {
  std::string name;
  Shape input_shape{kSlotsPerDay};
  std::vector<LayerSpec> layers;

  bool operator==(const ModelArchitecture&) const = default;
};

// Per-layer output shapes; throws ArchitectureError when the stack is not
// shape-compatible or does not end in Dense(2, Softmax).
std::vector<Shape> output_shapes(const ModelArchitecture& arch);

struct ProbabilityPair {
  double normal = 0.5;
  double theft = 0.5;
  Label label() const { return theft > normal ? Label::Theft : Label::Normal; }
};

struct LossGradient {
  double loss = 0.0;
  Readings gradient{};
};

// Forward/backward scratch for one call.
struct Workspace {
  std::vector<LayerCache> caches;
  Matrix logits;
  Matrix probabilities;
};

// Layer kernels instantiated for an architecture. Holds no parameters.
class Network {
 public:
  explicit Network(ModelArchitecture arch);

  const ModelArchitecture& arch() const { return arch_; }
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  Params init_params(std::uint64_t seed) const;
  // Throws SchemaError when params do not match the layer parameter shapes.
  void check_params(const Params& params) const;

  // x: (48 x batch). Returns class probabilities (2 x batch); row 0 Normal.
  // Throws NumericError naming the first layer that produced a non-finite value.
  Matrix forward(const Params& params, const Matrix& x, Mode mode, Rng* rng, Workspace& ws) const;

  // Backpropagates dlogits (2 x batch, gradient w.r.t. the softmax input).
  // Accumulates parameter gradients when param_grads is non-null; returns the
  // input gradient (48 x batch) when want_input_grad.
  Matrix backward(const Params& params, Workspace& ws, const Matrix& dlogits, Params* param_grads,
                  bool want_input_grad) const;

  // ReLU signs and max-pool winners of sample `column` in the last forward
  // pass held by ws. Equal patterns mean the same linear piece.
  std::vector<int> activation_pattern(const Workspace& ws, Eigen::Index column = 0) const;

 private:
  ModelArchitecture arch_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_fpr = 0.0;
  bool operator==(const TrainMeta&) const = default;
};

// Packs vectors as columns of a (48 x n) matrix.
Matrix to_matrix(std::span<const DailyLoadVector> xs);

// Cross-entropy -log p_y per column, computed as logsumexp(z) - z_y.
Eigen::VectorXd cross_entropy(const Matrix& logits, std::span<const Label> labels);

// Immutable parameters plus their architecture. Safe to share between
// threads: every query allocates its own workspace.
class TrainedModel {
 public:
  TrainedModel(ModelArchitecture arch, Params params, TrainMeta meta = {});

  const ModelArchitecture& arch() const { return network_->arch(); }
  const Network& network() const { return *network_; }
  const Params& params() const { return params_; }
  const TrainMeta& meta() const { return meta_; }

  ProbabilityPair forward(const DailyLoadVector& x) const;
  // Training-mode pass: dropout masks drawn from rng.
  ProbabilityPair forward(const DailyLoadVector& x, Rng& rng) const;
  Label classify(const DailyLoadVector& x) const { return forward(x).label(); }

  // Inference-mode probabilities for a (48 x n) batch.
  Matrix predict_proba(const Matrix& xs) const;
  std::vector<Label> classify(std::span<const DailyLoadVector> xs, std::size_t chunk = 256) const;

  // Loss -log p_y and its exact gradient w.r.t. the 48 readings, dropout off.
  LossGradient loss_and_input_gradient(const DailyLoadVector& x, Label y) const;

  // Batched variant on raw columns (which may hold any finite values).
  // Returns per-column losses and writes gradients into grads (48 x n) and,
  // when non-null, the class probabilities (2 x n) of the same pass.
  Eigen::VectorXd loss_and_input_gradient(const Matrix& xs, std::span<const Label> labels,
                                          Matrix& grads, Matrix* probabilities = nullptr) const;

 private:
  std::shared_ptr<const Network> network_;
  Params params_;
  TrainMeta meta_;
};

}  // namespace theftbench::nn
