#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "theftbench/nn/tensor.hpp"
#include "theftbench/rng.hpp"

namespace theftbench::nn {

enum class Activation { ReLU, Softmax, None };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseSpec {
  std::size_t units = 1;
  Activation activation = Activation::ReLU;
  bool operator==(const DenseSpec&) const = default;
};

// Input (timesteps, features). Gate order in the parameter blocks is
// input, forget, cell candidate, output.
struct LstmSpec {
  std::size_t units = 1;
  bool return_sequences = false;
  bool operator==(const LstmSpec&) const = default;
};

// Inverted dropout; identity outside training.
struct DropoutSpec {
  double rate = 0.0;
  bool operator==(const DropoutSpec&) const = default;
};

// 3x3 kernel, stride 1, valid padding, ReLU. Input (H, W) or (H, W, C).
struct Conv2DSpec {
  std::size_t filters = 1;
  bool operator==(const Conv2DSpec&) const = default;
};

// 2x2 window, stride 2, trailing rows/cols dropped.
struct MaxPool2DSpec {
  bool operator==(const MaxPool2DSpec&) const = default;
};

struct FlattenSpec {
  bool operator==(const FlattenSpec&) const = default;
};

struct ReshapeSpec {
  std::size_t rows = 1;
  std::size_t cols = 1;
  bool operator==(const ReshapeSpec&) const = default;
};

using LayerSpec = std::variant<DenseSpec, LstmSpec, DropoutSpec, Conv2DSpec, MaxPool2DSpec,
                               FlattenSpec, ReshapeSpec>;

std::string describe(const LayerSpec& spec);

enum class Mode { Train, Infer };

// Per-call scratch a layer keeps between forward and backward.
struct LayerCache {
  std::vector<Matrix> mats;
  std::vector<int> indices;
};

// Stateless layer kernel. Parameters are passed in, so one layer object can
// serve concurrent forward/backward calls with separate caches.
class Layer {
 public:
  virtual ~Layer() = default;

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }

  // Shapes of the parameter tensors this layer owns (possibly none).
  virtual std::vector<Shape> param_shapes() const { return {}; }
  virtual void init_params(std::span<Tensor> params, Rng& rng) const;

  // in: (input size x batch). rng is only used in Mode::Train.
  virtual Matrix forward(std::span<const Tensor> params, const Matrix& in, Mode mode, Rng* rng,
                         LayerCache& cache) const = 0;

  // dout: gradient w.r.t. this layer's output. Accumulates into param_grads
  // when non-empty. Returns gradient w.r.t. the input when want_input_grad.
  virtual Matrix backward(std::span<const Tensor> params, const LayerCache& cache,
                          const Matrix& dout, std::span<Tensor> param_grads,
                          bool want_input_grad) const = 0;

  // Appends the piecewise-linear decisions of the last forward pass (ReLU
  // signs, max-pool winners) for sample `column`. Smooth layers add nothing.
  virtual void append_pattern(const LayerCache& cache, Eigen::Index column,
                              std::vector<int>& pattern) const;

 protected:
  Shape input_shape_;
  Shape output_shape_;
};

// Validates shape compatibility and returns the layer kernel. Throws
// ArchitectureError when spec cannot consume input_shape.
std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input_shape);

// Dense layer whose softmax can be bypassed in backward: gradient w.r.t. the
// pre-activation (logits) is fed in directly by the loss.
class DenseLayer : public Layer {
 public:
  DenseLayer(const DenseSpec& spec, const Shape& input_shape);
  std::vector<Shape> param_shapes() const override;
  void init_params(std::span<Tensor> params, Rng& rng) const override;
  Matrix forward(std::span<const Tensor> params, const Matrix& in, Mode mode, Rng* rng,
                 LayerCache& cache) const override;
  Matrix backward(std::span<const Tensor> params, const LayerCache& cache, const Matrix& dout,
                  std::span<Tensor> param_grads, bool want_input_grad) const override;
  Matrix backward_from_logits(std::span<const Tensor> params, const LayerCache& cache,
                              const Matrix& dlogits, std::span<Tensor> param_grads,
                              bool want_input_grad) const;
  void append_pattern(const LayerCache& cache, Eigen::Index column,
                      std::vector<int>& pattern) const override;
  const DenseSpec& spec() const { return spec_; }

 private:
  DenseSpec spec_;
};

}  // namespace theftbench::nn
