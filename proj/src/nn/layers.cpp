#include "theftbench/nn/layers.hpp"

#include <cmath>

#include "theftbench/error.hpp"
#include "theftbench/numfmt.hpp"

namespace theftbench::nn {

namespace {

using Array = Eigen::ArrayXXd;

void uniform_fill(Tensor& t, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : t.data) v = dist(rng);
}

Matrix sigmoid(const Matrix& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void softmax_columns(Matrix& z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    auto col = z.col(j);
    const double mx = col.maxCoeff();
    col = (col.array() - mx).exp().matrix();
    col /= col.sum();
  }
}

std::string arch_error_prefix(const LayerSpec& spec, const Shape& in) {
  return describe(spec) + " cannot take input of shape " + shape_to_string(in);
}

// ---------------------------------------------------------------- Dense

}  // namespace

DenseLayer::DenseLayer(const DenseSpec& spec, const Shape& input_shape) : spec_(spec) {
  if (spec.units == 0) throw ArchitectureError("Dense units must be >= 1");
  if (input_shape.size() != 1) {
    throw ArchitectureError(arch_error_prefix(spec, input_shape) + " (flatten first)");
  }
  input_shape_ = input_shape;
  output_shape_ = {spec.units};
}

std::vector<Shape> DenseLayer::param_shapes() const {
  return {{spec_.units, input_shape_[0]}, {spec_.units}};
}

void DenseLayer::init_params(std::span<Tensor> params, Rng& rng) const {
  uniform_fill(params[0], std::sqrt(6.0 / static_cast<double>(input_shape_[0])), rng);
  std::fill(params[1].data.begin(), params[1].data.end(), 0.0);
}

Matrix DenseLayer::forward(std::span<const Tensor> params, const Matrix& in, Mode, Rng*,
                           LayerCache& cache) const {
  Matrix z = params[0].as_matrix() * in;
  z.colwise() += params[1].as_vector();
  Matrix a = z;
  switch (spec_.activation) {
    case Activation::ReLU:
      a = a.cwiseMax(0.0);
      break;
    case Activation::Softmax:
      softmax_columns(a);
      break;
    case Activation::None:
      break;
  }
  cache.mats = {in, std::move(z), a};
  return a;
}

Matrix DenseLayer::backward(std::span<const Tensor> params, const LayerCache& cache,
                            const Matrix& dout, std::span<Tensor> param_grads,
                            bool want_input_grad) const {
  const Matrix& z = cache.mats[1];
  const Matrix& a = cache.mats[2];
  Matrix dz;
  switch (spec_.activation) {
    case Activation::ReLU:
      dz = (z.array() > 0.0).select(dout, 0.0);
      break;
    case Activation::Softmax: {
      const Eigen::RowVectorXd dot = (dout.array() * a.array()).colwise().sum();
      dz = (a.array() * (dout.array().rowwise() - dot.array())).matrix();
      break;
    }
    case Activation::None:
      dz = dout;
      break;
  }
  return backward_from_logits(params, cache, dz, param_grads, want_input_grad);
}

Matrix DenseLayer::backward_from_logits(std::span<const Tensor> params, const LayerCache& cache,
                                        const Matrix& dz, std::span<Tensor> param_grads,
                                        bool want_input_grad) const {
  if (!param_grads.empty()) {
    param_grads[0].as_matrix().noalias() += dz * cache.mats[0].transpose();
    param_grads[1].as_vector() += dz.rowwise().sum();
  }
  if (!want_input_grad) return {};
  return params[0].as_matrix().transpose() * dz;
}

void DenseLayer::append_pattern(const LayerCache& cache, Eigen::Index column,
                                std::vector<int>& pattern) const {
  if (spec_.activation != Activation::ReLU) return;
  const auto z = cache.mats[1].col(column);
  for (Eigen::Index i = 0; i < z.size(); ++i) pattern.push_back(z[i] > 0.0 ? 1 : 0);
}

namespace {

void append_relu_pattern(const Matrix& z, Eigen::Index first, Eigen::Index count,
                         std::vector<int>& pattern) {
  const auto block = z.middleCols(first, count);
  for (Eigen::Index i = 0; i < block.size(); ++i) pattern.push_back(block.data()[i] > 0.0 ? 1 : 0);
}

// ---------------------------------------------------------------- LSTM

class LstmLayer : public Layer {
 public:
  LstmLayer(const LstmSpec& spec, const Shape& input_shape) : spec_(spec) {
    if (spec.units == 0) throw ArchitectureError("LSTM units must be >= 1");
    if (input_shape.size() != 2) {
      throw ArchitectureError(arch_error_prefix(spec, input_shape) +
                              " (expects timesteps x features)");
    }
    input_shape_ = input_shape;
    steps_ = static_cast<Eigen::Index>(input_shape[0]);
    features_ = static_cast<Eigen::Index>(input_shape[1]);
    units_ = static_cast<Eigen::Index>(spec.units);
    output_shape_ = spec.return_sequences ? Shape{input_shape[0], spec.units} : Shape{spec.units};
  }

  std::vector<Shape> param_shapes() const override {
    return {{4 * spec_.units, input_shape_[1]}, {4 * spec_.units, spec_.units}, {4 * spec_.units}};
  }

  void init_params(std::span<Tensor> params, Rng& rng) const override {
    const double limit = 1.0 / std::sqrt(static_cast<double>(spec_.units));
    uniform_fill(params[0], limit, rng);
    uniform_fill(params[1], limit, rng);
    auto& b = params[2].data;
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(b.begin() + units_, b.begin() + 2 * units_, 1.0);
  }

  // cache.mats: 0 inputs (F x T*B), 1 gates post-activation (4U x T*B),
  // 2 cell states (U x T*B), 3 tanh(cell) (U x T*B), 4 hidden (U x T*B).
  Matrix forward(std::span<const Tensor> params, const Matrix& in, Mode, Rng*,
                 LayerCache& cache) const override {
    const Eigen::Index batch = in.cols();
    const Eigen::Index U = units_;
    Matrix xs(features_, steps_ * batch);
    for (Eigen::Index t = 0; t < steps_; ++t) {
      xs.middleCols(t * batch, batch) = in.middleRows(t * features_, features_);
    }
    Matrix gates = params[0].as_matrix() * xs;
    gates.colwise() += params[2].as_vector();
    Matrix cells(U, steps_ * batch);
    Matrix tanh_cells(U, steps_ * batch);
    Matrix hidden(U, steps_ * batch);
    const auto wh = params[1].as_matrix();
    Matrix z(4 * U, batch);
    for (Eigen::Index t = 0; t < steps_; ++t) {
      z = gates.middleCols(t * batch, batch);
      if (t > 0) z.noalias() += wh * hidden.middleCols((t - 1) * batch, batch);
      auto g = gates.middleCols(t * batch, batch);
      g.topRows(2 * U) = sigmoid(z.topRows(2 * U));
      g.middleRows(2 * U, U) = z.middleRows(2 * U, U).array().tanh().matrix();
      g.bottomRows(U) = sigmoid(z.bottomRows(U));
      auto c = cells.middleCols(t * batch, batch);
      c = (g.topRows(U).array() * g.middleRows(2 * U, U).array()).matrix();
      if (t > 0) {
        c.array() += g.middleRows(U, U).array() * cells.middleCols((t - 1) * batch, batch).array();
      }
      tanh_cells.middleCols(t * batch, batch) = c.array().tanh().matrix();
      hidden.middleCols(t * batch, batch) =
          (g.bottomRows(U).array() * tanh_cells.middleCols(t * batch, batch).array()).matrix();
    }
    Matrix out;
    if (spec_.return_sequences) {
      out.resize(steps_ * U, batch);
      for (Eigen::Index t = 0; t < steps_; ++t) {
        out.middleRows(t * U, U) = hidden.middleCols(t * batch, batch);
      }
    } else {
      out = hidden.middleCols((steps_ - 1) * batch, batch);
    }
    cache.mats.clear();
    cache.mats.push_back(std::move(xs));
    cache.mats.push_back(std::move(gates));
    cache.mats.push_back(std::move(cells));
    cache.mats.push_back(std::move(tanh_cells));
    cache.mats.push_back(std::move(hidden));
    return out;
  }

  Matrix backward(std::span<const Tensor> params, const LayerCache& cache, const Matrix& dout,
                  std::span<Tensor> param_grads, bool want_input_grad) const override {
    const Matrix& xs = cache.mats[0];
    const Matrix& gates = cache.mats[1];
    const Matrix& cells = cache.mats[2];
    const Matrix& tanh_cells = cache.mats[3];
    const Matrix& hidden = cache.mats[4];
    const Eigen::Index batch = dout.cols();
    const Eigen::Index U = units_;
    const auto wh = params[1].as_matrix();

    Matrix dz_all(4 * U, steps_ * batch);
    Matrix dh = Matrix::Zero(U, batch);
    Matrix dc = Matrix::Zero(U, batch);
    for (Eigen::Index t = steps_ - 1; t >= 0; --t) {
      if (spec_.return_sequences) {
        dh += dout.middleRows(t * U, U);
      } else if (t == steps_ - 1) {
        dh += dout;
      }
      const auto g = gates.middleCols(t * batch, batch).array();
      const auto gi = g.topRows(U);
      const auto gf = g.middleRows(U, U);
      const auto gg = g.middleRows(2 * U, U);
      const auto go = g.bottomRows(U);
      const auto tc = tanh_cells.middleCols(t * batch, batch).array();
      auto dz = dz_all.middleCols(t * batch, batch);

      dz.bottomRows(U) = (dh.array() * tc * go * (1.0 - go)).matrix();
      dc.array() += dh.array() * go * (1.0 - tc.square());
      dz.topRows(U) = (dc.array() * gg * gi * (1.0 - gi)).matrix();
      dz.middleRows(2 * U, U) = (dc.array() * gi * (1.0 - gg.square())).matrix();
      if (t > 0) {
        const auto c_prev = cells.middleCols((t - 1) * batch, batch).array();
        dz.middleRows(U, U) = (dc.array() * c_prev * gf * (1.0 - gf)).matrix();
        dh.noalias() = wh.transpose() * dz;
      } else {
        dz.middleRows(U, U).setZero();
      }
      dc.array() *= gf;
    }

    if (!param_grads.empty()) {
      param_grads[0].as_matrix().noalias() += dz_all * xs.transpose();
      if (steps_ > 1) {
        const Eigen::Index n = (steps_ - 1) * batch;
        param_grads[1].as_matrix().noalias() +=
            dz_all.rightCols(n) * hidden.leftCols(n).transpose();
      }
      param_grads[2].as_vector() += dz_all.rowwise().sum();
    }
    if (!want_input_grad) return {};
    const Matrix dxs = params[0].as_matrix().transpose() * dz_all;
    Matrix din(steps_ * features_, batch);
    for (Eigen::Index t = 0; t < steps_; ++t) {
      din.middleRows(t * features_, features_) = dxs.middleCols(t * batch, batch);
    }
    return din;
  }

 private:
  LstmSpec spec_;
  Eigen::Index steps_ = 0;
  Eigen::Index features_ = 0;
  Eigen::Index units_ = 0;
};

// ---------------------------------------------------------------- Dropout

class DropoutLayer : public Layer {
 public:
  DropoutLayer(const DropoutSpec& spec, const Shape& input_shape) : spec_(spec) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
      throw ArchitectureError("Dropout rate must lie in [0, 1)");
    }
    input_shape_ = input_shape;
    output_shape_ = input_shape;
  }

  Matrix forward(std::span<const Tensor>, const Matrix& in, Mode mode, Rng* rng,
                 LayerCache& cache) const override {
    cache.mats.clear();
    if (mode == Mode::Infer || spec_.rate == 0.0) return in;
    if (rng == nullptr) throw ValidationError("training-mode dropout needs a random stream");
    const double keep = 1.0 - spec_.rate;
    std::bernoulli_distribution draw(keep);
    Matrix mask(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = draw(*rng) ? 1.0 / keep : 0.0;
    Matrix out = in.cwiseProduct(mask);
    cache.mats.push_back(std::move(mask));
    return out;
  }

  Matrix backward(std::span<const Tensor>, const LayerCache& cache, const Matrix& dout,
                  std::span<Tensor>, bool want_input_grad) const override {
    if (!want_input_grad) return {};
    if (cache.mats.empty()) return dout;
    return dout.cwiseProduct(cache.mats[0]);
  }

 private:
  DropoutSpec spec_;
};

// ---------------------------------------------------------------- Conv2D

constexpr Eigen::Index kKernel = 3;

class Conv2DLayer : public Layer {
 public:
  Conv2DLayer(const Conv2DSpec& spec, const Shape& input_shape) : spec_(spec) {
    if (spec.filters == 0) throw ArchitectureError("Conv2D filters must be >= 1");
    if (input_shape.size() != 2 && input_shape.size() != 3) {
      throw ArchitectureError(arch_error_prefix(spec, input_shape) + " (expects H x W [x C])");
    }
    height_ = static_cast<Eigen::Index>(input_shape[0]);
    width_ = static_cast<Eigen::Index>(input_shape[1]);
    channels_ = input_shape.size() == 3 ? static_cast<Eigen::Index>(input_shape[2]) : 1;
    if (height_ < kKernel || width_ < kKernel) {
      throw ArchitectureError(arch_error_prefix(spec, input_shape) + " (smaller than 3x3 kernel)");
    }
    out_h_ = height_ - kKernel + 1;
    out_w_ = width_ - kKernel + 1;
    input_shape_ = input_shape;
    output_shape_ = {static_cast<std::size_t>(out_h_), static_cast<std::size_t>(out_w_),
                     spec.filters};
  }

  std::vector<Shape> param_shapes() const override {
    return {{spec_.filters, 3, 3, static_cast<std::size_t>(channels_)}, {spec_.filters}};
  }

  void init_params(std::span<Tensor> params, Rng& rng) const override {
    uniform_fill(params[0], std::sqrt(6.0 / static_cast<double>(kKernel * kKernel * channels_)), rng);
    std::fill(params[1].data.begin(), params[1].data.end(), 0.0);
  }

  // cache.mats: 0 patches (9C x HoWo*B), 1 pre-activation (F x HoWo*B).
  Matrix forward(std::span<const Tensor> params, const Matrix& in, Mode, Rng*,
                 LayerCache& cache) const override {
    const Eigen::Index batch = in.cols();
    const Eigen::Index positions = out_h_ * out_w_;
    const Eigen::Index patch = kKernel * kKernel * channels_;
    Matrix patches(patch, positions * batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      const double* src = in.col(b).data();
      for (Eigen::Index oh = 0; oh < out_h_; ++oh) {
        for (Eigen::Index ow = 0; ow < out_w_; ++ow) {
          double* dst = patches.col(b * positions + oh * out_w_ + ow).data();
          for (Eigen::Index kh = 0; kh < kKernel; ++kh) {
            for (Eigen::Index kw = 0; kw < kKernel; ++kw) {
              const double* px = src + ((oh + kh) * width_ + (ow + kw)) * channels_;
              std::copy(px, px + channels_, dst + (kh * kKernel + kw) * channels_);
            }
          }
        }
      }
    }
    Matrix z = params[0].as_matrix() * patches;
    z.colwise() += params[1].as_vector();
    Matrix out = Eigen::Map<const Matrix>(z.data(), positions * z.rows(), batch).cwiseMax(0.0);
    cache.mats.clear();
    cache.mats.push_back(std::move(patches));
    cache.mats.push_back(std::move(z));
    return out;
  }

  Matrix backward(std::span<const Tensor> params, const LayerCache& cache, const Matrix& dout,
                  std::span<Tensor> param_grads, bool want_input_grad) const override {
    const Matrix& patches = cache.mats[0];
    const Matrix& z = cache.mats[1];
    const Eigen::Index batch = dout.cols();
    const Eigen::Index positions = out_h_ * out_w_;
    const Eigen::Index filters = z.rows();
    const Eigen::Map<const Matrix> dout_cols(dout.data(), filters, positions * batch);
    const Matrix dz = (z.array() > 0.0).select(dout_cols, 0.0);
    if (!param_grads.empty()) {
      param_grads[0].as_matrix().noalias() += dz * patches.transpose();
      param_grads[1].as_vector() += dz.rowwise().sum();
    }
    if (!want_input_grad) return {};
    const Matrix dpatches = params[0].as_matrix().transpose() * dz;
    Matrix din = Matrix::Zero(height_ * width_ * channels_, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      double* dst = din.col(b).data();
      for (Eigen::Index oh = 0; oh < out_h_; ++oh) {
        for (Eigen::Index ow = 0; ow < out_w_; ++ow) {
          const double* src = dpatches.col(b * positions + oh * out_w_ + ow).data();
          for (Eigen::Index kh = 0; kh < kKernel; ++kh) {
            for (Eigen::Index kw = 0; kw < kKernel; ++kw) {
              double* px = dst + ((oh + kh) * width_ + (ow + kw)) * channels_;
              const double* g = src + (kh * kKernel + kw) * channels_;
              for (Eigen::Index c = 0; c < channels_; ++c) px[c] += g[c];
            }
          }
        }
      }
    }
    return din;
  }

  void append_pattern(const LayerCache& cache, Eigen::Index column,
                      std::vector<int>& pattern) const override {
    const Eigen::Index positions = out_h_ * out_w_;
    append_relu_pattern(cache.mats[1], column * positions, positions, pattern);
  }

 private:
  Conv2DSpec spec_;
  Eigen::Index height_ = 0, width_ = 0, channels_ = 1, out_h_ = 0, out_w_ = 0;
};

// ---------------------------------------------------------------- MaxPool2D

class MaxPool2DLayer : public Layer {
 public:
  MaxPool2DLayer(const MaxPool2DSpec& spec, const Shape& input_shape) {
    if (input_shape.size() != 2 && input_shape.size() != 3) {
      throw ArchitectureError(arch_error_prefix(spec, input_shape) + " (expects H x W [x C])");
    }
    height_ = static_cast<Eigen::Index>(input_shape[0]);
    width_ = static_cast<Eigen::Index>(input_shape[1]);
    channels_ = input_shape.size() == 3 ? static_cast<Eigen::Index>(input_shape[2]) : 1;
    out_h_ = height_ / 2;
    out_w_ = width_ / 2;
    if (out_h_ == 0 || out_w_ == 0) {
      throw ArchitectureError(arch_error_prefix(spec, input_shape) + " (smaller than 2x2 window)");
    }
    input_shape_ = input_shape;
    output_shape_ = {static_cast<std::size_t>(out_h_), static_cast<std::size_t>(out_w_),
                     static_cast<std::size_t>(channels_)};
  }

  // cache.indices: winning input row per (output row, sample); first max wins ties.
  Matrix forward(std::span<const Tensor>, const Matrix& in, Mode, Rng*,
                 LayerCache& cache) const override {
    const Eigen::Index batch = in.cols();
    const Eigen::Index out_size = out_h_ * out_w_ * channels_;
    Matrix out(out_size, batch);
    cache.indices.assign(static_cast<std::size_t>(out_size * batch), 0);
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (Eigen::Index oh = 0; oh < out_h_; ++oh) {
        for (Eigen::Index ow = 0; ow < out_w_; ++ow) {
          for (Eigen::Index c = 0; c < channels_; ++c) {
            Eigen::Index best = -1;
            double best_v = 0.0;
            for (Eigen::Index dh = 0; dh < 2; ++dh) {
              for (Eigen::Index dw = 0; dw < 2; ++dw) {
                const Eigen::Index r = ((2 * oh + dh) * width_ + (2 * ow + dw)) * channels_ + c;
                const double v = in(r, b);
                if (best < 0 || v > best_v) {
                  best = r;
                  best_v = v;
                }
              }
            }
            const Eigen::Index o = (oh * out_w_ + ow) * channels_ + c;
            out(o, b) = best_v;
            cache.indices[static_cast<std::size_t>(b * out_size + o)] = static_cast<int>(best);
          }
        }
      }
    }
    return out;
  }

  Matrix backward(std::span<const Tensor>, const LayerCache& cache, const Matrix& dout,
                  std::span<Tensor>, bool want_input_grad) const override {
    if (!want_input_grad) return {};
    const Eigen::Index batch = dout.cols();
    const Eigen::Index out_size = dout.rows();
    Matrix din = Matrix::Zero(height_ * width_ * channels_, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      for (Eigen::Index o = 0; o < out_size; ++o) {
        din(cache.indices[static_cast<std::size_t>(b * out_size + o)], b) += dout(o, b);
      }
    }
    return din;
  }

  void append_pattern(const LayerCache& cache, Eigen::Index column,
                      std::vector<int>& pattern) const override {
    const Eigen::Index out_size = out_h_ * out_w_ * channels_;
    const auto first = cache.indices.begin() + column * out_size;
    pattern.insert(pattern.end(), first, first + out_size);
  }

 private:
  Eigen::Index height_ = 0, width_ = 0, channels_ = 1, out_h_ = 0, out_w_ = 0;
};

// ---------------------------------------------------------------- Flatten / Reshape

// Per-sample data is already row-major, so both only relabel the shape.
class RelabelLayer : public Layer {
 public:
  RelabelLayer(const Shape& input_shape, Shape output_shape) {
    input_shape_ = input_shape;
    output_shape_ = std::move(output_shape);
  }

  Matrix forward(std::span<const Tensor>, const Matrix& in, Mode, Rng*,
                 LayerCache& cache) const override {
    cache.mats.clear();
    return in;
  }

  Matrix backward(std::span<const Tensor>, const LayerCache&, const Matrix& dout,
                  std::span<Tensor>, bool want_input_grad) const override {
    if (!want_input_grad) return {};
    return dout;
  }
};

}  // namespace

void Layer::init_params(std::span<Tensor>, Rng&) const {}

void Layer::append_pattern(const LayerCache&, Eigen::Index, std::vector<int>&) const {}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU:
      return "relu";
    case Activation::Softmax:
      return "softmax";
    case Activation::None:
      return "none";
  }
  return "none";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "softmax") return Activation::Softmax;
  if (s == "none" || s == "linear") return Activation::None;
  throw SchemaError("unknown activation '" + s + "'");
}

std::string describe(const LayerSpec& spec) {
  struct {
    std::string operator()(const DenseSpec& s) const {
      return "Dense(" + std::to_string(s.units) + ", " + to_string(s.activation) + ")";
    }
    std::string operator()(const LstmSpec& s) const {
      return "LSTM(" + std::to_string(s.units) + (s.return_sequences ? ", sequences)" : ")");
    }
    std::string operator()(const DropoutSpec& s) const {
      return "Dropout(" + format_double(s.rate) + ")";
    }
    std::string operator()(const Conv2DSpec& s) const {
      return "Conv2D(" + std::to_string(s.filters) + ", 3x3, relu)";
    }
    std::string operator()(const MaxPool2DSpec&) const { return "MaxPool2D(2x2)"; }
    std::string operator()(const FlattenSpec&) const { return "Flatten"; }
    std::string operator()(const ReshapeSpec& s) const {
      return "Reshape(" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + ")";
    }
  } visitor;
  return std::visit(visitor, spec);
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec, const Shape& input_shape) {
  struct {
    const Shape& in;
    std::unique_ptr<Layer> operator()(const DenseSpec& s) const {
      return std::make_unique<DenseLayer>(s, in);
    }
    std::unique_ptr<Layer> operator()(const LstmSpec& s) const {
      return std::make_unique<LstmLayer>(s, in);
    }
    std::unique_ptr<Layer> operator()(const DropoutSpec& s) const {
      return std::make_unique<DropoutLayer>(s, in);
    }
    std::unique_ptr<Layer> operator()(const Conv2DSpec& s) const {
      return std::make_unique<Conv2DLayer>(s, in);
    }
    std::unique_ptr<Layer> operator()(const MaxPool2DSpec& s) const {
      return std::make_unique<MaxPool2DLayer>(s, in);
    }
    std::unique_ptr<Layer> operator()(const FlattenSpec&) const {
      return std::make_unique<RelabelLayer>(in, Shape{shape_size(in)});
    }
    std::unique_ptr<Layer> operator()(const ReshapeSpec& s) const {
      if (s.rows == 0 || s.cols == 0 || s.rows * s.cols != shape_size(in)) {
        throw ArchitectureError(arch_error_prefix(s, in));
      }
      return std::make_unique<RelabelLayer>(in, Shape{s.rows, s.cols});
    }
  } visitor{input_shape};
  return std::visit(visitor, spec);
}

}  // namespace theftbench::nn
