#include "theftbench/nn/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "theftbench/error.hpp"

namespace theftbench::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

Tensor::Tensor(Shape s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}

Tensor::Tensor(Shape s, std::vector<double> values)
    : shape(std::move(s)), data(values.begin(), values.end()) {
  if (data.size() != shape_size(shape)) {
    throw SchemaError("tensor of shape " + shape_to_string(shape) + " cannot hold " +
                      std::to_string(data.size()) + " values");
  }
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {
std::pair<Eigen::Index, Eigen::Index> matrix_dims(const Shape& shape) {
  if (shape.empty()) return {1, 1};
  const auto rows = static_cast<Eigen::Index>(shape[0]);
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(shape_size(shape)) / rows;
  return {rows, cols};
}
}  // namespace

ConstRowMap Tensor::as_matrix() const {
  const auto [r, c] = matrix_dims(shape);
  return ConstRowMap(data.data(), r, c);
}

RowMap Tensor::as_matrix() {
  const auto [r, c] = matrix_dims(shape);
  return RowMap(data.data(), r, c);
}

ConstVectorMap Tensor::as_vector() const {
  return ConstVectorMap(data.data(), static_cast<Eigen::Index>(data.size()));
}

VectorMap Tensor::as_vector() { return VectorMap(data.data(), static_cast<Eigen::Index>(data.size())); }

Params zeros_like(const Params& params) {
  Params out;
  out.reserve(params.size());
  for (const auto& layer : params) {
    std::vector<Tensor> ts;
    ts.reserve(layer.size());
    for (const auto& t : layer) ts.emplace_back(t.shape);
    out.push_back(std::move(ts));
  }
  return out;
}

}  // namespace theftbench::nn
