#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace theftbench::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Activations travel as (features x batch) column-major matrices: column b is
// sample b flattened row-major over its per-sample shape.
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMajorMatrix>;
using RowMap = Eigen::Map<RowMajorMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

// Eigen-aligned storage.
using TensorData = std::vector<double, Eigen::aligned_allocator<double>>;

// Dense row-major parameter storage.
struct Tensor {
  Shape shape;
  TensorData data;

  Tensor() = default;
  explicit Tensor(Shape s);
  Tensor(Shape s, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  bool all_finite() const;

  // View as a rows x cols row-major matrix (rows = shape[0]).
  ConstRowMap as_matrix() const;
  RowMap as_matrix();
  ConstVectorMap as_vector() const;
  VectorMap as_vector();

  bool operator==(const Tensor&) const = default;
};

// Parameters per layer, in layer order.
using Params = std::vector<std::vector<Tensor>>;

Params zeros_like(const Params& params);

}  // namespace theftbench::nn
