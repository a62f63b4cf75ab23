#pragma once

#include <Eigen/Core>

#include "volex/tensor.hpp"

namespace volex {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Rank-2 tensor <-> matrix. Values pass through float32 on the way out.
Tensor matrix_to_tensor(const Matrix& m);
Matrix tensor_to_matrix(const Tensor& t);

Tensor vector_to_tensor(const Vector& v);
Vector tensor_to_vector(const Tensor& t);

}  // namespace volex
