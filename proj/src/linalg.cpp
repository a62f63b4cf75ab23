#include "volex/linalg.hpp"

#include "volex/error.hpp"

namespace volex {

Tensor matrix_to_tensor(const Matrix& m) {
  std::vector<float> data(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = static_cast<float>(m.data()[i]);
  return Tensor({static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())},
                std::move(data));
}

Matrix tensor_to_matrix(const Tensor& t) {
  if (t.rank() != 2) throw Error(ErrorCode::kShapeMismatch, "expected a rank-2 tensor");
  Matrix m(t.dims[0], t.dims[1]);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = t.data[i];
  return m;
}

Tensor vector_to_tensor(const Vector& v) {
  std::vector<float> data(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) data[i] = static_cast<float>(v[i]);
  return Tensor({static_cast<std::uint32_t>(v.size())}, std::move(data));
}

Vector tensor_to_vector(const Tensor& t) {
  if (t.rank() != 1) throw Error(ErrorCode::kShapeMismatch, "expected a rank-1 tensor");
  Vector v(t.dims[0]);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = t.data[i];
  return v;
}

}  // namespace volex
