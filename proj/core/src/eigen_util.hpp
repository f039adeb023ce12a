#pragma once

#include <Eigen/Core>

#include "lipread/tensor.hpp"

namespace lipread::nn {

using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<RowVector>;
using ConstVectorMap = Eigen::Map<const RowVector>;

inline MatrixMap as_matrix(Tensor& t, Eigen::Index rows, Eigen::Index cols) { return {t.data(), rows, cols}; }
inline ConstMatrixMap as_matrix(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return {t.data(), rows, cols};
}

}  // namespace lipread::nn
