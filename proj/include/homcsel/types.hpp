#pragma once

#include <Eigen/Dense>

namespace homcsel {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Accumulation type: float inputs are accumulated in double, everything else
// keeps its own precision.
template <typename Scalar>
struct accumulation {
  using type = Scalar;
};
template <>
struct accumulation<float> {
  using type = double;
};
template <typename Scalar>
using acc_t = typename accumulation<Scalar>::type;

}  // namespace homcsel
