#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>

namespace sbmem {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Ising configurations are stored in the scalar type (entries +-1) so they
// combine directly with coupling expressions (dot products, cwise products).
template <typename Scalar>
using SpinVector = Vector<Scalar>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Spins = SpinVector<double>;

using Index = Eigen::Index;

}  // namespace sbmem
