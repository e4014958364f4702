#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace magshape {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;
using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

}  // namespace magshape
