#pragma once

#include <Eigen/Dense>

namespace skm1 {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant (Higham 2005 parameterisation).
Mat expm(const Mat& a);

/// Lower-triangular factor l with l*l^T = a for a symmetric PSD matrix.
/// Uses an eigendecomposition fallback when the matrix is singular, clipping
/// eigenvalues in [-tol, 0) to zero. Throws std::invalid_argument if an
/// eigenvalue is below -tol.
Mat psd_sqrt_factor(const Mat& a, double tol = 1e-10);

}  // namespace skm1
