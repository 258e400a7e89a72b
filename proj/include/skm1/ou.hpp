#pragma once

#include <cstdint>

#include "skm1/convolution.hpp"

namespace skm1 {

/// Diagonalisable generator: S(t) e_k = exp(-lambda_k t) e_k.
struct DiagonalOuSpec {
  Vec lambdas;      // all > 0
  double gamma = 1.0;
  Mat g;            // maps U -> V (noise injection)
  double horizon = 1.0;
};

/// Full-matrix generator for the introduction's 2x2 examples.
struct MatrixOuSpec {
  Mat a;
  double gamma = 1.0;
  double horizon = 1.0;
};

/// Kernel of AX_gamma: phi_gamma^k(t) = (e^{-lambda_k gamma t} - 1) on [0, T],
/// zero on [-1, 0). Continuous, with phi_gamma^k(0) = 0.
Kernel ou_kernel(const DiagonalOuSpec& spec);
/// Its gamma -> infinity limit: phi^k = -1_{[0,T]}, cadlag with a jump at 0.
Kernel ou_limit_kernel(const DiagonalOuSpec& spec);

/// phi_gamma^k (resp. its limit) as a scalar cadlag path on [-1, T].
CadlagPath ou_kernel_path(const DiagonalOuSpec& spec, int k, double sample_dt);
CadlagPath ou_limit_kernel_path(const DiagonalOuSpec& spec);

/// Y_gamma(t) = int_0^t S_gamma(t-s) G dL(s) by the exact exponential
/// left-point recursion per coordinate.
CadlagPath simulate_ou(const DiagonalOuSpec& spec, const LevyPathSample& sample);

/// X_gamma(t) = gamma int_0^t Y_gamma(s) ds (trapezoid), continuous.
CadlagPath integrated_ou(const DiagonalOuSpec& spec, const CadlagPath& y);

/// AX_gamma via the exponential recursion (matches convolve(ou_kernel, .)
/// on common grids).
CadlagPath ax_gamma_diagonal(const DiagonalOuSpec& spec, const LevyPathSample& sample);

/// Kernel s -> Id - exp(-gamma A s), zero matrix at s = 0.
Kernel intro_matrix_kernel(const MatrixOuSpec& spec);

/// AX_gamma for a matrix generator via the exponential recursion.
CadlagPath ax_gamma_matrix(const MatrixOuSpec& spec, const LevyPathSample& sample);

/// The introduction's matrices A_1 .. A_4.
Mat intro_matrix(int matrix_id);

/// Sample path of A_j X_gamma driven by a 2-d isotropic alpha-stable process,
/// simulated via intro_matrix_kernel + convolve.
CadlagPath figure1_path(int matrix_id, double gamma, double alpha, std::uint64_t seed,
                        int n_steps = 4096);

}  // namespace skm1
