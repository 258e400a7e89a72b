#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "skm1/cadlag.hpp"
#include "skm1/linalg.hpp"

namespace skm1 {

/// Law of a single jump J in R^d. Built-in laws provide analytic
/// characteristic functions and truncated moments; the Monte Carlo fallbacks
/// use a fixed internal seed so models stay deterministic.
class JumpDistribution {
 public:
  virtual ~JumpDistribution() = default;
  virtual int dim() const = 0;
  virtual Vec sample(std::mt19937_64& rng) const = 0;
  /// E exp(i<u, J>)
  virtual std::complex<double> char_fn(const Vec& u) const = 0;
  /// E[J 1_{||J|| <= r}]
  virtual Vec truncated_mean(double r) const;
  /// E[J J^T 1_{||J|| <= r}]
  virtual Mat truncated_second_moment(double r) const;
};

std::shared_ptr<const JumpDistribution> point_mass_jump(const Vec& r0);
std::shared_ptr<const JumpDistribution> gaussian_jump(const Vec& mean, const Mat& cov);
std::shared_ptr<const JumpDistribution> uniform_ball_jump(int dim, double radius);

struct FiniteActivitySpec {
  double intensity = 0.0;  // total jump rate lambda
  std::shared_ptr<const JumpDistribution> jump;
};

struct IsotropicStableSpec {
  double alpha = 1.5;  // in (0, 2)
  double scale = 1.0;  // symbol is -scale * |u|^alpha
};

/// Levy model given by characteristic triplet (drift a, Gaussian covariance Q,
/// jump part). Jumps are either compound Poisson (finite activity) or
/// isotropic alpha-stable.
class LevyModel {
 public:
  LevyModel(int dim, Vec drift, Mat gaussian_cov);
  static LevyModel brownian(int dim);                      // a=0, Q=I
  static LevyModel zero(int dim);                          // deterministic 0
  LevyModel with_finite_activity(double intensity,
                                 std::shared_ptr<const JumpDistribution> jump) const;
  LevyModel with_isotropic_stable(double alpha, double scale) const;

  int dim() const { return dim_; }
  const Vec& drift() const { return drift_; }
  const Mat& gaussian_cov() const { return gaussian_cov_; }
  bool has_gaussian() const { return gaussian_cov_.norm() > 0; }
  bool has_jumps() const { return !std::holds_alternative<std::monostate>(jumps_); }
  const FiniteActivitySpec* finite_activity() const;
  const IsotropicStableSpec* isotropic_stable() const;

  /// Cholesky-type factor of Q (cached).
  const Mat& gaussian_factor() const;

 private:
  int dim_;
  Vec drift_;
  Mat gaussian_cov_;
  std::variant<std::monostate, FiniteActivitySpec, IsotropicStableSpec> jumps_;
  mutable std::optional<Mat> gaussian_factor_;
};

/// Levy symbol Psi(u) = i<a,u> - <Qu,u>/2 + integral term; Psi(0) = 0 and the
/// characteristic function of L(t) is exp(t Psi(u)).
std::complex<double> levy_symbol(const LevyModel& model, const Vec& u);

struct JumpEvent {
  double time;
  Vec size;
};

/// Decomposition L = W + X_alpha + Y_alpha at a threshold alpha_cut; parts
/// sum to the total increments exactly.
struct LevyItoParts {
  double alpha_cut = 0.0;
  std::vector<Vec> w;  // Gaussian increments
  std::vector<Vec> x;  // compensated small-jump increments
  std::vector<Vec> y;  // big jumps + drift b_alpha
  Vec b_alpha;
  std::vector<JumpEvent> big_jumps;
};

struct LevyPathSample {
  std::vector<double> grid;     // t_0 < ... < t_n
  std::vector<Vec> increments;  // n entries, L(t_{i+1}) - L(t_i)
  std::vector<Vec> gaussian_increments;
  std::vector<JumpEvent> jumps;  // finite activity only, exact times
  std::optional<LevyItoParts> decomposition;

  int dim() const { return increments.empty() ? 0 : int(increments.front().size()); }
  /// Running-sum piecewise-constant cadlag path with L(t_0) = 0.
  CadlagPath to_path() const;
  /// Path of a single decomposition part ("w", "x" or "y").
  CadlagPath part_path(char part) const;
};

/// Independent stationary increments per grid cell; deterministic given seed.
LevyPathSample sample_path(const LevyModel& model, const std::vector<double>& grid,
                           std::uint64_t seed);

/// Routes jumps with norm > alpha_cut to Y (exact times), compensates the
/// rest into X, and separates the Gaussian part. Requires an explicit jump
/// record (finite activity).
LevyPathSample decompose(LevyPathSample sample, const LevyModel& model,
                         double alpha_cut);

struct SmallJumpFactorization {
  double alpha_cut = 0.0;
  Mat r_alpha;                                    // covariance of X_alpha(1)
  std::vector<std::pair<double, Vec>> factors;    // (sigma_k^2, h_k), descending
  bool clipped = false;                           // negative eigenvalues clipped
};

/// R_alpha = integral of r r^T over ||r|| <= alpha_cut against the jump
/// measure, eigendecomposed.
SmallJumpFactorization small_jump_factorization(const LevyModel& model,
                                                double alpha_cut);

std::vector<double> uniform_grid(double t0, double t1, int n_steps);

/// Standard symmetric alpha-stable variate (characteristic fn e^{-|u|^alpha})
/// by the Chambers-Mallows-Stuck construction.
double sample_standard_symmetric_stable(double alpha, std::mt19937_64& rng);
/// Standard positive rho-stable subordinator variate (Laplace e^{-s^rho}).
double sample_standard_positive_stable(double rho, std::mt19937_64& rng);

}  // namespace skm1
