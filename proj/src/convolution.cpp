#include "skm1/convolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace skm1 {

Kernel Kernel::matrix(std::function<Mat(double)> f, int dim_v, int dim_u, double t0,
                      double t1) {
  if (dim_v <= 0 || dim_u <= 0 || !(t1 > t0))
    throw std::invalid_argument("Kernel::matrix: bad dimensions or domain");
  Kernel k;
  k.f_ = std::move(f);
  k.dim_v_ = dim_v;
  k.dim_u_ = dim_u;
  k.t0_ = t0;
  k.t1_ = t1;
  return k;
}

Kernel Kernel::diagonal(std::vector<std::function<double(double)>> phis, Mat g,
                        double t0, double t1) {
  if (phis.empty() || g.cols() != long(phis.size()) || !(t1 > t0))
    throw std::invalid_argument("Kernel::diagonal: phi/G shape mismatch");
  Kernel k;
  k.phis_ = std::move(phis);
  k.g_ = std::move(g);
  k.dim_v_ = int(k.g_.cols());
  k.dim_u_ = int(k.g_.rows());
  k.t0_ = t0;
  k.t1_ = t1;
  return k;
}

Kernel Kernel::identity(int dim, double t0, double t1) {
  return matrix([dim](double) { return Mat::Identity(dim, dim); }, dim, dim, t0, t1);
}

Kernel Kernel::zero(int dim_v, int dim_u, double t0, double t1) {
  return matrix([dim_v, dim_u](double) { return Mat::Zero(dim_v, dim_u); }, dim_v,
                dim_u, t0, t1);
}

Vec Kernel::apply(double s, const Vec& u) const {
  if (u.size() != dim_u_) throw std::invalid_argument("Kernel::apply: dim mismatch");
  if (!is_diagonal()) return f_(s) * u;
  Vec out(dim_v_);
  for (int k = 0; k < dim_v_; ++k) out[k] = phis_[k](s) * g_.col(k).dot(u);
  return out;
}

Vec Kernel::apply_adjoint(double s, const Vec& v) const {
  if (v.size() != dim_v_)
    throw std::invalid_argument("Kernel::apply_adjoint: dim mismatch");
  if (!is_diagonal()) return f_(s).transpose() * v;
  Vec out = Vec::Zero(dim_u_);
  for (int k = 0; k < dim_v_; ++k) out += (phis_[k](s) * v[k]) * g_.col(k);
  return out;
}

Mat Kernel::matrix_at(double s) const {
  if (!is_diagonal()) return f_(s);
  Mat out(dim_v_, dim_u_);
  for (int k = 0; k < dim_v_; ++k) out.row(k) = phis_[k](s) * g_.col(k).transpose();
  return out;
}

double Kernel::phi(int k, double s) const {
  if (!is_diagonal()) throw std::logic_error("Kernel::phi: kernel is not diagonal");
  return phis_[std::size_t(k)](s);
}

CadlagPath convolve(const Kernel& kernel, const LevyPathSample& sample) {
  const std::vector<double>& grid = sample.grid;
  if (grid.size() < 2) throw std::invalid_argument("convolve: empty sample");
  if (sample.dim() != kernel.dim_u())
    throw std::invalid_argument("convolve: kernel/noise dimension mismatch");
  const double span = grid.back() - grid.front();
  if (kernel.t0() > 1e-12 || kernel.t1() < span - 1e-12)
    throw std::invalid_argument("convolve: kernel domain does not cover the grid");

  const std::size_t n = sample.increments.size();
  bool uniform = true;
  const double dt0 = grid[1] - grid[0];
  for (std::size_t i = 1; i < n && uniform; ++i)
    uniform = std::abs((grid[i + 1] - grid[i]) - dt0) <= 1e-9 * dt0;

  std::vector<Mat> lag;  // lag[m] = F(m * dt) on uniform grids
  if (uniform) {
    lag.reserve(n + 1);
    for (std::size_t m = 0; m <= n; ++m) lag.push_back(kernel.matrix_at(m * dt0));
  }
  const Mat f0 = uniform ? lag[0] : kernel.matrix_at(0.0);

  std::vector<Breakpoint> bps;
  bps.reserve(grid.size());
  Vec zero = Vec::Zero(kernel.dim_v());
  bps.push_back({grid[0], zero, zero});
  for (std::size_t i = 1; i <= n; ++i) {
    Vec v = Vec::Zero(kernel.dim_v());
    for (std::size_t j = 0; j < i; ++j) {
      if (uniform)
        v += lag[i - j] * sample.increments[j];
      else
        v += kernel.matrix_at(grid[i] - grid[j]) * sample.increments[j];
    }
    Vec jump = f0 * sample.increments[i - 1];
    bps.push_back({grid[i], v - jump, v});
  }
  return CadlagPath(kernel.dim_v(), std::move(bps));
}

std::vector<double> convolve_projection(const Kernel& kernel,
                                        const LevyPathSample& sample, const Vec& v) {
  const std::vector<double>& grid = sample.grid;
  if (v.size() != kernel.dim_v())
    throw std::invalid_argument("convolve_projection: functional dim mismatch");
  if (sample.dim() != kernel.dim_u())
    throw std::invalid_argument("convolve_projection: kernel/noise dim mismatch");
  const std::size_t n = sample.increments.size();
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j)
      acc += kernel.apply_adjoint(grid[i] - grid[j], v).dot(sample.increments[j]);
    out[i] = acc;
  }
  return out;
}

namespace {

TV2Result tv2_impl(const std::vector<Vec>& x) {
  const int n = int(x.size());
  TV2Result out;
  if (n == 0) throw std::invalid_argument("tv2_norm: empty sample");
  std::vector<double> dp(n, 0.0);
  std::vector<int> parent(n, -1);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double cand = dp[j] + (x[i] - x[j]).squaredNorm();
      if (cand > dp[i]) {
        dp[i] = cand;
        parent[i] = j;
      }
    }
  }
  out.value = std::sqrt(dp[n - 1]);
  int i = n - 1;
  while (i >= 0) {
    out.witness_partition.push_back(i);
    i = parent[i];
  }
  std::reverse(out.witness_partition.begin(), out.witness_partition.end());
  return out;
}

}  // namespace

TV2Result tv2_norm(const std::vector<Vec>& samples) { return tv2_impl(samples); }

TV2Result tv2_norm(const std::vector<double>& samples) {
  std::vector<Vec> lifted;
  lifted.reserve(samples.size());
  for (double s : samples) {
    Vec x(1);
    x[0] = s;
    lifted.push_back(x);
  }
  return tv2_impl(lifted);
}

double squared_increment_sum(const std::vector<double>& samples) {
  double acc = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    double d = samples[i] - samples[i - 1];
    acc += d * d;
  }
  return acc;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  struct Simpson {
    const std::function<double(double)>& f;
    double run(double a, double fa, double b, double fb, double fm, double whole,
               double tol, int depth) const {
      double m = 0.5 * (a + b);
      double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      double flm = f(lm), frm = f(rm);
      double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return run(a, fa, m, fm, flm, left, tol / 2.0, depth - 1) +
             run(m, fm, b, fb, frm, right, tol / 2.0, depth - 1);
    }
  };
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Simpson{f}.run(a, fa, b, fb, fm, whole, tol, 50);
}

double kappa_constant() {
  // 32 sqrt(2) int_0^1 sqrt(ln(1/s)) ds; substitution s = e^{-x} turns the
  // endpoint singularity into a Gaussian-type tail integral.
  static const double value = [] {
    double integral =
        integrate([](double x) { return std::sqrt(x) * std::exp(-x); }, 0.0, 60.0,
                  1e-12);
    return 32.0 * std::sqrt(2.0) * integral;
  }();
  return value;
}

namespace {

std::vector<double> kernel_factor_samples(const Kernel& kernel, const Vec& h,
                                          double horizon, int n_grid) {
  Vec one(1);
  one[0] = 1.0;
  std::vector<double> samples(n_grid + 1);
  for (int i = 0; i <= n_grid; ++i) {
    double s = horizon * double(i) / n_grid;
    samples[i] = kernel.apply_adjoint(s, one).dot(h);
  }
  return samples;
}

}  // namespace

double maximal_bound_general(const Kernel& scalar_kernel,
                             const SmallJumpFactorization& fact, double horizon,
                             int n_grid) {
  if (scalar_kernel.dim_v() != 1)
    throw std::invalid_argument("maximal_bound_general: kernel target must be scalar");
  double sum = 0.0;
  for (const auto& [sigma2, h] : fact.factors) {
    double tv2 = tv2_norm(kernel_factor_samples(scalar_kernel, h, horizon, n_grid)).value;
    sum += std::sqrt(sigma2) * tv2;
  }
  return kappa_constant() * std::sqrt(2.0 * horizon) * sum;
}

double maximal_bound_diagonal(const Kernel& diagonal_kernel, const LevyModel& model,
                              double alpha_cut, const Vec& v, double horizon,
                              int n_grid) {
  if (!diagonal_kernel.is_diagonal())
    throw std::invalid_argument("maximal_bound_diagonal: diagonal kernel required");
  if (v.size() != diagonal_kernel.dim_v())
    throw std::invalid_argument("maximal_bound_diagonal: functional dim mismatch");
  SmallJumpFactorization fact = small_jump_factorization(model, alpha_cut);
  double sum = 0.0;
  for (int k = 0; k < diagonal_kernel.dim_v(); ++k) {
    if (v[k] == 0.0) continue;
    std::vector<double> samples(n_grid + 1);
    for (int i = 0; i <= n_grid; ++i)
      samples[i] = diagonal_kernel.phi(k, horizon * double(i) / n_grid);
    Vec ge_k = diagonal_kernel.g().col(k);
    double second = ge_k.dot(fact.r_alpha * ge_k);
    sum += std::abs(v[k]) * tv2_norm(samples).value * std::sqrt(std::max(0.0, second));
  }
  return kappa_constant() * std::sqrt(2.0 * horizon) * sum;
}

std::complex<double> char_function_of_integral(const Kernel& kernel,
                                               const LevyModel& model, const Vec& v,
                                               double beta, double horizon,
                                               int n_grid) {
  if (v.size() != kernel.dim_v())
    throw std::invalid_argument("char_function_of_integral: functional dim mismatch");
  if (model.dim() != kernel.dim_u())
    throw std::invalid_argument("char_function_of_integral: model dim mismatch");
  Vec bv = beta * v;
  std::complex<double> acc = 0.0;
  double dt = horizon / n_grid;
  for (int i = 0; i <= n_grid; ++i) {
    double s = horizon * double(i) / n_grid;
    std::complex<double> psi = levy_symbol(model, kernel.apply_adjoint(s, bv));
    acc += (i == 0 || i == n_grid) ? 0.5 * psi : psi;
  }
  return std::exp(acc * dt);
}

}  // namespace skm1
