#include "skm1/ou.hpp"

#include <cmath>
#include <stdexcept>

namespace skm1 {

namespace {

void check_diagonal_spec(const DiagonalOuSpec& spec) {
  if (spec.lambdas.size() == 0 || spec.g.rows() != spec.lambdas.size())
    throw std::invalid_argument("DiagonalOuSpec: lambda/G shape mismatch");
  for (long k = 0; k < spec.lambdas.size(); ++k)
    if (!(spec.lambdas[k] > 0))
      throw std::invalid_argument("DiagonalOuSpec: lambdas must be positive");
  if (!(spec.gamma > 0) || !(spec.horizon > 0))
    throw std::invalid_argument("DiagonalOuSpec: gamma and horizon must be positive");
}

}  // namespace

Kernel ou_kernel(const DiagonalOuSpec& spec) {
  check_diagonal_spec(spec);
  std::vector<std::function<double(double)>> phis;
  for (long k = 0; k < spec.lambdas.size(); ++k) {
    double rate = spec.gamma * spec.lambdas[k];
    phis.push_back([rate](double s) {
      return s < 0 ? 0.0 : std::expm1(-rate * s);
    });
  }
  return Kernel::diagonal(std::move(phis), spec.g.transpose(), -1.0, spec.horizon);
}

Kernel ou_limit_kernel(const DiagonalOuSpec& spec) {
  check_diagonal_spec(spec);
  std::vector<std::function<double(double)>> phis(
      std::size_t(spec.lambdas.size()),
      [](double s) { return s < 0 ? 0.0 : -1.0; });
  return Kernel::diagonal(std::move(phis), spec.g.transpose(), -1.0, spec.horizon);
}

CadlagPath ou_kernel_path(const DiagonalOuSpec& spec, int k, double sample_dt) {
  check_diagonal_spec(spec);
  if (k < 0 || k >= spec.lambdas.size())
    throw std::out_of_range("ou_kernel_path: coordinate");
  if (!(sample_dt > 0)) throw std::invalid_argument("ou_kernel_path: sample_dt");
  double rate = spec.gamma * spec.lambdas[k];
  std::vector<double> times{-1.0, 0.0};
  std::vector<double> values{0.0, 0.0};
  int n = int(std::ceil(spec.horizon / sample_dt));
  for (int i = 1; i <= n; ++i) {
    double t = std::min(spec.horizon, i * sample_dt);
    times.push_back(t);
    values.push_back(std::expm1(-rate * t));
  }
  return CadlagPath::piecewise_linear(times, values);
}

CadlagPath ou_limit_kernel_path(const DiagonalOuSpec& spec) {
  check_diagonal_spec(spec);
  Vec zero(1), minus(1);
  zero[0] = 0.0;
  minus[0] = -1.0;
  std::vector<Breakpoint> bps{{-1.0, zero, zero},
                              {0.0, zero, minus},
                              {spec.horizon, minus, minus}};
  return CadlagPath(1, std::move(bps));
}

CadlagPath simulate_ou(const DiagonalOuSpec& spec, const LevyPathSample& sample) {
  check_diagonal_spec(spec);
  if (sample.dim() != spec.g.cols())
    throw std::invalid_argument("simulate_ou: noise dimension mismatch");
  const int dv = int(spec.lambdas.size());
  const std::size_t n = sample.increments.size();
  std::vector<Vec> values;
  values.reserve(n + 1);
  Vec y = Vec::Zero(dv);
  values.push_back(y);
  for (std::size_t i = 0; i < n; ++i) {
    double dt = sample.grid[i + 1] - sample.grid[i];
    Vec inj = spec.g * sample.increments[i];
    for (int k = 0; k < dv; ++k)
      y[k] = std::exp(-spec.gamma * spec.lambdas[k] * dt) * (y[k] + inj[k]);
    values.push_back(y);
  }
  return CadlagPath::piecewise_constant(sample.grid, values);
}

CadlagPath integrated_ou(const DiagonalOuSpec& spec, const CadlagPath& y) {
  check_diagonal_spec(spec);
  const auto& bps = y.breakpoints();
  std::vector<double> times;
  std::vector<Vec> values;
  Vec acc = Vec::Zero(y.dim());
  times.push_back(bps.front().t);
  values.push_back(acc);
  for (std::size_t i = 1; i < bps.size(); ++i) {
    double dt = bps[i].t - bps[i - 1].t;
    acc += (spec.gamma * 0.5 * dt) * (bps[i - 1].v_plus + bps[i].v_minus);
    times.push_back(bps[i].t);
    values.push_back(acc);
  }
  return CadlagPath::piecewise_linear(times, values);
}

CadlagPath ax_gamma_diagonal(const DiagonalOuSpec& spec, const LevyPathSample& sample) {
  check_diagonal_spec(spec);
  if (sample.dim() != spec.g.cols())
    throw std::invalid_argument("ax_gamma_diagonal: noise dimension mismatch");
  const int dv = int(spec.lambdas.size());
  const std::size_t n = sample.increments.size();
  std::vector<Vec> values;
  values.reserve(n + 1);
  Vec y = Vec::Zero(dv);   // semigroup-weighted sum
  Vec gl = Vec::Zero(dv);  // running G L(t_i)
  values.push_back(Vec::Zero(dv));
  for (std::size_t i = 0; i < n; ++i) {
    double dt = sample.grid[i + 1] - sample.grid[i];
    Vec inj = spec.g * sample.increments[i];
    gl += inj;
    for (int k = 0; k < dv; ++k)
      y[k] = std::exp(-spec.gamma * spec.lambdas[k] * dt) * (y[k] + inj[k]);
    values.push_back(y - gl);
  }
  return CadlagPath::piecewise_linear(sample.grid, values);
}

Kernel intro_matrix_kernel(const MatrixOuSpec& spec) {
  if (spec.a.rows() != spec.a.cols() || spec.a.rows() == 0)
    throw std::invalid_argument("intro_matrix_kernel: square matrix required");
  if (!(spec.gamma > 0) || !(spec.horizon > 0))
    throw std::invalid_argument("intro_matrix_kernel: gamma and horizon");
  const int d = int(spec.a.rows());
  Mat ga = spec.gamma * spec.a;
  return Kernel::matrix(
      [ga, d](double s) -> Mat {
        if (s < 0) return Mat::Zero(d, d);
        return Mat::Identity(d, d) - expm(Mat(-s * ga));
      },
      d, d, -1.0, spec.horizon);
}

CadlagPath ax_gamma_matrix(const MatrixOuSpec& spec, const LevyPathSample& sample) {
  const int d = int(spec.a.rows());
  if (sample.dim() != d)
    throw std::invalid_argument("ax_gamma_matrix: noise dimension mismatch");
  const std::size_t n = sample.increments.size();
  std::vector<Vec> values;
  values.reserve(n + 1);
  Vec p = Vec::Zero(d);  // sum of exp(-gamma A (t_i - t_j)) dL_j
  Vec l = Vec::Zero(d);
  values.push_back(Vec::Zero(d));
  double last_dt = -1.0;
  Mat step;
  for (std::size_t i = 0; i < n; ++i) {
    double dt = sample.grid[i + 1] - sample.grid[i];
    if (dt != last_dt) {
      step = expm(Mat(-dt * spec.gamma * spec.a));
      last_dt = dt;
    }
    p = step * (p + sample.increments[i]);
    l += sample.increments[i];
    values.push_back(l - p);
  }
  return CadlagPath::piecewise_linear(sample.grid, values);
}

Mat intro_matrix(int matrix_id) {
  Mat a(2, 2);
  switch (matrix_id) {
    case 1: a << 1, 0, 0, 1; break;
    case 2: a << 1, 0, 0, 3; break;
    case 3: a << 1, 1, 0, 1; break;
    case 4: a << 1, 1, -1, 1; break;
    default: throw std::invalid_argument("intro_matrix: id must be 1..4");
  }
  return a;
}

CadlagPath figure1_path(int matrix_id, double gamma, double alpha, std::uint64_t seed,
                        int n_steps) {
  MatrixOuSpec spec{intro_matrix(matrix_id), gamma, 1.0};
  LevyModel driver = LevyModel::zero(2).with_isotropic_stable(alpha, 1.0);
  LevyPathSample sample = sample_path(driver, uniform_grid(0.0, 1.0, n_steps), seed);
  return convolve(intro_matrix_kernel(spec), sample);
}

}  // namespace skm1
