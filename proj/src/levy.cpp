#include "skm1/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skm1/rng.hpp"

namespace skm1 {

namespace {

constexpr std::uint64_t kMomentSeed = 0x6d6f6d656e747331ULL;
constexpr int kMomentSamples = 200000;

}  // namespace

Vec JumpDistribution::truncated_mean(double r) const {
  std::mt19937_64 rng = member_rng(kMomentSeed);
  Vec acc = Vec::Zero(dim());
  for (int i = 0; i < kMomentSamples; ++i) {
    Vec j = sample(rng);
    if (j.norm() <= r) acc += j;
  }
  return acc / double(kMomentSamples);
}

Mat JumpDistribution::truncated_second_moment(double r) const {
  std::mt19937_64 rng = member_rng(kMomentSeed);
  Mat acc = Mat::Zero(dim(), dim());
  for (int i = 0; i < kMomentSamples; ++i) {
    Vec j = sample(rng);
    if (j.norm() <= r) acc += j * j.transpose();
  }
  return acc / double(kMomentSamples);
}

namespace {

class PointMassJump final : public JumpDistribution {
 public:
  explicit PointMassJump(Vec r0) : r0_(std::move(r0)) {}
  int dim() const override { return int(r0_.size()); }
  Vec sample(std::mt19937_64&) const override { return r0_; }
  std::complex<double> char_fn(const Vec& u) const override {
    return std::exp(std::complex<double>(0.0, u.dot(r0_)));
  }
  Vec truncated_mean(double r) const override {
    return r0_.norm() <= r ? r0_ : Vec(Vec::Zero(r0_.size()));
  }
  Mat truncated_second_moment(double r) const override {
    return r0_.norm() <= r ? Mat(r0_ * r0_.transpose())
                           : Mat(Mat::Zero(r0_.size(), r0_.size()));
  }

 private:
  Vec r0_;
};

class GaussianJump final : public JumpDistribution {
 public:
  GaussianJump(Vec mean, Mat cov)
      : mean_(std::move(mean)), cov_(std::move(cov)), factor_(psd_sqrt_factor(cov_)) {}
  int dim() const override { return int(mean_.size()); }
  Vec sample(std::mt19937_64& rng) const override {
    std::normal_distribution<double> normal;
    Vec z(dim());
    for (int i = 0; i < dim(); ++i) z[i] = normal(rng);
    return mean_ + factor_ * z;
  }
  std::complex<double> char_fn(const Vec& u) const override {
    return std::exp(std::complex<double>(-0.5 * u.dot(cov_ * u), u.dot(mean_)));
  }
  Vec truncated_mean(double r) const override {
    if (mean_.norm() == 0) return Vec::Zero(dim());  // symmetric law
    return JumpDistribution::truncated_mean(r);
  }

 private:
  Vec mean_;
  Mat cov_;
  Mat factor_;
};

class UniformBallJump final : public JumpDistribution {
 public:
  UniformBallJump(int dim, double radius) : dim_(dim), radius_(radius) {
    if (dim <= 0 || radius <= 0)
      throw std::invalid_argument("uniform_ball_jump: bad parameters");
  }
  int dim() const override { return dim_; }
  Vec sample(std::mt19937_64& rng) const override {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec z(dim_);
    do {
      for (int i = 0; i < dim_; ++i) z[i] = normal(rng);
    } while (z.norm() == 0);
    double rho = radius_ * std::pow(unif(rng), 1.0 / dim_);
    return (rho / z.norm()) * z;
  }
  std::complex<double> char_fn(const Vec& u) const override {
    double x = u.norm() * radius_;
    if (x < 1e-8) return 1.0 - x * x / (2.0 * (dim_ + 2));
    double nu = dim_ / 2.0;
    double val = std::pow(2.0 / x, nu) * std::tgamma(nu + 1.0) * std::cyl_bessel_j(nu, x);
    return {val, 0.0};
  }
  Vec truncated_mean(double) const override { return Vec::Zero(dim_); }
  Mat truncated_second_moment(double r) const override {
    double a = std::min(r, radius_);
    double second = dim_ / double(dim_ + 2) * std::pow(a, dim_ + 2) /
                    std::pow(radius_, dim_);
    return (second / dim_) * Mat::Identity(dim_, dim_);
  }

 private:
  int dim_;
  double radius_;
};

}  // namespace

std::shared_ptr<const JumpDistribution> point_mass_jump(const Vec& r0) {
  return std::make_shared<PointMassJump>(r0);
}
std::shared_ptr<const JumpDistribution> gaussian_jump(const Vec& mean, const Mat& cov) {
  return std::make_shared<GaussianJump>(mean, cov);
}
std::shared_ptr<const JumpDistribution> uniform_ball_jump(int dim, double radius) {
  return std::make_shared<UniformBallJump>(dim, radius);
}

LevyModel::LevyModel(int dim, Vec drift, Mat gaussian_cov)
    : dim_(dim), drift_(std::move(drift)), gaussian_cov_(std::move(gaussian_cov)) {
  if (dim_ <= 0) throw std::invalid_argument("LevyModel: dim must be positive");
  if (drift_.size() != dim_ || gaussian_cov_.rows() != dim_ ||
      gaussian_cov_.cols() != dim_)
    throw std::invalid_argument("LevyModel: dimension mismatch");
  if ((gaussian_cov_ - gaussian_cov_.transpose()).norm() > 1e-12 * (1 + gaussian_cov_.norm()))
    throw std::invalid_argument("LevyModel: covariance must be symmetric");
}

LevyModel LevyModel::brownian(int dim) {
  return LevyModel(dim, Vec::Zero(dim), Mat::Identity(dim, dim));
}

LevyModel LevyModel::zero(int dim) {
  return LevyModel(dim, Vec::Zero(dim), Mat::Zero(dim, dim));
}

LevyModel LevyModel::with_finite_activity(
    double intensity, std::shared_ptr<const JumpDistribution> jump) const {
  if (intensity <= 0) throw std::invalid_argument("with_finite_activity: intensity");
  if (!jump || jump->dim() != dim_)
    throw std::invalid_argument("with_finite_activity: jump law dimension mismatch");
  LevyModel m = *this;
  m.jumps_ = FiniteActivitySpec{intensity, std::move(jump)};
  return m;
}

LevyModel LevyModel::with_isotropic_stable(double alpha, double scale) const {
  if (!(alpha > 0 && alpha < 2) || scale <= 0)
    throw std::invalid_argument("with_isotropic_stable: need alpha in (0,2), scale > 0");
  LevyModel m = *this;
  m.jumps_ = IsotropicStableSpec{alpha, scale};
  return m;
}

const FiniteActivitySpec* LevyModel::finite_activity() const {
  return std::get_if<FiniteActivitySpec>(&jumps_);
}
const IsotropicStableSpec* LevyModel::isotropic_stable() const {
  return std::get_if<IsotropicStableSpec>(&jumps_);
}

const Mat& LevyModel::gaussian_factor() const {
  if (!gaussian_factor_) gaussian_factor_ = psd_sqrt_factor(gaussian_cov_);
  return *gaussian_factor_;
}

std::complex<double> levy_symbol(const LevyModel& model, const Vec& u) {
  if (u.size() != model.dim()) throw std::invalid_argument("levy_symbol: dim mismatch");
  std::complex<double> psi(
      -0.5 * u.dot(model.gaussian_cov() * u), u.dot(model.drift()));
  if (const FiniteActivitySpec* fa = model.finite_activity()) {
    std::complex<double> integral =
        fa->jump->char_fn(u) - 1.0 -
        std::complex<double>(0.0, u.dot(fa->jump->truncated_mean(1.0)));
    psi += fa->intensity * integral;
  } else if (const IsotropicStableSpec* st = model.isotropic_stable()) {
    psi += -st->scale * std::pow(u.norm(), st->alpha);
  }
  return psi;
}

double sample_standard_symmetric_stable(double alpha, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  double u = pi * (unif(rng) - 0.5);
  double e = -std::log(1.0 - unif(rng));
  if (alpha == 1.0) return std::tan(u);
  double s = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha);
  return s * std::pow(std::cos((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

double sample_standard_positive_stable(double rho, std::mt19937_64& rng) {
  if (!(rho > 0 && rho < 1))
    throw std::invalid_argument("positive stable: rho must lie in (0,1)");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  // Kanter's representation: S = (a(U)/E)^{(1-rho)/rho}.
  double u = pi * unif(rng);
  double e = -std::log(1.0 - unif(rng));
  double a = std::pow(std::sin(rho * u), rho / (1.0 - rho)) *
             std::sin((1.0 - rho) * u) /
             std::pow(std::sin(u), 1.0 / (1.0 - rho));
  return std::pow(a / e, (1.0 - rho) / rho);
}

namespace {

Vec stable_increment(const IsotropicStableSpec& st, int dim, double dt,
                     std::mt19937_64& rng) {
  double unit_scale = std::pow(dt * st.scale, 1.0 / st.alpha);
  if (dim == 1) {
    Vec out(1);
    out[0] = unit_scale * sample_standard_symmetric_stable(st.alpha, rng);
    return out;
  }
  // Brownian subordination: B(2 tau) has CF e^{-|u|^alpha} when tau is
  // standard positive (alpha/2)-stable.
  double tau = sample_standard_positive_stable(st.alpha / 2.0, rng);
  std::normal_distribution<double> normal;
  Vec z(dim);
  for (int i = 0; i < dim; ++i) z[i] = normal(rng);
  return unit_scale * std::sqrt(2.0 * tau) * z;
}

}  // namespace

LevyPathSample sample_path(const LevyModel& model, const std::vector<double>& grid,
                           std::uint64_t seed) {
  if (grid.size() < 2) throw std::invalid_argument("sample_path: need >= 2 grid times");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("sample_path: grid must be strictly increasing");

  const int d = model.dim();
  const std::size_t n = grid.size() - 1;
  std::mt19937_64 rng = member_rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  LevyPathSample out;
  out.grid = grid;
  out.increments.reserve(n);
  out.gaussian_increments.reserve(n);

  const FiniteActivitySpec* fa = model.finite_activity();
  const IsotropicStableSpec* st = model.isotropic_stable();
  const bool gaussian = model.has_gaussian();
  Vec compensator = Vec::Zero(d);
  if (fa) compensator = fa->intensity * fa->jump->truncated_mean(1.0);

  for (std::size_t i = 0; i < n; ++i) {
    double dt = grid[i + 1] - grid[i];
    Vec dw = Vec::Zero(d);
    if (gaussian) {
      Vec z(d);
      for (int k = 0; k < d; ++k) z[k] = normal(rng);
      dw = std::sqrt(dt) * (model.gaussian_factor() * z);
    }
    Vec dl = dt * model.drift() + dw;
    if (fa) {
      std::poisson_distribution<int> pois(fa->intensity * dt);
      int count = pois(rng);
      std::vector<double> times(count);
      for (int c = 0; c < count; ++c) times[c] = grid[i] + dt * unif(rng);
      std::sort(times.begin(), times.end());
      for (double tj : times) {
        Vec j = fa->jump->sample(rng);
        out.jumps.push_back({tj, j});
        dl += j;
      }
      dl -= dt * compensator;
    } else if (st) {
      dl += stable_increment(*st, d, dt, rng);
    }
    out.gaussian_increments.push_back(dw);
    out.increments.push_back(dl);
  }
  return out;
}

CadlagPath LevyPathSample::to_path() const {
  std::vector<Vec> values;
  values.reserve(grid.size());
  Vec acc = Vec::Zero(dim());
  values.push_back(acc);
  for (const Vec& dl : increments) {
    acc += dl;
    values.push_back(acc);
  }
  return CadlagPath::piecewise_constant(grid, values);
}

CadlagPath LevyPathSample::part_path(char part) const {
  if (!decomposition) throw std::logic_error("part_path: no decomposition");
  const std::vector<Vec>* src = nullptr;
  switch (part) {
    case 'w': src = &decomposition->w; break;
    case 'x': src = &decomposition->x; break;
    case 'y': src = &decomposition->y; break;
    default: throw std::invalid_argument("part_path: part must be w, x or y");
  }
  std::vector<Vec> values;
  values.reserve(grid.size());
  Vec acc = Vec::Zero(dim());
  values.push_back(acc);
  for (const Vec& dl : *src) {
    acc += dl;
    values.push_back(acc);
  }
  return CadlagPath::piecewise_constant(grid, values);
}

LevyPathSample decompose(LevyPathSample sample, const LevyModel& model,
                         double alpha_cut) {
  if (alpha_cut <= 0) throw std::invalid_argument("decompose: alpha_cut must be > 0");
  const FiniteActivitySpec* fa = model.finite_activity();
  if (model.has_jumps() && !fa)
    throw std::invalid_argument(
        "decompose: explicit jump record required (finite activity only)");

  const int d = model.dim();
  const std::size_t n = sample.increments.size();
  LevyItoParts parts;
  parts.alpha_cut = alpha_cut;
  parts.w = sample.gaussian_increments;
  parts.x.assign(n, Vec::Zero(d));
  parts.y.assign(n, Vec::Zero(d));

  Vec small_comp = Vec::Zero(d);
  parts.b_alpha = model.drift();
  if (fa) {
    small_comp = fa->intensity * fa->jump->truncated_mean(alpha_cut);
    parts.b_alpha = model.drift() -
                    fa->intensity * fa->jump->truncated_mean(1.0) + small_comp;
  }

  // Compensated small jumps per cell; Y is the exact remainder so the parts
  // always sum back to the increments bit for bit.
  std::size_t cell = 0;
  for (const JumpEvent& j : sample.jumps) {
    while (cell + 1 < n && j.time >= sample.grid[cell + 1]) ++cell;
    if (j.size.norm() <= alpha_cut) {
      parts.x[cell] += j.size;
    } else {
      parts.big_jumps.push_back(j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double dt = sample.grid[i + 1] - sample.grid[i];
    parts.x[i] -= dt * small_comp;
    parts.y[i] = sample.increments[i] - parts.w[i] - parts.x[i];
  }
  sample.decomposition = std::move(parts);
  return sample;
}

namespace {

// K_alpha = int_0^infty (1 - cos x) x^{-1-alpha} dx.
double stable_tail_constant(double alpha) {
  constexpr double pi = std::numbers::pi;
  if (std::abs(alpha - 1.0) < 1e-9) return pi / 2.0;
  return std::tgamma(2.0 - alpha) * std::cos(pi * alpha / 2.0) /
         (alpha * (1.0 - alpha));
}

// E |theta_1|^alpha for theta uniform on the unit sphere in R^d.
double sphere_moment(int d, double alpha) {
  return std::tgamma((alpha + 1.0) / 2.0) * std::tgamma(d / 2.0) /
         (std::tgamma((alpha + double(d)) / 2.0) * std::tgamma(0.5));
}

}  // namespace

SmallJumpFactorization small_jump_factorization(const LevyModel& model,
                                                double alpha_cut) {
  if (alpha_cut <= 0)
    throw std::invalid_argument("small_jump_factorization: alpha_cut must be > 0");
  const int d = model.dim();
  SmallJumpFactorization out;
  out.alpha_cut = alpha_cut;
  out.r_alpha = Mat::Zero(d, d);

  if (const FiniteActivitySpec* fa = model.finite_activity()) {
    out.r_alpha = fa->intensity * fa->jump->truncated_second_moment(alpha_cut);
  } else if (const IsotropicStableSpec* st = model.isotropic_stable()) {
    // int_{||r||<=a} ||r||^2 nu(dr) for the measure whose symbol is
    // -scale |u|^alpha.
    double mass = st->scale * std::pow(alpha_cut, 2.0 - st->alpha) /
                  ((2.0 - st->alpha) * stable_tail_constant(st->alpha) *
                   sphere_moment(d, st->alpha));
    out.r_alpha = (mass / d) * Mat::Identity(d, d);
  }

  out.r_alpha = 0.5 * (out.r_alpha + out.r_alpha.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(out.r_alpha);
  for (int k = d - 1; k >= 0; --k) {  // descending eigenvalues
    double ev = es.eigenvalues()[k];
    if (ev < -1e-12) {
      out.clipped = true;
      continue;
    }
    if (ev <= 0) {
      if (ev < 0) out.clipped = true;
      continue;
    }
    out.factors.emplace_back(ev, es.eigenvectors().col(k));
  }
  return out;
}

std::vector<double> uniform_grid(double t0, double t1, int n_steps) {
  if (n_steps < 1 || !(t1 > t0)) throw std::invalid_argument("uniform_grid");
  std::vector<double> grid(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i)
    grid[i] = t0 + (t1 - t0) * (double(i) / n_steps);
  return grid;
}

}  // namespace skm1
