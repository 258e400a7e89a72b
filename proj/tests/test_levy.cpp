#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "skm1/convolution.hpp"
#include "skm1/levy.hpp"
#include "skm1/rng.hpp"

using namespace skm1;
using std::numbers::pi;

namespace {

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec vec2(double x, double y) {
  Vec v(2);
  v[0] = x;
  v[1] = y;
  return v;
}

// Symmetric alpha-stable CDF by the sine inversion formula
// F(x) = 1/2 + (1/pi) int_0^inf sin(ux) e^{-u^alpha} / u du.
double stable_cdf(double x, double alpha) {
  if (x == 0.0) return 0.5;
  if (alpha == 1.0) return 0.5 + std::atan(x) / pi;
  double upper = std::pow(60.0, 1.0 / alpha);
  double val = integrate(
      [&](double u) {
        if (u == 0.0) return x;
        return std::sin(u * x) * std::exp(-std::pow(u, alpha)) / u;
      },
      0.0, upper, 1e-9);
  return 0.5 + val / pi;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    ks = std::max(ks, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return ks;
}

}  // namespace

TEST_CASE("symbol of standard models") {
  LevyModel bm = LevyModel::brownian(2);
  Vec u = vec2(1.0, 2.0);
  CHECK(levy_symbol(bm, u).real() == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(levy_symbol(bm, u).imag() == doctest::Approx(0.0));
  CHECK(std::abs(levy_symbol(bm, Vec(Vec::Zero(2)))) == 0.0);

  LevyModel drifted(2, vec2(0.5, -1.0), Mat::Zero(2, 2));
  CHECK(levy_symbol(drifted, u).imag() == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(levy_symbol(drifted, u).real() == doctest::Approx(0.0));

  LevyModel stable = LevyModel::zero(2).with_isotropic_stable(1.5, 1.0);
  Vec u2 = vec2(2.0, 0.0);
  CHECK(levy_symbol(stable, u2).real() ==
        doctest::Approx(-std::pow(2.0, 1.5)).epsilon(1e-13));
  CHECK(levy_symbol(stable, u2).imag() == doctest::Approx(0.0));
  CHECK(std::abs(levy_symbol(stable, Vec(Vec::Zero(2)))) == 0.0);

  // Compound Poisson with point mass inside the unit ball: fully compensated.
  Vec r0 = vec2(0.3, -0.4);
  LevyModel cp = LevyModel::zero(2).with_finite_activity(2.0, point_mass_jump(r0));
  std::complex<double> expected =
      2.0 * (std::exp(std::complex<double>(0.0, u.dot(r0))) - 1.0 -
             std::complex<double>(0.0, u.dot(r0)));
  std::complex<double> got = levy_symbol(cp, u);
  CHECK(std::abs(got - expected) < 1e-13);
}

TEST_CASE("jump distribution characteristic functions and moments") {
  Vec r0 = vec2(0.6, 0.8);  // norm exactly 1
  auto pm = point_mass_jump(r0);
  Vec u = vec2(1.0, -2.0);
  CHECK(std::abs(pm->char_fn(u) -
                 std::exp(std::complex<double>(0.0, u.dot(r0)))) < 1e-15);
  CHECK((pm->truncated_mean(1.0) - r0).norm() == 0.0);
  CHECK(pm->truncated_mean(0.99).norm() == 0.0);
  CHECK((pm->truncated_second_moment(1.0) - r0 * r0.transpose()).norm() < 1e-15);

  auto gj = gaussian_jump(vec2(0.0, 0.0), Mat(Mat::Identity(2, 2)));
  CHECK(std::abs(gj->char_fn(u) - std::exp(-u.squaredNorm() / 2.0)) < 1e-12);
  CHECK(gj->truncated_mean(3.0).norm() == 0.0);  // symmetric law

  // Uniform ball: check the analytic CF and truncated second moment against
  // Monte Carlo with a generous 5 sigma band.
  auto ub = uniform_ball_jump(2, 2.0);
  std::mt19937_64 rng = member_rng(7001);
  const int n = 200000;
  std::complex<double> cf_mc = 0.0;
  Mat m2_in = Mat::Zero(2, 2);
  Vec mean_in = Vec::Zero(2);
  for (int i = 0; i < n; ++i) {
    Vec j = ub->sample(rng);
    REQUIRE(j.norm() <= 2.0 + 1e-12);
    cf_mc += std::exp(std::complex<double>(0.0, u.dot(j)));
    if (j.norm() <= 1.0) {
      m2_in += j * j.transpose();
      mean_in += j;
    }
  }
  cf_mc /= double(n);
  m2_in /= double(n);
  mean_in /= double(n);
  double se = 1.0 / std::sqrt(double(n));
  CHECK(std::abs(ub->char_fn(u) - cf_mc) < 5 * se);
  CHECK((ub->truncated_second_moment(1.0) - m2_in).norm() < 5 * se);
  CHECK((ub->truncated_mean(1.0) - mean_in).norm() < 5 * se);
}

TEST_CASE("one dimensional stable sampler matches the inverted distribution") {
  std::mt19937_64 rng = member_rng(7002);
  const int n = 100000;
  for (double alpha : {0.8, 1.0, 1.5}) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = sample_standard_symmetric_stable(alpha, rng);
    std::sort(xs.begin(), xs.end());
    // KS statistic against the numerically inverted CDF on a quantile grid;
    // intermediate grid points cannot raise the sup by more than a grid cell.
    double ks = 0.0;
    const int grid = 400;
    for (int g = 1; g < grid; ++g) {
      std::size_t idx = std::size_t(double(g) / grid * n);
      double x = xs[idx];
      if (std::abs(x) > 1e6) continue;
      double f_theory = stable_cdf(x, alpha);
      double f_emp = double(idx) / n;
      ks = std::max(ks, std::abs(f_emp - f_theory));
    }
    CAPTURE(alpha);
    CHECK(ks < 0.01);
  }
}

TEST_CASE("stable sampler is self similar under summation") {
  std::mt19937_64 rng = member_rng(7003);
  const double alpha = 1.5;
  const int n = 10000, m = 8;
  std::vector<double> direct(n), summed(n);
  for (int i = 0; i < n; ++i) direct[i] = sample_standard_symmetric_stable(alpha, rng);
  double scale = std::pow(double(m), -1.0 / alpha);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += sample_standard_symmetric_stable(alpha, rng);
    summed[i] = scale * s;
  }
  CHECK(two_sample_ks(direct, summed) < 0.025);
}

TEST_CASE("positive stable sampler has the right Laplace transform") {
  std::mt19937_64 rng = member_rng(7004);
  const int n = 200000;
  for (double rho : {0.4, 0.75}) {
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) {
      vals[i] = sample_standard_positive_stable(rho, rng);
      REQUIRE(vals[i] > 0.0);
    }
    for (double s : {0.5, 1.0, 2.0}) {
      double mean = 0.0, sq = 0.0;
      for (double v : vals) {
        double e = std::exp(-s * v);
        mean += e;
        sq += e * e;
      }
      mean /= n;
      sq /= n;
      double se = std::sqrt(std::max(0.0, sq - mean * mean) / n);
      CAPTURE(rho);
      CAPTURE(s);
      CHECK(std::abs(mean - std::exp(-std::pow(s, rho))) < 5 * se + 1e-12);
    }
  }
}

TEST_CASE("isotropic stable increments in two dimensions match the symbol") {
  LevyModel model = LevyModel::zero(2).with_isotropic_stable(1.5, 0.7);
  const int n = 100000;
  const double dt = 0.3;
  LevyPathSample s = sample_path(model, uniform_grid(0.0, n * dt, n), 90210);
  for (const Vec& u : {vec2(0.8, 0.0), vec2(0.5, -0.5), vec2(0.0, 1.4)}) {
    std::complex<double> mean = 0.0;
    for (const Vec& inc : s.increments)
      mean += std::exp(std::complex<double>(0.0, u.dot(inc)));
    mean /= double(n);
    std::complex<double> target = std::exp(dt * levy_symbol(model, u));
    double se = std::sqrt(std::max(0.0, 1.0 - std::norm(mean)) / n);
    CHECK(std::abs(mean - target) < 5 * se + 1e-12);
  }
}

TEST_CASE("finite activity increments match the symbol and jump counts") {
  Vec drift = vec2(0.2, -0.1);
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 0.5;
  q(1, 1) = 1.5;
  q(0, 1) = q(1, 0) = 0.25;
  LevyModel model =
      LevyModel(2, drift, q).with_finite_activity(3.0, uniform_ball_jump(2, 2.0));
  const int n = 50000;
  const double dt = 0.25;
  LevyPathSample s = sample_path(model, uniform_grid(0.0, n * dt, n), 424242);

  for (const Vec& u : {vec2(0.6, 0.3), vec2(-0.4, 0.9)}) {
    std::complex<double> mean = 0.0;
    for (const Vec& inc : s.increments)
      mean += std::exp(std::complex<double>(0.0, u.dot(inc)));
    mean /= double(n);
    std::complex<double> target = std::exp(dt * levy_symbol(model, u));
    double se = std::sqrt(std::max(0.0, 1.0 - std::norm(mean)) / n);
    CHECK(std::abs(mean - target) < 5 * se + 1e-12);
  }

  // Jump record: Poisson(lambda T) count, sorted times inside the horizon.
  double lam_t = 3.0 * n * dt;
  CHECK(std::abs(double(s.jumps.size()) - lam_t) < 5 * std::sqrt(lam_t));
  for (std::size_t i = 0; i < s.jumps.size(); ++i) {
    CHECK(s.jumps[i].time >= 0.0);
    CHECK(s.jumps[i].time <= n * dt);
    if (i > 0) CHECK(s.jumps[i - 1].time <= s.jumps[i].time);
  }

  // Running sums produce a cadlag path anchored at zero.
  CadlagPath p = s.to_path();
  CHECK(p.evaluate(0.0).norm() == 0.0);
  Vec total = Vec::Zero(2);
  for (const Vec& inc : s.increments) total += inc;
  CHECK((p.evaluate(p.t1()) - total).norm() < 1e-12 * (1.0 + total.norm()));
}

TEST_CASE("decomposition is exact and routes big jumps correctly") {
  LevyModel model = LevyModel(2, vec2(0.1, 0.2), Mat(0.3 * Mat::Identity(2, 2)))
                        .with_finite_activity(2.0, uniform_ball_jump(2, 2.0));
  const int n = 20000;
  const double dt = 0.1;
  LevyPathSample s = sample_path(model, uniform_grid(0.0, n * dt, n), 5150);
  LevyPathSample d = decompose(s, model, 1.0);
  REQUIRE(d.decomposition.has_value());
  const LevyItoParts& parts = *d.decomposition;
  REQUIRE(int(parts.w.size()) == n);

  // y is the exact floating point residual increment - w - x, so the resplit
  // reconstructs the increments to within one rounding step per coordinate.
  for (int i = 0; i < n; ++i) {
    Vec residual = d.increments[i] - parts.w[i] - parts.x[i];
    CHECK((residual - parts.y[i]).norm() == 0.0);
    Vec sum = parts.w[i] + parts.x[i] + parts.y[i];
    CHECK((sum - d.increments[i]).norm() <=
          4e-16 * (1.0 + d.increments[i].norm()));
  }

  // Every recorded big jump exceeds the threshold; the count matches
  // lambda T P(||J|| > 1) = lambda T (1 - (1/2)^2) for the radius 2 ball.
  for (const JumpEvent& j : parts.big_jumps) CHECK(j.size.norm() > 1.0);
  double expected = 2.0 * n * dt * 0.75;
  CHECK(std::abs(double(parts.big_jumps.size()) - expected) <
        5 * std::sqrt(expected));

  CHECK(d.part_path('w').dim() == 2);
  CHECK(d.part_path('x').evaluate(0.0).norm() == 0.0);
  CHECK_THROWS(d.part_path('q'));

  // Decomposition of a pure stable model has no jump record to split.
  LevyModel stable = LevyModel::zero(2).with_isotropic_stable(1.5, 1.0);
  LevyPathSample ss = sample_path(stable, uniform_grid(0.0, 1.0, 16), 3);
  CHECK_THROWS(decompose(ss, stable, 0.5));
}

TEST_CASE("small jump covariance for compound Poisson models") {
  Vec r0 = vec2(0.3, 0.4);  // norm 0.5
  LevyModel cp = LevyModel::zero(2).with_finite_activity(4.0, point_mass_jump(r0));
  SmallJumpFactorization f = small_jump_factorization(cp, 1.0);
  CHECK((f.r_alpha - 4.0 * r0 * r0.transpose()).norm() < 1e-12);
  // Rank one: leading factor is lambda ||r0||^2 along r0 / ||r0||.
  REQUIRE(!f.factors.empty());
  CHECK(f.factors[0].first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(f.factors[0].second.dot(r0)) - 0.5) < 1e-12);
  if (f.factors.size() > 1) CHECK(f.factors[1].first < 1e-12);

  // Threshold below the jump size: nothing is small.
  SmallJumpFactorization g = small_jump_factorization(cp, 0.25);
  CHECK(g.r_alpha.norm() < 1e-15);

  // Reconstruction sum sigma_k^2 h_k h_k^T = R_alpha, descending order.
  LevyModel ball = LevyModel::zero(2).with_finite_activity(1.5, uniform_ball_jump(2, 2.0));
  SmallJumpFactorization h = small_jump_factorization(ball, 1.0);
  Mat rebuilt = Mat::Zero(2, 2);
  for (auto& [s2, hk] : h.factors) {
    CHECK(std::abs(hk.norm() - 1.0) < 1e-12);
    rebuilt += s2 * hk * hk.transpose();
  }
  CHECK((rebuilt - h.r_alpha).norm() < 1e-12);
  for (std::size_t k = 1; k < h.factors.size(); ++k)
    CHECK(h.factors[k - 1].first >= h.factors[k].first);
}

TEST_CASE("small jump covariance for isotropic stable models") {
  // Validate the two closed-form ingredients by quadrature and Monte Carlo:
  //   K(alpha) = int_0^inf (1 - cos t) / t^{1+alpha} dt
  //   E|theta_1|^alpha over the unit sphere in R^d.
  auto k_quad = [](double alpha) {
    // Head [0, eps]: (1 - cos t)/t^{1+a} ~ t^{1-a}/2, integrable but singular
    // at 0 for a > 1, so integrate the leading term analytically.
    const double eps = 1e-4, t_max = 100.0;
    double head = std::pow(eps, 2.0 - alpha) / (2.0 * (2.0 - alpha));
    // Integrate in chunks: a single Simpson pass over the whole oscillatory
    // range can terminate early when the initial samples alias the cosine.
    auto f = [&](double t) { return (1.0 - std::cos(t)) / std::pow(t, 1.0 + alpha); };
    double mid = integrate(f, eps, 1.0, 1e-11);
    for (double a = 1.0; a < t_max; a += 9.0) mid += integrate(f, a, a + 9.0, 1e-11);
    // Tail beyond t_max: 1/(a t^a) minus the oscillatory part, estimated by
    // two integrations by parts (remainder O(t_max^{-(2+a)})).
    double tail = 1.0 / (alpha * std::pow(t_max, alpha)) +
                  std::sin(t_max) / std::pow(t_max, 1.0 + alpha) -
                  (1.0 + alpha) * std::cos(t_max) / std::pow(t_max, 2.0 + alpha);
    return head + mid + tail;
  };
  auto k_closed = [](double alpha) {
    if (alpha == 1.0) return pi / 2.0;
    return std::tgamma(2.0 - alpha) * std::cos(pi * alpha / 2.0) /
           (alpha * (1.0 - alpha));
  };
  for (double alpha : {0.5, 1.0, 1.2, 1.7})
    CHECK(std::abs(k_quad(alpha) - k_closed(alpha)) < 1e-3);

  auto sphere_moment = [](int d, double alpha) {
    return std::tgamma((alpha + 1.0) / 2.0) * std::tgamma(d / 2.0) /
           (std::tgamma((alpha + d) / 2.0) * std::tgamma(0.5));
  };
  std::mt19937_64 rng = member_rng(7005);
  std::normal_distribution<double> normal;
  const int n = 200000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec z(3);
    for (int k = 0; k < 3; ++k) z[k] = normal(rng);
    mean += std::pow(std::abs(z[0]) / z.norm(), 1.5);
  }
  mean /= n;
  CHECK(std::abs(mean - sphere_moment(3, 1.5)) < 5e-3);

  // The covariance itself: isotropic, scales like a^{2-alpha}, and its
  // largest eigenvalue vanishes as the threshold shrinks.
  LevyModel stable = LevyModel::zero(2).with_isotropic_stable(1.5, 0.8);
  SmallJumpFactorization f1 = small_jump_factorization(stable, 1.0);
  SmallJumpFactorization f2 = small_jump_factorization(stable, 0.5);
  CHECK((f1.r_alpha - f1.r_alpha(0, 0) * Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK(f2.r_alpha(0, 0) ==
        doctest::Approx(f1.r_alpha(0, 0) * std::pow(0.5, 0.5)).epsilon(1e-10));
  SmallJumpFactorization f3 = small_jump_factorization(stable, 1e-6);
  CHECK(f3.factors[0].first < 1e-2);
  CHECK(f3.factors[0].first > 0.0);
}

TEST_CASE("gaussian factor reproduces the covariance") {
  Mat q(2, 2);
  q << 2.0, 0.6, 0.6, 1.0;
  LevyModel model(2, Vec(Vec::Zero(2)), q);
  const Mat& c = model.gaussian_factor();
  CHECK((c * c.transpose() - q).norm() < 1e-12);
}

TEST_CASE("path sampling is deterministic in the seed") {
  LevyModel model = LevyModel::brownian(2).with_finite_activity(
      1.0, uniform_ball_jump(2, 1.5));
  std::vector<double> grid = uniform_grid(0.0, 1.0, 64);
  LevyPathSample a = sample_path(model, grid, 99);
  LevyPathSample b = sample_path(model, grid, 99);
  LevyPathSample c = sample_path(model, grid, 100);
  REQUIRE(a.increments.size() == b.increments.size());
  for (std::size_t i = 0; i < a.increments.size(); ++i)
    CHECK((a.increments[i] - b.increments[i]).norm() == 0.0);
  bool differs = false;
  for (std::size_t i = 0; i < a.increments.size(); ++i)
    if ((a.increments[i] - c.increments[i]).norm() > 0) differs = true;
  CHECK(differs);
}

TEST_CASE("uniform grid endpoints and spacing") {
  std::vector<double> g = uniform_grid(0.0, 2.0, 8);
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0);
  for (int i = 0; i < 8; ++i) CHECK(g[i + 1] - g[i] == doctest::Approx(0.25));
  CHECK_THROWS(uniform_grid(0.0, 1.0, 0));
  CHECK_THROWS(uniform_grid(1.0, 0.5, 4));
}
