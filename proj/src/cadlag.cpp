#include "skm1/cadlag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skm1 {

CadlagPath::CadlagPath(int dim, std::vector<Breakpoint> breakpoints)
    : dim_(dim), breakpoints_(std::move(breakpoints)) {
  if (dim_ <= 0) throw std::invalid_argument("CadlagPath: dim must be positive");
  if (breakpoints_.empty())
    throw std::invalid_argument("CadlagPath: at least one breakpoint required");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const Breakpoint& b = breakpoints_[i];
    if (b.v_minus.size() != dim_ || b.v_plus.size() != dim_)
      throw std::invalid_argument("CadlagPath: breakpoint dimension mismatch");
    if (!std::isfinite(b.t)) throw std::invalid_argument("CadlagPath: non-finite time");
    if (i > 0 && !(breakpoints_[i - 1].t < b.t))
      throw std::invalid_argument("CadlagPath: times must be strictly increasing");
  }
}

CadlagPath CadlagPath::piecewise_constant(const std::vector<double>& times,
                                          const std::vector<Vec>& values) {
  if (times.size() != values.size() || times.empty())
    throw std::invalid_argument("piecewise_constant: times/values mismatch");
  std::vector<Breakpoint> bps;
  bps.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vec& left = (i == 0) ? values[0] : values[i - 1];
    bps.push_back({times[i], left, values[i]});
  }
  return CadlagPath(int(values.front().size()), std::move(bps));
}

CadlagPath CadlagPath::piecewise_linear(const std::vector<double>& times,
                                        const std::vector<Vec>& values) {
  if (times.size() != values.size() || times.empty())
    throw std::invalid_argument("piecewise_linear: times/values mismatch");
  std::vector<Breakpoint> bps;
  bps.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    bps.push_back({times[i], values[i], values[i]});
  return CadlagPath(int(values.front().size()), std::move(bps));
}

namespace {
std::vector<Vec> lift(const std::vector<double>& values) {
  std::vector<Vec> out;
  out.reserve(values.size());
  for (double v : values) {
    Vec x(1);
    x[0] = v;
    out.push_back(x);
  }
  return out;
}
}  // namespace

CadlagPath CadlagPath::piecewise_constant(const std::vector<double>& times,
                                          const std::vector<double>& values) {
  return piecewise_constant(times, lift(values));
}

CadlagPath CadlagPath::piecewise_linear(const std::vector<double>& times,
                                        const std::vector<double>& values) {
  return piecewise_linear(times, lift(values));
}

namespace {
// Index of the last breakpoint with time <= t.
std::size_t locate(const std::vector<Breakpoint>& bps, double t) {
  auto it = std::upper_bound(bps.begin(), bps.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  return std::size_t(it - bps.begin()) - 1;
}
}  // namespace

Vec CadlagPath::evaluate(double t) const {
  if (t < t0() || t > t1()) throw std::domain_error("CadlagPath: t outside domain");
  std::size_t i = locate(breakpoints_, t);
  const Breakpoint& b = breakpoints_[i];
  if (t == b.t || i + 1 == breakpoints_.size()) return b.v_plus;
  const Breakpoint& c = breakpoints_[i + 1];
  double w = (t - b.t) / (c.t - b.t);
  return b.v_plus + w * (c.v_minus - b.v_plus);
}

Vec CadlagPath::evaluate_left(double t) const {
  if (t < t0() || t > t1()) throw std::domain_error("CadlagPath: t outside domain");
  if (t == t0()) return evaluate(t);
  std::size_t i = locate(breakpoints_, t);
  const Breakpoint& b = breakpoints_[i];
  if (t == b.t) return b.v_minus;
  const Breakpoint& c = breakpoints_[i + 1];
  double w = (t - b.t) / (c.t - b.t);
  return b.v_plus + w * (c.v_minus - b.v_plus);
}

double CadlagPath::evaluate_scalar(double t) const {
  if (dim_ != 1) throw std::logic_error("evaluate_scalar: path is not scalar");
  return evaluate(t)[0];
}

CadlagPath CadlagPath::coordinate(int k) const {
  if (k < 0 || k >= dim_) throw std::out_of_range("CadlagPath::coordinate");
  std::vector<Breakpoint> bps;
  bps.reserve(breakpoints_.size());
  for (const Breakpoint& b : breakpoints_) {
    Vec vm(1), vp(1);
    vm[0] = b.v_minus[k];
    vp[0] = b.v_plus[k];
    bps.push_back({b.t, vm, vp});
  }
  return CadlagPath(1, std::move(bps));
}

CadlagPath CadlagPath::project(const Vec& v) const {
  if (v.size() != dim_) throw std::invalid_argument("project: dimension mismatch");
  if (v.norm() == 0) throw std::invalid_argument("project: zero functional");
  std::vector<Breakpoint> bps;
  bps.reserve(breakpoints_.size());
  for (const Breakpoint& b : breakpoints_) {
    Vec vm(1), vp(1);
    vm[0] = v.dot(b.v_minus);
    vp[0] = v.dot(b.v_plus);
    bps.push_back({b.t, vm, vp});
  }
  return CadlagPath(1, std::move(bps));
}

bool CadlagPath::has_jumps() const {
  for (const Breakpoint& b : breakpoints_)
    if ((b.v_plus - b.v_minus).norm() > 0) return true;
  return false;
}

double segment_distance(const Vec& v1, const Vec& v, const Vec& v2) {
  Vec d = v2 - v1;
  double len2 = d.squaredNorm();
  double alpha = len2 > 0 ? std::clamp((v - v1).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (v - (v1 + alpha * d)).norm();
}

double segment_distance(double v1, double v, double v2) {
  double lo = std::min(v1, v2), hi = std::max(v1, v2);
  return std::max({0.0, v - hi, lo - v});
}

std::vector<OscillationSample> oscillation_samples(const CadlagPath& f,
                                                   double densify_mesh) {
  if (densify_mesh <= 0)
    throw std::invalid_argument("oscillation_samples: mesh must be positive");
  std::vector<OscillationSample> out;
  const auto& bps = f.breakpoints();
  for (std::size_t i = 0; i < bps.size(); ++i) {
    const Breakpoint& b = bps[i];
    if ((b.v_plus - b.v_minus).norm() > 0) out.push_back({b.t, b.v_minus});
    out.push_back({b.t, b.v_plus});
    if (i + 1 == bps.size()) break;
    const Breakpoint& c = bps[i + 1];
    double gap = c.t - b.t;
    int pieces = int(std::ceil(gap / densify_mesh));
    for (int p = 1; p < pieces; ++p) {
      double w = double(p) / pieces;
      out.push_back({b.t + w * gap, b.v_plus + w * (c.v_minus - b.v_plus)});
    }
  }
  return out;
}

namespace {

// Scalar sup of M over windowed triples in O(n * window) by two independent
// one-sided sweeps: the pairwise max (resp. min) of the endpoint values can be
// minimised (resp. maximised) with a running extremum as the right endpoint
// range grows with the left endpoint.
double oscillation_scalar(const std::vector<OscillationSample>& s, double delta) {
  const int n = int(s.size());
  double best = 0.0;
  int istart = 0;
  for (int m = 0; m < n; ++m) {
    const double vm = s[m].v[0];
    while (s[istart].t < s[m].t - delta) ++istart;
    double run_min = std::numeric_limits<double>::infinity();
    double run_max = -std::numeric_limits<double>::infinity();
    int j = m - 1;
    for (int i = istart; i <= m; ++i) {
      const double limit = s[i].t + delta;
      while (j + 1 < n && s[j + 1].t <= limit) {
        ++j;
        run_min = std::min(run_min, s[j].v[0]);
        run_max = std::max(run_max, s[j].v[0]);
      }
      if (j < m) continue;  // no admissible right endpoint yet
      const double vi = s[i].v[0];
      best = std::max(best, vm - std::max(vi, run_min));
      best = std::max(best, std::min(vi, run_max) - vm);
    }
  }
  return best;
}

double oscillation_generic(const std::vector<OscillationSample>& s, double delta) {
  const int n = int(s.size());
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n && s[j].t <= s[i].t + delta; ++j) {
      for (int m = i; m <= j; ++m)
        best = std::max(best, segment_distance(s[i].v, s[m].v, s[j].v));
    }
  }
  return best;
}

}  // namespace

double oscillation(const CadlagPath& f, double delta, double densify_mesh) {
  if (delta < 0) throw std::invalid_argument("oscillation: delta must be >= 0");
  std::vector<OscillationSample> s = oscillation_samples(f, densify_mesh);
  if (f.dim() == 1) return oscillation_scalar(s, delta);
  return oscillation_generic(s, delta);
}

CompletedGraph completed_graph(const CadlagPath& f) {
  CompletedGraph g;
  g.source_dim = f.dim();
  for (const Breakpoint& b : f.breakpoints()) {
    if ((b.v_plus - b.v_minus).norm() > 0) g.vertices.push_back({b.t, b.v_minus});
    g.vertices.push_back({b.t, b.v_plus});
  }
  return g;
}

double sup_distance(const CadlagPath& f, const CadlagPath& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("sup_distance: dim mismatch");
  std::vector<double> times;
  for (const Breakpoint& b : f.breakpoints()) times.push_back(b.t);
  for (const Breakpoint& b : g.breakpoints()) times.push_back(b.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  double lo = std::max(f.t0(), g.t0());
  double hi = std::min(f.t1(), g.t1());
  double best = 0.0;
  for (double t : times) {
    if (t < lo || t > hi) continue;
    best = std::max(best, (f.evaluate(t) - g.evaluate(t)).norm());
    best = std::max(best, (f.evaluate_left(t) - g.evaluate_left(t)).norm());
  }
  return best;
}

}  // namespace skm1
