#pragma once

#include <vector>

#include "skm1/linalg.hpp"

namespace skm1 {

/// One node of a piecewise-linear-with-jumps path: left limit and value at t.
struct Breakpoint {
  double t;
  Vec v_minus;
  Vec v_plus;
};

/// Finite-dimensional cadlag path on [t0, t1], represented as breakpoints with
/// linear interpolation from v_plus of one node to v_minus of the next.
/// Evaluation is right-continuous; left limits exist everywhere.
class CadlagPath {
 public:
  CadlagPath(int dim, std::vector<Breakpoint> breakpoints);

  /// Right-continuous step path: value values[i] on [times[i], times[i+1]).
  static CadlagPath piecewise_constant(const std::vector<double>& times,
                                       const std::vector<Vec>& values);
  /// Continuous path interpolating (times[i], values[i]) linearly.
  static CadlagPath piecewise_linear(const std::vector<double>& times,
                                     const std::vector<Vec>& values);
  /// Scalar overloads.
  static CadlagPath piecewise_constant(const std::vector<double>& times,
                                       const std::vector<double>& values);
  static CadlagPath piecewise_linear(const std::vector<double>& times,
                                     const std::vector<double>& values);

  int dim() const { return dim_; }
  double t0() const { return breakpoints_.front().t; }
  double t1() const { return breakpoints_.back().t; }
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }

  /// f(t), right-continuous. Throws std::domain_error outside [t0, t1].
  Vec evaluate(double t) const;
  /// f(t-); equals f(t0) at the left endpoint.
  Vec evaluate_left(double t) const;

  double evaluate_scalar(double t) const;

  /// Coordinate path t -> f_k(t).
  CadlagPath coordinate(int k) const;
  /// Scalar projection t -> <f(t), v>. Throws on zero functional.
  CadlagPath project(const Vec& v) const;

  bool has_jumps() const;

 private:
  int dim_;
  std::vector<Breakpoint> breakpoints_;
};

/// M(v1, v, v2): Euclidean distance from v to the closed segment [v1, v2],
/// by orthogonal projection with the line parameter clamped to [0, 1].
double segment_distance(const Vec& v1, const Vec& v, const Vec& v2);
double segment_distance(double v1, double v, double v2);

/// Oscillation functional M(f; delta): sup of M(f(t1), f(t), f(t2)) over
/// t1 <= t <= t2 with t2 - t1 <= delta, the times ranging over breakpoints,
/// their left limits, and a uniform grid of spacing densify_mesh. Exact for
/// piecewise-constant paths once the candidate set contains all breakpoints.
double oscillation(const CadlagPath& f, double delta, double densify_mesh);

/// Candidate (time, value) samples used by the oscillation sup; exposed so
/// tests can brute-force the same candidate set.
struct OscillationSample {
  double t;
  Vec v;
};
std::vector<OscillationSample> oscillation_samples(const CadlagPath& f,
                                                   double densify_mesh);

struct GraphVertex {
  double r;
  Vec z;
};

/// Extended graph of f as an ordered polyline: jump nodes contribute two
/// vertices at equal time (left limit first), continuous nodes one.
struct CompletedGraph {
  std::vector<GraphVertex> vertices;
  int source_dim = 0;
};

CompletedGraph completed_graph(const CadlagPath& f);

/// sup_t ||f(t) - g(t)|| sampled at the union of breakpoint times and left
/// limits. Exact when f and g share breakpoints.
double sup_distance(const CadlagPath& f, const CadlagPath& g);

}  // namespace skm1
