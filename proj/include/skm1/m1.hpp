#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "skm1/cadlag.hpp"

namespace skm1 {

/// Monotone staircase matching between two densified completed graphs.
/// Indices i (graph A) and j (graph B) are non-decreasing; the first pair is
/// (0,0), the last pairs the final vertices, and each step advances i, j or
/// both by one.
struct MatchedParametrization {
  std::vector<std::pair<int, int>> pairs;
  double cost = 0.0;  // max over pairs of max(|rA-rB|, ||zA-zB||)
};

struct M1Result {
  double distance = 0.0;
  double mesh = 0.0;
  MatchedParametrization matching;
};

/// Thrown when the matching DP would exceed the cell budget (1e7 cells).
class M1ResourceError : public std::runtime_error {
 public:
  M1ResourceError(std::size_t cells, double suggested_mesh);
  std::size_t cells;
  double suggested_mesh;
};

double default_mesh(const CadlagPath& f);

/// Strong M1 distance upper bound: densify both completed graphs to edge
/// length <= mesh (sup-norm in time x space), then run the min-max monotone
/// matching DP. Symmetric in (f, g); converges to d_M from above as mesh -> 0.
M1Result dm_strong(const CadlagPath& f, const CadlagPath& g, double mesh);

/// Distance only, two-row DP without the matching certificate.
double dm_distance(const CadlagPath& f, const CadlagPath& g, double mesh);

/// As dm_distance but coarsens the mesh when the cell budget would overflow;
/// the mesh actually used is written to *used_mesh.
double dm_distance_auto(const CadlagPath& f, const CadlagPath& g, double mesh,
                        double* used_mesh = nullptr);

/// Product metric: sum_k 2^-k rho_k / (1 + rho_k) over coordinate distances.
double dm_product(const CadlagPath& f, const CadlagPath& g, double mesh);

/// d_M between the scalar projections t -> <f(t), v> and t -> <g(t), v>.
double dm_scalar_projection(const CadlagPath& f, const CadlagPath& g,
                            const Vec& v, double mesh);

/// Densified polyline; exposed for matching export.
struct DensifiedGraph {
  std::vector<double> r;
  std::vector<Vec> z;
};
DensifiedGraph densify(const CompletedGraph& g, double mesh);

}  // namespace skm1
