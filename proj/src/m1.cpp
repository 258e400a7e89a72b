#include "skm1/m1.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace skm1 {

namespace {
constexpr std::size_t kCellBudget = 10'000'000;
}

M1ResourceError::M1ResourceError(std::size_t cells_, double suggested_mesh_)
    : std::runtime_error("M1 matching DP over cell budget (" +
                         std::to_string(cells_) + " cells); retry with mesh >= " +
                         std::to_string(suggested_mesh_)),
      cells(cells_),
      suggested_mesh(suggested_mesh_) {}

double default_mesh(const CadlagPath& f) { return (f.t1() - f.t0()) / 2048.0; }

DensifiedGraph densify(const CompletedGraph& g, double mesh) {
  if (mesh <= 0) throw std::invalid_argument("densify: mesh must be positive");
  DensifiedGraph out;
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    const GraphVertex& a = g.vertices[i];
    if (i + 1 == g.vertices.size()) {
      out.r.push_back(a.r);
      out.z.push_back(a.z);
      break;
    }
    const GraphVertex& b = g.vertices[i + 1];
    double len = std::max(std::abs(b.r - a.r), (b.z - a.z).norm());
    int pieces = std::max(1, int(std::ceil(len / mesh)));
    for (int p = 0; p < pieces; ++p) {
      double w = double(p) / pieces;
      out.r.push_back(a.r + w * (b.r - a.r));
      out.z.push_back(a.z + w * (b.z - a.z));
    }
  }
  return out;
}

namespace {

void check_compatible(const CadlagPath& f, const CadlagPath& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("M1: dimension mismatch");
  double span = std::max(f.t1() - f.t0(), g.t1() - g.t0());
  if (std::abs(f.t0() - g.t0()) > 1e-9 * (1.0 + span) ||
      std::abs(f.t1() - g.t1()) > 1e-9 * (1.0 + span))
    throw std::invalid_argument("M1: paths must share the time interval");
}

double cell_cost(const DensifiedGraph& a, const DensifiedGraph& b, int i, int j) {
  return std::max(std::abs(a.r[i] - b.r[j]), (a.z[i] - b.z[j]).norm());
}

void ensure_budget(std::size_t na, std::size_t nb, double mesh) {
  std::size_t cells = na * nb;
  if (cells > kCellBudget) {
    double suggested = mesh * std::sqrt(double(cells) / double(kCellBudget));
    throw M1ResourceError(cells, suggested);
  }
}

}  // namespace

M1Result dm_strong(const CadlagPath& f, const CadlagPath& g, double mesh) {
  check_compatible(f, g);
  DensifiedGraph a = densify(completed_graph(f), mesh);
  DensifiedGraph b = densify(completed_graph(g), mesh);
  const int na = int(a.r.size()), nb = int(b.r.size());
  ensure_budget(na, nb, mesh);

  std::vector<double> dp(std::size_t(na) * nb);
  auto at = [&](int i, int j) -> double& { return dp[std::size_t(i) * nb + j]; };
  at(0, 0) = cell_cost(a, b, 0, 0);
  for (int j = 1; j < nb; ++j) at(0, j) = std::max(at(0, j - 1), cell_cost(a, b, 0, j));
  for (int i = 1; i < na; ++i) {
    at(i, 0) = std::max(at(i - 1, 0), cell_cost(a, b, i, 0));
    for (int j = 1; j < nb; ++j) {
      double prev = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      at(i, j) = std::max(prev, cell_cost(a, b, i, j));
    }
  }

  M1Result result;
  result.distance = at(na - 1, nb - 1);
  result.mesh = mesh;
  result.matching.cost = result.distance;
  // Backtrack, diagonal-first on ties, then advancing the first graph.
  int i = na - 1, j = nb - 1;
  std::vector<std::pair<int, int>> rev;
  rev.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      double d = at(i - 1, j - 1), u = at(i - 1, j), l = at(i, j - 1);
      double best = std::min({d, u, l});
      if (d == best) {
        --i;
        --j;
      } else if (u == best) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    rev.emplace_back(i, j);
  }
  result.matching.pairs.assign(rev.rbegin(), rev.rend());
  return result;
}

double dm_distance(const CadlagPath& f, const CadlagPath& g, double mesh) {
  check_compatible(f, g);
  DensifiedGraph a = densify(completed_graph(f), mesh);
  DensifiedGraph b = densify(completed_graph(g), mesh);
  const int na = int(a.r.size()), nb = int(b.r.size());
  ensure_budget(na, nb, mesh);

  std::vector<double> prev(nb), cur(nb);
  prev[0] = cell_cost(a, b, 0, 0);
  for (int j = 1; j < nb; ++j) prev[j] = std::max(prev[j - 1], cell_cost(a, b, 0, j));
  for (int i = 1; i < na; ++i) {
    cur[0] = std::max(prev[0], cell_cost(a, b, i, 0));
    for (int j = 1; j < nb; ++j) {
      double best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = std::max(best, cell_cost(a, b, i, j));
    }
    std::swap(prev, cur);
  }
  return prev[nb - 1];
}

double dm_distance_auto(const CadlagPath& f, const CadlagPath& g, double mesh,
                        double* used_mesh) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    try {
      double d = dm_distance(f, g, mesh);
      if (used_mesh) *used_mesh = mesh;
      return d;
    } catch (const M1ResourceError& e) {
      mesh = e.suggested_mesh * 1.05;
    }
  }
  throw M1ResourceError(kCellBudget + 1, mesh);
}

double dm_product(const CadlagPath& f, const CadlagPath& g, double mesh) {
  check_compatible(f, g);
  double total = 0.0;
  for (int k = 0; k < f.dim(); ++k) {
    double rho = dm_distance(f.coordinate(k), g.coordinate(k), mesh);
    total += std::pow(2.0, -(k + 1)) * rho / (1.0 + rho);
  }
  return total;
}

double dm_scalar_projection(const CadlagPath& f, const CadlagPath& g, const Vec& v,
                            double mesh) {
  return dm_distance(f.project(v), g.project(v), mesh);
}

}  // namespace skm1
