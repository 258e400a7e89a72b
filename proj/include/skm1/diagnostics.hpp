#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skm1/convolution.hpp"
#include "skm1/m1.hpp"
#include "skm1/ou.hpp"

namespace skm1 {

/// Paired sampler producing (X_gamma, X) coupled on the same driving noise;
/// coupling is what makes convergence in probability observable.
struct CoupledSystem {
  int dim = 0;
  double horizon = 1.0;
  std::function<std::pair<CadlagPath, CadlagPath>(double gamma, std::uint64_t seed)> sample;
};

/// AX_gamma vs -K = -GL for a diagonal OU generator.
CoupledSystem diagonal_ou_system(const Vec& lambdas, const Mat& g,
                                 const LevyModel& driver, int n_steps, double horizon);
/// AX_gamma vs L for one of the introduction's matrix generators.
CoupledSystem intro_matrix_system(const Mat& a, const LevyModel& driver,
                                  int n_steps, double horizon);
/// Deterministic ramp-vs-step pair: X_gamma ramps over 1/gamma, X steps.
CoupledSystem ramp_step_system();
/// X_gamma == X, for calibration.
CoupledSystem identical_system(const LevyModel& driver, int n_steps, double horizon);

struct ScanConfig {
  std::vector<double> gammas;       // increasing
  std::vector<double> epsilons;
  std::vector<double> deltas;       // decreasing
  int n_paths = 400;                // >= 100
  std::vector<Vec> functionals;     // weak/product test functionals
  std::vector<double> checkpoints;  // fdd times
  std::uint64_t base_seed = 0;
  double mesh = 0.01;               // d_M mesh
  double osc_mesh = 1.0;            // densify mesh for oscillation candidates
  bool auto_coarsen = true;         // coarsen d_M mesh on DP cell overflow
};

enum class Verdict { Converging, NotConverging, Inconclusive };
std::string to_string(Verdict v);

struct EstimateRow {
  std::string scenario;  // "fdd" | "oscillation" | "dm_strong" | "dm_product"
  double gamma = 0;
  double delta = 0;      // 0 when not applicable
  double epsilon = 0;
  std::string functional;  // label, empty for full-space rows
  double t = 0;            // fdd checkpoint, 0 otherwise
  double estimate = 0;
  double stderr_ = 0;
};

struct ScanReport {
  std::vector<EstimateRow> rows;
  Verdict verdict = Verdict::Inconclusive;
  std::string decision_rule;
};

/// P(|<X_gamma(t) - X(t), v>| >= eps) per (gamma, t, v, eps).
ScanReport fdd_scan(const ScanConfig& config, const CoupledSystem& system);

/// P(M(<X_gamma, v>; delta) >= eps) over the (gamma, delta) grid; the verdict
/// reads the largest-gamma row along the shrinking delta grid.
ScanReport oscillation_scan(const ScanConfig& config, const CoupledSystem& system);

enum class DmMode { Strong, Product };

/// P(d_M(X_gamma, X) >= eps) per gamma (strong: full-dimensional distance;
/// product: weighted per-coordinate formula).
ScanReport dm_scan(const ScanConfig& config, const CoupledSystem& system, DmMode mode);

struct ScanBundle {
  ScanReport fdd, oscillation, dm;
  bool theorem_consistent = true;  // dm Converging implies fdd & osc Converging
};
ScanBundle run_scan_bundle(const ScanConfig& config, const CoupledSystem& system,
                           DmMode mode);

struct CharFnRow {
  Vec v;
  double beta = 0;
  std::complex<double> empirical;
  std::complex<double> analytic;
  double gap = 0;
  double mc_stderr = 0;
  bool pass = false;  // gap <= 4 * mc_stderr
};

/// Empirical characteristic function of <F*L(T), v> at beta, against
/// char_function_of_integral.
CharFnRow charfn_validate_one(const Kernel& kernel, const LevyModel& model,
                              const Vec& v, double beta, int n_paths, int n_steps,
                              std::uint64_t seed);
std::vector<CharFnRow> charfn_validate(const Kernel& kernel, const LevyModel& model,
                                       const std::vector<Vec>& vs,
                                       const std::vector<double>& betas, int n_paths,
                                       int n_steps, std::uint64_t seed);

/// Empirical mean of <F*L(T), v> tested against the analytic CF of a possibly
/// different model; negative-control hook for corrupted samplers.
CharFnRow charfn_cross_validate(const Kernel& kernel, const LevyModel& sim_model,
                                const LevyModel& analytic_model, const Vec& v,
                                double beta, int n_paths, int n_steps,
                                std::uint64_t seed);

struct MaximalAuditRow {
  double empirical = 0;  // E sup_t |int f(t-s) dX_alpha(s)|
  double bound = 0;      // analytic maximal bound
  double mc_stderr = 0;
  double ratio = 0;      // empirical / bound (0 when bound is 0)
  bool pass = false;     // empirical <= bound + 3 * mc_stderr
};

/// Monte Carlo audit of the small-jump maximal inequality for a scalar-target
/// kernel and a finite-activity model.
MaximalAuditRow maximal_inequality_audit(const Kernel& scalar_kernel,
                                         const LevyModel& model, double alpha_cut,
                                         int n_paths, int n_steps, double horizon,
                                         std::uint64_t seed);

/// Run fn(i) for i in [0, n) on a thread pool; results must be written to
/// pre-sized slots so aggregation stays order-independent.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace skm1
