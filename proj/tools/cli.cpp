#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "skm1/diagnostics.hpp"
#include "skm1/io.hpp"
#include "skm1/rng.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
  if (!obj.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

skm1::Vec parse_vec(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) throw ConfigError(context + ": expected an array");
  skm1::Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

skm1::Mat parse_mat(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(context + ": expected an array of rows");
  skm1::Mat m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw ConfigError(context + ": ragged rows");
    for (std::size_t c = 0; c < j[r].size(); ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

std::shared_ptr<const skm1::JumpDistribution> parse_jump_law(const json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "point_mass") {
    require_keys(j, {"type", "r0"}, "jump law");
    return skm1::point_mass_jump(parse_vec(j.at("r0"), "jump.r0"));
  }
  if (type == "uniform_ball") {
    require_keys(j, {"type", "dim", "radius"}, "jump law");
    return skm1::uniform_ball_jump(j.at("dim").get<int>(),
                                   j.at("radius").get<double>());
  }
  if (type == "gaussian") {
    require_keys(j, {"type", "mean", "cov"}, "jump law");
    return skm1::gaussian_jump(parse_vec(j.at("mean"), "jump.mean"),
                               parse_mat(j.at("cov"), "jump.cov"));
  }
  throw ConfigError("jump law: unknown type '" + type + "'");
}

skm1::LevyModel parse_model(const json& j) {
  require_keys(j, {"dim", "drift", "cov", "jump"}, "model");
  int dim = j.at("dim").get<int>();
  skm1::Vec drift = j.contains("drift") ? parse_vec(j.at("drift"), "model.drift")
                                        : skm1::Vec(skm1::Vec::Zero(dim));
  skm1::Mat cov = j.contains("cov") ? parse_mat(j.at("cov"), "model.cov")
                                    : skm1::Mat(skm1::Mat::Zero(dim, dim));
  skm1::LevyModel model(dim, drift, cov);
  if (!j.contains("jump")) return model;
  const json& jump = j.at("jump");
  std::string type = jump.at("type").get<std::string>();
  if (type == "none") {
    require_keys(jump, {"type"}, "model.jump");
    return model;
  }
  if (type == "stable") {
    require_keys(jump, {"type", "alpha", "scale"}, "model.jump");
    return model.with_isotropic_stable(jump.at("alpha").get<double>(),
                                       jump.value("scale", 1.0));
  }
  if (type == "compound_poisson") {
    require_keys(jump, {"type", "intensity", "law"}, "model.jump");
    return model.with_finite_activity(jump.at("intensity").get<double>(),
                                      parse_jump_law(jump.at("law")));
  }
  throw ConfigError("model.jump: unknown type '" + type + "'");
}

skm1::Kernel parse_kernel(const json& j, int model_dim, double horizon) {
  std::string type = j.at("type").get<std::string>();
  if (type == "identity") {
    require_keys(j, {"type"}, "kernel");
    return skm1::Kernel::identity(model_dim, 0.0, horizon);
  }
  if (type == "diagonal") {
    require_keys(j, {"type", "lambdas", "gamma", "G", "limit"}, "kernel");
    skm1::DiagonalOuSpec spec;
    spec.lambdas = parse_vec(j.at("lambdas"), "kernel.lambdas");
    spec.gamma = j.value("gamma", 1.0);
    spec.g = j.contains("G") ? parse_mat(j.at("G"), "kernel.G")
                             : skm1::Mat(skm1::Mat::Identity(spec.lambdas.size(),
                                                             spec.lambdas.size()));
    spec.horizon = horizon;
    if (j.value("limit", false)) return skm1::ou_limit_kernel(spec);
    return skm1::ou_kernel(spec);
  }
  if (type == "matrix") {
    require_keys(j, {"type", "expr", "A", "gamma"}, "kernel");
    skm1::MatrixOuSpec spec;
    spec.a = parse_mat(j.at("A"), "kernel.A");
    spec.gamma = j.value("gamma", 1.0);
    spec.horizon = horizon;
    std::string expr = j.value("expr", "intro");
    if (expr == "intro") return skm1::intro_matrix_kernel(spec);
    if (expr == "ou") {
      // Semigroup-minus-identity form: F(s) = e^{-gamma A s} - Id.
      skm1::Mat ga = spec.gamma * spec.a;
      int d = int(spec.a.rows());
      return skm1::Kernel::matrix(
          [ga, d](double s) -> skm1::Mat {
            if (s < 0) return skm1::Mat::Zero(d, d);
            return skm1::expm(skm1::Mat(-s * ga)) - skm1::Mat::Identity(d, d);
          },
          d, d, -1.0, horizon);
    }
    throw ConfigError("kernel.expr: expected 'intro' or 'ou'");
  }
  throw ConfigError("kernel: unknown type '" + type + "'");
}

skm1::ScanConfig parse_scan_config(const json& j, std::uint64_t seed) {
  skm1::ScanConfig config;
  config.base_seed = seed;
  config.gammas = j.at("gammas").get<std::vector<double>>();
  config.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("deltas")) config.deltas = j.at("deltas").get<std::vector<double>>();
  config.n_paths = j.value("n_paths", 400);
  if (j.contains("checkpoints"))
    config.checkpoints = j.at("checkpoints").get<std::vector<double>>();
  if (j.contains("functionals"))
    for (const json& f : j.at("functionals"))
      config.functionals.push_back(parse_vec(f, "scan.functionals"));
  config.mesh = j.value("mesh", 0.01);
  config.osc_mesh = j.value("osc_mesh", 1.0);
  config.auto_coarsen = j.value("auto_coarsen", true);
  return config;
}

json resolved_config_with_overrides(const std::string& config_file,
                                    const std::vector<std::string>& overrides) {
  std::ifstream in(config_file);
  if (!in) throw ConfigError("cannot open config: " + config_file);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    std::string path = kv.substr(0, eq);
    std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings allowed
    }
    json* node = &config;
    std::size_t pos = 0;
    for (;;) {
      std::size_t dot = path.find('.', pos);
      std::string key = path.substr(pos, dot - pos);
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      pos = dot + 1;
    }
  }
  return config;
}

fs::path resolve_output_dir(const json& config) {
  std::string dir;
  if (config.contains("output_dir")) {
    dir = config.at("output_dir").get<std::string>();
  } else if (const char* env = std::getenv("SKM1_OUTPUT_DIR")) {
    dir = env;
  } else {
    dir = ".";
  }
  fs::create_directories(dir);
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config) {
  json manifest;
  manifest["artifact_version"] = kVersion;
  manifest["command"] = command;
  manifest["config"] = config;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

std::string verdict_name(skm1::Verdict v) { return skm1::to_string(v); }

json report_summary(const skm1::ScanReport& report) {
  json j;
  j["verdict"] = verdict_name(report.verdict);
  j["decision_rule"] = report.decision_rule;
  return j;
}

int cmd_simulate(const json& config) {
  require_keys(config,
               {"scenario", "seed", "horizon", "n_steps", "model", "kernel",
                "output_dir", "emit_svg"},
               "simulate config");
  skm1::LevyModel model = parse_model(config.at("model"));
  double horizon = config.value("horizon", 1.0);
  int n_steps = config.value("n_steps", 1024);
  std::uint64_t seed = config.value("seed", std::uint64_t(0));
  fs::path dir = resolve_output_dir(config);
  write_manifest(dir, "simulate", config);

  skm1::LevyPathSample sample =
      skm1::sample_path(model, skm1::uniform_grid(0.0, horizon, n_steps), seed);
  skm1::CadlagPath path = sample.to_path();
  if (config.contains("kernel"))
    path = skm1::convolve(parse_kernel(config.at("kernel"), model.dim(), horizon),
                          sample);
  skm1::write_path_csv(path, (dir / "path.csv").string());
  if (config.value("emit_svg", false))
    skm1::write_path_svg(path, (dir / "path.svg").string());
  std::cout << "wrote " << (dir / "path.csv").string() << "\n";
  return 0;
}

int cmd_distance(const std::string& file_a, const std::string& file_b, double mesh,
                 const std::string& matching_out) {
  skm1::CadlagPath a = skm1::read_path_csv(file_a);
  skm1::CadlagPath b = skm1::read_path_csv(file_b);
  if (a.dim() != b.dim())
    throw ConfigError("distance: path dimensions differ (" + std::to_string(a.dim()) +
                      " vs " + std::to_string(b.dim()) + ")");
  if (std::abs(a.t0() - b.t0()) > 1e-9 || std::abs(a.t1() - b.t1()) > 1e-9)
    throw ConfigError("distance: path horizons differ");
  if (mesh <= 0) mesh = skm1::default_mesh(a);
  skm1::M1Result result = skm1::dm_strong(a, b, mesh);
  std::cout << "distance " << skm1::format_double(result.distance) << " mesh "
            << skm1::format_double(result.mesh) << "\n";
  if (!matching_out.empty()) {
    skm1::DensifiedGraph da = skm1::densify(skm1::completed_graph(a), mesh);
    skm1::DensifiedGraph db = skm1::densify(skm1::completed_graph(b), mesh);
    skm1::write_matching_csv(result, da, db, matching_out);
  }
  return 0;
}

skm1::CoupledSystem parse_system(const json& scan, const json& config, int n_steps,
                                 double horizon) {
  std::string name = scan.at("system").get<std::string>();
  if (name == "ramp_step") return skm1::ramp_step_system();
  skm1::LevyModel driver = parse_model(config.at("model"));
  if (name == "identical") return skm1::identical_system(driver, n_steps, horizon);
  if (name == "diagonal_ou") {
    skm1::Vec lambdas = parse_vec(scan.at("lambdas"), "scan.lambdas");
    skm1::Mat g = scan.contains("G")
                      ? parse_mat(scan.at("G"), "scan.G")
                      : skm1::Mat(skm1::Mat::Identity(lambdas.size(), driver.dim()));
    return skm1::diagonal_ou_system(lambdas, g, driver, n_steps, horizon);
  }
  if (name == "intro_matrix") {
    skm1::Mat a = scan.contains("A") ? parse_mat(scan.at("A"), "scan.A")
                                     : skm1::intro_matrix(scan.value("matrix_id", 1));
    return skm1::intro_matrix_system(a, driver, n_steps, horizon);
  }
  throw ConfigError("scan.system: unknown system '" + name + "'");
}

int cmd_scan(const json& config) {
  require_keys(config,
               {"scenario", "seed", "horizon", "n_steps", "model", "scan",
                "output_dir", "emit_svg"},
               "scan config");
  const json& scan = config.at("scan");
  require_keys(scan,
               {"mode", "system", "lambdas", "G", "A", "matrix_id", "gammas",
                "epsilons", "deltas", "n_paths", "functionals", "checkpoints",
                "mesh", "osc_mesh", "auto_coarsen", "expect"},
               "scan");
  double horizon = config.value("horizon", 1.0);
  int n_steps = config.value("n_steps", 1024);
  std::uint64_t seed = config.value("seed", std::uint64_t(0));
  fs::path dir = resolve_output_dir(config);
  write_manifest(dir, "scan", config);

  skm1::ScanConfig sc = parse_scan_config(scan, seed);
  skm1::CoupledSystem system = parse_system(scan, config, n_steps, horizon);
  std::string mode_name = scan.value("mode", "strong");
  skm1::DmMode mode =
      mode_name == "product" ? skm1::DmMode::Product : skm1::DmMode::Strong;
  if (mode_name != "product" && mode_name != "strong")
    throw ConfigError("scan.mode: expected 'strong' or 'product'");

  skm1::ScanBundle bundle = skm1::run_scan_bundle(sc, system, mode);
  std::vector<skm1::EstimateRow> rows = bundle.fdd.rows;
  rows.insert(rows.end(), bundle.oscillation.rows.begin(),
              bundle.oscillation.rows.end());
  rows.insert(rows.end(), bundle.dm.rows.begin(), bundle.dm.rows.end());
  skm1::write_report_csv(rows, (dir / "report.csv").string());

  json summary;
  summary["fdd"] = report_summary(bundle.fdd);
  summary["oscillation"] = report_summary(bundle.oscillation);
  summary["dm"] = report_summary(bundle.dm);
  summary["theorem_consistent"] = bundle.theorem_consistent;
  std::ofstream out(dir / "summary.json");
  out << summary.dump(2) << "\n";
  std::cout << "fdd " << verdict_name(bundle.fdd.verdict) << ", oscillation "
            << verdict_name(bundle.oscillation.verdict) << ", dm "
            << verdict_name(bundle.dm.verdict) << "\n";

  bool ok = bundle.theorem_consistent;
  if (scan.contains("expect")) {
    for (const auto& [key, value] : scan.at("expect").items()) {
      std::string want = value.get<std::string>();
      std::string got = key == "fdd"  ? verdict_name(bundle.fdd.verdict)
                        : key == "dm" ? verdict_name(bundle.dm.verdict)
                                      : verdict_name(bundle.oscillation.verdict);
      if (got != want) {
        std::cout << "assertion failed: " << key << " expected " << want << " got "
                  << got << "\n";
        ok = false;
      }
    }
  }
  return ok ? 0 : 1;
}

int cmd_validate(const json& config) {
  require_keys(config,
               {"scenario", "seed", "horizon", "n_steps", "model", "kernel",
                "validate", "output_dir", "emit_svg"},
               "validate config");
  const json& val = config.at("validate");
  require_keys(val, {"vs", "betas", "n_paths", "maximal"}, "validate");
  skm1::LevyModel model = parse_model(config.at("model"));
  double horizon = config.value("horizon", 1.0);
  int n_steps = config.value("n_steps", 512);
  std::uint64_t seed = config.value("seed", std::uint64_t(0));
  skm1::Kernel kernel = parse_kernel(config.at("kernel"), model.dim(), horizon);
  fs::path dir = resolve_output_dir(config);
  write_manifest(dir, "validate", config);

  std::vector<skm1::Vec> vs;
  for (const json& v : val.at("vs")) vs.push_back(parse_vec(v, "validate.vs"));
  std::vector<double> betas = val.at("betas").get<std::vector<double>>();
  int n_paths = val.value("n_paths", 100000);

  std::vector<skm1::CharFnRow> rows =
      skm1::charfn_validate(kernel, model, vs, betas, n_paths, n_steps, seed);
  bool ok = true;
  std::ofstream out(dir / "validation.csv");
  out << "beta,empirical_re,empirical_im,analytic_re,analytic_im,gap,mc_stderr,pass\n";
  for (const skm1::CharFnRow& r : rows) {
    ok = ok && r.pass;
    out << skm1::format_double(r.beta) << ","
        << skm1::format_double(r.empirical.real()) << ","
        << skm1::format_double(r.empirical.imag()) << ","
        << skm1::format_double(r.analytic.real()) << ","
        << skm1::format_double(r.analytic.imag()) << ","
        << skm1::format_double(r.gap) << "," << skm1::format_double(r.mc_stderr)
        << "," << (r.pass ? 1 : 0) << "\n";
    std::cout << "beta " << r.beta << " gap " << r.gap << " (4se "
              << 4 * r.mc_stderr << ") " << (r.pass ? "pass" : "FAIL") << "\n";
  }
  if (val.contains("maximal")) {
    const json& mx = val.at("maximal");
    require_keys(mx, {"alpha_cut", "n_paths", "n_steps"}, "validate.maximal");
    skm1::MaximalAuditRow row = skm1::maximal_inequality_audit(
        kernel, model, mx.at("alpha_cut").get<double>(), mx.value("n_paths", 200),
        mx.value("n_steps", 200), horizon, seed);
    ok = ok && row.pass;
    std::cout << "maximal audit: empirical " << row.empirical << " bound "
              << row.bound << " " << (row.pass ? "pass" : "FAIL") << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_figure1(const json& config) {
  require_keys(config,
               {"scenario", "seed", "gamma", "alpha", "n_steps", "output_dir",
                "emit_svg"},
               "figure1 config");
  double gamma = config.value("gamma", 1000.0);
  double alpha = config.value("alpha", 1.5);
  int n_steps = config.value("n_steps", 4096);
  std::uint64_t seed = config.value("seed", std::uint64_t(0));
  fs::path dir = resolve_output_dir(config);
  write_manifest(dir, "figure1", config);
  for (int j = 1; j <= 4; ++j) {
    skm1::CadlagPath path = skm1::figure1_path(j, gamma, alpha, seed, n_steps);
    std::string base = "ax_gamma_A" + std::to_string(j);
    skm1::write_path_csv(path, (dir / (base + ".csv")).string());
    if (config.value("emit_svg", true))
      skm1::write_path_svg(path, (dir / (base + ".svg")).string());
    std::cout << "wrote " << (dir / (base + ".csv")).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skorokhod M1 distances and Levy-driven convolution diagnostics"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  std::string file_a, file_b, matching_out;
  double mesh = 0.0;

  CLI::App* simulate = app.add_subcommand("simulate", "sample a model or convolution");
  simulate->add_option("--config", config_file, "JSON config")->required();
  simulate->add_option("--set", overrides, "override config key=value");

  CLI::App* distance = app.add_subcommand("distance", "M1 distance of two path CSVs");
  distance->add_option("file_a", file_a)->required();
  distance->add_option("file_b", file_b)->required();
  distance->add_option("--mesh", mesh, "densification mesh (default span/2048)");
  distance->add_option("--matching", matching_out, "matching certificate CSV");

  CLI::App* scan = app.add_subcommand("scan", "convergence scans over a gamma grid");
  scan->add_option("--config", config_file, "JSON config")->required();
  scan->add_option("--set", overrides, "override config key=value");

  CLI::App* validate = app.add_subcommand("validate", "characteristic-function table");
  validate->add_option("--config", config_file, "JSON config")->required();
  validate->add_option("--set", overrides, "override config key=value");

  CLI::App* figure1 = app.add_subcommand("figure1", "four 2-d convolution panels");
  figure1->add_option("--config", config_file, "JSON config")->required();
  figure1->add_option("--set", overrides, "override config key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (distance->parsed()) return cmd_distance(file_a, file_b, mesh, matching_out);
    json config = resolved_config_with_overrides(config_file, overrides);
    if (simulate->parsed()) return cmd_simulate(config);
    if (scan->parsed()) return cmd_scan(config);
    if (validate->parsed()) return cmd_validate(config);
    if (figure1->parsed()) return cmd_figure1(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
