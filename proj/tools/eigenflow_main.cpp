// eigenflow: principal-eigenvalue solver and certifier for linear and
// semilinear (HJB-type) elliptic operators. One problem-spec file plus flags
// per run; every command writes a JSON report (and CSV where tabular) with an
// embedded run manifest.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eigenflow/certify.hpp"
#include "eigenflow/errors.hpp"
#include "eigenflow/exhaust.hpp"
#include "eigenflow/hjb.hpp"
#include "eigenflow/mc.hpp"
#include "eigenflow/perron.hpp"
#include "eigenflow/version.hpp"

namespace ef = eigenflow;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

std::vector<std::vector<double>> parse_points(const std::string& text, int dim) {
  std::vector<std::vector<double>> pts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    auto p = parse_list(item);
    if (static_cast<int>(p.size()) != dim)
      throw ef::InvalidArgument("point '" + item + "' does not have dimension " +
                                std::to_string(dim));
    pts.push_back(std::move(p));
  }
  return pts;
}

struct RunContext {
  std::string spec_path;
  std::string out_dir = ".";
  int threads = 0;
  double tol = 1e-10;
  int sweeps = 200;
  std::string command;
  std::vector<std::string> argv_copy;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  ef::OperatorSpec load_and_validate(double sample_radius) const {
    ef::OperatorSpec spec = ef::OperatorSpec::load(spec_path);
    ef::validate_spec(spec, sample_radius, 2048);
    return spec;
  }

  json manifest() const {
    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string flags;
    for (const auto& a : argv_copy) {
      if (!flags.empty()) flags += ' ';
      flags += a;
    }
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(spec_path)));
    return json{{"spec_path", spec_path},
                {"spec_hash_fnv1a64", std::string(hash)},
                {"command", command},
                {"flags", flags},
                {"version", ef::kVersion},
                {"rng", ef::kRngName},
                {"threads", threads},
                {"wall_time_s", wall},
                {"outputs", outputs}};
  }

  std::string out_path(const std::string& name) const {
    std::filesystem::create_directories(out_dir);
    return (std::filesystem::path(out_dir) / name).string();
  }

  void write_text(const std::string& name, const std::string& text) {
    std::string path = out_path(name);
    std::ofstream f(path);
    f << text;
    outputs.push_back(path);
  }

  void write_report(const std::string& name, json j) {
    std::string path = out_path(name);
    outputs.push_back(path);
    j["manifest"] = manifest();
    std::ofstream f(path);
    f << j.dump(2) << "\n";
  }
};

ef::SpacingRule spacing_rule(double h, double h_ratio) {
  if (h > 0) return ef::fixed_spacing(h);
  if (h_ratio > 0) return ef::proportional_spacing(h_ratio);
  throw ef::InvalidArgument("provide --h or --h-ratio");
}

int cmd_eig_dirichlet(RunContext& ctx, double R, double h, const std::string& shape,
                      bool dump_psi, bool dump_matrices) {
  ef::OperatorSpec spec = ctx.load_and_validate(R);
  ef::Grid grid = ef::Grid::build(spec.dimension, R, h, ef::shape_from_string(shape));
  ef::DiscreteOperator op = ef::assemble(spec, grid);
  ef::SemilinearEigenResult eig = ef::policy_iteration(op, ctx.tol, ctx.sweeps);

  std::string psi_csv;
  if (dump_psi) {
    std::string csv;
    for (int k = 0; k < grid.dim(); ++k) csv += "x" + std::to_string(k) + ",";
    csv += "psi\n";
    double x[3];
    for (int i = 0; i < grid.size(); ++i) {
      grid.coord(i, x);
      for (int k = 0; k < grid.dim(); ++k) csv += fmt17(x[k]) + ",";
      csv += fmt17(eig.pair.psi[i]) + "\n";
    }
    ctx.write_text("eig_dirichlet_psi.csv", csv);
  }
  if (dump_matrices) {
    json dump;
    for (int k = 0; k < op.num_controls(); ++k) {
      json rows = json::array();
      for (int i = 0; i < op.size(); ++i) {
        json row = json::array();
        for (ef::SparseRowMat::InnerIterator it(op.control_matrices[k], i); it; ++it)
          row.push_back({{"j", it.col()}, {"v", it.value()}});
        rows.push_back(row);
      }
      dump.push_back(rows);
    }
    ctx.write_report("eig_dirichlet_matrices.json", json{{"matrices", dump}});
  }

  json report{{"lambda", eig.pair.lambda},
              {"residual", eig.pair.residual},
              {"sweeps", eig.sweeps},
              {"lambda_history", eig.lambda_history},
              {"cycled", eig.cycled},
              {"R", R},
              {"h_effective", grid.spacing()},
              {"N", grid.size()},
              {"shape", shape},
              {"sense", ef::to_string(spec.sense)}};
  ctx.write_report("eig_dirichlet.json", report);
  std::cout << "lambda = " << fmt17(eig.pair.lambda) << "  (residual " << fmt17(eig.pair.residual)
            << ", sweeps " << eig.sweeps << ", N " << grid.size() << ")\n";
  return 0;
}

int cmd_exhaust(RunContext& ctx, const std::string& radii_csv, double h, double h_ratio,
                const std::string& shape) {
  auto radii = parse_list(radii_csv);
  ef::OperatorSpec spec = ctx.load_and_validate(radii.empty() ? 1.0 : radii.back());
  ef::ExhaustionResult result = ef::lambda_sequence(spec, radii, spacing_rule(h, h_ratio),
                                                    ctx.tol, ef::shape_from_string(shape),
                                                    ctx.threads);
  ctx.write_text("exhaust.csv", result.to_csv());
  ctx.write_report("exhaust.json", result.to_json());
  std::cout << "lambda_est = " << fmt17(result.lambda_est) << "  (model " << result.model
            << ", monotone " << (result.monotone ? "yes" : "no") << ")\n";
  for (const auto& row : result.sequence) {
    if (row.failed)
      std::cout << "  R=" << row.radius << "  FAILED: " << row.error << "\n";
    else
      std::cout << "  R=" << row.radius << "  lambda=" << fmt17(row.lambda) << "\n";
  }
  return result.all_converged ? 0 : 1;
}

int cmd_certify(RunContext& ctx, const std::string& psi, const std::string& kind, double R,
                double h, const std::string& shape) {
  ef::OperatorSpec spec = ctx.load_and_validate(R);
  ef::Grid grid = ef::Grid::build(spec.dimension, R, h, ef::shape_from_string(shape));
  ef::Expr psi_expr = ef::Expr::parse(psi);
  ef::Certificate cert;
  if (kind == "lower") {
    ef::DiscreteOperator op = ef::assemble(spec, grid);
    cert = ef::cw_lower(op, psi_expr);
  } else if (kind == "upper") {
    cert = ef::cw_upper(spec, grid, psi_expr);
  } else {
    throw ef::InvalidArgument("--kind must be lower or upper");
  }
  ctx.write_report("certify.json", cert.to_json());
  std::cout << kind << " bound = " << fmt17(cert.bound) << "  (quotient range ["
            << fmt17(cert.quotient_min) << ", " << fmt17(cert.quotient_max) << "])\n";
  return 0;
}

int cmd_minimax(RunContext& ctx, double R, double h, const std::string& shape, int mu_steps,
                double minimax_tol) {
  ef::OperatorSpec spec = ctx.load_and_validate(R);
  if (spec.sense != ef::Sense::Max)
    throw ef::InvalidArgument("minimax requires a max-sense spec");
  ef::Grid grid = ef::Grid::build(spec.dimension, R, h, ef::shape_from_string(shape));
  ef::DiscreteOperator op = ef::assemble(spec, grid);
  ef::SemilinearEigenResult eig = ef::policy_iteration(op, ctx.tol, ctx.sweeps);
  ef::MinimaxResult mm = ef::minimax_measure(op, mu_steps, minimax_tol);
  bool agree = std::abs(mm.value - eig.pair.lambda) <= 10 * minimax_tol;
  ctx.write_report("minimax.json", json{{"value", mm.value},
                                        {"lower", mm.lower},
                                        {"upper", mm.upper},
                                        {"gap", mm.gap},
                                        {"outer_iterations", mm.outer_iterations},
                                        {"lambda_reference", eig.pair.lambda},
                                        {"agree", agree}});
  std::cout << "minimax value = " << fmt17(mm.value) << "  vs lambda = "
            << fmt17(eig.pair.lambda) << "  (gap " << fmt17(mm.gap) << ")\n";
  return agree ? 0 : 1;
}

int cmd_eigencurve(RunContext& ctx, const std::string& lambdas_csv,
                   const std::string& radii_csv, double h, const std::string& shape) {
  auto lambdas = parse_list(lambdas_csv);
  auto radii = parse_list(radii_csv);
  ef::OperatorSpec spec = ctx.load_and_validate(radii.back());
  std::vector<ef::Grid> grids;
  for (double R : radii)
    grids.push_back(ef::Grid::build(spec.dimension, R, h, ef::shape_from_string(shape)));

  std::string csv = "lambda,interior_residual,min_phi,positive\n";
  json rows = json::array();
  bool all_ok = true;
  for (double lam : lambdas) {
    try {
      ef::SupercriticalEigenfunction fn =
          ef::eigenfunction_at_lambda(spec, lam, grids, ctx.tol);
      csv += fmt17(lam) + "," + fmt17(fn.interior_residual) + "," +
             fmt17(fn.phi.minCoeff()) + "," + (fn.positive ? "1" : "0") + "\n";
      rows.push_back(json{{"lambda", lam},
                          {"interior_residual", fn.interior_residual},
                          {"lambda_dirichlet", fn.lambda_dirichlet},
                          {"annulus_inner", fn.annulus_inner},
                          {"positive", fn.positive},
                          {"pair_residuals", fn.pair_residuals}});
      std::cout << "lambda=" << fmt17(lam) << "  residual=" << fmt17(fn.interior_residual)
                << "  positive=" << (fn.positive ? "yes" : "no") << "\n";
    } catch (const ef::Error& e) {
      all_ok = false;
      rows.push_back(json{{"lambda", lam}, {"error", e.what()}, {"kind", e.kind()}});
      std::cout << "lambda=" << fmt17(lam) << "  FAILED: " << e.what() << "\n";
    }
  }
  ctx.write_text("eigencurve.csv", csv);
  ctx.write_report("eigencurve.json", json{{"points", rows}});
  return all_ok ? 0 : 1;
}

int cmd_perturb(RunContext& ctx, const std::string& m_csv, double delta,
                const std::string& radii_csv, double h, double h_ratio,
                const std::string& shape, std::optional<double> tail) {
  auto ms = parse_list(m_csv);
  auto radii = parse_list(radii_csv);
  ef::OperatorSpec spec = ctx.load_and_validate(radii.back());
  auto rule = spacing_rule(h, h_ratio);
  auto shp = ef::shape_from_string(shape);

  ef::ExhaustionResult base = ef::lambda_sequence(spec, radii, rule, ctx.tol, shp, ctx.threads);
  std::string csv = "m,lambda_est,model,monotone\n";
  json rows = json::array();
  bool ok = base.all_converged;
  for (double m : ms) {
    ef::OperatorSpec pert = ef::perturb_potential(spec, m, delta, tail);
    ef::ExhaustionResult res = ef::lambda_sequence(pert, radii, rule, ctx.tol, shp, ctx.threads);
    ok = ok && res.all_converged;
    csv += fmt17(m) + "," + fmt17(res.lambda_est) + "," + res.model + "," +
           (res.monotone ? "1" : "0") + "\n";
    rows.push_back(json{{"m", m},
                        {"lambda_est", res.lambda_est},
                        {"exhaust", res.to_json()},
                        {"c_m", pert.c.str()}});
    std::cout << "m=" << m << "  lambda_est=" << fmt17(res.lambda_est) << "\n";
  }
  std::cout << "unperturbed lambda_est=" << fmt17(base.lambda_est) << "\n";
  ctx.write_text("perturb.csv", csv);
  ctx.write_report("perturb.json",
                   json{{"delta", delta},
                        {"unperturbed", base.to_json()},
                        {"perturbed", rows}});
  return ok ? 0 : 1;
}

int cmd_mc_verify(RunContext& ctx, double R, double h, double r, const std::string& points,
                  int paths, double dt, std::uint64_t seed, const std::string& shape) {
  ef::OperatorSpec spec = ctx.load_and_validate(R);
  ef::Grid grid = ef::Grid::build(spec.dimension, R, h, ef::shape_from_string(shape));
  ef::DiscreteOperator op = ef::assemble(spec, grid);
  ef::SemilinearEigenResult eig = ef::policy_iteration(op, ctx.tol, ctx.sweeps);

  ef::PathConfig cfg;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.n_paths = paths;
  cfg.threads = ctx.threads;
  cfg.r = r;
  cfg.t_max = 1e3;

  auto pts = parse_points(points, spec.dimension);
  if (pts.empty()) throw ef::InvalidArgument("no evaluation points given");
  std::string csv = "point,grid_value,estimate,stderr,allowance,pass\n";
  json rows = json::array();
  bool all_pass = true;
  for (const auto& p : pts) {
    ef::FeynmanKacReport rep =
        ef::feynman_kac_verify(spec, grid, eig.policy, eig.pair.lambda, eig.pair.psi, p, r, cfg);
    all_pass = all_pass && rep.pass;
    std::string pstr;
    for (std::size_t k = 0; k < p.size(); ++k) pstr += (k ? " " : "") + fmt17(p[k]);
    csv += pstr + "," + fmt17(rep.grid_value) + "," + fmt17(rep.estimate) + "," +
           fmt17(rep.fine.stderr_) + "," + fmt17(rep.allowance) + "," +
           (rep.pass ? "1" : "0") + "\n";
    rows.push_back(rep.to_json(cfg));
    std::cout << "x=(" << pstr << ")  grid=" << fmt17(rep.grid_value) << "  mc="
              << fmt17(rep.estimate) << "  " << (rep.pass ? "PASS" : "FAIL") << "\n";
  }
  ctx.write_text("mc_verify.csv", csv);
  ctx.write_report("mc_verify.json",
                   json{{"lambda", eig.pair.lambda}, {"points", rows}});
  return all_pass ? 0 : 1;
}

int cmd_risk(RunContext& ctx, double T, int paths, double dt, std::uint64_t seed,
             int policy_index, const std::string& policy_exprs, const std::string& x0_csv,
             double sample_radius, const std::string& compare_radii) {
  ef::OperatorSpec spec = ctx.load_and_validate(sample_radius);
  ef::PathConfig cfg;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.n_paths = paths;
  cfg.threads = ctx.threads;
  cfg.t_max = T;

  ef::MarkovPolicy policy = [&] {
    if (!policy_exprs.empty()) {
      std::vector<ef::Expr> comps;
      std::stringstream ss(policy_exprs);
      std::string item;
      while (std::getline(ss, item, ';'))
        if (!item.empty()) comps.push_back(ef::Expr::parse(item));
      if (static_cast<int>(comps.size()) != spec.controls.dim)
        throw ef::InvalidArgument("policy expression count must match control dimension");
      return ef::MarkovPolicy::from_exprs(std::move(comps));
    }
    if (policy_index < 0 || policy_index >= spec.controls.size())
      throw ef::InvalidArgument("policy index out of range");
    return ef::MarkovPolicy::constant(spec.controls.points[policy_index]);
  }();

  std::vector<double> x0 = x0_csv.empty() ? std::vector<double>(spec.dimension, 0.0)
                                          : parse_list(x0_csv);
  if (static_cast<int>(x0.size()) != spec.dimension)
    throw ef::InvalidArgument("--x0 dimension mismatch");

  ef::MCEstimate est = ef::risk_sensitive_estimate(spec, policy, x0, T, cfg);
  json report = est.to_json(cfg);
  report["horizon"] = T;
  report["policy"] = policy.describe();
  report["x0"] = x0;
  std::cout << "risk-sensitive estimate = " << fmt17(est.mean) << " +- " << fmt17(est.stderr_)
            << "  (T=" << T << ", n=" << est.n_paths << ")\n";
  if (!compare_radii.empty()) {
    ef::ExhaustionResult ex = ef::lambda_sequence(spec, parse_list(compare_radii),
                                                  ef::proportional_spacing(1.0 / 400.0),
                                                  ctx.tol, ef::GridShape::Ball, ctx.threads);
    report["lambda_est"] = ex.lambda_est;
    report["exhaust"] = ex.to_json();
    std::cout << "generalized eigenvalue estimate = " << fmt17(ex.lambda_est)
              << "  (gap " << fmt17(est.mean - ex.lambda_est) << ")\n";
  }
  ctx.write_report("risk.json", report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eigenflow: principal eigenvalues of linear and semilinear elliptic "
               "operators, with certificates and Monte Carlo verification"};
  app.require_subcommand(1);

  RunContext ctx;
  for (int i = 0; i < argc; ++i) ctx.argv_copy.push_back(argv[i]);

  std::uint64_t default_seed = 0;
  if (const char* env = std::getenv("EIGENFLOW_SEED")) default_seed = std::strtoull(env, nullptr, 10);

  app.set_help_flag("--help", "print help");  // frees -h for the spacing flag
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--spec", ctx.spec_path, "problem spec JSON file")->required();
    sub->add_option("--out-dir", ctx.out_dir, "report output directory");
    sub->add_option("--threads", ctx.threads, "worker cap (0 = hardware)");
    sub->add_option("--tol", ctx.tol, "solver tolerance");
    sub->add_option("--sweeps", ctx.sweeps, "policy iteration sweep cap");
  };

  // eig-dirichlet
  double R = 1.0, h = 0.01;
  std::string shape = "ball";
  bool dump_psi = false, dump_matrices = false;
  auto* eig = app.add_subcommand("eig-dirichlet", "Dirichlet principal eigenpair on one domain");
  add_common(eig);
  eig->add_option("--R", R, "domain half-width / radius")->required();
  eig->add_option("--h", h, "grid spacing (upper bound)")->required();
  eig->add_option("--shape", shape, "box or ball");
  eig->add_flag("--dump-psi", dump_psi, "write the eigenfunction as CSV");
  eig->add_flag("--dump-matrices", dump_matrices, "debug dump of assembled matrices");

  // exhaust
  std::string radii_csv;
  double h_ratio = 0.0, seq_h = 0.0;
  auto* exh = app.add_subcommand("exhaust", "eigenvalues on growing domains + extrapolation");
  add_common(exh);
  exh->add_option("--radii", radii_csv, "comma-separated radii")->required();
  exh->add_option("--h", seq_h, "fixed grid spacing");
  exh->add_option("--h-ratio", h_ratio, "spacing as a fraction of R");
  exh->add_option("--shape", shape, "box or ball");

  // certify
  std::string psi, kind = "upper";
  auto* cert = app.add_subcommand("certify", "Collatz-Wielandt certificate from a test function");
  add_common(cert);
  cert->add_option("--psi", psi, "test function expression")->required();
  cert->add_option("--kind", kind, "lower or upper")->required();
  cert->add_option("--R", R, "domain radius")->required();
  cert->add_option("--h", h, "grid spacing")->required();
  cert->add_option("--shape", shape, "box or ball");

  // minimax
  int mu_steps = 4000;
  double minimax_tol = 1e-4;
  auto* mm = app.add_subcommand("minimax", "measure-side saddle value vs the eigenvalue");
  add_common(mm);
  mm->add_option("--R", R, "domain radius")->required();
  mm->add_option("--h", h, "grid spacing")->required();
  mm->add_option("--mu-steps", mu_steps, "outer mirror-ascent budget");
  mm->add_option("--minimax-tol", minimax_tol, "target duality gap");
  mm->add_option("--shape", shape, "box or ball");

  // eigencurve
  std::string lambdas_csv;
  auto* ecv = app.add_subcommand("eigencurve", "positive eigenfunctions at supercritical levels");
  add_common(ecv);
  ecv->add_option("--lambda", lambdas_csv, "comma-separated levels")->required();
  ecv->add_option("--radii", radii_csv, "nested domain radii")->required();
  ecv->add_option("--h", h, "grid spacing")->required();
  ecv->add_option("--shape", shape, "box or ball");

  // perturb
  std::string m_csv;
  double delta = 0.1;
  double tail_value = std::numeric_limits<double>::quiet_NaN();
  auto* prt = app.add_subcommand("perturb", "potential cutoff sequence");
  add_common(prt);
  prt->add_option("--m", m_csv, "comma-separated cutoff radii")->required();
  prt->add_option("--delta", delta, "offset added outside the cutoff");
  prt->add_option("--radii", radii_csv, "exhaustion radii")->required();
  prt->add_option("--h", seq_h, "fixed grid spacing");
  prt->add_option("--h-ratio", h_ratio, "spacing as a fraction of R");
  prt->add_option("--tail", tail_value, "potential tail value (default: sampled estimate)");
  prt->add_option("--shape", shape, "box or ball");

  // mc-verify
  double r_hit = 1.0, dt = 1e-3;
  int paths = 20000;
  std::uint64_t seed = default_seed;
  std::string points;
  auto* mcv = app.add_subcommand("mc-verify", "exit-time representation check by simulation");
  add_common(mcv);
  mcv->add_option("--R", R, "grid radius")->required();
  mcv->add_option("--h", h, "grid spacing")->required();
  mcv->add_option("--r", r_hit, "inner hitting radius");
  mcv->add_option("--points", points, "semicolon-separated evaluation points")->required();
  mcv->add_option("--paths", paths, "paths per estimate");
  mcv->add_option("--dt", dt, "Euler step");
  mcv->add_option("--seed", seed, "RNG seed (default from EIGENFLOW_SEED)");
  mcv->add_option("--shape", shape, "box or ball");

  // risk
  double horizon = 1.0;
  int policy_index = 0;
  std::string policy_exprs, x0_csv;
  double sample_radius = 5.0;
  auto* rsk = app.add_subcommand("risk", "finite-horizon risk-sensitive value estimate");
  add_common(rsk);
  rsk->add_option("--T", horizon, "horizon")->required();
  rsk->add_option("--paths", paths, "path count");
  rsk->add_option("--dt", dt, "Euler step");
  rsk->add_option("--seed", seed, "RNG seed (default from EIGENFLOW_SEED)");
  rsk->add_option("--policy-index", policy_index, "constant control from the control set");
  rsk->add_option("--policy-expr", policy_exprs, "semicolon-separated control expressions");
  rsk->add_option("--x0", x0_csv, "start point (comma-separated, default origin)");
  rsk->add_option("--sample-radius", sample_radius, "validation sampling radius");
  std::string compare_radii;
  rsk->add_option("--compare-radii", compare_radii,
                  "also report the exhaustion estimate over these radii");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eig->parsed()) {
      ctx.command = "eig-dirichlet";
      return cmd_eig_dirichlet(ctx, R, h, shape, dump_psi, dump_matrices);
    }
    if (exh->parsed()) {
      ctx.command = "exhaust";
      return cmd_exhaust(ctx, radii_csv, seq_h, h_ratio, shape);
    }
    if (cert->parsed()) {
      ctx.command = "certify";
      return cmd_certify(ctx, psi, kind, R, h, shape);
    }
    if (mm->parsed()) {
      ctx.command = "minimax";
      return cmd_minimax(ctx, R, h, shape, mu_steps, minimax_tol);
    }
    if (ecv->parsed()) {
      ctx.command = "eigencurve";
      return cmd_eigencurve(ctx, lambdas_csv, radii_csv, h, shape);
    }
    if (prt->parsed()) {
      ctx.command = "perturb";
      std::optional<double> tail;
      if (!std::isnan(tail_value)) tail = tail_value;
      return cmd_perturb(ctx, m_csv, delta, radii_csv, seq_h, h_ratio, shape, tail);
    }
    if (mcv->parsed()) {
      ctx.command = "mc-verify";
      return cmd_mc_verify(ctx, R, h, r_hit, points, paths, dt, seed, shape);
    }
    if (rsk->parsed()) {
      ctx.command = "risk";
      return cmd_risk(ctx, horizon, paths, dt, seed, policy_index, policy_exprs, x0_csv,
                      sample_radius, compare_radii);
    }
  } catch (const ef::Error& e) {
    json err{{"error", {{"type", e.kind()}, {"message", e.what()}, {"command", ctx.command}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err{{"error", {{"type", "Internal"}, {"message", e.what()}, {"command", ctx.command}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
