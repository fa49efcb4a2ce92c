#include "eigenflow/mc.hpp"

#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "eigenflow/errors.hpp"
#include "eigenflow/parallel.hpp"

namespace eigenflow {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x51ed270b7a04ULL));
}

MarkovPolicy MarkovPolicy::constant(std::vector<double> u) {
  MarkovPolicy p;
  p.dim_ = static_cast<int>(u.size());
  p.description_ = "constant";
  p.fn_ = [u = std::move(u)](std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i];
  };
  return p;
}

MarkovPolicy MarkovPolicy::from_grid(const Grid& grid, Policy indices,
                                     const ControlSet& controls) {
  if (static_cast<int>(indices.size()) != grid.size())
    throw InvalidArgument("policy size does not match grid");
  MarkovPolicy p;
  p.dim_ = controls.dim;
  p.description_ = "grid-policy(nearest-node)";
  p.fn_ = [grid, indices = std::move(indices), pts = controls.points](
              std::span<const double> x, std::span<double> out) {
    int node = grid.nearest_interior(x);
    const auto& u = pts[indices[node]];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i];
  };
  return p;
}

MarkovPolicy MarkovPolicy::from_exprs(std::vector<Expr> components) {
  MarkovPolicy p;
  p.dim_ = static_cast<int>(components.size());
  std::string desc = "expr(";
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) desc += "; ";
    desc += components[i].str();
  }
  p.description_ = desc + ")";
  p.fn_ = [components = std::move(components)](std::span<const double> x,
                                               std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = components[i].eval(x);
  };
  return p;
}

void MarkovPolicy::control_at(std::span<const double> x, std::span<double> u) const {
  if (fn_) fn_(x, u);
}

namespace {

// sigma = sqrt(2a) by dense Cholesky; cached when a has no x-dependence.
struct DiffusionField {
  const OperatorSpec& spec;
  bool constant;
  Eigen::Matrix3d cached;

  explicit DiffusionField(const OperatorSpec& s) : spec(s) {
    constant = true;
    for (const auto& row : spec.a)
      for (const auto& e : row)
        if (e.depends_on_coords()) constant = false;
    if (constant) {
      double origin[3] = {0, 0, 0};
      cached = factor(std::span<const double>(origin, spec.dimension));
    }
  }

  Eigen::Matrix3d factor(std::span<const double> x) const {
    const int d = spec.dimension;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = spec.a[i][j].eval(x);
    Eigen::LLT<Eigen::MatrixXd> llt(2.0 * a);
    if (llt.info() != Eigen::Success)
      throw DegenerateDiffusion("2a(x) is not positive definite along a path");
    Eigen::Matrix3d out = Eigen::Matrix3d::Identity();
    out.topLeftCorner(d, d) = llt.matrixL();
    return out;
  }

  Eigen::Matrix3d at(std::span<const double> x) const {
    return constant ? cached : factor(x);
  }
};

double norm2(const double* x, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += x[k] * x[k];
  return std::sqrt(s);
}

}  // namespace

PathSummary simulate_exit(const OperatorSpec& spec, const MarkovPolicy& policy,
                          std::span<const double> x0, double r_inner, double r_outer,
                          const PathConfig& cfg, std::uint64_t path_index) {
  if (!(cfg.dt > 0)) throw InvalidArgument("dt must be positive");
  const int d = spec.dimension;
  const int m = spec.controls.dim;
  DiffusionField diffusion(spec);
  const bool track_c = !spec.c.is_constant() || spec.c.eval(std::span<const double>(x0)) != 0.0;

  std::mt19937_64 rng(derive_stream_seed(cfg.seed, path_index));
  std::normal_distribution<double> gauss(0.0, 1.0);

  double x[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) x[k] = x0[k];
  std::vector<double> u(m, 0.0);
  const double sqrt_dt = std::sqrt(cfg.dt);

  PathSummary out;
  double t = 0.0, acc = 0.0;
  for (;;) {
    double r = norm2(x, d);
    if (r <= r_inner || r >= r_outer) break;
    if (t >= cfg.t_max) {
      out.truncated = true;
      break;
    }
    std::span<const double> xs(x, d);
    policy.control_at(xs, u);
    if (track_c) acc += spec.c.eval(xs, u) * cfg.dt;

    Eigen::Matrix3d sigma = diffusion.at(xs);
    double xi[3];
    for (int k = 0; k < d; ++k) xi[k] = gauss(rng);
    for (int k = 0; k < d; ++k) {
      double drift = spec.b[k].eval(xs, u);
      double noise = 0.0;
      for (int l = 0; l <= k; ++l) noise += sigma(k, l) * xi[l];  // lower triangular
      x[k] += drift * cfg.dt + noise * sqrt_dt;
    }
    t += cfg.dt;
  }
  out.exit_time = t;
  out.integral_c = acc;
  for (int k = 0; k < d; ++k) out.exit_point[k] = x[k];
  return out;
}

nlohmann::json MCEstimate::to_json(const PathConfig& cfg) const {
  return nlohmann::json{{"estimate", mean},   {"stderr", stderr_}, {"n_paths", n_paths},
                        {"truncated", truncated}, {"dt", cfg.dt},  {"seed", cfg.seed},
                        {"rng", kRngName}};
}

namespace {

// Ordered reduction over per-path values: deterministic for any worker count.
MCEstimate reduce_estimate(const std::vector<double>& values, int truncated) {
  MCEstimate est;
  est.n_paths = static_cast<int>(values.size());
  est.truncated = truncated;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / est.n_paths;
  double ss = 0.0;
  for (double v : values) ss += (v - est.mean) * (v - est.mean);
  double var = est.n_paths > 1 ? ss / (est.n_paths - 1) : 0.0;
  est.stderr_ = std::sqrt(var / est.n_paths);
  return est;
}

}  // namespace

MCEstimate mean_exit_time(const OperatorSpec& spec, const MarkovPolicy& policy,
                          std::span<const double> x0, const PathConfig& cfg) {
  std::vector<double> tau(cfg.n_paths);
  std::vector<char> trunc(cfg.n_paths, 0);
  std::vector<double> start(x0.begin(), x0.end());
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    PathSummary s = simulate_exit(spec, policy, start, -1.0, cfg.r, cfg, i);
    tau[i] = s.exit_time;
    trunc[i] = s.truncated;
  });
  int truncated = 0;
  for (char c : trunc) truncated += c;
  return reduce_estimate(tau, truncated);
}

RichardsonEstimate mean_exit_time_richardson(const OperatorSpec& spec,
                                             const MarkovPolicy& policy,
                                             std::span<const double> x0,
                                             const PathConfig& cfg) {
  RichardsonEstimate out;
  out.coarse = mean_exit_time(spec, policy, x0, cfg);
  PathConfig fine_cfg = cfg;
  fine_cfg.dt = cfg.dt / 4.0;
  fine_cfg.seed = derive_stream_seed(cfg.seed, 0x51c4a2d50ULL);
  out.fine = mean_exit_time(spec, policy, x0, fine_cfg);
  // Exit-detection bias ~ C sqrt(dt): halving sqrt(dt) doubles the lever arm.
  out.extrapolated = 2.0 * out.fine.mean - out.coarse.mean;
  out.stderr_ = std::sqrt(4.0 * out.fine.stderr_ * out.fine.stderr_ +
                          out.coarse.stderr_ * out.coarse.stderr_);
  return out;
}

nlohmann::json FeynmanKacReport::to_json(const PathConfig& cfg) const {
  return nlohmann::json{{"point", point},
                        {"grid_value", grid_value},
                        {"estimate", estimate},
                        {"stderr", fine.stderr_},
                        {"allowance", allowance},
                        {"pass", pass},
                        {"coarse", coarse.to_json(cfg)},
                        {"fine", fine.to_json(cfg)},
                        {"n_paths", fine.n_paths},
                        {"dt", cfg.dt},
                        {"seed", cfg.seed},
                        {"rng", kRngName}};
}

namespace {

MCEstimate weighted_exit_value(const OperatorSpec& spec, const Grid& grid,
                               const MarkovPolicy& policy, double lambda,
                               const GridFunction& Phi, std::span<const double> x, double r,
                               const PathConfig& cfg) {
  std::vector<double> values(cfg.n_paths);
  std::vector<char> trunc(cfg.n_paths, 0);
  std::vector<double> start(x.begin(), x.end());
  double r_outer = grid.radius();
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t i) {
    PathSummary s = simulate_exit(spec, policy, start, r, r_outer, cfg, i);
    trunc[i] = s.truncated;
    if (s.truncated) {
      values[i] = 0.0;
      return;
    }
    double phi_exit =
        interpolate(grid, Phi, std::span<const double>(s.exit_point.data(), grid.dim()));
    double logw = s.integral_c - lambda * s.exit_time;
    values[i] = phi_exit <= 0.0 ? 0.0 : std::exp(logw) * phi_exit;
  });
  int truncated = 0;
  for (char c : trunc) truncated += c;
  if (truncated > 0.01 * cfg.n_paths)
    throw ExcessTruncation(std::to_string(truncated) + " of " + std::to_string(cfg.n_paths) +
                           " paths hit t_max before exiting");
  return reduce_estimate(values, truncated);
}

}  // namespace

FeynmanKacReport feynman_kac_verify(const OperatorSpec& spec, const Grid& grid,
                                    const Policy& policy, double lambda,
                                    const GridFunction& Phi, std::span<const double> x,
                                    double r, const PathConfig& cfg) {
  if (static_cast<int>(policy.size()) != grid.size())
    throw InvalidArgument("policy size does not match grid");
  double xr = 0;
  for (double v : x) xr += v * v;
  if (std::sqrt(xr) <= r)
    throw InvalidArgument("evaluation point must lie outside the hitting ball");

  MarkovPolicy mp = MarkovPolicy::from_grid(grid, policy, spec.controls);

  FeynmanKacReport report;
  report.point.assign(x.begin(), x.end());
  report.grid_value = interpolate(grid, Phi, x);
  report.coarse = weighted_exit_value(spec, grid, mp, lambda, Phi, x, r, cfg);
  PathConfig fine_cfg = cfg;
  fine_cfg.dt = cfg.dt / 4.0;
  fine_cfg.seed = derive_stream_seed(cfg.seed, 0xfeedbeefULL);
  report.fine = weighted_exit_value(spec, grid, mp, lambda, Phi, x, r, fine_cfg);
  report.estimate = report.fine.mean;
  report.allowance = std::abs(report.coarse.mean - report.fine.mean);
  double stderr_comb = std::sqrt(report.coarse.stderr_ * report.coarse.stderr_ +
                                 report.fine.stderr_ * report.fine.stderr_);
  report.pass = std::abs(report.estimate - report.grid_value) <=
                3.0 * (stderr_comb + report.allowance);
  return report;
}

MCEstimate risk_sensitive_estimate(const OperatorSpec& spec, const MarkovPolicy& policy,
                                   std::span<const double> x0, double horizon,
                                   const PathConfig& cfg) {
  if (horizon > cfg.t_max) throw InvalidArgument("horizon exceeds t_max");
  const int n = cfg.n_paths;
  std::vector<double> acc(n);
  std::vector<double> start(x0.begin(), x0.end());
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    // No spatial exit: integrate the potential to the horizon.
    PathConfig path_cfg = cfg;
    path_cfg.t_max = horizon;
    PathSummary s = simulate_exit(spec, policy, start, -1.0,
                                  std::numeric_limits<double>::infinity(), path_cfg, i);
    acc[i] = s.integral_c;
  });

  // log-mean-exp with running max subtraction.
  double mx = -std::numeric_limits<double>::infinity();
  for (double a : acc) mx = std::max(mx, a);
  double sum = 0.0;
  for (double a : acc) sum += std::exp(a - mx);
  double log_mean = mx + std::log(sum / n);
  if (!std::isfinite(log_mean))
    throw Error("OverflowGuard", "log-mean-exp accumulation produced a non-finite value");

  MCEstimate est;
  est.n_paths = n;
  est.mean = log_mean / horizon;

  // Jackknife over paths, leave-one-out in O(n).
  double jk_mean = 0.0;
  std::vector<double> jk(n);
  for (int i = 0; i < n; ++i) {
    double loo = mx + std::log((sum - std::exp(acc[i] - mx)) / (n - 1));
    jk[i] = loo / horizon;
    jk_mean += jk[i];
  }
  jk_mean /= n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += (jk[i] - jk_mean) * (jk[i] - jk_mean);
  est.stderr_ = std::sqrt(ss * (n - 1) / n);
  return est;
}

}  // namespace eigenflow
