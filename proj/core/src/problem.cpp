#include "eigenflow/problem.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/Dense>

#include "eigenflow/errors.hpp"

namespace eigenflow {

std::string to_string(Sense s) { return s == Sense::Min ? "min" : "max"; }

Sense sense_from_string(const std::string& s) {
  if (s == "min") return Sense::Min;
  if (s == "max") return Sense::Max;
  throw InvalidArgument("sense must be \"min\" or \"max\", got \"" + s + "\"");
}

void ControlSet::validate() const {
  if (points.empty()) throw InvalidArgument("control set must contain at least one point");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != dim)
      throw InvalidArgument("control point dimension mismatch");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j]) throw InvalidArgument("control points must be distinct");
}

void OperatorSpec::check_shape() const {
  if (dimension < 1 || dimension > 3)
    throw InvalidArgument("dimension must be 1, 2, or 3");
  if (static_cast<int>(a.size()) != dimension)
    throw InvalidArgument("diffusion matrix must be d x d");
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != dimension)
      throw InvalidArgument("diffusion matrix must be d x d");
    for (const auto& e : row) {
      if (e.max_coord_index() >= dimension)
        throw UnknownIdentifier("diffusion entry references coordinate beyond dimension");
      if (e.depends_on_controls())
        throw InvalidArgument("diffusion entries may not depend on controls");
    }
  }
  if (static_cast<int>(b.size()) != dimension)
    throw InvalidArgument("drift must have d entries");
  controls.validate();
  int m = controls.dim;
  for (const auto& e : b) {
    if (e.max_coord_index() >= dimension)
      throw UnknownIdentifier("drift references coordinate beyond dimension");
    if (e.max_control_index() >= m)
      throw UnknownIdentifier("drift references control beyond control dimension");
  }
  if (c.max_coord_index() >= dimension)
    throw UnknownIdentifier("potential references coordinate beyond dimension");
  if (c.max_control_index() >= m)
    throw UnknownIdentifier("potential references control beyond control dimension");
}

OperatorSpec OperatorSpec::with_potential_shift(double shift) const {
  OperatorSpec out = *this;
  out.c = c + Expr::constant(shift);
  return out;
}

OperatorSpec OperatorSpec::from_json(const nlohmann::json& j) {
  OperatorSpec spec;
  spec.dimension = j.at("dimension").get<int>();
  const auto& ja = j.at("a");
  for (const auto& row : ja) {
    std::vector<Expr> r;
    for (const auto& entry : row) r.push_back(Expr::parse(entry.get<std::string>()));
    spec.a.push_back(std::move(r));
  }
  for (const auto& entry : j.at("b")) spec.b.push_back(Expr::parse(entry.get<std::string>()));
  spec.c = Expr::parse(j.at("c").get<std::string>());
  spec.sense = sense_from_string(j.value("sense", std::string("min")));
  if (j.contains("controls") && !j.at("controls").empty()) {
    ControlSet cs;
    for (const auto& p : j.at("controls")) cs.points.push_back(p.get<std::vector<double>>());
    cs.dim = static_cast<int>(cs.points.front().size());
    spec.controls = std::move(cs);
  }
  if (j.contains("lyapunov")) {
    const auto& jl = j.at("lyapunov");
    LyapunovSpec lyap;
    lyap.V = Expr::parse(jl.at("V").get<std::string>());
    if (jl.contains("ell")) lyap.ell = Expr::parse(jl.at("ell").get<std::string>());
    if (jl.contains("gamma")) lyap.gamma = jl.at("gamma").get<double>();
    lyap.kappa1 = jl.value("kappa1", 0.0);
    lyap.rK = jl.value("rK", 1.0);
    lyap.variant = jl.value("variant", lyap.gamma ? std::string("A2.2") : std::string("A2.1"));
    spec.lyapunov = std::move(lyap);
  }
  spec.check_shape();
  return spec;
}

nlohmann::json OperatorSpec::to_json() const {
  nlohmann::json j;
  j["dimension"] = dimension;
  nlohmann::json ja = nlohmann::json::array();
  for (const auto& row : a) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& e : row) jr.push_back(e.str());
    ja.push_back(jr);
  }
  j["a"] = ja;
  nlohmann::json jb = nlohmann::json::array();
  for (const auto& e : b) jb.push_back(e.str());
  j["b"] = jb;
  j["c"] = c.str();
  j["sense"] = to_string(sense);
  j["controls"] = controls.points;
  if (lyapunov) {
    nlohmann::json jl;
    jl["V"] = lyapunov->V.str();
    if (lyapunov->ell) jl["ell"] = lyapunov->ell->str();
    if (lyapunov->gamma) jl["gamma"] = *lyapunov->gamma;
    jl["kappa1"] = lyapunov->kappa1;
    jl["rK"] = lyapunov->rK;
    jl["variant"] = lyapunov->variant;
    j["lyapunov"] = jl;
  }
  return j;
}

OperatorSpec OperatorSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open spec file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

namespace {

// Deterministic nested sample sequence on [-R, R]^d: origin and the box
// corners first, then a fixed seeded stream. Prefix property makes
// validate_spec monotone in n_samples.
std::vector<std::vector<double>> sample_points(int d, double R, int n) {
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  pts.push_back(std::vector<double>(d, 0.0));
  int corners = 1 << d;
  for (int c = 0; c < corners && static_cast<int>(pts.size()) < n; ++c) {
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i) p[i] = (c >> i) & 1 ? R : -R;
    pts.push_back(std::move(p));
  }
  std::mt19937_64 rng(0x5eedf00dULL);
  std::uniform_real_distribution<double> unif(-R, R);
  while (static_cast<int>(pts.size()) < n) {
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i) p[i] = unif(rng);
    pts.push_back(std::move(p));
  }
  pts.resize(n);
  return pts;
}

}  // namespace

ValidationReport validate_spec(const OperatorSpec& spec, double R, int n_samples,
                               double potential_floor) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  spec.check_shape();

  ValidationReport report;
  report.n_samples = n_samples;
  report.potential_floor = potential_floor;
  report.min_diffusion_eigenvalue = std::numeric_limits<double>::infinity();
  report.min_potential = std::numeric_limits<double>::infinity();
  report.max_drift_norm = 0.0;

  const int d = spec.dimension;
  auto pts = sample_points(d, R, n_samples);
  Eigen::MatrixXd amat(d, d);

  for (const auto& x : pts) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) amat(i, j) = spec.a[i][j].eval(x);
    if (!amat.isApprox(amat.transpose(), 1e-12)) {
      // Symmetrize tiny asymmetries; anything visible is a spec error.
      if ((amat - amat.transpose()).cwiseAbs().maxCoeff() >
          1e-9 * (1.0 + amat.cwiseAbs().maxCoeff()))
        throw DegenerateDiffusion("diffusion matrix not symmetric at a sample point");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (amat + amat.transpose()));
    double lam_min = es.eigenvalues().minCoeff();
    if (!std::isfinite(lam_min))
      throw DegenerateDiffusion("diffusion matrix not finite at a sample point");
    report.min_diffusion_eigenvalue = std::min(report.min_diffusion_eigenvalue, lam_min);

    for (const auto& u : spec.controls.points) {
      double norm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        double bi = spec.b[i].eval(x, u);
        if (!std::isfinite(bi)) throw InvalidArgument("drift not finite at a sample point");
        norm2 += bi * bi;
      }
      report.max_drift_norm = std::max(report.max_drift_norm, std::sqrt(norm2));
      double cv = spec.c.eval(x, u);
      if (!std::isfinite(cv)) throw InvalidArgument("potential not finite at a sample point");
      report.min_potential = std::min(report.min_potential, cv);
    }
  }

  if (report.min_diffusion_eigenvalue <= 0.0)
    throw DegenerateDiffusion("diffusion matrix has eigenvalue <= 0 at a sample point (min " +
                              std::to_string(report.min_diffusion_eigenvalue) + ")");
  if (report.min_potential < potential_floor)
    throw UnboundedBelowPotential("sampled potential " + std::to_string(report.min_potential) +
                                  " below configured floor " + std::to_string(potential_floor));

  report.assertions = {
      "drift and diffusion locally Lipschitz: recorded as user assertion, not verified",
      "affine growth of drift/diffusion: recorded as user assertion, not verified",
      "potential bounded below outside the sampled domain: recorded as user assertion",
  };
  report.pass = true;
  return report;
}

}  // namespace eigenflow
