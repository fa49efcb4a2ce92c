#include "eigenflow/certify.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseLU>

#include "eigenflow/errors.hpp"

namespace eigenflow {

namespace {

const char* kind_name(CertKind k) { return k == CertKind::Lower ? "lower" : "upper"; }
const char* tag_name(CertTag t) {
  return t == CertTag::VanishingBoundary ? "vanishing-boundary" : "interior-positive";
}

Certificate quotient_certificate(CertKind kind, CertTag tag, const GridFunction& quotient,
                                 std::string psi_source) {
  Certificate cert;
  cert.kind = kind;
  cert.tag = tag;
  cert.psi_source = std::move(psi_source);
  int arg_min = 0, arg_max = 0;
  cert.quotient_min = quotient.minCoeff(&arg_min);
  cert.quotient_max = quotient.maxCoeff(&arg_max);
  cert.bound = kind == CertKind::Lower ? cert.quotient_min : cert.quotient_max;
  cert.arg_node = kind == CertKind::Lower ? arg_min : arg_max;
  return cert;
}

GridFunction grid_quotient(const DiscreteOperator& op, const GridFunction& psi) {
  if (psi.size() != op.size()) throw InvalidArgument("test function size mismatch");
  if (!is_positive(psi))
    throw NonPositiveTestFunction("certificate test function must be strictly positive");
  return op.apply(psi).cwiseQuotient(psi);
}

}  // namespace

nlohmann::json Certificate::to_json() const {
  return nlohmann::json{{"kind", kind_name(kind)},
                        {"bound", bound},
                        {"tag", tag_name(tag)},
                        {"psi_source", psi_source},
                        {"quotient_min", quotient_min},
                        {"quotient_max", quotient_max},
                        {"argmin_node", arg_node}};
}

Certificate cw_lower(const DiscreteOperator& op, const GridFunction& psi) {
  return quotient_certificate(CertKind::Lower, CertTag::VanishingBoundary,
                              grid_quotient(op, psi), "grid-function");
}

Certificate cw_upper(const DiscreteOperator& op, const GridFunction& psi) {
  return quotient_certificate(CertKind::Upper, CertTag::VanishingBoundary,
                              grid_quotient(op, psi), "grid-function");
}

Certificate cw_lower(const DiscreteOperator& op, const Expr& psi) {
  Certificate cert = quotient_certificate(CertKind::Lower, CertTag::VanishingBoundary,
                                          grid_quotient(op, sample_on_grid(op.grid, psi)),
                                          psi.str());
  return cert;
}

namespace {

// Fourth-order central differences of an expression at a fixed step,
// decoupled from the grid spacing. Offsets/weights of the 4-point first
// derivative stencil; cross derivatives compose it per axis.
struct ExprDerivatives {
  const Expr& f;
  int dim;
  double step;

  double at(const double* x, int axis_a, int off_a, int axis_b, int off_b) const {
    double p[3] = {x[0], x[1], x[2]};
    p[axis_a] += step * off_a;
    if (axis_b >= 0) p[axis_b] += step * off_b;
    return f.eval(std::span<const double>(p, dim));
  }

  double first(const double* x, int axis) const {
    return (-at(x, axis, 2, -1, 0) + 8 * at(x, axis, 1, -1, 0) - 8 * at(x, axis, -1, -1, 0) +
            at(x, axis, -2, -1, 0)) /
           (12 * step);
  }

  double second(const double* x, int axis) const {
    return (-at(x, axis, 2, -1, 0) + 16 * at(x, axis, 1, -1, 0) - 30 * at(x, axis, 0, -1, 0) +
            16 * at(x, axis, -1, -1, 0) - at(x, axis, -2, -1, 0)) /
           (12 * step * step);
  }

  double cross(const double* x, int axis_p, int axis_q) const {
    static constexpr int off[4] = {2, 1, -1, -2};
    static constexpr double w[4] = {-1, 8, -8, 1};
    double acc = 0.0;
    for (int s = 0; s < 4; ++s)
      for (int t = 0; t < 4; ++t)
        acc += w[s] * w[t] * at(x, axis_p, off[s], axis_q, off[t]);
    return acc / (144 * step * step);
  }
};

}  // namespace

GridFunction analytic_quotient(const OperatorSpec& spec, const Grid& grid, const Expr& psi,
                               double derivative_step) {
  if (psi.depends_on_controls())
    throw InvalidArgument("test function may not depend on controls");
  const int d = grid.dim();
  ExprDerivatives deriv{psi, d, derivative_step};
  GridFunction q(grid.size());
  double x[3] = {0, 0, 0};
  double grad[3], hess[3][3];

  for (int i = 0; i < grid.size(); ++i) {
    grid.coord(i, x);
    std::span<const double> xs(x, d);
    double value = psi.eval(xs);
    if (!(value > 0.0))
      throw NonPositiveTestFunction("test function not positive at a grid node");

    for (int p = 0; p < d; ++p) {
      grad[p] = deriv.first(x, p);
      hess[p][p] = deriv.second(x, p);
      for (int r = p + 1; r < d; ++r) hess[p][r] = hess[r][p] = deriv.cross(x, p, r);
    }

    double second_order = 0.0;
    for (int p = 0; p < d; ++p)
      for (int r = 0; r < d; ++r) second_order += spec.a[p][r].eval(xs) * hess[p][r];

    double extremal = 0.0;
    bool first = true;
    for (const auto& u : spec.controls.points) {
      double v = 0.0;
      for (int p = 0; p < d; ++p) v += spec.b[p].eval(xs, u) * grad[p];
      v += spec.c.eval(xs, u) * value;
      if (first) {
        extremal = v;
        first = false;
      } else {
        extremal = spec.sense == Sense::Min ? std::min(extremal, v) : std::max(extremal, v);
      }
    }
    q[i] = (second_order + extremal) / value;
  }
  return q;
}

Certificate cw_upper(const OperatorSpec& spec, const Grid& grid, const Expr& psi,
                     double derivative_step) {
  return quotient_certificate(CertKind::Upper, CertTag::InteriorPositive,
                              analytic_quotient(spec, grid, psi, derivative_step), psi.str());
}

namespace {

// State of the smoothed inner objective at a point w: per-control quotients,
// their softmax combination at temperature tau, and the hard extremal
// quotient used for certification.
struct SaddleState {
  GridFunction p;       // e^w, max-normalized
  GridFunction q_hard;  // exact extremal quotient (certification)
  GridFunction q_soft;  // log-sum-exp smoothed quotient (optimization)
  std::vector<GridFunction> q_k;
  std::vector<GridFunction> theta;  // softmax weights per control

  void eval(const DiscreteOperator& op, const GridFunction& w, double tau) {
    const int n = op.size();
    const int K = op.num_controls();
    p = (w.array() - w.maxCoeff()).exp().matrix();
    q_k.resize(K);
    theta.assign(K, GridFunction(n));
    for (int k = 0; k < K; ++k) q_k[k] = (op.control_matrices[k] * p).cwiseQuotient(p);
    q_hard = q_k[0];
    for (int k = 1; k < K; ++k) q_hard = q_hard.cwiseMax(q_k[k]);
    q_soft.resize(n);
    for (int i = 0; i < n; ++i) {
      double z = 0.0;
      for (int k = 0; k < K; ++k) z += std::exp((q_k[k][i] - q_hard[i]) / tau);
      q_soft[i] = q_hard[i] + tau * std::log(z);
      for (int k = 0; k < K; ++k) theta[k][i] = std::exp((q_k[k][i] - q_hard[i]) / tau) / z;
    }
  }

  GridFunction gradient(const DiscreteOperator& op, const GridFunction& mu) const {
    const int n = op.size();
    GridFunction g = GridFunction::Zero(n);
    for (int k = 0; k < op.num_controls(); ++k) {
      GridFunction weight = mu.cwiseProduct(theta[k]);
      GridFunction z = weight.cwiseQuotient(p);
      g += p.cwiseProduct(op.control_matrices[k].transpose() * z) -
           weight.cwiseProduct(q_k[k]);
    }
    return g;
  }
};

}  // namespace

MinimaxResult minimax_measure(const DiscreteOperator& op, int mu_steps, double tol) {
  if (op.sense != Sense::Max)
    throw InvalidArgument("minimax_measure is defined for the max-sense operator");
  const int n = op.size();
  const int anchor = op.grid.anchor();
  const int K = op.num_controls();

  // Warm start: normalized nonlinear power iteration on apply + shift*I
  // brings e^w near the principal direction, where the quotient sandwich is
  // already narrow.
  GridFunction psi = GridFunction::Ones(n);
  for (int k = 0; k < 200; ++k) {
    GridFunction next = op.apply(psi) + op.shift * psi;
    psi = next / next.maxCoeff();
  }
  GridFunction w = psi.array().log().matrix();
  w.array() -= w[anchor];
  GridFunction mu = psi.cwiseProduct(psi);
  mu /= mu.sum();

  MinimaxResult result;
  result.lower = -std::numeric_limits<double>::infinity();
  result.upper = std::numeric_limits<double>::infinity();

  SaddleState ws;
  const double tau_min = std::max(1e-13, 0.05 * tol / std::max(1.0, std::log(double(K + 1))));
  double tau = K > 1 ? 1e-1 : tau_min;
  double alpha = 1.0;
  double J = 0.0;

  for (int outer = 1; outer <= mu_steps; ++outer) {
    result.outer_iterations = outer;

    // Inner minimization of the smoothed weighted quotient by gradient
    // descent with Armijo backtracking (factor 0.5, slope 1e-4).
    ws.eval(op, w, tau);
    J = mu.dot(ws.q_soft);
    for (int inner = 0; inner < 200; ++inner) {
      GridFunction g = ws.gradient(op, mu);
      double qscale = std::max(1.0, ws.q_hard.cwiseAbs().maxCoeff());
      if (g.cwiseAbs().maxCoeff() < 1e-10 * qscale) break;
      alpha = std::min(alpha * 2.0, 1e4);
      bool stepped = false;
      while (alpha > 1e-18) {
        GridFunction w_try = w - alpha * g;
        w_try.array() -= w_try[anchor];
        SaddleState trial;
        trial.eval(op, w_try, tau);
        double J_try = mu.dot(trial.q_soft);
        if (J_try <= J - 1e-4 * alpha * g.squaredNorm()) {
          w = std::move(w_try);
          ws = std::move(trial);
          J = J_try;
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!stepped) break;
    }

    // Exact sandwich at the current iterate and along a power-refined tail:
    // min_i q_i <= lambda <= max_i q_i for every positive psi, so every
    // refinement step tightens the certified enclosure.
    result.lower = std::max(result.lower, ws.q_hard.minCoeff());
    result.upper = std::min(result.upper, ws.q_hard.maxCoeff());
    if (result.upper - result.lower >= 0.5 * tol) {
      GridFunction refine = ws.p;
      double width_prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 512; ++k) {
        GridFunction next = op.apply(refine) + op.shift * refine;
        refine = next / next.maxCoeff();
        if (k % 16 == 15) {
          GridFunction q_ref = op.apply(refine).cwiseQuotient(refine);
          double width = q_ref.maxCoeff() - q_ref.minCoeff();
          result.lower = std::max(result.lower, q_ref.minCoeff());
          result.upper = std::min(result.upper, q_ref.maxCoeff());
          if (width > 0.9 * width_prev || result.upper - result.lower < 0.5 * tol) break;
          width_prev = width;
        }
      }
    }

    result.gap = result.upper - result.lower;
    result.value = 0.5 * (result.upper + result.lower);
    result.measure_objective = mu.dot(ws.q_hard);
    if (std::isfinite(result.gap) && result.gap < tol && tau <= tau_min * (1 + 1e-12)) {
      result.converged = true;
      return result;
    }

    if (tau > tau_min) {
      tau = std::max(tau_min, tau / 8.0);
      continue;  // re-descend at the sharper temperature before moving mu
    }

    // Polyak-type multiplicative ascent toward the certified upper value;
    // the floor mix keeps mu strictly positive.
    double spread = ws.q_hard.maxCoeff() - ws.q_hard.minCoeff();
    double target = result.upper;
    double eta = spread > 1e-15 ? (target - J) / (spread * spread) : 0.0;
    eta = std::clamp(eta, 0.0, 10.0 / std::max(spread, 1e-12));
    GridFunction bump = (eta * (ws.q_hard.array() - ws.q_hard.maxCoeff())).exp().matrix();
    mu = mu.cwiseProduct(bump);
    mu /= mu.sum();
    mu = (1.0 - 1e-9) * mu + (1e-9 / n) * GridFunction::Ones(n);
  }

  throw NoConvergence("minimax_measure: gap " + std::to_string(result.gap) + " above tol " +
                      std::to_string(tol) + " after " + std::to_string(mu_steps) +
                      " outer iterations (lower " + std::to_string(result.lower) + ", upper " +
                      std::to_string(result.upper) + ")");
}

nlohmann::json Verdict::to_json() const {
  const char* s = status == VerdictStatus::Confirmed
                      ? "confirmed"
                      : (status == VerdictStatus::NotApplicable ? "not-applicable"
                                                                : "counterexample");
  return nlohmann::json{{"status", s},
                        {"detail", detail},
                        {"kappa", kappa},
                        {"max_dev", max_dev},
                        {"node", node}};
}

Verdict ground_state_check(const DiscreteOperator& op, const GridFunction& phi,
                           double lambda_star, const GridFunction& Phi, double tol) {
  Verdict v;
  if (!is_positive(Phi)) {
    v.detail = "ground state Phi must be strictly positive";
    return v;
  }
  double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  GridFunction g = op.apply(phi);
  double worst = (lambda_star * phi - g).maxCoeff();
  if (worst > tol * scale) {
    v.detail = "supersolution precondition apply(phi) >= lambda*phi fails by " +
               std::to_string(worst);
    return v;
  }
  if (phi.maxCoeff() <= 0.0) {
    v.detail = "phi is nowhere positive";
    return v;
  }

  GridFunction ratio = phi.cwiseQuotient(Phi);
  v.kappa = ratio.mean();
  int arg = 0;
  v.max_dev = (ratio.array() - v.kappa).abs().maxCoeff(&arg);
  double rel = v.max_dev / std::max(std::abs(v.kappa), 1e-300);
  if (rel < tol) {
    v.status = VerdictStatus::Confirmed;
    v.detail = "phi = kappa * Phi";
  } else {
    v.status = VerdictStatus::Counterexample;
    v.node = arg;
    v.detail = "phi/Phi deviates from its mean by " + std::to_string(rel) +
               " (relative); Perron simplicity violated, check the solver";
  }
  return v;
}

Verdict negativity_check(const DiscreteOperator& op, const GridFunction& phi,
                         double lambda_star, double tol) {
  Verdict v;
  if (!(lambda_star < -tol)) {
    v.detail = "requires lambda* < 0";
    return v;
  }
  double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  GridFunction g = op.apply(phi);
  if (g.minCoeff() < -tol * scale) {
    v.detail = "subsolution precondition apply(phi) >= 0 fails by " +
               std::to_string(-g.minCoeff());
    return v;
  }
  int arg = 0;
  double mx = phi.maxCoeff(&arg);
  if (mx > tol * scale) {
    v.status = VerdictStatus::Counterexample;
    v.node = arg;
    v.max_dev = mx;
    v.detail = "phi is positive at a node despite lambda* < 0";
    return v;
  }
  v.status = VerdictStatus::Confirmed;
  if (mx > -tol * scale) {
    // phi touches zero: the zero branch requires phi = 0 identically.
    double norm = phi.cwiseAbs().maxCoeff();
    if (norm <= tol * scale) {
      v.detail = "phi = 0";
      v.max_dev = norm;
    } else {
      v.status = VerdictStatus::Counterexample;
      v.max_dev = norm;
      v.detail = "phi touches 0 but is not identically 0";
    }
  } else {
    v.detail = "phi < 0 everywhere";
    v.max_dev = mx;
  }
  return v;
}

nlohmann::json GapSearchReport::to_json() const {
  return nlohmann::json{{"starts", starts},
                        {"collapsed", collapsed},
                        {"nontrivial_found", nontrivial_found},
                        {"best_residual", best_residual},
                        {"note", "randomized evidence, not a proof"}};
}

GapSearchReport gap_solution_search(const DiscreteOperator& op, double lambda, int n_starts,
                                    std::uint64_t seed, double tol) {
  const int n = op.size();
  const int anchor = op.grid.anchor();
  GapSearchReport report;
  report.starts = n_starts;
  report.best_residual = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SparseColMat identity(n, n);
  identity.setIdentity();

  for (int s = 0; s < n_starts; ++s) {
    GridFunction phi(n);
    for (int i = 0; i < n; ++i) phi[i] = gauss(rng);
    if (phi[anchor] == 0.0) phi[anchor] = 1.0;
    phi /= phi[anchor];

    bool resolved = false;
    for (int iter = 0; iter < 50 && !resolved; ++iter) {
      Policy v = op.select_policy(phi);
      // Anchored frozen-policy solve: rows of M_v - lambda*I except the
      // anchor row, which pins phi[anchor] = 1.
      SparseColMat A = op.frozen(v);
      A -= lambda * identity;
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(A.nonZeros() + 1);
      for (int col = 0; col < n; ++col)
        for (SparseColMat::InnerIterator it(A, col); it; ++it)
          if (it.row() != anchor) trip.emplace_back(static_cast<int>(it.row()), col, it.value());
      trip.emplace_back(anchor, anchor, 1.0);
      SparseColMat B(n, n);
      B.setFromTriplets(trip.begin(), trip.end());

      Eigen::SparseLU<SparseColMat> lu;
      lu.compute(B);
      if (lu.info() != Eigen::Success) break;  // singular: no anchored solution here
      GridFunction rhs = GridFunction::Zero(n);
      rhs[anchor] = 1.0;
      GridFunction next = lu.solve(rhs);
      if (lu.info() != Eigen::Success || !next.allFinite() ||
          next.cwiseAbs().maxCoeff() > 1e12)
        break;

      double residual = (op.apply(next) - lambda * next).cwiseAbs().maxCoeff() /
                        std::max(1.0, next.cwiseAbs().maxCoeff());
      report.best_residual = std::min(report.best_residual, residual);
      if (residual < tol && op.select_policy(next) == v) {
        report.nontrivial_found = true;
        return report;
      }
      if ((next - phi).cwiseAbs().maxCoeff() < 1e-14 * next.cwiseAbs().maxCoeff()) {
        resolved = true;  // stationary but residual nonzero: no solution here
      }
      phi = std::move(next);
    }
    ++report.collapsed;
  }
  return report;
}

}  // namespace eigenflow
