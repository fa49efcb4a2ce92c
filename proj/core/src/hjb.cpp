#include "eigenflow/hjb.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>

#include <Eigen/SparseLU>

#include "eigenflow/errors.hpp"

namespace eigenflow {

SemilinearEigenResult policy_iteration(const DiscreteOperator& op, double tol, int max_sweeps) {
  const int n = op.size();
  const int anchor = op.grid.anchor();
  const bool minimizing = op.sense == Sense::Min;

  SemilinearEigenResult result;
  GridFunction psi = GridFunction::Ones(n);
  Policy v = op.select_policy(psi);

  std::map<Policy, double> visited;
  bool have_best = false;

  PerronOptions popts;
  popts.tol = tol;

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    popts.start = psi;
    EigenPair pair = principal_eigenpair(op.frozen(v), anchor, popts);
    psi = pair.psi;
    result.lambda_history.push_back(pair.lambda);
    result.sweeps = sweep;

    bool improved = !have_best || (minimizing ? pair.lambda < result.pair.lambda - tol
                                              : pair.lambda > result.pair.lambda + tol);
    if (!have_best || (minimizing ? pair.lambda <= result.pair.lambda
                                  : pair.lambda >= result.pair.lambda)) {
      result.pair = pair;
      result.policy = v;
      have_best = true;
    }
    visited[v] = pair.lambda;

    Policy next = op.select_policy(psi);
    if (next == v) return result;  // policy stable: fixed point

    GridFunction g = op.apply(psi);
    double fixed_point_residual =
        (g - pair.lambda * psi).cwiseAbs().maxCoeff() / psi.cwiseAbs().maxCoeff();
    if (fixed_point_residual < tol) {
      // Already a fixed point of the semilinear map; the policy change is a
      // floating-point tie.
      return result;
    }

    if (visited.count(next) && !improved) {
      result.cycled = true;
      return result;
    }
    v = std::move(next);
  }
  throw NoConvergence("policy_iteration: no convergence after " + std::to_string(max_sweeps) +
                      " sweeps (lambda ~ " + std::to_string(result.pair.lambda) + ")");
}

namespace {

// Radial cos^2 bump supported on r_in <= |x| <= r_out, peaking at the middle.
GridFunction annulus_bump(const Grid& grid, double r_in, double r_out) {
  GridFunction f = GridFunction::Zero(grid.size());
  double mid = 0.5 * (r_in + r_out);
  double width = r_out - r_in;
  for (int i = 0; i < grid.size(); ++i) {
    double r = grid.norm_of(i);
    if (r < r_in || r > r_out) continue;
    double t = std::cos(M_PI * (r - mid) / width);
    f[i] = t * t;
  }
  return f;
}

// Solves apply(phi) - lambda*phi = -f by Howard iteration on linear solves.
GridFunction solve_source_problem(const DiscreteOperator& op, double lambda,
                                  const GridFunction& f, int max_sweeps = 100) {
  const int n = op.size();
  SparseColMat identity(n, n);
  identity.setIdentity();

  GridFunction phi = GridFunction::Ones(n);
  Policy v = op.select_policy(phi);
  Eigen::SparseLU<SparseColMat> lu;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    SparseColMat A = op.frozen(v);
    A -= lambda * identity;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
      throw LinearSolveFailure("frozen-policy solve failed (lambda = " +
                               std::to_string(lambda) + ")");
    GridFunction next = lu.solve(-f);
    if (lu.info() != Eigen::Success || !next.allFinite())
      throw LinearSolveFailure("frozen-policy solve produced non-finite values");
    Policy nv = op.select_policy(next);
    phi = std::move(next);
    if (nv == v) return phi;
    v = std::move(nv);
  }
  throw NoConvergence("source-problem policy iteration did not stabilize");
}

}  // namespace

SupercriticalEigenfunction eigenfunction_at_lambda(const OperatorSpec& spec, double lambda,
                                                   const std::vector<Grid>& grids,
                                                   double tol) {
  if (grids.size() < 2)
    throw InvalidArgument("eigenfunction_at_lambda needs at least two nested grids");
  for (std::size_t i = 1; i < grids.size(); ++i)
    if (!(grids[i].radius() > grids[i - 1].radius()))
      throw InvalidArgument("grids must have strictly increasing radii");

  const Grid& largest = grids.back();
  DiscreteOperator op_largest = assemble(spec, largest);
  SemilinearEigenResult base = policy_iteration(op_largest, tol);
  if (lambda <= base.pair.lambda + tol)
    throw NotSupercritical("lambda = " + std::to_string(lambda) +
                           " is not above the Dirichlet eigenvalue " +
                           std::to_string(base.pair.lambda) + " on the largest grid");

  SupercriticalEigenfunction out;
  out.lambda = lambda;
  out.lambda_dirichlet = base.pair.lambda;

  for (std::size_t i = 0; i + 1 < grids.size(); ++i) {
    double r_in = grids[i].radius();
    const Grid& domain = grids[i + 1];
    DiscreteOperator op = i + 2 == grids.size() ? std::move(op_largest)
                                                : assemble(spec, domain);
    GridFunction f = annulus_bump(domain, r_in, domain.radius());
    GridFunction phi = solve_source_problem(op, lambda, f);
    phi /= phi[domain.anchor()];

    GridFunction g = op.apply(phi);
    double res = 0.0;
    double scale = phi.cwiseAbs().maxCoeff();
    for (int node = 0; node < domain.size(); ++node) {
      if (domain.norm_of(node) >= r_in) continue;
      res = std::max(res, std::abs(g[node] - lambda * phi[node]));
    }
    out.pair_residuals.push_back(res / scale);

    if (i + 2 == grids.size()) {
      out.phi = std::move(phi);
      out.interior_residual = out.pair_residuals.back();
      out.annulus_inner = r_in;
      out.positive = is_positive(out.phi);
    }
  }
  return out;
}

double estimate_potential_tail(const OperatorSpec& spec, double r_lo, double r_hi,
                               int n_samples) {
  std::mt19937_64 rng(0x7a11c0deULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> radial(r_lo, r_hi);
  const int d = spec.dimension;
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    double x[3] = {0, 0, 0};
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int k = 0; k < d; ++k) {
        x[k] = unif(rng);
        norm += x[k] * x[k];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    double r = radial(rng);
    for (int k = 0; k < d; ++k) x[k] *= r / norm;
    for (const auto& u : spec.controls.points)
      worst = std::max(worst, spec.c.eval(std::span<const double>(x, d), u));
  }
  return worst;
}

OperatorSpec perturb_potential(const OperatorSpec& spec, double m, double delta,
                               std::optional<double> tail) {
  if (!(delta > 0.0)) throw InvalidArgument("perturb_potential requires delta > 0");
  if (!(m >= 1.0)) throw InvalidArgument("perturb_potential requires m >= 1");

  double tail_value = tail ? *tail : estimate_potential_tail(spec, m + 1.0, m + 3.0);

  // |x| as an expression; zeta_m = cos^2(pi/2 * clamp(|x| - m, 0, 1)).
  Expr r2 = Expr::constant(0.0);
  for (int k = 0; k < spec.dimension; ++k) {
    Expr xk = Expr::coord(k);
    r2 = r2 + xk * xk;
  }
  Expr r = Expr::unary(ExprOp::Sqrt, r2);
  Expr ramp = Expr::binary(ExprOp::Min,
                           Expr::binary(ExprOp::Max, r - Expr::constant(m), Expr::constant(0.0)),
                           Expr::constant(1.0));
  Expr zeta_arg = Expr::constant(M_PI / 2.0) * ramp;
  Expr cosz = Expr::unary(ExprOp::Cos, zeta_arg);
  Expr zeta = cosz * cosz;

  OperatorSpec out = spec;
  Expr outside = Expr::constant(delta + tail_value);
  out.c = zeta * spec.c + (Expr::constant(1.0) - zeta) * outside;
  return out;
}

}  // namespace eigenflow
