#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "eigenflow/fd_operator.hpp"
#include "eigenflow/perron.hpp"

namespace eigenflow {

enum class CertKind { Lower, Upper };

// vanishing-boundary: the test function lives on the grid (zero at the
// eliminated boundary layer), bound exact for the discretized operator.
// interior-positive: expression test function, quotient evaluated with
// analytic derivatives; does not need to vanish on the boundary.
enum class CertTag { VanishingBoundary, InteriorPositive };

struct Certificate {
  CertKind kind = CertKind::Lower;
  double bound = 0.0;
  CertTag tag = CertTag::VanishingBoundary;
  std::string psi_source;
  double quotient_min = 0.0;
  double quotient_max = 0.0;
  int arg_node = 0;

  nlohmann::json to_json() const;
};

// Matrix-level bounds from the nonlinear quotient apply(psi)/psi; exact for
// the discretized operator (lower <= lambda_D(discrete) <= upper for every
// positive grid function psi). Throws NonPositiveTestFunction.
Certificate cw_lower(const DiscreteOperator& op, const GridFunction& psi);
Certificate cw_upper(const DiscreteOperator& op, const GridFunction& psi);

// Expression route for the lower bound: the expression is sampled to the
// grid (vanishing-boundary semantics via Dirichlet elimination).
Certificate cw_lower(const DiscreteOperator& op, const Expr& psi);

// Expression route for the upper bound: the quotient G(psi)/psi is evaluated
// analytically at the grid nodes, with derivatives of psi taken by
// fourth-order central differences at a fixed step independent of the grid.
// Valid for test functions that are positive but do not vanish on the
// boundary; for the constant-quotient witnesses the bound is h-independent.
Certificate cw_upper(const OperatorSpec& spec, const Grid& grid, const Expr& psi,
                     double derivative_step = 1e-2);

// Pointwise field of the analytic quotient (used by the upper certificate
// and reported in dumps).
GridFunction analytic_quotient(const OperatorSpec& spec, const Grid& grid, const Expr& psi,
                               double derivative_step = 1e-2);

// Alternating saddle-point evaluation of
//   sup_mu inf_{psi>0} sum_i mu_i (apply(psi))_i / psi_i  (sense = max).
// Inner minimization runs in log coordinates psi = e^w, where the weighted
// quotient is convex; the max over controls is annealed through a
// log-sum-exp temperature so that descent with Armijo backtracking does not
// jam on policy kinks. The outer simplex ascent uses multiplicative
// (mirror) updates with Polyak-type steps toward the certified upper bound.
// Every iterate also yields the exact quotient sandwich
//   min_i q_i <= lambda <= max_i q_i,
// which certifies the returned value: |value - lambda| <= gap/2.
// Throws NoConvergence with the gap when the budget runs out.
struct MinimaxResult {
  double value = 0.0;              // midpoint of the certified enclosure
  double measure_objective = 0.0;  // sum_i mu_i q_i at the final saddle iterate
  double lower = 0.0;              // certified: best min-quotient seen
  double upper = 0.0;              // certified: best max-quotient seen
  double gap = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

MinimaxResult minimax_measure(const DiscreteOperator& op, int mu_steps = 2000,
                              double tol = 1e-4);

// Numerical checkers in the spirit of refined maximum principles. Verdicts
// never throw; NotApplicable records which precondition failed.
enum class VerdictStatus { Confirmed, NotApplicable, Counterexample };

struct Verdict {
  VerdictStatus status = VerdictStatus::NotApplicable;
  std::string detail;
  double kappa = 0.0;    // proportionality constant (ground state check)
  double max_dev = 0.0;  // worst deviation observed
  int node = -1;

  nlohmann::json to_json() const;
};

// If apply(phi) >= lambda*phi (up to tol) and phi is positive somewhere,
// then phi must be proportional to the ground state Phi; at the matrix level
// this is Perron simplicity, so Counterexample indicates a solver bug.
Verdict ground_state_check(const DiscreteOperator& op, const GridFunction& phi,
                           double lambda_star, const GridFunction& Phi, double tol = 1e-8);

// If lambda* < 0 and apply(phi) >= 0 (up to tol), then phi <= 0, and if phi
// touches 0 anywhere it vanishes identically.
Verdict negativity_check(const DiscreteOperator& op, const GridFunction& phi,
                         double lambda_star, double tol = 1e-8);

// Randomized search for nontrivial solutions of apply(phi) = lambda*phi at a
// level strictly between the min- and max-sense eigenvalues: anchored
// fixed-point iteration on the frozen-policy linear systems from random
// starts. Finding none is evidence (not proof) that no such solution exists.
struct GapSearchReport {
  int starts = 0;
  int collapsed = 0;        // runs that converged to phi = 0 or diverged
  bool nontrivial_found = false;
  double best_residual = 0.0;  // smallest normalized residual among suspects

  nlohmann::json to_json() const;
};

GapSearchReport gap_solution_search(const DiscreteOperator& op, double lambda, int n_starts,
                                    std::uint64_t seed, double tol = 1e-9);

}  // namespace eigenflow
