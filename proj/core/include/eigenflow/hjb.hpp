#pragma once

#include <optional>
#include <vector>

#include "eigenflow/fd_operator.hpp"
#include "eigenflow/perron.hpp"

namespace eigenflow {

// Result of Howard iteration on the semilinear eigenproblem. For sense=min
// the lambda history is nonincreasing (nondecreasing for max) up to solver
// tolerance, and the final lambda is the Perron eigenvalue of the frozen
// matrix M_{v*}.
struct SemilinearEigenResult {
  EigenPair pair;
  Policy policy;
  std::vector<double> lambda_history;
  int sweeps = 0;
  bool cycled = false;  // policy sequence repeated without improvement
};

// Howard (policy) iteration: freeze policy -> Perron eigenpair of M_v ->
// reselect policy on the new eigenvector -> repeat until the policy is
// stable or lambda stops improving. Each sweep reuses the previous
// eigenvector as a warm start. Throws NoConvergence.
SemilinearEigenResult policy_iteration(const DiscreteOperator& op, double tol = 1e-10,
                                       int max_sweeps = 200);

// A positive eigenfunction at a supercritical level lambda > lambda_D,
// built from the source problem  apply(phi) - lambda*phi = -f  on the
// largest grid of a nested sequence, with f a radial cos^2 bump supported on
// the outermost annulus between consecutive radii. phi is normalized to 1 at
// the anchor. interior_residual measures ||apply(phi) - lambda*phi||_inf /
// ||phi||_inf over nodes lying inside the annulus' inner radius.
struct SupercriticalEigenfunction {
  GridFunction phi;
  double lambda = 0.0;
  double lambda_dirichlet = 0.0;  // lambda_D on the largest grid
  double interior_residual = 0.0;
  double annulus_inner = 0.0;
  bool positive = false;
  std::vector<double> pair_residuals;  // one per consecutive grid pair
};

// `grids` must be ordered by strictly increasing radius (matched spacing is
// recommended). Throws NotSupercritical when lambda <= lambda_D(largest),
// LinearSolveFailure if a frozen solve fails.
SupercriticalEigenfunction eigenfunction_at_lambda(const OperatorSpec& spec, double lambda,
                                                   const std::vector<Grid>& grids,
                                                   double tol = 1e-10);

// Potential cutoff: c_m = zeta_m * c + (1 - zeta_m) * (delta + tail), where
// zeta_m is the C^1 ramp cos^2(pi*(|x| - m)/2) on m <= |x| <= m+1, equal to 1
// on the ball of radius m and 0 outside radius m+1. When `tail` is not
// supplied it is estimated by sampling max_u c over the shell
// |x| in [m+1, m+3].
OperatorSpec perturb_potential(const OperatorSpec& spec, double m, double delta,
                               std::optional<double> tail = std::nullopt);

// Sampled estimate of limsup_{|x| -> inf} max_u c on a radial shell.
double estimate_potential_tail(const OperatorSpec& spec, double r_lo, double r_hi,
                               int n_samples = 512);

}  // namespace eigenflow
