#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eigenflow/fd_operator.hpp"
#include "eigenflow/hjb.hpp"

namespace eigenflow {

struct RadiusResult {
  double radius = 0.0;
  double spacing = 0.0;  // effective h
  int nodes = 0;
  double lambda = 0.0;
  double residual = 0.0;
  int sweeps = 0;
  bool failed = false;
  std::string error;
};

// Dirichlet eigenvalues on growing domains with a 1/R^2 extrapolation of the
// generalized eigenvalue. The raw sequence is always reported; the fit falls
// back to the last value when its residual is poor.
struct ExhaustionResult {
  std::vector<RadiusResult> sequence;
  double lambda_est = 0.0;
  std::string model;  // "lambda - beta/R^2" or "last-value"
  double fit_beta = 0.0;
  double fit_residual = 0.0;
  bool monotone = false;  // lambda_R nondecreasing within tolerance
  bool all_converged = false;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // columns R,h,N,lambda,residual,sweeps
};

using SpacingRule = std::function<double(double R)>;

inline SpacingRule fixed_spacing(double h) {
  return [h](double) { return h; };
}
inline SpacingRule proportional_spacing(double ratio) {
  return [ratio](double R) { return ratio * R; };
}

// Solves the Dirichlet problem for every radius (independent radii in
// parallel, aggregation ordered by radius) and extrapolates. Per-radius
// failures are recorded in the sequence, not thrown.
ExhaustionResult lambda_sequence(const OperatorSpec& spec, const std::vector<double>& radii,
                                 const SpacingRule& h_rule, double tol = 1e-10,
                                 GridShape shape = GridShape::Ball, int threads = 0);

// Numerical check of the Lyapunov drift inequality on a grid, using the same
// upwind stencils as the solver with analytic ghost values (the discrete
// analogue of the inequality, not the continuum statement).
struct DriftReport {
  std::string variant;          // "A2.1" or "A2.2"
  bool drift_pass = false;      // sup_u L_u V <= kappa1*1_K - rate*V at all nodes
  double worst_violation = 0.0; // max over nodes of lhs - rhs (<= 0 means pass)
  std::vector<double> worst_node;
  double gamma_extracted = 0.0; // largest rate supported outside the compact set
  double min_V = 0.0;
  // A2.2(ii): ||c^-||_inf + max over outer shell of max_u c, compared to gamma.
  double cond2_lhs = 0.0;
  bool cond2_pass = false;
  bool pass = false;
  std::string note;

  nlohmann::json to_json() const;
};

DriftReport lyapunov_check(const OperatorSpec& spec, const LyapunovSpec& lyap,
                           const Grid& grid);

}  // namespace eigenflow
