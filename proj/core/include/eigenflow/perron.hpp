#pragma once

#include <optional>
#include <utility>

#include "eigenflow/fd_operator.hpp"
#include "eigenflow/grid.hpp"

namespace eigenflow {

// Principal (Perron) eigenpair of an irreducible Metzler matrix.
// psi is strictly positive with psi[anchor] == 1; residual is
// ||M psi - lambda psi||_inf / ||psi||_inf.
struct EigenPair {
  double lambda = 0.0;
  GridFunction psi;
  double residual = 0.0;
  int iterations = 0;
};

struct PerronOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  std::optional<GridFunction> start;  // default: all-ones
};

// Safeguarded shifted inverse iteration. Every iterate stays strictly
// positive (the resolvent of a Metzler matrix at a shift above the Perron
// root is nonnegative), and each iterate yields exact Collatz-Wielandt
// bounds L <= lambda_PF <= U used both to pick the next shift and to certify
// the result. When tol lies below the rounding floor of the quotient
// evaluation (large 1/h^2 matrix scales), the best certified iterate is
// returned instead of iterating forever; the residual field reports the
// achieved value either way. Throws NoConvergence / SingularShift.
EigenPair principal_eigenpair(const SparseColMat& M, int anchor,
                              const PerronOptions& opts = {});

// Exact matrix-level Collatz-Wielandt sandwich:
// min_i (Mv)_i/v_i <= lambda_PF(M) <= max_i (Mv)_i/v_i for any v > 0.
// Throws NonPositiveTestVector.
std::pair<double, double> matrix_cw_bounds(const SparseColMat& M, const GridFunction& v);

}  // namespace eigenflow
