#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "eigenflow/grid.hpp"
#include "eigenflow/problem.hpp"

namespace eigenflow {

// Control index per interior node, a discrete Markov policy.
using Policy = std::vector<int>;

using SparseRowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// Per-control upwind discretizations M_k of L_u + c(.,u) with Dirichlet
// elimination. Every M_k is Metzler (off-diagonals >= 0), verified entry by
// entry at assembly, so M_k + shift*I is a nonnegative irreducible matrix.
// Immutable after assembly and safe to share across threads.
struct DiscreteOperator {
  Grid grid;
  Sense sense = Sense::Min;
  std::vector<SparseRowMat> control_matrices;
  double shift = 0.0;  // s* = 1 + max over controls and rows of |diagonal|

  int num_controls() const { return static_cast<int>(control_matrices.size()); }
  int size() const { return grid.size(); }

  // Node-wise min (max) over controls of M_k psi. Positively homogeneous and
  // concave (convex for max) as a min (max) of linear maps.
  GridFunction apply(const GridFunction& psi) const;

  // Control index attaining the node-wise min/max; ties -> lowest index.
  Policy select_policy(const GridFunction& psi) const;

  GridFunction apply_policy(const Policy& v, const GridFunction& psi) const;

  // The policy-frozen matrix M_v, row i taken from M_{v[i]}.
  SparseColMat frozen(const Policy& v) const;
};

// Assembles second-order central differences for the diagonal diffusion
// terms, the monotone corner splitting for cross terms (requires
// |a_ij| <= min(a_ii, a_jj), else NonMonotoneStencil), and first-order upwind
// differences for the drift. Throws NonMonotoneStencil if any off-diagonal
// entry would be negative, naming the offending node.
DiscreteOperator assemble(const OperatorSpec& spec, const Grid& grid);

// Applies the drift-diffusion part of L_u (no potential) to an expression,
// using the same stencils but reading neighbor values from the expression
// itself (analytic ghosts, no Dirichlet elimination). Used by the Lyapunov
// drift checker where the test function does not vanish on the boundary.
GridFunction apply_generator_expr(const OperatorSpec& spec, const Grid& grid, const Expr& f,
                                  std::span<const double> control);

}  // namespace eigenflow
