#include "eigenflow/fd_operator.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "eigenflow/errors.hpp"

namespace eigenflow {

namespace {

std::string node_label(const Grid& grid, int i) {
  double x[3] = {0, 0, 0};
  grid.coord(i, x);
  std::string s = "node " + std::to_string(i) + " at (";
  for (int k = 0; k < grid.dim(); ++k) {
    if (k) s += ", ";
    s += std::to_string(x[k]);
  }
  return s + ")";
}

void check_cross_condition(const Eigen::Matrix3d& a, int d, const Grid& grid, int node) {
  for (int p = 0; p < d; ++p)
    for (int q = p + 1; q < d; ++q) {
      double lim = std::min(a(p, p), a(q, q));
      double tol = 1e-12 * std::max({std::abs(a(p, p)), std::abs(a(q, q)), 1.0});
      if (std::abs(a(p, q)) > lim + tol)
        throw NonMonotoneStencil("cross-diffusion |a" + std::to_string(p) + std::to_string(q) +
                                 "| exceeds min(a" + std::to_string(p) + std::to_string(p) +
                                 ", a" + std::to_string(q) + std::to_string(q) + ") at " +
                                 node_label(grid, node));
    }
}

// One structural stencil entry: lattice offset and diffusion weight; the
// same geometry is reused by assembly and by the analytic-ghost application.
struct StencilTerm {
  std::array<int, 3> delta;
  double weight;
};

// Diffusion stencil (second order terms only) for one node. Checks the
// monotonicity conditions and reports the offending node on failure.
void diffusion_stencil(const Eigen::Matrix3d& a, int d, double h, const Grid& grid, int node,
                       std::vector<StencilTerm>& out, double& diag) {
  check_cross_condition(a, d, grid, node);
  const double h2 = h * h;
  for (int p = 0; p < d; ++p) {
    double cross = 0.0;
    for (int q = 0; q < d; ++q)
      if (q != p) cross += std::abs(a(p, q));
    double axis = (a(p, p) - cross) / h2;
    if (axis < -1e-12 * (std::abs(a(p, p)) + cross + 1.0) / h2)
      throw NonMonotoneStencil("diffusion row not diagonally dominant (axis coefficient " +
                               std::to_string(axis * h2) + ") at " + node_label(grid, node));
    axis = std::max(axis, 0.0);
    for (int dir : {-1, +1}) {
      std::array<int, 3> delta{0, 0, 0};
      delta[p] = dir;
      out.push_back({delta, axis});
    }
    diag += -2.0 * a(p, p) / h2;
  }
  for (int p = 0; p < d; ++p)
    for (int q = p + 1; q < d; ++q) {
      double alpha = a(p, q);
      if (alpha == 0.0) continue;
      double w = std::abs(alpha) / h2;
      int sq = alpha > 0 ? +1 : -1;
      for (int dir : {-1, +1}) {
        std::array<int, 3> delta{0, 0, 0};
        delta[p] = dir;
        delta[q] = dir * sq;
        out.push_back({delta, w});
      }
      diag += 2.0 * w;
    }
}

void bfs_connected(const SparseRowMat& M, const Grid& grid, int control) {
  const int n = static_cast<int>(M.rows());
  if (n <= 1) return;
  std::vector<char> seen(n, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (SparseRowMat::InnerIterator it(M, i); it; ++it) {
      if (it.col() == i || it.value() <= 0.0) continue;
      if (!seen[it.col()]) {
        seen[it.col()] = 1;
        ++count;
        queue.push_back(static_cast<int>(it.col()));
      }
    }
  }
  if (count != n)
    throw NonMonotoneStencil("stencil graph for control " + std::to_string(control) +
                             " is disconnected (" + std::to_string(count) + " of " +
                             std::to_string(n) + " nodes reachable); grid " +
                             to_string(grid.shape()) + " R=" + std::to_string(grid.radius()));
}

}  // namespace

DiscreteOperator assemble(const OperatorSpec& spec, const Grid& grid) {
  spec.check_shape();
  if (spec.dimension != grid.dim())
    throw InvalidArgument("spec dimension does not match grid dimension");

  const int d = grid.dim();
  const int n = grid.size();
  const int K = spec.controls.size();
  const double h = grid.spacing();

  DiscreteOperator op;
  op.grid = grid;
  op.sense = spec.sense;
  op.control_matrices.resize(K);

  std::vector<std::vector<Eigen::Triplet<double>>> triplets(K);
  for (auto& t : triplets) t.reserve(static_cast<std::size_t>(n) * (2 * d + 3));

  double x[3] = {0, 0, 0};
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  std::vector<StencilTerm> diff_terms;
  double max_abs_diag = 0.0;

  for (int i = 0; i < n; ++i) {
    grid.coord(i, x);
    std::span<const double> xs(x, d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) a(p, q) = spec.a[p][q].eval(xs);

    diff_terms.clear();
    double diff_diag = 0.0;
    diffusion_stencil(a, d, h, grid, i, diff_terms, diff_diag);

    for (int k = 0; k < K; ++k) {
      std::span<const double> u(spec.controls.points[k]);
      double diag = diff_diag + spec.c.eval(xs, u);

      for (const auto& term : diff_terms) {
        if (term.weight == 0.0) continue;
        int j = grid.offset_neighbor(i, term.delta);
        if (j >= 0) triplets[k].emplace_back(i, j, term.weight);
      }

      for (int p = 0; p < d; ++p) {
        double beta = spec.b[p].eval(xs, u);
        if (beta == 0.0) continue;
        int dir = beta > 0 ? +1 : -1;
        int j = grid.neighbor(i, p, dir);
        double w = std::abs(beta) / h;
        if (j >= 0) triplets[k].emplace_back(i, j, w);
        diag -= w;
      }

      triplets[k].emplace_back(i, i, diag);
      max_abs_diag = std::max(max_abs_diag, std::abs(diag));
    }
  }

  for (int k = 0; k < K; ++k) {
    SparseRowMat M(n, n);
    M.setFromTriplets(triplets[k].begin(), triplets[k].end());
    M.makeCompressed();
    // Entry-by-entry Metzler verification.
    for (int i = 0; i < n; ++i)
      for (SparseRowMat::InnerIterator it(M, i); it; ++it)
        if (it.col() != i && it.value() < 0.0)
          throw NonMonotoneStencil("negative off-diagonal entry " + std::to_string(it.value()) +
                                   " at " + node_label(grid, i) + ", control " +
                                   std::to_string(k));
    bfs_connected(M, grid, k);
    op.control_matrices[k] = std::move(M);
  }

  op.shift = 1.0 + max_abs_diag;
  return op;
}

GridFunction DiscreteOperator::apply(const GridFunction& psi) const {
  GridFunction out = control_matrices[0] * psi;
  for (int k = 1; k < num_controls(); ++k) {
    GridFunction yk = control_matrices[k] * psi;
    if (sense == Sense::Min)
      out = out.cwiseMin(yk);
    else
      out = out.cwiseMax(yk);
  }
  return out;
}

Policy DiscreteOperator::select_policy(const GridFunction& psi) const {
  const int n = size();
  Policy v(n, 0);
  GridFunction best = control_matrices[0] * psi;
  for (int k = 1; k < num_controls(); ++k) {
    GridFunction yk = control_matrices[k] * psi;
    for (int i = 0; i < n; ++i) {
      bool better = sense == Sense::Min ? yk[i] < best[i] : yk[i] > best[i];
      if (better) {
        best[i] = yk[i];
        v[i] = k;
      }
    }
  }
  return v;
}

GridFunction DiscreteOperator::apply_policy(const Policy& v, const GridFunction& psi) const {
  const int n = size();
  GridFunction out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const SparseRowMat& M = control_matrices[v[i]];
    for (SparseRowMat::InnerIterator it(M, i); it; ++it) acc += it.value() * psi[it.col()];
    out[i] = acc;
  }
  return out;
}

SparseColMat DiscreteOperator::frozen(const Policy& v) const {
  const int n = size();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (2 * grid.dim() + 3));
  for (int i = 0; i < n; ++i) {
    const SparseRowMat& M = control_matrices[v[i]];
    for (SparseRowMat::InnerIterator it(M, i); it; ++it)
      triplets.emplace_back(i, static_cast<int>(it.col()), it.value());
  }
  SparseColMat out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

GridFunction apply_generator_expr(const OperatorSpec& spec, const Grid& grid, const Expr& f,
                                  std::span<const double> control) {
  const int d = grid.dim();
  const double h = grid.spacing();
  GridFunction out(grid.size());

  double x[3] = {0, 0, 0};
  double xn[3] = {0, 0, 0};
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  std::vector<StencilTerm> diff_terms;

  auto value_at = [&](const double* base, const std::array<int, 3>& delta) {
    for (int k = 0; k < d; ++k) xn[k] = base[k] + h * delta[k];
    return f.eval(std::span<const double>(xn, d));
  };

  for (int i = 0; i < grid.size(); ++i) {
    grid.coord(i, x);
    std::span<const double> xs(x, d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) a(p, q) = spec.a[p][q].eval(xs);

    diff_terms.clear();
    double diag = 0.0;
    diffusion_stencil(a, d, h, grid, i, diff_terms, diag);

    double center = f.eval(xs);
    double acc = diag * center;
    for (const auto& term : diff_terms) acc += term.weight * value_at(x, term.delta);

    for (int p = 0; p < d; ++p) {
      double beta = spec.b[p].eval(xs, control);
      if (beta == 0.0) continue;
      std::array<int, 3> delta{0, 0, 0};
      delta[p] = beta > 0 ? +1 : -1;
      acc += std::abs(beta) / h * (value_at(x, delta) - center);
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace eigenflow
