#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eigenflow/expr.hpp"

namespace eigenflow {

enum class GridShape { Box, Ball };

std::string to_string(GridShape s);
GridShape shape_from_string(const std::string& s);

// Uniform tensor grid on [-R, R]^d (or its inscribed ball), Dirichlet
// boundary by elimination: only interior nodes carry unknowns, references to
// eliminated neighbors read as zero. Nodes sit at integer multiples of the
// effective spacing, so the grid is symmetric about the origin and the origin
// itself is always an interior node (the anchor).
class Grid {
 public:
  // The requested spacing h is an upper bound: the effective spacing is
  // R / ceil(R/h), which lands boundary nodes exactly on |x_i| = R.
  // Throws TooCoarse when R/h < 2 (fewer than 3 interior nodes per axis).
  static Grid build(int d, double R, double h, GridShape shape);

  int dim() const { return d_; }
  double radius() const { return R_; }
  double spacing() const { return h_; }
  GridShape shape() const { return shape_; }
  int extent() const { return m_; }  // lattice indices span [-m, m]

  int size() const { return static_cast<int>(nodes_.size()); }
  int anchor() const { return anchor_; }

  const std::array<int, 3>& lattice(int i) const { return nodes_[i]; }
  void coord(int i, double* out) const {
    for (int k = 0; k < d_; ++k) out[k] = h_ * nodes_[i][k];
  }
  Eigen::Vector3d coord3(int i) const {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    coord(i, x.data());
    return x;
  }
  double norm_of(int i) const {
    double s = 0;
    for (int k = 0; k < d_; ++k) {
      double v = h_ * nodes_[i][k];
      s += v * v;
    }
    return std::sqrt(s);
  }

  // Interior ordinal of the node at lattice offset `delta` from node i, or -1
  // when that lattice site is not interior (Dirichlet zero).
  int offset_neighbor(int i, const std::array<int, 3>& delta) const;
  int neighbor(int i, int axis, int dir) const {
    std::array<int, 3> delta{0, 0, 0};
    delta[axis] = dir;
    return offset_neighbor(i, delta);
  }

  int interior_ordinal(const std::array<int, 3>& q) const;

  // Nearest interior node to an arbitrary point (used by grid policies).
  int nearest_interior(std::span<const double> x) const;

  bool point_in_domain(std::span<const double> x) const;

 private:
  int d_ = 1;
  double R_ = 1.0;
  double h_ = 0.5;
  GridShape shape_ = GridShape::Box;
  int m_ = 2;
  std::vector<std::array<int, 3>> nodes_;
  std::vector<int> ordinal_;  // flattened (2m+1)^d lookup, -1 = not interior
  int anchor_ = 0;

  int flatten(const std::array<int, 3>& q) const;
  bool lattice_interior(const std::array<int, 3>& q) const;
};

using GridFunction = Eigen::VectorXd;

bool is_positive(const GridFunction& v);

// Evaluates an expression at every interior node.
GridFunction sample_on_grid(const Grid& grid, const Expr& e);

// Multilinear interpolation of a grid function at an arbitrary point; the
// function is extended by zero outside the interior (Dirichlet extension).
double interpolate(const Grid& grid, const GridFunction& v, std::span<const double> x);

}  // namespace eigenflow
