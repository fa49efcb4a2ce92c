#include "eigenflow/grid.hpp"

#include <cmath>
#include <limits>

#include "eigenflow/errors.hpp"

namespace eigenflow {

std::string to_string(GridShape s) { return s == GridShape::Box ? "box" : "ball"; }

GridShape shape_from_string(const std::string& s) {
  if (s == "box") return GridShape::Box;
  if (s == "ball") return GridShape::Ball;
  throw InvalidArgument("shape must be \"box\" or \"ball\", got \"" + s + "\"");
}

int Grid::flatten(const std::array<int, 3>& q) const {
  int stride = 2 * m_ + 1;
  int f = 0;
  for (int k = d_ - 1; k >= 0; --k) f = f * stride + (q[k] + m_);
  return f;
}

bool Grid::lattice_interior(const std::array<int, 3>& q) const {
  for (int k = 0; k < d_; ++k)
    if (q[k] < -m_ || q[k] > m_) return false;
  if (shape_ == GridShape::Box) {
    for (int k = 0; k < d_; ++k)
      if (std::abs(q[k]) >= m_) return false;
    return true;
  }
  double s = 0;
  for (int k = 0; k < d_; ++k) {
    double v = h_ * q[k];
    s += v * v;
  }
  return s < R_ * R_ - 1e-12 * R_ * R_;
}

Grid Grid::build(int d, double R, double h, GridShape shape) {
  if (d < 1 || d > 3) throw InvalidArgument("grid dimension must be 1, 2, or 3");
  if (!(R > 0.0) || !(h > 0.0)) throw InvalidArgument("require R > 0 and h > 0");
  if (R / h < 2.0 - 1e-12)
    throw TooCoarse("R/h = " + std::to_string(R / h) +
                    " < 2: fewer than 3 interior nodes per axis");

  Grid g;
  g.d_ = d;
  g.R_ = R;
  g.shape_ = shape;
  g.m_ = static_cast<int>(std::ceil(R / h - 1e-9));
  g.h_ = R / g.m_;

  int stride = 2 * g.m_ + 1;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= stride;
  g.ordinal_.assign(total, -1);

  std::array<int, 3> q{0, 0, 0};
  std::array<int, 3> lo{-g.m_, 0, 0}, hi{g.m_, 0, 0};
  for (int k = 1; k < d; ++k) {
    lo[k] = -g.m_;
    hi[k] = g.m_;
  }
  // Row-major walk so ordinals are deterministic.
  for (q[2] = lo[2]; q[2] <= hi[2]; ++q[2])
    for (q[1] = lo[1]; q[1] <= hi[1]; ++q[1])
      for (q[0] = lo[0]; q[0] <= hi[0]; ++q[0]) {
        if (!g.lattice_interior(q)) continue;
        g.ordinal_[g.flatten(q)] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(q);
      }

  std::array<int, 3> origin{0, 0, 0};
  g.anchor_ = g.ordinal_[g.flatten(origin)];
  if (g.anchor_ < 0) throw TooCoarse("origin is not an interior node");
  return g;
}

int Grid::interior_ordinal(const std::array<int, 3>& q) const {
  for (int k = 0; k < d_; ++k)
    if (q[k] < -m_ || q[k] > m_) return -1;
  return ordinal_[flatten(q)];
}

int Grid::offset_neighbor(int i, const std::array<int, 3>& delta) const {
  std::array<int, 3> q = nodes_[i];
  for (int k = 0; k < d_; ++k) q[k] += delta[k];
  return interior_ordinal(q);
}

int Grid::nearest_interior(std::span<const double> x) const {
  std::array<int, 3> q{0, 0, 0};
  for (int k = 0; k < d_; ++k) {
    double r = std::round(x[k] / h_);
    r = std::max(-double(m_), std::min(double(m_), r));
    q[k] = static_cast<int>(r);
  }
  int ord = interior_ordinal(q);
  if (ord >= 0) return ord;
  // Rounded site fell on the boundary layer; take the closest interior node.
  double best = std::numeric_limits<double>::infinity();
  int besti = 0;
  for (int i = 0; i < size(); ++i) {
    double s = 0;
    for (int k = 0; k < d_; ++k) {
      double dxk = h_ * nodes_[i][k] - x[k];
      s += dxk * dxk;
    }
    if (s < best) {
      best = s;
      besti = i;
    }
  }
  return besti;
}

bool Grid::point_in_domain(std::span<const double> x) const {
  if (shape_ == GridShape::Box) {
    for (int k = 0; k < d_; ++k)
      if (std::abs(x[k]) >= R_) return false;
    return true;
  }
  double s = 0;
  for (int k = 0; k < d_; ++k) s += x[k] * x[k];
  return s < R_ * R_;
}

bool is_positive(const GridFunction& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0)) return false;
  return true;
}

GridFunction sample_on_grid(const Grid& grid, const Expr& e) {
  GridFunction v(grid.size());
  double x[3] = {0, 0, 0};
  for (int i = 0; i < grid.size(); ++i) {
    grid.coord(i, x);
    v[i] = e.eval(std::span<const double>(x, grid.dim()));
  }
  return v;
}

double interpolate(const Grid& grid, const GridFunction& v, std::span<const double> x) {
  const int d = grid.dim();
  const double h = grid.spacing();
  int base[3] = {0, 0, 0};
  double w[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    double t = x[k] / h;
    double f = std::floor(t);
    base[k] = static_cast<int>(f);
    w[k] = t - f;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    std::array<int, 3> q{0, 0, 0};
    double weight = 1.0;
    for (int k = 0; k < d; ++k) {
      int bit = (corner >> k) & 1;
      q[k] = base[k] + bit;
      weight *= bit ? w[k] : 1.0 - w[k];
    }
    if (weight == 0.0) continue;
    int ord = grid.interior_ordinal(q);
    if (ord >= 0) acc += weight * v[ord];  // eliminated sites contribute zero
  }
  return acc;
}

}  // namespace eigenflow
