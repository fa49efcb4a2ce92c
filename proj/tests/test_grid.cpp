#include <cmath>

#include <doctest.h>

#include "eigenflow/errors.hpp"
#include "eigenflow/grid.hpp"

using namespace eigenflow;

TEST_CASE("1D box grid node placement") {
  Grid g = Grid::build(1, 1.0, 0.5, GridShape::Box);
  CHECK(g.size() == 3);
  CHECK(g.spacing() == doctest::Approx(0.5));
  double x[1];
  g.coord(0, x);
  CHECK(x[0] == doctest::Approx(-0.5));
  g.coord(g.anchor(), x);
  CHECK(x[0] == doctest::Approx(0.0));
  g.coord(2, x);
  CHECK(x[0] == doctest::Approx(0.5));
}

TEST_CASE("2D ball interior count") {
  Grid g = Grid::build(2, 1.0, 0.5, GridShape::Ball);
  CHECK(g.size() == 9);  // (0,0), 4 axis neighbors, 4 corners at radius sqrt(0.5)
}

TEST_CASE("too coarse grids are rejected") {
  CHECK_THROWS_AS(Grid::build(1, 1.0, 0.6, GridShape::Box), TooCoarse);
  CHECK_THROWS_AS(Grid::build(1, 1.0, 2.0, GridShape::Box), TooCoarse);
  CHECK_THROWS_AS(Grid::build(1, -1.0, 0.1, GridShape::Box), InvalidArgument);
}

TEST_CASE("requested spacing is an upper bound") {
  Grid g = Grid::build(1, 1.0, 0.3, GridShape::Box);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.spacing() <= 0.3);
  Grid exact = Grid::build(1, 1.0, 0.002, GridShape::Box);
  CHECK(exact.spacing() == doctest::Approx(0.002));
}

TEST_CASE("neighbors and Dirichlet elimination") {
  Grid g = Grid::build(1, 1.0, 0.5, GridShape::Box);
  CHECK(g.neighbor(0, 0, -1) == -1);  // boundary
  CHECK(g.neighbor(0, 0, +1) == 1);
  CHECK(g.neighbor(1, 0, +1) == 2);
  CHECK(g.neighbor(2, 0, +1) == -1);
}

TEST_CASE("nearest interior node") {
  Grid g = Grid::build(1, 2.0, 0.5, GridShape::Box);
  double x1[1] = {0.74};
  double x2[1] = {5.0};  // clamped to the boundary layer, then nearest interior
  int n1 = g.nearest_interior(x1);
  double c[1];
  g.coord(n1, c);
  CHECK(c[0] == doctest::Approx(0.5));
  int n2 = g.nearest_interior(x2);
  g.coord(n2, c);
  CHECK(c[0] == doctest::Approx(1.5));
}

TEST_CASE("positivity predicate") {
  GridFunction v(3);
  v << 1.0, 2.0, 0.5;
  CHECK(is_positive(v));
  v[1] = 0.0;
  CHECK(!is_positive(v));
  v[1] = -1.0;
  CHECK(!is_positive(v));
}

TEST_CASE("sampling and interpolation") {
  Grid g = Grid::build(1, 2.0, 0.25, GridShape::Box);
  GridFunction v = sample_on_grid(g, Expr::parse("x0 + 2"));
  double mid[1] = {0.625};  // between nodes 0.5 and 0.75
  CHECK(interpolate(g, v, mid) == doctest::Approx(2.625));
  double outside[1] = {5.0};
  CHECK(interpolate(g, v, outside) == doctest::Approx(0.0));
  // approaching the boundary blends toward the eliminated zero layer
  double near_edge[1] = {1.875};
  CHECK(interpolate(g, v, near_edge) == doctest::Approx(0.5 * (1.75 + 2) + 0.5 * 0));
}

TEST_CASE("2D bilinear interpolation") {
  Grid g = Grid::build(2, 2.0, 0.5, GridShape::Box);
  GridFunction v = sample_on_grid(g, Expr::parse("x0 + 3*x1"));
  double p[2] = {0.25, 0.25};
  CHECK(interpolate(g, v, p) == doctest::Approx(0.25 + 0.75));
  double q[2] = {-0.1, 0.6};
  CHECK(interpolate(g, v, q) == doctest::Approx(-0.1 + 1.8));
}

TEST_CASE("3D ball interior count") {
  Grid g = Grid::build(3, 1.0, 0.5, GridShape::Ball);
  CHECK(g.size() == 27);  // all offsets in {-h,0,h}^3 have norm < 1
  CHECK(g.anchor() >= 0);
  CHECK(g.norm_of(g.anchor()) == doctest::Approx(0.0));
}

TEST_CASE("ball norm helper") {
  Grid g = Grid::build(2, 1.0, 0.5, GridShape::Ball);
  bool found = false;
  for (int i = 0; i < g.size(); ++i) {
    if (g.lattice(i)[0] == 1 && g.lattice(i)[1] == 1) {
      CHECK(g.norm_of(i) == doctest::Approx(std::sqrt(0.5)));
      found = true;
    }
  }
  CHECK(found);
}
