#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "eigenflow/certify.hpp"
#include "eigenflow/errors.hpp"
#include "eigenflow/hjb.hpp"
#include "support/oracles.hpp"

using namespace eigenflow;

namespace {

OperatorSpec spec_1d(const std::string& a, const std::string& b, const std::string& c,
                     std::vector<std::vector<double>> controls = {{}},
                     Sense sense = Sense::Min) {
  nlohmann::json j{{"dimension", 1}, {"a", {{a}}}, {"b", {b}}, {"c", c},
                   {"sense", to_string(sense)}, {"controls", controls}};
  return OperatorSpec::from_json(j);
}

}  // namespace

TEST_CASE("certificates at the eigenfunction are tight") {
  OperatorSpec spec = spec_1d("1", "u0", "cos(x0)", {{-1.0}, {1.0}});
  Grid g = Grid::build(1, 2.0, 0.05, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);
  Certificate lo = cw_lower(op, eig.pair.psi);
  Certificate hi = cw_upper(op, eig.pair.psi);
  double tol = std::max(2 * eig.pair.residual, 1e-8);
  CHECK(lo.bound == doctest::Approx(eig.pair.lambda).epsilon(tol));
  CHECK(hi.bound == doctest::Approx(eig.pair.lambda).epsilon(tol));
  CHECK(lo.bound <= eig.pair.lambda + 1e-12);
  CHECK(eig.pair.lambda <= hi.bound + 1e-12);
  CHECK(lo.tag == CertTag::VanishingBoundary);
}

TEST_CASE("random positive test functions sandwich the eigenvalue") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    OperatorSpec spec = testing::random_spec_1d(rng, 2, false, Sense::Min);
    Grid g = Grid::build(1, 1.0, 0.2, GridShape::Box);
    DiscreteOperator op = assemble(spec, g);
    SemilinearEigenResult eig = policy_iteration(op);
    for (int s = 0; s < 30; ++s) {
      GridFunction psi = testing::random_positive(rng, g.size());
      Certificate lo = cw_lower(op, psi);
      Certificate hi = cw_upper(op, psi);
      double slack = 1e-10 * (1 + std::abs(eig.pair.lambda));
      CHECK(lo.bound <= eig.pair.lambda + slack);
      CHECK(eig.pair.lambda <= hi.bound + slack);
    }
  }
}

TEST_CASE("cosine test function gives a crude but valid lower bound") {
  OperatorSpec spec = spec_1d("1", "-1", "0");
  Grid g = Grid::build(1, 1.0, 0.01, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);
  Certificate lo = cw_lower(op, Expr::parse("cos(x0*1.5707963267948966)"));
  CHECK(lo.bound <= eig.pair.lambda + 1e-10);
  // crude: the quotient dives near the boundary where the drift term dominates
  CHECK(lo.bound < eig.pair.lambda - 1.0);
}

TEST_CASE("cos * exp grid test function is tight away from the boundary") {
  // phi_R = cos(pi x / 2R) exp(x/2) solves the eigenproblem exactly in the
  // continuum. Sampled to the grid, the quotient matches the eigenvalue to
  // O(h) at interior nodes, but at the boundary-adjacent nodes the O(h)
  // truncation divides by phi ~ h, so the min quotient (the certified bound)
  // is crude there: valid, one-sided, and O(1) off. Good test functions
  // matter exactly because of this.
  double R = 2.0;
  OperatorSpec spec = spec_1d("1", "-1", "0");
  Grid g = Grid::build(1, R, 0.01, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  GridFunction phi = sample_on_grid(g, Expr::parse("cos(x0*0.78539816339744831)*exp(x0/2)"));
  Certificate lo = cw_lower(op, phi);
  double exact = -(0.25 + M_PI * M_PI / (4 * R * R));
  CHECK(lo.bound <= exact + 1e-9);  // one-sided validity
  CHECK(lo.bound > exact - 1.0);
  // at the anchor the quotient is first-order accurate
  GridFunction quotient = op.apply(phi).cwiseQuotient(phi);
  CHECK(quotient[g.anchor()] == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("exponential expression certificate is h- and R-independent") {
  OperatorSpec spec = spec_1d("1", "-1", "0");
  for (auto [R, h] : std::vector<std::pair<double, double>>{{5, 0.1}, {10, 0.02}, {20, 0.25}}) {
    Grid g = Grid::build(1, R, h, GridShape::Box);
    Certificate up = cw_upper(spec, g, Expr::parse("exp(x0/2)"));
    CHECK(up.tag == CertTag::InteriorPositive);
    CHECK(std::abs(up.bound + 0.25) < 1e-9);
    CHECK(std::abs(up.quotient_min - up.quotient_max) < 1e-9);
  }
}

TEST_CASE("constant test function reports the potential ceiling") {
  OperatorSpec spec = spec_1d("1", "-1", "0.7");
  Grid g = Grid::build(1, 3.0, 0.1, GridShape::Box);
  Certificate up = cw_upper(spec, g, Expr::parse("1"));
  CHECK(up.bound == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("non-positive test functions are rejected") {
  OperatorSpec spec = spec_1d("1", "0", "0");
  Grid g = Grid::build(1, 1.0, 0.25, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  GridFunction bad(g.size());
  bad.setOnes();
  bad[1] = -0.5;
  CHECK_THROWS_AS(cw_lower(op, bad), NonPositiveTestFunction);
  CHECK_THROWS_AS(cw_upper(spec, g, Expr::parse("x0")), NonPositiveTestFunction);
}

TEST_CASE("minimax agrees with the Perron root on a toy matrix") {
  // Uncontrolled max-sense Laplacian plus potential on a tiny grid.
  OperatorSpec spec = spec_1d("1", "0", "cos(x0)", {{}}, Sense::Max);
  Grid g = Grid::build(1, 1.0, 0.4, GridShape::Box);  // 3 interior nodes
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);
  MinimaxResult mm = minimax_measure(op, 4000, 1e-4);
  CHECK(mm.converged);
  CHECK(std::abs(mm.value - eig.pair.lambda) < 1e-3);
  CHECK(mm.lower <= eig.pair.lambda + 1e-9);
  CHECK(eig.pair.lambda <= mm.upper + 1e-9);
}

TEST_CASE("minimax on a controlled operator") {
  OperatorSpec spec = spec_1d("1", "u0", "0.3*u0*x0", {{-1.0}, {1.0}}, Sense::Max);
  Grid g = Grid::build(1, 1.0, 0.25, GridShape::Box);  // 7 nodes
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);
  MinimaxResult mm = minimax_measure(op, 6000, 1e-4);
  CHECK(std::abs(mm.value - eig.pair.lambda) < 1e-3);
}

TEST_CASE("minimax requires the max sense") {
  OperatorSpec spec = spec_1d("1", "0", "0");
  Grid g = Grid::build(1, 1.0, 0.4, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  CHECK_THROWS_AS(minimax_measure(op, 10, 1e-3), InvalidArgument);
}

TEST_CASE("ground state proportionality verdicts") {
  OperatorSpec spec = spec_1d("1", "u0", "cos(x0)", {{-1.0}, {1.0}});
  Grid g = Grid::build(1, 1.5, 0.1, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);

  GridFunction phi = 2.5 * eig.pair.psi;
  Verdict ok = ground_state_check(op, phi, eig.pair.lambda, eig.pair.psi, 1e-6);
  CHECK(ok.status == VerdictStatus::Confirmed);
  CHECK(ok.kappa == doctest::Approx(2.5).epsilon(1e-6));

  // A perturbation that breaks the supersolution inequality is not applicable.
  GridFunction bad = eig.pair.psi + 0.3 * sample_on_grid(g, Expr::parse("1 + cos(7*x0)"));
  Verdict na = ground_state_check(op, bad, eig.pair.lambda, eig.pair.psi, 1e-8);
  CHECK(na.status == VerdictStatus::NotApplicable);
}

TEST_CASE("sign-changing eigenvectors fail the precondition") {
  // Symmetric Laplacian: second eigenvector is sign-changing with a smaller
  // eigenvalue, so it cannot satisfy apply(phi) >= lambda* phi.
  OperatorSpec spec = spec_1d("1", "0", "0");
  Grid g = Grid::build(1, 1.0, 0.125, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);

  Eigen::MatrixXd M(op.frozen(Policy(g.size(), 0)));
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  int second = -1;
  double best = -1e300;
  for (int i = 0; i < M.rows(); ++i) {
    double re = es.eigenvalues()[i].real();
    if (re < eig.pair.lambda - 1e-6 && re > best) {
      best = re;
      second = i;
    }
  }
  REQUIRE(second >= 0);
  GridFunction phi2 = es.eigenvectors().col(second).real();
  Verdict v = ground_state_check(op, phi2, eig.pair.lambda, eig.pair.psi, 1e-8);
  CHECK(v.status == VerdictStatus::NotApplicable);
}

TEST_CASE("negativity verdicts under a negative eigenvalue") {
  OperatorSpec spec = spec_1d("1", "0", "-1");
  Grid g = Grid::build(1, 1.0, 0.1, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  SemilinearEigenResult eig = policy_iteration(op);
  REQUIRE(eig.pair.lambda < -1.0);

  GridFunction zero = GridFunction::Zero(g.size());
  Verdict vz = negativity_check(op, zero, eig.pair.lambda, 1e-9);
  CHECK(vz.status == VerdictStatus::Confirmed);
  CHECK(vz.detail == "phi = 0");

  GridFunction neg = -eig.pair.psi;
  Verdict vn = negativity_check(op, neg, eig.pair.lambda, 1e-7);
  CHECK(vn.status == VerdictStatus::Confirmed);
  CHECK(vn.detail == "phi < 0 everywhere");

  Verdict vp = negativity_check(op, eig.pair.psi, eig.pair.lambda, 1e-7);
  CHECK(vp.status == VerdictStatus::NotApplicable);
}

TEST_CASE("no nontrivial solutions between the min and max eigenvalues") {
  OperatorSpec spec_min = spec_1d("1", "u0", "0.5*u0", {{-1.0}, {1.0}}, Sense::Min);
  OperatorSpec spec_max = spec_min;
  spec_max.sense = Sense::Max;
  Grid g = Grid::build(1, 1.0, 0.125, GridShape::Box);
  DiscreteOperator op_min = assemble(spec_min, g);
  DiscreteOperator op_max = assemble(spec_max, g);
  double lo = policy_iteration(op_min).pair.lambda;
  double hi = policy_iteration(op_max).pair.lambda;
  REQUIRE(lo < hi - 0.05);
  double mid = 0.5 * (lo + hi);
  GapSearchReport rep = gap_solution_search(op_min, mid, 20, 4242, 1e-9);
  CHECK(rep.starts == 20);
  CHECK(!rep.nontrivial_found);
}

TEST_CASE("gap search does find genuine eigenlevels") {
  // Sanity for the search itself: at lambda = lambda_D a positive solution
  // exists and the anchored iteration locks onto it.
  OperatorSpec spec = spec_1d("1", "u0", "0.5*u0", {{-1.0}, {1.0}}, Sense::Min);
  Grid g = Grid::build(1, 1.0, 0.125, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  double lam = policy_iteration(op).pair.lambda;
  GapSearchReport rep = gap_solution_search(op, lam, 5, 7, 1e-7);
  CHECK(rep.nontrivial_found);
}

TEST_CASE("certificate and verdict serialization") {
  OperatorSpec spec = spec_1d("1", "0", "0");
  Grid g = Grid::build(1, 1.0, 0.25, GridShape::Box);
  DiscreteOperator op = assemble(spec, g);
  Certificate c = cw_lower(op, GridFunction::Ones(g.size()));
  nlohmann::json j = c.to_json();
  CHECK(j["kind"] == "lower");
  CHECK(j["tag"] == "vanishing-boundary");
  CHECK(j.contains("quotient_min"));
  CHECK(j.contains("argmin_node"));
}
