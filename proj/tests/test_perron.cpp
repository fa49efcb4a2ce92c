#include <cmath>
#include <random>

#include <doctest.h>
#include <Eigen/Dense>

#include "eigenflow/errors.hpp"
#include "eigenflow/fd_operator.hpp"
#include "eigenflow/perron.hpp"
#include "support/oracles.hpp"

using namespace eigenflow;

namespace {

SparseColMat to_sparse(const Eigen::MatrixXd& M) {
  SparseColMat out(M.rows(), M.cols());
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) trip.emplace_back(i, j, M(i, j));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseColMat example21_matrix(double R, double h, int* anchor, int* n_out = nullptr) {
  Grid g = Grid::build(1, R, h, GridShape::Box);
  nlohmann::json j{{"dimension", 1}, {"a", {{"1"}}}, {"b", {"-1"}}, {"c", "0"},
                   {"sense", "min"}};
  DiscreteOperator op = assemble(OperatorSpec::from_json(j), g);
  *anchor = g.anchor();
  if (n_out) *n_out = g.size();
  return op.frozen(Policy(g.size(), 0));
}

}  // namespace

TEST_CASE("symmetric 2x2") {
  Eigen::MatrixXd M(2, 2);
  M << 2, 1, 1, 2;
  PerronOptions opts;
  opts.tol = 1e-12;
  EigenPair pair = principal_eigenpair(to_sparse(M), 0, opts);
  CHECK(pair.lambda == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(pair.psi[0] == doctest::Approx(1.0));
  CHECK(pair.psi[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pair.residual < 1e-10);
}

TEST_CASE("Dirichlet Laplacian matches the exact discrete eigenvalue") {
  // tridiag(1,-2,1)/h^2 on (-R, R): lambda_1 = (2 cos(pi h / 2R) - 2)/h^2.
  double R = 1.0, h = 0.01;
  Grid g = Grid::build(1, R, h, GridShape::Box);
  nlohmann::json j{{"dimension", 1}, {"a", {{"1"}}}, {"b", {"0"}}, {"c", "0"},
                   {"sense", "min"}};
  DiscreteOperator op = assemble(OperatorSpec::from_json(j), g);
  EigenPair pair = principal_eigenpair(op.frozen(Policy(g.size(), 0)), g.anchor());
  double exact_h = (2 * std::cos(M_PI * h / (2 * R)) - 2) / (h * h);
  CHECK(pair.lambda == doctest::Approx(exact_h).epsilon(1e-9));
  // continuum limit -pi^2/(4R^2) = -2.4674011 at O(h^2)
  CHECK(std::abs(pair.lambda + M_PI * M_PI / 4.0) < 2 * h * h);
  CHECK(is_positive(pair.psi));
}

TEST_CASE("transient drift benchmark matrix against the Toeplitz formula") {
  // alpha = 1/h^2 + 1/h (sub), beta = -2/h^2 - 1/h, gamma = 1/h^2:
  // lambda_1 = beta + 2 sqrt(alpha gamma) cos(pi h / 2R).
  double R = 1.0, h = 0.005;
  int anchor, n;
  SparseColMat M = example21_matrix(R, h, &anchor, &n);
  EigenPair pair = principal_eigenpair(M, anchor);
  double alpha = 1 / (h * h) + 1 / h, beta = -2 / (h * h) - 1 / h, gamma = 1 / (h * h);
  double exact_h = beta + 2 * std::sqrt(alpha * gamma) * std::cos(M_PI / (n + 1));
  CHECK(pair.lambda == doctest::Approx(exact_h).epsilon(1e-8));
  // O(h) away from the continuum value -(1/4 + pi^2/(4 R^2))
  double cont = -(0.25 + M_PI * M_PI / (4 * R * R));
  CHECK(std::abs(pair.lambda - cont) < 3 * h);

  int anchor10;
  SparseColMat M10 = example21_matrix(10.0, 0.005, &anchor10);
  EigenPair pair10 = principal_eigenpair(M10, anchor10);
  CHECK(std::abs(pair10.lambda + (0.25 + M_PI * M_PI / 400.0)) < 0.01);
}

TEST_CASE("2D and 3D box Laplacians match the tensor closed form") {
  // Separable spectrum: d copies of the 1D stencil eigenvalue.
  for (int d : {2, 3}) {
    double R = 1.0, h = d == 2 ? 0.1 : 0.2;
    Grid g = Grid::build(d, R, h, GridShape::Box);
    nlohmann::json j{{"dimension", d}, {"c", "0"}, {"sense", "min"}};
    j["a"] = nlohmann::json::array();
    j["b"] = nlohmann::json::array();
    for (int p = 0; p < d; ++p) {
      nlohmann::json row = nlohmann::json::array();
      for (int q = 0; q < d; ++q) row.push_back(p == q ? "1" : "0");
      j["a"].push_back(row);
      j["b"].push_back("0");
    }
    DiscreteOperator op = assemble(OperatorSpec::from_json(j), g);
    EigenPair pair = principal_eigenpair(op.frozen(Policy(g.size(), 0)), g.anchor());
    double exact_h = d * (2 * std::cos(M_PI * h / (2 * R)) - 2) / (h * h);
    CHECK(pair.lambda == doctest::Approx(exact_h).epsilon(1e-9));
    CHECK(is_positive(pair.psi));
  }
}

TEST_CASE("disk eigenvalue approaches the Bessel closed form") {
  // Dirichlet Laplacian on the unit disk: lambda = -j_{0,1}^2 ~ -5.7831860;
  // the rasterized boundary perturbs it at O(h).
  Grid g = Grid::build(2, 1.0, 0.02, GridShape::Ball);
  OperatorSpec spec = OperatorSpec::from_json(nlohmann::json::parse(R"({
    "dimension": 2,
    "a": [["1", "0"], ["0", "1"]],
    "b": ["0", "0"],
    "c": "0",
    "sense": "min"})"));
  DiscreteOperator op = assemble(spec, g);
  EigenPair pair = principal_eigenpair(op.frozen(Policy(g.size(), 0)), g.anchor());
  CHECK(pair.lambda == doctest::Approx(-5.7831859629).epsilon(0.02));
  CHECK(is_positive(pair.psi));
}

TEST_CASE("Collatz-Wielandt hand example") {
  Eigen::MatrixXd M(2, 2);
  M << 2, 1, 1, 2;
  GridFunction v(2);
  v << 1, 2;
  auto [lo, hi] = matrix_cw_bounds(to_sparse(M), v);
  CHECK(lo == doctest::Approx(2.5));
  CHECK(hi == doctest::Approx(4.0));
  CHECK(lo <= 3.0);
  CHECK(3.0 <= hi);
}

TEST_CASE("CW sandwich against the dense oracle on random Metzler matrices") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    int n = size(rng);
    Eigen::MatrixXd M = testing::random_metzler(rng, n);
    double lam = testing::dense_perron(M).lambda;
    GridFunction v = testing::random_positive(rng, n);
    auto [lo, hi] = matrix_cw_bounds(to_sparse(M), v);
    double slack = 1e-12 * (1 + std::abs(lam));
    CHECK(lo <= lam + slack);
    CHECK(lam <= hi + slack);
  }
}

TEST_CASE("solver matches the dense oracle") {
  std::mt19937_64 rng(321);
  std::uniform_int_distribution<int> size(2, 8);
  PerronOptions opts;
  opts.tol = 1e-12;
  for (int trial = 0; trial < 100; ++trial) {
    int n = size(rng);
    Eigen::MatrixXd M = testing::random_metzler(rng, n);
    EigenPair pair = principal_eigenpair(to_sparse(M), 0, opts);
    testing::DensePerron oracle = testing::dense_perron(M);
    CHECK(pair.lambda == doctest::Approx(oracle.lambda).epsilon(1e-11));
    // positive eigenvector unique up to scale (Perron simplicity)
    Eigen::VectorXd scaled = oracle.v / oracle.v[0];
    CHECK((pair.psi - scaled).cwiseAbs().maxCoeff() < 1e-7 * scaled.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("shift invariance to machine precision") {
  std::mt19937_64 rng(77);
  PerronOptions opts;
  opts.tol = 1e-13;
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd M = testing::random_metzler(rng, 6);
    EigenPair base = principal_eigenpair(to_sparse(M), 0, opts);
    for (double c0 : {-3.0, 0.7}) {
      Eigen::MatrixXd Ms = M + c0 * Eigen::MatrixXd::Identity(6, 6);
      EigenPair shifted = principal_eigenpair(to_sparse(Ms), 0, opts);
      CHECK(shifted.lambda - base.lambda == doctest::Approx(c0).epsilon(1e-12));
      CHECK((shifted.psi - base.psi).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("entrywise monotonicity of the Perron root") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(0.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd M = testing::random_metzler(rng, 6);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) P(i, j) = unif(rng);
    double lam = testing::dense_perron(M).lambda;
    double lam_up = testing::dense_perron(Eigen::MatrixXd(M + P)).lambda;
    CHECK(lam <= lam_up + 1e-10);
  }
}

TEST_CASE("error paths") {
  Eigen::MatrixXd M(2, 2);
  M << 2, 1, 1, 2;
  GridFunction bad(2);
  bad << 1, -1;
  CHECK_THROWS_AS(matrix_cw_bounds(to_sparse(M), bad), NonPositiveTestVector);
  PerronOptions opts;
  opts.max_iter = 1;
  CHECK_THROWS_AS(principal_eigenpair(to_sparse(M), 0, opts), NoConvergence);
}
