#include <doctest.h>

#include "eigenflow/errors.hpp"
#include "eigenflow/problem.hpp"

using namespace eigenflow;

namespace {

OperatorSpec make_spec(const std::string& a, const std::string& b, const std::string& c,
                       std::vector<std::vector<double>> controls = {{}}) {
  nlohmann::json j{{"dimension", 1}, {"a", {{a}}}, {"b", {b}}, {"c", c},
                   {"sense", "min"}, {"controls", controls}};
  return OperatorSpec::from_json(j);
}

}  // namespace

TEST_CASE("json round trip") {
  OperatorSpec spec = make_spec("1", "-1 + u0", "cos(x0)*u0", {{-1.0}, {1.0}});
  OperatorSpec back = OperatorSpec::from_json(spec.to_json());
  CHECK(back.dimension == 1);
  CHECK(back.controls.size() == 2);
  double x[1] = {0.7};
  double u[1] = {-1.0};
  CHECK(back.b[0].eval(x, u) == doctest::Approx(spec.b[0].eval(x, u)));
  CHECK(back.c.eval(x, u) == doctest::Approx(spec.c.eval(x, u)));
}

TEST_CASE("validation passes for the transient drift benchmark") {
  OperatorSpec spec = make_spec("1", "-1", "0");
  ValidationReport rep = validate_spec(spec, 10.0, 500);
  CHECK(rep.pass);
  CHECK(rep.min_diffusion_eigenvalue == doctest::Approx(1.0));
  CHECK(rep.max_drift_norm == doctest::Approx(1.0));
  CHECK(rep.min_potential == doctest::Approx(0.0));
  CHECK(!rep.assertions.empty());
}

TEST_CASE("degenerate diffusion is rejected at the origin sample") {
  OperatorSpec spec = make_spec("x0^2", "0", "0");
  CHECK_THROWS_AS(validate_spec(spec, 1.0, 10), DegenerateDiffusion);
}

TEST_CASE("potential below the configured floor is rejected") {
  OperatorSpec spec = make_spec("1", "0", "-1000000000");
  CHECK_THROWS_AS(validate_spec(spec, 1.0, 10), UnboundedBelowPotential);
}

TEST_CASE("sampling is nested: more samples only tighten the report") {
  OperatorSpec spec = make_spec("1 + x0^2/4", "x0 - 1", "cos(3*x0) - x0^2/8");
  ValidationReport small = validate_spec(spec, 5.0, 20);
  ValidationReport large = validate_spec(spec, 5.0, 400);
  CHECK(large.min_diffusion_eigenvalue <= small.min_diffusion_eigenvalue);
  CHECK(large.min_potential <= small.min_potential);
  CHECK(large.max_drift_norm >= small.max_drift_norm);
}

TEST_CASE("control set structural checks") {
  CHECK_THROWS_AS(make_spec("1", "u0", "0", {{1.0}, {1.0}}), InvalidArgument);
  // drift references a control beyond the declared dimension
  CHECK_THROWS_AS(make_spec("1", "u1", "0", {{0.5}}), UnknownIdentifier);
  // m = 0 encodes the uncontrolled operator
  OperatorSpec spec = make_spec("1", "-1", "0");
  CHECK(spec.controls.dim == 0);
  CHECK(spec.controls.size() == 1);
}

TEST_CASE("dimension bounds and coordinate range") {
  nlohmann::json j{{"dimension", 4},
                   {"a", {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"},
                          {"0", "0", "0", "1"}}},
                   {"b", {"0", "0", "0", "0"}},
                   {"c", "0"}};
  CHECK_THROWS_AS(OperatorSpec::from_json(j), InvalidArgument);
  CHECK_THROWS_AS(make_spec("1", "x1", "0"), UnknownIdentifier);  // x1 in 1D
}

TEST_CASE("potential shift helper") {
  OperatorSpec spec = make_spec("1", "-1", "cos(x0)");
  OperatorSpec shifted = spec.with_potential_shift(0.7);
  double x[1] = {0.3};
  CHECK(shifted.c.eval(x) == doctest::Approx(spec.c.eval(x) + 0.7));
}
