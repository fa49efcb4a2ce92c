#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eigenflow/expr.hpp"

namespace eigenflow {

// Pointwise optimization direction of the semilinear operator:
// Min gives a second-order term plus min_u [b·grad + c], Max the max_u form.
enum class Sense { Min, Max };

std::string to_string(Sense s);
Sense sense_from_string(const std::string& s);

// Finite sample of the compact control set. m == 0 (a single empty point)
// encodes the uncontrolled linear operator.
struct ControlSet {
  int dim = 0;                                   // m
  std::vector<std::vector<double>> points;       // K points, each of size m

  int size() const { return static_cast<int>(points.size()); }
  static ControlSet uncontrolled() { return ControlSet{0, {{}}}; }
  void validate() const;  // K >= 1, distinct points, consistent dimension
};

struct LyapunovSpec {
  Expr V;                      // positive function
  std::optional<Expr> ell;     // variant A2.1: inf-compact rate function
  std::optional<double> gamma; // variant A2.2: geometric rate
  double kappa1 = 0.0;
  double rK = 1.0;             // radius of the compact set K
  std::string variant;         // "A2.1" or "A2.2"
};

// The continuous problem: coefficients as expressions, a finite control set,
// and the optimization sense. Immutable after parse/validation; shareable.
struct OperatorSpec {
  int dimension = 1;                       // d in {1,2,3}
  std::vector<std::vector<Expr>> a;        // d x d, x-only
  std::vector<Expr> b;                     // d entries in (x,u)
  Expr c;                                  // potential in (x,u)
  Sense sense = Sense::Min;
  ControlSet controls = ControlSet::uncontrolled();
  std::optional<LyapunovSpec> lyapunov;

  static OperatorSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static OperatorSpec load(const std::string& path);

  // Structural checks (dimensions, control indices in range). Throws
  // InvalidArgument / UnknownIdentifier.
  void check_shape() const;

  // Returns a copy with `shift` added to the potential c.
  OperatorSpec with_potential_shift(double shift) const;
};

struct ValidationReport {
  bool pass = false;
  double min_diffusion_eigenvalue = 0.0;  // over sample points
  double min_potential = 0.0;             // over samples x controls
  double max_drift_norm = 0.0;            // over samples x controls
  double potential_floor = 0.0;           // configured floor used for the check
  int n_samples = 0;
  // Hypotheses that are recorded, not verified (local Lipschitz drift,
  // affine growth, global lower bound of c).
  std::vector<std::string> assertions;
};

// Samples the coefficients over [-R, R]^d x controls. The sample sequence is
// deterministic and nested: the first n points of the sequence for n' > n are
// exactly the points used for n, so a failure cannot turn into a pass by
// sampling more. Throws DegenerateDiffusion / UnboundedBelowPotential.
ValidationReport validate_spec(const OperatorSpec& spec, double R, int n_samples,
                               double potential_floor = -1e8);

}  // namespace eigenflow
