#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "eigenflow/fd_operator.hpp"
#include "eigenflow/grid.hpp"
#include "eigenflow/problem.hpp"

namespace eigenflow {

// RNG contract: mt19937_64 seeded per path via splitmix64(seed, path index).
// Identical (seed, config) gives bit-identical estimates regardless of the
// worker count: the path-to-stream mapping does not involve workers, and the
// reduction runs in path order.
inline constexpr const char* kRngName = "mt19937_64/splitmix64-per-path";

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

struct PathConfig {
  double dt = 1e-3;
  double t_max = 1e3;
  std::uint64_t seed = 0;
  int n_paths = 1000;
  double r = 1.0;  // exit / hitting radius, interpreted per operation
  int threads = 0; // 0: hardware concurrency
};

// State-to-control map used along simulated paths.
class MarkovPolicy {
 public:
  static MarkovPolicy constant(std::vector<double> u);
  static MarkovPolicy from_grid(const Grid& grid, Policy indices, const ControlSet& controls);
  static MarkovPolicy from_exprs(std::vector<Expr> components);

  void control_at(std::span<const double> x, std::span<double> u) const;
  int control_dim() const { return dim_; }
  const std::string& describe() const { return description_; }

 private:
  int dim_ = 0;
  std::string description_;
  std::function<void(std::span<const double>, std::span<double>)> fn_;
};

struct PathSummary {
  double exit_time = 0.0;
  std::array<double, 3> exit_point{0, 0, 0};
  double integral_c = 0.0;  // left-endpoint rule along the path
  bool truncated = false;   // hit t_max before exiting
};

// Euler-Maruyama path until it leaves the annulus r_inner < |x| < r_outer
// (r_inner <= 0: pure exit from the ball of radius r_outer; r_outer = inf:
// pure hitting of the ball of radius r_inner). sigma = sqrt(2 a) by Cholesky,
// cached when a is constant. Exit is detected at the first step landing
// outside, an O(sqrt(dt)) bias that is measured, not ignored (see the
// Richardson helpers below).
PathSummary simulate_exit(const OperatorSpec& spec, const MarkovPolicy& policy,
                          std::span<const double> x0, double r_inner, double r_outer,
                          const PathConfig& cfg, std::uint64_t path_index);

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(n)
  int n_paths = 0;
  int truncated = 0;

  nlohmann::json to_json(const PathConfig& cfg) const;
};

// Mean exit time from the ball |x| < cfg.r starting at x0.
MCEstimate mean_exit_time(const OperatorSpec& spec, const MarkovPolicy& policy,
                          std::span<const double> x0, const PathConfig& cfg);

// Bias-corrected mean exit time: runs at dt and dt/4 and extrapolates the
// O(sqrt(dt)) exit-detection bias; stderr combines both runs.
struct RichardsonEstimate {
  MCEstimate coarse;  // at cfg.dt
  MCEstimate fine;    // at cfg.dt / 4
  double extrapolated = 0.0;
  double stderr_ = 0.0;
};

RichardsonEstimate mean_exit_time_richardson(const OperatorSpec& spec,
                                             const MarkovPolicy& policy,
                                             std::span<const double> x0,
                                             const PathConfig& cfg);

// Verifies the exit-time representation of a Dirichlet eigenfunction: for
// x in the annulus r < |x| < R(grid), the weighted exit average
// E_x[ exp(int (c - lambda) ds) * Phi(X_exit) ] reproduces Phi(x); exits
// through the outer boundary contribute zero through the Dirichlet extension
// of the interpolant. The discretization allowance is the Richardson
// comparison of runs at dt and dt/4. Throws ExcessTruncation when more than
// 1% of paths truncate.
struct FeynmanKacReport {
  std::vector<double> point;
  double grid_value = 0.0;
  MCEstimate coarse;    // at cfg.dt
  MCEstimate fine;      // at cfg.dt / 4
  double estimate = 0.0;
  double allowance = 0.0;
  bool pass = false;

  nlohmann::json to_json(const PathConfig& cfg) const;
};

FeynmanKacReport feynman_kac_verify(const OperatorSpec& spec, const Grid& grid,
                                    const Policy& policy, double lambda,
                                    const GridFunction& Phi, std::span<const double> x,
                                    double r, const PathConfig& cfg);

// Finite-horizon risk-sensitive value (1/T) log E[exp(int_0^T c dt)], log-sum-
// exp accumulated with running-max subtraction, jackknife standard error.
MCEstimate risk_sensitive_estimate(const OperatorSpec& spec, const MarkovPolicy& policy,
                                   std::span<const double> x0, double horizon,
                                   const PathConfig& cfg);

}  // namespace eigenflow
