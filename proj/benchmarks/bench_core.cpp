#include <benchmark/benchmark.h>

#include "eigenflow/hjb.hpp"
#include "eigenflow/mc.hpp"
#include "eigenflow/perron.hpp"

using namespace eigenflow;

namespace {

OperatorSpec controlled_spec() {
  nlohmann::json j{{"dimension", 1}, {"a", {{"1"}}}, {"b", {"u0"}}, {"c", "cos(x0)*u0"},
                   {"sense", "min"}, {"controls", {{-1.0}, {0.0}, {1.0}}}};
  return OperatorSpec::from_json(j);
}

}  // namespace

static void BM_Assemble1D(benchmark::State& state) {
  OperatorSpec spec = controlled_spec();
  Grid grid = Grid::build(1, 5.0, 5.0 / state.range(0), GridShape::Box);
  for (auto _ : state) {
    DiscreteOperator op = assemble(spec, grid);
    benchmark::DoNotOptimize(op.shift);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assemble1D)->Range(256, 8192)->Complexity();

static void BM_Assemble2D(benchmark::State& state) {
  OperatorSpec spec = OperatorSpec::from_json(nlohmann::json::parse(R"({
    "dimension": 2,
    "a": [["1", "0.3"], ["0.3", "1"]],
    "b": ["-x0", "-x1"],
    "c": "0",
    "sense": "min"})"));
  Grid grid = Grid::build(2, 2.0, 2.0 / state.range(0), GridShape::Ball);
  for (auto _ : state) {
    DiscreteOperator op = assemble(spec, grid);
    benchmark::DoNotOptimize(op.shift);
  }
}
BENCHMARK(BM_Assemble2D)->Range(16, 128);

static void BM_PerronSolve(benchmark::State& state) {
  OperatorSpec spec = controlled_spec();
  Grid grid = Grid::build(1, 5.0, 5.0 / state.range(0), GridShape::Box);
  DiscreteOperator op = assemble(spec, grid);
  SparseColMat M = op.frozen(Policy(grid.size(), 0));
  for (auto _ : state) {
    EigenPair pair = principal_eigenpair(M, grid.anchor());
    benchmark::DoNotOptimize(pair.lambda);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PerronSolve)->Range(256, 8192)->Complexity();

static void BM_PolicyIteration(benchmark::State& state) {
  OperatorSpec spec = controlled_spec();
  Grid grid = Grid::build(1, 5.0, 5.0 / state.range(0), GridShape::Box);
  DiscreteOperator op = assemble(spec, grid);
  for (auto _ : state) {
    SemilinearEigenResult res = policy_iteration(op);
    benchmark::DoNotOptimize(res.pair.lambda);
  }
}
BENCHMARK(BM_PolicyIteration)->Range(256, 4096);

static void BM_ApplyNonlinear(benchmark::State& state) {
  OperatorSpec spec = controlled_spec();
  Grid grid = Grid::build(1, 5.0, 5.0 / state.range(0), GridShape::Box);
  DiscreteOperator op = assemble(spec, grid);
  GridFunction psi = GridFunction::Ones(grid.size());
  for (auto _ : state) {
    GridFunction out = op.apply(psi);
    benchmark::DoNotOptimize(out.sum());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApplyNonlinear)->Range(1024, 65536)->Complexity();

static void BM_ExitPaths(benchmark::State& state) {
  nlohmann::json j{{"dimension", 1}, {"a", {{"1"}}}, {"b", {"0"}}, {"c", "0"},
                   {"sense", "min"}};
  OperatorSpec spec = OperatorSpec::from_json(j);
  MarkovPolicy policy = MarkovPolicy::constant({});
  PathConfig cfg;
  cfg.dt = 1e-3;
  cfg.n_paths = static_cast<int>(state.range(0));
  cfg.seed = 1;
  cfg.r = 1.0;
  cfg.threads = 1;
  std::vector<double> origin{0.0};
  for (auto _ : state) {
    MCEstimate est = mean_exit_time(spec, policy, origin, cfg);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_paths);
}
BENCHMARK(BM_ExitPaths)->Range(64, 1024);

BENCHMARK_MAIN();
