#include <benchmark/benchmark.h>

#include "rmdg/adapt.hpp"

#include <memory>

using namespace rmdg;

namespace {

std::shared_ptr<const SimplicialMesh> square(int n) {
  return std::make_shared<const SimplicialMesh>(build_structured_mesh(2, n));
}

const BenchmarkInstance& layer() {
  static const auto b = make_benchmark("tanh2d", 500.0);
  return b;
}

void BM_AssembleSaddle(benchmark::State& state) {
  const auto mesh = square(static_cast<int>(state.range(0)));
  const int p = static_cast<int>(state.range(1));
  const FunctionSpace u(mesh, SpaceKind::conforming, p), v(mesh, SpaceKind::broken, p);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_saddle(layer().problem, u, v, NormKind::up()));
  state.counters["dofs"] = u.n_dofs() + v.n_dofs();
}
BENCHMARK(BM_AssembleSaddle)->Args({16, 1})->Args({64, 1})->Args({16, 2})->Args({64, 2})
    ->Unit(benchmark::kMillisecond);

void BM_FactorGram(benchmark::State& state) {
  const auto mesh = square(static_cast<int>(state.range(0)));
  const FunctionSpace v(mesh, SpaceKind::broken, static_cast<int>(state.range(1)));
  const auto G = assemble_gram(layer().problem, v, NormKind::up());
  for (auto _ : state) benchmark::DoNotOptimize(GramFactor(G));
  state.SetLabel(cholesky_backend());
}
BENCHMARK(BM_FactorGram)->Args({32, 1})->Args({128, 1})->Args({64, 2})->Unit(benchmark::kMillisecond);

void BM_SolveSaddle(benchmark::State& state) {
  const auto mesh = square(static_cast<int>(state.range(0)));
  const FunctionSpace u(mesh, SpaceKind::conforming, 1), v(mesh, SpaceKind::broken, 1);
  const auto system = assemble_saddle(layer().problem, u, v, NormKind::up());
  SolverConfig cfg;
  cfg.mode = state.range(1) ? SolverMode::bank_iterative : SolverMode::direct;
  cfg.preconditioned = state.range(2) != 0;
  int iterations = 0;
  for (auto _ : state) {
    const auto sol = solve_saddle(system, cfg);
    iterations = sol.stats.cg_iterations;
    benchmark::DoNotOptimize(sol.u.data());
  }
  state.counters["cg_iterations"] = iterations;
}
BENCHMARK(BM_SolveSaddle)
    ->ArgNames({"n", "bank", "precond"})
    ->Args({32, 0, 1})
    ->Args({32, 1, 1})
    ->Args({32, 1, 0})
    ->Args({96, 1, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Indicators(benchmark::State& state) {
  const auto mesh = square(static_cast<int>(state.range(0)));
  const FunctionSpace v(mesh, SpaceKind::broken, 2);
  const Eigen::VectorXd eps = Eigen::VectorXd::LinSpaced(v.n_dofs(), -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_indicators(layer().problem, v, eps, NormKind::up()));
}
BENCHMARK(BM_Indicators)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_BisectRefine(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const SimplicialMesh mesh = build_structured_mesh(dim, dim == 2 ? 64 : 8);
  std::vector<int> marked;
  for (int c = 0; c < mesh.n_cells(); c += 7) marked.push_back(c);
  for (auto _ : state) benchmark::DoNotOptimize(bisect_refine(mesh, marked));
  state.counters["cells"] = mesh.n_cells();
}
BENCHMARK(BM_BisectRefine)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
