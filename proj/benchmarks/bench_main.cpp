#include <memory>

#include <benchmark/benchmark.h>

#include "twoscale/diffusion_cell.hpp"
#include "twoscale/elastic_cell.hpp"
#include "twoscale/macro.hpp"

namespace {

using namespace twoscale;

void BM_ElasticCells(benchmark::State& state) {
  const StructuredGrid grid = build_cell_grid(static_cast<int>(state.range(0)));
  const Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(homogenize_elasticity(grid, A));
  state.counters["cells"] = static_cast<double>(grid.num_cells());
}
BENCHMARK(BM_ElasticCells)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

std::shared_ptr<const CellInfrastructure> make_infra(int r) {
  StructuredGrid grid = build_cell_grid(r);
  const ElasticCellSolution chi = solve_elastic_cells(grid, isotropic_tensor(1.0, 1.0));
  return std::make_shared<const CellInfrastructure>(std::move(grid), chi, 0.5 * Mat2::Identity(), kDefaultJMin);
}

// One deformed-cell diffusion solve: F0, J0, D0, factorization, J*, D*.
void BM_DiffusionCellPoint(benchmark::State& state) {
  const auto infra = make_infra(static_cast<int>(state.range(0)));
  PeriodicCellSolver solver(infra->cell_grid);
  Mat2 G;
  G << 0.2, 0.05, -0.03, 0.1;
  const MacroGradientSample sample(G);
  CellCoefficientField field;
  for (auto _ : state) {
    compute_F0(sample, infra->corrector_gradients, field);
    compute_J0_D0(field, infra->D_hat, infra->j_min);
    benchmark::DoNotOptimize(solver.effective(field));
  }
  state.counters["unknowns"] = static_cast<double>(solver.num_unknowns());
}
BENCHMARK(BM_DiffusionCellPoint)->DenseRange(2, 5)->Unit(benchmark::kMicrosecond);

// Reference path through general assembly and constraint elimination.
void BM_DiffusionCellGeneral(benchmark::State& state) {
  const auto infra = make_infra(static_cast<int>(state.range(0)));
  Mat2 G;
  G << 0.2, 0.05, -0.03, 0.1;
  CellCoefficientField field = compute_F0(MacroGradientSample(G), infra->corrector_gradients);
  compute_J0_D0(field, infra->D_hat, infra->j_min);
  for (auto _ : state) {
    const DiffusionCellSolution eta = solve_diffusion_cells(infra->cell_grid, field);
    benchmark::DoNotOptimize(effective_point(infra->cell_grid, field, eta));
  }
}
BENCHMARK(BM_DiffusionCellGeneral)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

// One full macro time step: elasticity, effective-field update, diffusion.
void BM_MacroStep(benchmark::State& state) {
  const auto infra = make_infra(3);
  const ElasticHomogenization hom = homogenize_elasticity(infra->cell_grid, isotropic_tensor(1.0, 1.0));
  const ProblemData data = model_problem(ProblemVariant::MixedModel, hom.symmetrized);
  const StructuredGrid grid = classify_boundary(
      build_macro_grid(Vec2(-0.5, -0.5), Vec2(0.5, 0.5), static_cast<int>(state.range(0))), ProblemVariant::MixedModel);
  RunOptions options;
  options.t_end = data.dt;
  for (auto _ : state) benchmark::DoNotOptimize(run(grid, data, infra, options));
  state.counters["macro_cells"] = static_cast<double>(grid.num_cells());
}
BENCHMARK(BM_MacroStep)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
