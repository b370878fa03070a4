#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "twoscale/fem.hpp"
#include "twoscale/kinematics.hpp"
#include "twoscale/mesh.hpp"

namespace twoscale {

/// Periodic, zero-mean scalar correctors eta_1, eta_2 on the cell grid.
struct DiffusionCellSolution {
  std::array<Vector, 2> eta;
};

struct EffectivePointValue {
  double J_star = 0.0;
  Mat2 D_star = Mat2::Zero();
};

/// Solves  -div_y[D0 (e_i + grad_y eta_i)] = 0  for i = 1, 2 through the
/// general assembly and constraint path. The reference implementation; the
/// per-point pipeline uses PeriodicCellSolver.
DiffusionCellSolution solve_diffusion_cells(const StructuredGrid& cell_grid, const CellCoefficientField& field);

/// J* = int J0,  D*_ij = sum_k int D0_ik (d_kj + d eta_j / d y_k).
EffectivePointValue effective_point(const StructuredGrid& cell_grid, const CellCoefficientField& field,
                                    const DiffusionCellSolution& eta);

/// Reusable solver for the two diffusion cell problems. The sparsity
/// pattern of the periodic, pinned system and its symbolic factorization are
/// computed once; each call only assembles values and refactorizes. Not
/// thread-safe: use one instance per worker.
class PeriodicCellSolver {
 public:
  explicit PeriodicCellSolver(const StructuredGrid& cell_grid);

  /// Full zero-mean correctors.
  DiffusionCellSolution solve(const CellCoefficientField& field);

  /// J* and D* without expanding the correctors.
  EffectivePointValue effective(const CellCoefficientField& field);

  long factorizations() const { return factorizations_; }
  Index num_unknowns() const { return dofs_.num_unknowns(); }

 private:
  void factorize_and_solve(const CellCoefficientField& field);

  const StructuredGrid* grid_;
  Q1Values q1_;
  DofMap dofs_;
  Vector mean_weights_;
  std::vector<std::array<int, 4>> cell_dofs_;      // reduced index per local node, -1 if pinned
  std::vector<std::array<int, 16>> cell_slots_;    // value slot per local (a, b), -1 if not stored
  SparseMatrix matrix_;                            // lower triangle
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  std::array<Vector, 2> reduced_;
  long factorizations_ = 0;
};

struct EffectiveFieldState {
  double t = 0.0;
  std::vector<EffectivePointValue> points;  // index 4*cell + q on the macro grid
};

/// Everything the per-point pipeline needs from the cell side.
struct CellInfrastructure {
  StructuredGrid cell_grid;
  CorrectorGradients corrector_gradients;
  Mat2 D_hat = 0.5 * Mat2::Identity();
  double j_min = kDefaultJMin;

  CellInfrastructure(StructuredGrid grid, const ElasticCellSolution& chi, const Mat2& d_hat, double jmin);
};

/// Cache key of a gradient sample. With quantization 0 the key is the exact
/// bit pattern of G; otherwise G is rounded to multiples of the quantum.
struct CacheKey {
  std::array<std::int64_t, 4> v{};
  auto operator<=>(const CacheKey&) const = default;
};
CacheKey cache_key(const MacroGradientSample& sample, double quantization);

struct UpdateOptions {
  int workers = 1;
  bool cache = true;
  double quantization = 0.0;
};

struct UpdateStats {
  long updates = 0;
  long cell_solves = 0;
  long cache_hits = 0;
};

/// Runs F0 -> (J0, D0) -> eta -> (J*, D*) at every quadrature point of a
/// macro grid. Identical gradients share one cell solve. Results are written
/// to fixed slots, so the output does not depend on the worker count.
class EffectiveFieldUpdater {
 public:
  EffectiveFieldUpdater(std::shared_ptr<const CellInfrastructure> infra, UpdateOptions options = {});

  /// Throws DegenerateDeformation carrying t and the macro point with the
  /// lowest index among the failing ones.
  EffectiveFieldState update(const StructuredGrid& macro_grid, const Vector& u, double t);

  /// Value at a single gradient sample.
  EffectivePointValue evaluate(const MacroGradientSample& sample);

  const UpdateStats& stats() const { return stats_; }
  const CellInfrastructure& infrastructure() const { return *infra_; }

 private:
  PeriodicCellSolver& solver(int worker);

  std::shared_ptr<const CellInfrastructure> infra_;
  UpdateOptions options_;
  std::vector<std::unique_ptr<PeriodicCellSolver>> solvers_;
  UpdateStats stats_;
};

/// One-shot convenience wrapper around EffectiveFieldUpdater.
EffectiveFieldState update_effective_field(const StructuredGrid& macro_grid, const Vector& u, double t,
                                           std::shared_ptr<const CellInfrastructure> infra,
                                           UpdateOptions options = {});

}  // namespace twoscale
