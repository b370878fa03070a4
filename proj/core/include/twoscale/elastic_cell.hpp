#pragma once

#include <array>

#include "twoscale/fem.hpp"
#include "twoscale/mesh.hpp"
#include "twoscale/tensor.hpp"

namespace twoscale {

/// Periodic correctors chi_11, chi_12 (= chi_21), chi_22 on the cell grid,
/// each a 2-vector nodal field (dof = 2*node + comp) with zero mean.
struct ElasticCellSolution {
  std::array<Vector, 3> chi;

  /// Field for the zero-based strain index pair (i, j).
  const Vector& operator()(int i, int j) const { return chi[slot(i, j)]; }
  static int slot(int i, int j) { return i + j; }  // (0,0)->0, (0,1)/(1,0)->1, (1,1)->2
};

/// Solves the three cell problems  -div_y[A(E_ij + e_y(chi_ij))] = 0  with
/// traction-free Γ, periodic faces and zero mean. One factorization serves
/// all three right-hand sides. Throws ConfigError for a tensor without minor
/// and major symmetry and SolverBreakdown when the system is singular beyond
/// the translations (broken periodic pairing).
ElasticCellSolution solve_elastic_cells(const StructuredGrid& cell_grid, const Tensor4Sym& A);

/// A*_ijrs = int_{Y^s} A_ijkl (d_kr d_ls + e_y(chi_rs)_kl) dy.
Tensor4Sym effective_elasticity(const ElasticCellSolution& chi, const Tensor4Sym& A,
                                const StructuredGrid& cell_grid);

/// Both steps together; also reports the major-symmetry defect of the raw
/// tensor before symmetrization.
struct ElasticHomogenization {
  ElasticCellSolution chi;
  Tensor4Sym effective;    // raw
  Tensor4Sym symmetrized;  // used by the macro solver
  double asymmetry = 0.0;
};
ElasticHomogenization homogenize_elasticity(const StructuredGrid& cell_grid, const Tensor4Sym& A);

}  // namespace twoscale
