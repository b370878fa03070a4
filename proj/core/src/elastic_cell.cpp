#include "twoscale/elastic_cell.hpp"

#include "twoscale/log.hpp"

namespace twoscale {

namespace {

constexpr std::array<std::array<int, 2>, 3> kStrainPairs = {{{0, 0}, {0, 1}, {1, 1}}};

}  // namespace

ElasticCellSolution solve_elastic_cells(const StructuredGrid& cell_grid, const Tensor4Sym& A) {
  if (cell_grid.kind != GridKind::Cell || cell_grid.periodic_pairs.empty()) {
    throw ConfigError("elastic cell problems need a cell grid with periodic pairs");
  }
  A.require_symmetric(1e-12, "elastic cell problems");

  ConstraintSet constraints;
  constraints.components = 2;
  constraints.periodic = cell_grid.periodic_pairs;
  constraints.mean_zero = true;
  constraints.mean_weights = nodal_integrals(cell_grid);

  const SparseOperator stiffness = assemble_elasticity(cell_grid, A);
  const ConstrainedSystem system(stiffness, constraints);

  ElasticCellSolution out;
  for (int s = 0; s < 3; ++s) {
    const auto [i, j] = kStrainPairs[s];
    const Vector load = assemble_strain_load(cell_grid, A, unit_strain(i, j));
    out.chi[s] = system.solve(load);
  }
  return out;
}

Tensor4Sym effective_elasticity(const ElasticCellSolution& chi, const Tensor4Sym& A,
                                const StructuredGrid& cell_grid) {
  const Q1Values q1(cell_grid);
  // int A_ijkl e(chi_rs)_kl, accumulated per (r, s) slot
  std::array<Mat2, 3> stress_integral;
  for (Mat2& m : stress_integral) m.setZero();
  for (Index c = 0; c < cell_grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q)
      for (int s = 0; s < 3; ++s) {
        const Mat2 strain = sym(vector_gradient(q1, cell_grid, chi.chi[s], c, q));
        stress_integral[s] += q1.jxw[q] * A.contract(strain);
      }

  const double area = cell_grid.total_area();
  Tensor4Sym out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s)
          out(i, j, r, s) = area * A(i, j, r, s) + stress_integral[ElasticCellSolution::slot(r, s)](i, j);
  return out;
}

ElasticHomogenization homogenize_elasticity(const StructuredGrid& cell_grid, const Tensor4Sym& A) {
  ElasticHomogenization h;
  h.chi = solve_elastic_cells(cell_grid, A);
  h.effective = effective_elasticity(h.chi, A, cell_grid);
  h.asymmetry = h.effective.major_asymmetry();
  h.symmetrized = h.effective.major_symmetrized();
  log::info("effective elasticity tensor: major asymmetry ", h.asymmetry, " removed by symmetrization");
  return h;
}

}  // namespace twoscale
