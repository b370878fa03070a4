#include <cmath>

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "test_util.hpp"
#include "twoscale/elastic_cell.hpp"

using namespace twoscale;
using twoscale::testing::NodeLocator;

namespace {

const ElasticHomogenization& cross(int r) {
  static std::map<int, ElasticHomogenization> cache;
  auto it = cache.find(r);
  if (it == cache.end()) {
    it = cache.emplace(r, homogenize_elasticity(build_cell_grid(r), isotropic_tensor(1.0, 1.0))).first;
  }
  return it->second;
}

}  // namespace

TEST(ElasticCell, UnperforatedCellReproducesA) {
  const Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  const StructuredGrid grid = build_full_cell_grid(1);
  const ElasticHomogenization h = homogenize_elasticity(grid, A);
  for (const Vector& chi : h.chi.chi) EXPECT_LE(chi.cwiseAbs().maxCoeff(), 1e-12);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(h.effective.data()[k], A.data()[k], 1e-12);
}

TEST(ElasticCell, CorrectorsHaveZeroMean) {
  const StructuredGrid grid = build_cell_grid(2);
  const ElasticCellSolution& chi = cross(2).chi;
  for (const Vector& c : chi.chi) EXPECT_LE(integrate_field(grid, c, 2).norm(), 1e-12);
}

TEST(ElasticCell, CorrectorsArePeriodic) {
  const StructuredGrid grid = build_cell_grid(2);
  const ElasticCellSolution& chi = cross(2).chi;
  for (const Vector& c : chi.chi)
    for (const PeriodicPair& p : grid.periodic_pairs) {
      EXPECT_EQ(c[2 * p.slave], c[2 * p.master]);
      EXPECT_EQ(c[2 * p.slave + 1], c[2 * p.master + 1]);
    }
}

TEST(ElasticCell, EffectiveTensorSymmetries) {
  const Tensor4Sym& A = cross(3).effective;
  EXPECT_LE(A.minor_asymmetry(), 1e-12);
  EXPECT_LE(A.major_asymmetry(), 1e-10);
  // Cubic symmetry of the cross.
  EXPECT_NEAR(A(0, 0, 0, 0), A(1, 1, 1, 1), 1e-10);
  EXPECT_NEAR(A(0, 0, 0, 1), 0.0, 1e-10);
  EXPECT_NEAR(A(1, 1, 0, 1), 0.0, 1e-10);
}

TEST(ElasticCell, PositiveAndBelowVoigtBound) {
  const Tensor4Sym& A = cross(3).symmetrized;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A.voigt());
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  EXPECT_LT(A(0, 0, 0, 0), 5.0 / 9.0 * 3.0);
  EXPECT_LT(A(0, 1, 0, 1), 5.0 / 9.0 * 1.0);
}

TEST(ElasticCell, EnergyIdentity) {
  // A*E:E equals the minimal cell energy int A(E + e(chi_E)):(E + e(chi_E)).
  const StructuredGrid grid = build_cell_grid(2);
  const Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  const ElasticHomogenization& h = cross(2);
  const Q1Values q1(grid);
  Mat2 E;
  E << 0.3, 0.2, 0.2, -0.1;
  Vector chi = E(0, 0) * h.chi.chi[0] + 2.0 * E(0, 1) * h.chi.chi[1] + E(1, 1) * h.chi.chi[2];
  double energy = 0.0;
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Mat2 e = E + sym(vector_gradient(q1, grid, chi, c, q));
      energy += q1.jxw[q] * (A.contract(e).array() * e.array()).sum();
    }
  const double predicted = (h.effective.contract(E).array() * E.array()).sum();
  EXPECT_NEAR(energy, predicted, 1e-10);
}

TEST(ElasticCell, ReflectionSymmetryOfCorrectors) {
  // Mirroring y1 -> 1 - y1 maps the cross onto itself: chi_11 and chi_22 have
  // an odd first and even second component, chi_12 the reverse.
  const int r = 2;
  const StructuredGrid grid = build_cell_grid(r);
  const ElasticCellSolution& chi = cross(r).chi;
  const NodeLocator find(grid, grid.cell_size.x());
  for (Index n = 0; n < grid.num_vertices(); ++n) {
    const Vec2 y = grid.vertices[n];
    const Index m = find(Vec2(1.0 - y.x(), y.y()));
    ASSERT_GE(m, 0);
    for (int s : {0, 2}) {
      EXPECT_NEAR(chi.chi[s][2 * n], -chi.chi[s][2 * m], 1e-10);
      EXPECT_NEAR(chi.chi[s][2 * n + 1], chi.chi[s][2 * m + 1], 1e-10);
    }
    EXPECT_NEAR(chi.chi[1][2 * n], chi.chi[1][2 * m], 1e-10);
    EXPECT_NEAR(chi.chi[1][2 * n + 1], -chi.chi[1][2 * m + 1], 1e-10);
  }
}

TEST(ElasticCell, SwapSymmetryOfCorrectors) {
  // Exchanging y1 and y2 turns the E11 problem into the E22 problem.
  const int r = 2;
  const StructuredGrid grid = build_cell_grid(r);
  const ElasticCellSolution& chi = cross(r).chi;
  const NodeLocator find(grid, grid.cell_size.x());
  for (Index n = 0; n < grid.num_vertices(); ++n) {
    const Vec2 y = grid.vertices[n];
    const Index m = find(Vec2(y.y(), y.x()));
    ASSERT_GE(m, 0);
    EXPECT_NEAR(chi.chi[2][2 * n], chi.chi[0][2 * m + 1], 1e-10);
    EXPECT_NEAR(chi.chi[2][2 * n + 1], chi.chi[0][2 * m], 1e-10);
  }
}

TEST(ElasticCell, CauchyConvergenceInCellRefinement) {
  const double d34 = std::abs(cross(4).effective(0, 0, 0, 0) - cross(3).effective(0, 0, 0, 0));
  const double d45 = std::abs(cross(5).effective(0, 0, 0, 0) - cross(4).effective(0, 0, 0, 0));
  EXPECT_LT(d45, d34);
  EXPECT_LT(d45 / cross(5).effective(0, 0, 0, 0), 1e-2);
}

TEST(ElasticCell, RejectsNonSymmetricTensor) {
  Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  A(0, 0, 1, 1) = 2.0;
  EXPECT_THROW(solve_elastic_cells(build_cell_grid(1), A), ConfigError);
}
