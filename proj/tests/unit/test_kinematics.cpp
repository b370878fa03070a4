#include <cmath>

#include <gtest/gtest.h>

#include <Eigen/LU>

#include "test_util.hpp"
#include "twoscale/kinematics.hpp"

using namespace twoscale;

namespace {

CellCoefficientField uniform_field(const Mat2& F, Index n) {
  CellCoefficientField f;
  f.F0.assign(n, F);
  return f;
}

}  // namespace

TEST(Kinematics, AdjugateIdentity) {
  Mat2 F;
  F << 1.2, 0.3, -0.4, 0.9;
  EXPECT_LE((F * adjugate(F) - det2(F) * Mat2::Identity()).norm(), 1e-15);
}

TEST(Kinematics, ZeroGradientGivesIdentity) {
  const StructuredGrid grid = build_cell_grid(2);
  const ElasticCellSolution chi = solve_elastic_cells(grid, isotropic_tensor(1.0, 1.0));
  CellCoefficientField f = compute_F0(MacroGradientSample(), chi, grid);
  EXPECT_EQ(f.size(), grid.num_cells() * kQuadPerCell);
  const Mat2 D_hat = 0.5 * Mat2::Identity();
  compute_J0_D0(f, D_hat, kDefaultJMin);
  for (Index k = 0; k < f.size(); ++k) {
    EXPECT_EQ(f.F0[k], Mat2::Identity());
    EXPECT_EQ(f.J0[k], 1.0);
    EXPECT_EQ(f.D0[k], D_hat);
  }
}

TEST(Kinematics, DilationLeavesDiffusivityUnchanged) {
  Mat2 D_hat;
  D_hat << 0.7, 0.2, 0.2, 0.4;
  for (double alpha : {0.3, 0.9, 1.0, 1.7, 4.0}) {
    CellCoefficientField f = uniform_field(alpha * Mat2::Identity(), 3);
    compute_J0_D0(f, D_hat, kDefaultJMin);
    EXPECT_NEAR(f.J0[0], alpha * alpha, 1e-14);
    EXPECT_LE((f.D0[0] - D_hat).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Kinematics, PullBackFormula) {
  // D0 = J F^-1 D_hat F^-T, checked against a dense inverse.
  Mat2 F;
  F << 1.1, 0.25, -0.1, 0.8;
  const Mat2 D_hat = 0.5 * Mat2::Identity();
  CellCoefficientField f = uniform_field(F, 1);
  compute_J0_D0(f, D_hat, kDefaultJMin);
  const Mat2 Finv = F.inverse();
  EXPECT_LE((f.D0[0] - F.determinant() * Finv * D_hat * Finv.transpose()).norm(), 1e-14);
  EXPECT_LE((f.D0[0] - f.D0[0].transpose()).norm(), 0.0);
}

TEST(Kinematics, LinearFieldCompositionOnFullCell) {
  // Without perforation chi = 0, so F0 = I + G everywhere.
  const StructuredGrid grid = build_full_cell_grid(0);
  const ElasticCellSolution chi = solve_elastic_cells(grid, isotropic_tensor(1.0, 1.0));
  Mat2 G;
  G << 0.2, 0.1, -0.05, 0.3;
  const CellCoefficientField f = compute_F0(MacroGradientSample(G), chi, grid);
  for (const Mat2& F : f.F0) EXPECT_LE((F - Mat2::Identity() - G).norm(), 1e-12);
}

TEST(Kinematics, ReusedBufferMatchesFreshField) {
  const auto infra = twoscale::testing::cross_infrastructure(2);
  Mat2 G;
  G << 0.1, 0.02, 0.03, -0.05;
  const CellCoefficientField fresh = compute_F0(MacroGradientSample(G), infra->corrector_gradients);
  CellCoefficientField buffer = compute_F0(MacroGradientSample(), infra->corrector_gradients);
  compute_F0(MacroGradientSample(G), infra->corrector_gradients, buffer);
  ASSERT_EQ(buffer.size(), fresh.size());
  for (Index k = 0; k < fresh.size(); ++k) EXPECT_EQ(buffer.F0[k], fresh.F0[k]);
}

TEST(Kinematics, DegenerateDeformationNamesThePoint) {
  CellCoefficientField f = uniform_field(Mat2::Identity(), 6);
  f.F0[4] << -1.0, 0.0, 0.0, 1.0;
  f.F0[5] << -1.0, 0.0, 0.0, 1.0;
  std::vector<Vec2> points(6, Vec2::Zero());
  points[4] = Vec2(0.25, 0.75);
  try {
    compute_J0_D0(f, 0.5 * Mat2::Identity(), kDefaultJMin, points);
    FAIL() << "expected DegenerateDeformation";
  } catch (const DegenerateDeformation& e) {
    EXPECT_EQ(e.cell_quadrature_point(), 4);
    EXPECT_DOUBLE_EQ(e.det(), -1.0);
    EXPECT_EQ(e.y(), Vec2(0.25, 0.75));
    EXPECT_FALSE(e.has_macro_location());
    EXPECT_NE(std::string(e.what()).find("cell quadrature point 4"), std::string::npos);
  }
}

TEST(Kinematics, JacobianAtThresholdIsRejected) {
  CellCoefficientField f = uniform_field(std::sqrt(kDefaultJMin) * Mat2::Identity(), 1);
  EXPECT_THROW(compute_J0_D0(f, 0.5 * Mat2::Identity(), kDefaultJMin), DegenerateDeformation);
  CellCoefficientField g = uniform_field(1e-3 * Mat2::Identity(), 1);
  EXPECT_NO_THROW(compute_J0_D0(g, 0.5 * Mat2::Identity(), kDefaultJMin));
}

TEST(Kinematics, MacroLocationIsAppended) {
  const DegenerateDeformation e(-0.5, Vec2(0.1, 0.2), 7);
  const DegenerateDeformation m = e.with_macro_location(1.25, 42, Vec2(-0.3, 0.4));
  EXPECT_TRUE(m.has_macro_location());
  EXPECT_EQ(m.macro_quadrature_point(), 42);
  EXPECT_DOUBLE_EQ(m.t(), 1.25);
  EXPECT_EQ(m.cell_quadrature_point(), 7);
  EXPECT_NE(std::string(m.what()).find("macro quadrature point 42"), std::string::npos);
}
