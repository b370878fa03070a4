#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "twoscale/tensor.hpp"

using namespace twoscale;

TEST(Tensor4Sym, IsotropicEntries) {
  const Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  EXPECT_DOUBLE_EQ(A(0, 0, 0, 0), 3.0);
  EXPECT_DOUBLE_EQ(A(1, 1, 1, 1), 3.0);
  EXPECT_DOUBLE_EQ(A(0, 0, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 1, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 1, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(A(0, 0, 0, 1), 0.0);
  EXPECT_EQ(A.minor_asymmetry(), 0.0);
  EXPECT_EQ(A.major_asymmetry(), 0.0);
}

TEST(Tensor4Sym, ContractionIsHookesLaw) {
  const double lambda = 2.0, mu = 0.5;
  const Tensor4Sym A = isotropic_tensor(lambda, mu);
  Mat2 e;
  e << 0.1, 0.3, 0.3, -0.2;
  const Mat2 expected = 2.0 * mu * e + lambda * e.trace() * Mat2::Identity();
  EXPECT_LE((A.contract(e) - expected).norm(), 1e-15);
}

TEST(Tensor4Sym, VoigtQuadraticForm) {
  const Tensor4Sym A = isotropic_tensor(1.3, 0.7);
  Mat2 e;
  e << 0.2, -0.4, -0.4, 0.5;
  const Eigen::Vector3d v(e(0, 0), e(1, 1), 2.0 * e(0, 1));
  const double energy = (A.contract(e).array() * e.array()).sum();
  EXPECT_NEAR(v.dot(A.voigt() * v), energy, 1e-14);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A.voigt());
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Tensor4Sym, SymmetryChecks) {
  Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  A(0, 0, 1, 1) = 1.5;
  EXPECT_NEAR(A.major_asymmetry(), 0.5, 1e-15);
  EXPECT_THROW(A.require_symmetric(1e-9, "test"), ConfigError);
  const Tensor4Sym S = A.major_symmetrized();
  EXPECT_DOUBLE_EQ(S(0, 0, 1, 1), 1.25);
  EXPECT_DOUBLE_EQ(S(1, 1, 0, 0), 1.25);
  EXPECT_NO_THROW(S.require_symmetric(1e-12, "test"));
}

TEST(UnitStrain, SymmetrizedDyad) {
  const Mat2 e = unit_strain(0, 1);
  EXPECT_DOUBLE_EQ(e(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(e(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(e(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(unit_strain(1, 1)(1, 1), 1.0);
}
