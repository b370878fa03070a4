#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "twoscale/studies.hpp"

using namespace twoscale;

namespace {

StudySetup small_setup() {
  StudySetup s;
  s.infra = twoscale::testing::cross_infrastructure(1);
  s.A_star = homogenize_elasticity(build_cell_grid(1), isotropic_tensor(1.0, 1.0)).symmetrized;
  s.dt = 0.1;
  return s;
}

}  // namespace

TEST(Eoc, SyntheticSequences) {
  for (double p : {1.0, 2.0, 1.5}) {
    double prev = 3.0;
    for (int i = 1; i < 8; ++i) {
      const double cur = 3.0 * std::pow(2.0, -p * i);
      EXPECT_NEAR(eoc(prev, cur), p, 1e-12);
      prev = cur;
    }
  }
}

TEST(FieldNorms, ConstantAndLinear) {
  const StructuredGrid g = build_macro_grid(Vec2(-0.5, -0.5), Vec2(0.5, 0.5), 3);
  const FieldNorms one = field_norms(g, Vector::Ones(g.num_vertices()), 1);
  EXPECT_NEAR(one.l2, 1.0, 1e-14);
  EXPECT_NEAR(one.h1, 1.0, 1e-14);
  Vector x(g.num_vertices());
  for (Index n = 0; n < g.num_vertices(); ++n) x[n] = g.vertices[n].x();
  const FieldNorms lin = field_norms(g, x, 1);
  EXPECT_NEAR(lin.l2, std::sqrt(1.0 / 12.0), 1e-14);
  EXPECT_NEAR(lin.h1, std::sqrt(1.0 / 12.0 + 1.0), 1e-14);
  Vector v = Vector::Zero(2 * g.num_vertices());
  for (Index n = 0; n < g.num_vertices(); ++n) v[2 * n + 1] = 2.0;
  EXPECT_NEAR(field_norms(g, v, 2).l2, 2.0, 1e-14);
}

TEST(Prolongation, ExactForBilinearFields) {
  const StructuredGrid coarse = build_macro_grid(Vec2(-0.5, -0.5), Vec2(0.5, 0.5), 2);
  const StructuredGrid fine = build_macro_grid(Vec2(-0.5, -0.5), Vec2(0.5, 0.5), 4);
  auto f = [](const Vec2& x) { return 1.0 + 2.0 * x.x() - x.y() + 3.0 * x.x() * x.y(); };
  Vector c(coarse.num_vertices());
  for (Index n = 0; n < coarse.num_vertices(); ++n) c[n] = f(coarse.vertices[n]);
  const Vector p = prolongate(coarse, c, 1, fine);
  for (Index n = 0; n < fine.num_vertices(); ++n) EXPECT_NEAR(p[n], f(fine.vertices[n]), 1e-13);
}

TEST(Prolongation, NestedGridsPreserveCoarseValues) {
  const StructuredGrid coarse = build_macro_grid(Vec2(0, 0), Vec2(1, 1), 1);
  const StructuredGrid fine = build_macro_grid(Vec2(0, 0), Vec2(1, 1), 2);
  Vector u = Vector::LinSpaced(2 * coarse.num_vertices(), -1.0, 1.0);
  const Vector p = prolongate(coarse, u, 2, fine);
  const Vector back = prolongate(fine, p, 2, coarse);
  EXPECT_LE((back - u).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Convergence, RecordLayout) {
  const std::vector<ConvergenceRecord> r = run_convergence(small_setup(), ProblemVariant::PureDirichlet, 3, 0.3);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_TRUE(std::isnan(r[0].u_l2));
  EXPECT_TRUE(std::isnan(r[0].eoc_u_l2));
  EXPECT_FALSE(std::isnan(r[1].u_l2));
  EXPECT_TRUE(std::isnan(r[1].eoc_c_h1));
  EXPECT_FALSE(std::isnan(r[2].eoc_c_h1));
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].cycle, static_cast<int>(i));
    EXPECT_EQ(r[i].cells, Index{1} << (2 * i));
    EXPECT_NEAR(r[i].h, std::sqrt(2.0) / (1 << i), 1e-14);
  }
  EXPECT_NEAR(r[3].eoc_u_l2, eoc(r[2].u_l2, r[3].u_l2), 0.0);
  EXPECT_LT(r[3].u_l2, r[2].u_l2);
}

TEST(Convergence, RejectsTooFewCycles) {
  EXPECT_THROW(run_convergence(small_setup(), ProblemVariant::PureDirichlet, 1), ConfigError);
}

TEST(Convergence, DegenerateRunNamesTheCycle) {
  StudySetup s = small_setup();
  s.amplitude = -2.5;
  try {
    run_convergence(s, ProblemVariant::MixedModel, 2, 0.5);
    FAIL() << "expected DegenerateDeformation";
  } catch (const DegenerateDeformation& e) {
    EXPECT_NE(std::string(e.what()).find("convergence cycle 0: "), std::string::npos) << e.what();
    EXPECT_TRUE(e.has_macro_location());
    EXPECT_LE(e.det(), kDefaultJMin);
  }
}

TEST(Sensitivity, RecordsSortedAndFailuresIsolated) {
  StudySetup s = small_setup();
  s.update.workers = 2;
  SweepSpec spec{SweepParameter::Amplitude, {0.25, -2.5, 0.0}};
  const std::vector<SweepRecord> r = run_sensitivity(s, ProblemVariant::MixedModel, spec, 0.5, 1);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0].value, -2.5);
  EXPECT_DOUBLE_EQ(r[1].value, 0.0);
  EXPECT_DOUBLE_EQ(r[2].value, 0.25);
  EXPECT_FALSE(r[0].error.empty());
  EXPECT_NE(r[0].error.find("det F0"), std::string::npos);
  for (int i : {1, 2}) {
    EXPECT_TRUE(r[i].error.empty());
    EXPECT_EQ(r[i].t.size(), 6u);
    EXPECT_EQ(r[i].mass.size(), 6u);
  }
  EXPECT_NEAR(r[1].max_extension, 0.0, 1e-14);
  EXPECT_NEAR(r[2].max_extension, 0.5, 1e-12);
}

TEST(Sensitivity, ParallelMatchesSerial) {
  StudySetup s = small_setup();
  SweepSpec spec{SweepParameter::Frequency, {0.5, 1.0, 2.0}};
  const auto serial = run_sensitivity(s, ProblemVariant::MixedModel, spec, 0.4, 1);
  s.update.workers = 3;
  const auto parallel = run_sensitivity(s, ProblemVariant::MixedModel, spec, 0.4, 1);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].mass, parallel[i].mass);
    EXPECT_EQ(serial[i].t, parallel[i].t);
  }
}

TEST(Sensitivity, WithParameterTouchesOneField) {
  const StudySetup base = small_setup();
  const StudySetup a = with_parameter(base, SweepParameter::Amplitude, 0.1);
  EXPECT_DOUBLE_EQ(a.amplitude, 0.1);
  EXPECT_DOUBLE_EQ(a.frequency, base.frequency);
  const StudySetup f = with_parameter(base, SweepParameter::Frequency, 2.0);
  EXPECT_DOUBLE_EQ(f.frequency, 2.0);
  EXPECT_DOUBLE_EQ(f.amplitude, base.amplitude);
}
