#include <sstream>

#include <gtest/gtest.h>

#include "twoscale/config.hpp"

using namespace twoscale;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> differing_lines(const std::string& a, const std::string& b) {
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  std::vector<std::string> out;
  while (std::getline(sa, la) && std::getline(sb, lb)) {
    if (la != lb) out.push_back(la);
  }
  return out;
}

}  // namespace

TEST(Config, EmptyTextGivesModelDefaults) {
  RunConfig c;
  parse_config_text(c, "");
  EXPECT_DOUBLE_EQ(c.amplitude, 0.25);
  EXPECT_DOUBLE_EQ(c.frequency, 1.0);
  EXPECT_DOUBLE_EQ(c.lambda, 1.0);
  EXPECT_DOUBLE_EQ(c.mu, 1.0);
  EXPECT_EQ(c.D_hat, 0.5 * Mat2::Identity());
  EXPECT_EQ(c.variant, ProblemVariant::MixedModel);
  EXPECT_FALSE(c.solid_fraction.has_value());
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, ParsesValuesAndComments) {
  RunConfig c;
  parse_config_text(c,
                    "# comment\n"
                    "mode = convergence\n"
                    "physics.theta = 1   # implicit Euler\n"
                    "physics.variant = pure-dirichlet\n"
                    "physics.d12 = 0.1\n"
                    "study.sweep_values = 0.5, 1, 2\n"
                    "study.sweep_parameter = frequency\n"
                    "physics.solid_fraction = 0.5\n");
  EXPECT_EQ(c.mode, RunMode::Convergence);
  EXPECT_DOUBLE_EQ(c.theta, 1.0);
  EXPECT_EQ(c.variant, ProblemVariant::PureDirichlet);
  EXPECT_DOUBLE_EQ(c.D_hat(0, 1), 0.1);
  EXPECT_DOUBLE_EQ(c.D_hat(1, 0), 0.1);
  EXPECT_EQ(c.sweep_values, (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(c.sweep_parameter, SweepParameter::Frequency);
  ASSERT_TRUE(c.solid_fraction.has_value());
  EXPECT_DOUBLE_EQ(*c.solid_fraction, 0.5);
  EXPECT_TRUE(c.explicit_keys.count("physics.theta"));
}

TEST(Config, UnknownKeyIsNamed) {
  RunConfig c;
  const std::string msg = error_of([&] { parse_config_text(c, "physics.ampltude = 0.1\n", "run.cfg"); });
  EXPECT_NE(msg.find("physics.ampltude"), std::string::npos);
  EXPECT_NE(msg.find("run.cfg:1"), std::string::npos);
}

TEST(Config, TypeMismatchIsNamed) {
  RunConfig c;
  EXPECT_NE(error_of([&] { set_config_value(c, "physics.dt", "fast"); }).find("physics.dt"), std::string::npos);
  EXPECT_NE(error_of([&] { set_config_value(c, "geometry.macro_refinement", "2.5"); }).find("macro_refinement"),
            std::string::npos);
  EXPECT_NE(error_of([&] { set_config_value(c, "run.cache", "maybe"); }).find("run.cache"), std::string::npos);
  EXPECT_NE(error_of([&] { set_config_value(c, "mode", "fly"); }).find("mode"), std::string::npos);
  EXPECT_THROW(parse_config_text(c, "physics.dt 0.1\n"), ConfigError);
}

TEST(Config, ConstraintViolationsAreNamed) {
  RunConfig c;
  c.dt = 0.0;
  EXPECT_NE(error_of([&] { validate(c); }).find("physics.dt"), std::string::npos);
  c = RunConfig();
  c.theta = 2.0;
  EXPECT_NE(error_of([&] { validate(c); }).find("physics.theta"), std::string::npos);
  c = RunConfig();
  c.upper.x() = -1.0;
  EXPECT_NE(error_of([&] { validate(c); }).find("geometry.upper_x"), std::string::npos);
  c = RunConfig();
  c.max_cycle = 1;
  EXPECT_NE(error_of([&] { validate(c); }).find("study.max_cycle"), std::string::npos);
}

TEST(Config, SerializationRoundTrip) {
  RunConfig c;
  c.mode = RunMode::Sweep;
  c.amplitude = 0.1 + 0.2;  // not exactly representable in short decimal
  c.dt = 1.0 / 3.0;
  c.profile = BoundaryProfile::Parabola;
  c.solid_fraction = 0.6;
  c.sweep_values = {-0.125, 1.0 / 7.0};
  c.output_directory = "some/dir";
  c.log_level = log::Level::Debug;
  RunConfig back;
  parse_config_text(back, serialize(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.amplitude, c.amplitude);
  EXPECT_EQ(back.dt, c.dt);
  EXPECT_EQ(serialize(back), serialize(c));
}

TEST(Config, ResolvedConfigIsValidInput) {
  RunConfig c;
  apply_override(c, "physics.amplitude=0.125");
  const std::string text = resolved_config(c);
  EXPECT_NE(text.find("physics.lambda = 1  # default, model problem"), std::string::npos);
  EXPECT_EQ(text.find("physics.amplitude = 0.125  #"), std::string::npos);
  RunConfig back;
  parse_config_text(back, text);
  EXPECT_EQ(back, c);
}

TEST(Config, EveryKeyIsSerialized) {
  const std::string text = serialize(RunConfig());
  for (const std::string& key : config_keys()) EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
}

TEST(Config, OverrideSyntax) {
  RunConfig c;
  EXPECT_THROW(apply_override(c, "physics.dt"), ConfigError);
  apply_override(c, " physics.t_end = 3 ");
  EXPECT_DOUBLE_EQ(c.t_end, 3.0);
}

TEST(Config, SweepRunsDifferInExactlyOneField) {
  RunConfig base;
  base.mode = RunMode::Sweep;
  const std::vector<RunConfig> runs = expand_sweep(base);
  ASSERT_EQ(runs.size(), 4u);
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const auto diff = differing_lines(serialize(runs[0]), serialize(runs[i]));
    ASSERT_EQ(diff.size(), 1u);
    EXPECT_EQ(diff[0].rfind("physics.amplitude", 0), 0u);
  }
  base.sweep_parameter = SweepParameter::Frequency;
  base.sweep_values = {0.5, 1.0, 2.0};
  const std::vector<RunConfig> freq = expand_sweep(base);
  const auto diff = differing_lines(serialize(freq[0]), serialize(freq[2]));
  ASSERT_EQ(diff.size(), 1u);
  EXPECT_EQ(diff[0].rfind("physics.frequency", 0), 0u);
}

TEST(Config, StudySetupFollowsConfig) {
  RunConfig c;
  c.amplitude = -0.1;
  c.workers = 3;
  StructuredGrid grid = build_cell_grid(1);
  const ElasticCellSolution chi = solve_elastic_cells(grid, isotropic_tensor(1.0, 1.0));
  auto infra = std::make_shared<const CellInfrastructure>(grid, chi, c.D_hat, c.j_min);
  const StudySetup s = make_study_setup(c, infra, isotropic_tensor(1.0, 1.0));
  EXPECT_DOUBLE_EQ(s.amplitude, -0.1);
  EXPECT_EQ(s.update.workers, 3);
  EXPECT_NEAR(s.solid_fraction, 5.0 / 9.0, 1e-14);
  c.solid_fraction = 0.4;
  EXPECT_DOUBLE_EQ(make_study_setup(c, infra, isotropic_tensor(1.0, 1.0)).solid_fraction, 0.4);
}
