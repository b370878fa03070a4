#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "twoscale/log.hpp"
#include "twoscale/macro.hpp"
#include "twoscale/mesh.hpp"
#include "twoscale/studies.hpp"

namespace twoscale {

enum class RunMode { CellsOnly, Simulate, Convergence, Sweep };

/// Complete run configuration. Text form: one `section.key = value` per line,
/// `#` starts a comment. Unknown keys, malformed values and violated
/// constraints raise ConfigError naming the key.
struct RunConfig {
  RunMode mode = RunMode::Simulate;

  // geometry
  Vec2 lower = Vec2(-0.5, -0.5);
  Vec2 upper = Vec2(0.5, 0.5);
  int macro_refinement = 4;
  int cell_refinement = 5;

  // physics
  double lambda = 1.0;
  double mu = 1.0;
  Mat2 D_hat = 0.5 * Mat2::Identity();
  double amplitude = 0.25;
  double frequency = 1.0;
  ProblemVariant variant = ProblemVariant::MixedModel;
  std::optional<BoundaryProfile> profile;  // unset: follows the variant
  double theta = 0.5;
  double dt = 0.05;
  double t_end = 1.0;
  double j_min = kDefaultJMin;
  std::optional<double> solid_fraction;  // unset: area of the cell grid

  // studies
  int max_cycle = 6;
  double t_eval = 1.5;
  SweepParameter sweep_parameter = SweepParameter::Amplitude;
  std::vector<double> sweep_values = {-0.125, 0.0, 0.125, 0.25};

  // output
  std::filesystem::path output_directory = "out";
  int vtk_stride = 0;  // 0: no VTK snapshots

  // execution
  int workers = 1;
  bool cache = true;
  double cache_quantization = 0.0;
  log::Level log_level = log::Level::Warn;

  std::set<std::string> explicit_keys;  // keys given by the user, in any source

  bool operator==(const RunConfig& other) const;
};

/// All accepted keys in serialization order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines onto `config` (defaults when omitted). `origin`
/// prefixes error messages.
void parse_config_text(RunConfig& config, const std::string& text, const std::string& origin = "config");
RunConfig parse_config_file(const std::filesystem::path& path);

/// Applies a `key=value` override.
void apply_override(RunConfig& config, const std::string& assignment);

/// Cross-field checks (positive dt, ordered box, ...).
void validate(const RunConfig& config);

/// Every key with its value; parses back to an equal configuration.
std::string serialize(const RunConfig& config);

/// serialize() with each defaulted line annotated by where the default comes
/// from.
std::string resolved_config(const RunConfig& config);

const char* to_string(RunMode mode);
const char* to_string(ProblemVariant variant);

/// Configs of the individual sweep runs: the base with `t_end`, mode and the
/// swept parameter set; nothing else differs.
std::vector<RunConfig> expand_sweep(const RunConfig& base);

/// Study inputs built from the configuration and the computed cell data.
StudySetup make_study_setup(const RunConfig& config, std::shared_ptr<const CellInfrastructure> infra,
                            const Tensor4Sym& A_star);

}  // namespace twoscale
