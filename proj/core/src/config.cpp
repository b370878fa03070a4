#include "twoscale/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace twoscale {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad(key, "expected a finite number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(key, "expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  bad(key, "expected true or false, got '" + text + "'");
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) bad(key, "expected a comma-separated list of numbers");
  return out;
}

template <class E>
E parse_enum(const std::string& key, const std::string& text, std::initializer_list<std::pair<const char*, E>> table) {
  std::string names;
  for (const auto& [name, value] : table) {
    if (text == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  bad(key, "expected one of {" + names + "}, got '" + text + "'");
}

const char* level_name(log::Level l) {
  switch (l) {
    case log::Level::Debug: return "debug";
    case log::Level::Info: return "info";
    case log::Level::Warn: return "warn";
    case log::Level::Error: return "error";
    case log::Level::Off: return "off";
  }
  return "warn";
}

const char* profile_name(const std::optional<BoundaryProfile>& p) {
  if (!p) return "auto";
  return *p == BoundaryProfile::Parabola ? "parabola" : "constant-front";
}

struct Entry {
  std::string key;
  std::string origin;  // annotation for defaulted values
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

Entry real(const std::string& key, const std::string& origin, double RunConfig::*field) {
  return {key, origin, [field](const RunConfig& c) { return fmt(c.*field); },
          [key, field](RunConfig& c, const std::string& v) { c.*field = parse_double(key, v); }};
}

Entry integer(const std::string& key, const std::string& origin, int RunConfig::*field) {
  return {key, origin, [field](const RunConfig& c) { return std::to_string(c.*field); },
          [key, field](RunConfig& c, const std::string& v) { c.*field = parse_int(key, v); }};
}

Entry component(const std::string& key, const std::string& origin, Vec2 RunConfig::*field, int i) {
  return {key, origin, [field, i](const RunConfig& c) { return fmt((c.*field)[i]); },
          [key, field, i](RunConfig& c, const std::string& v) { (c.*field)[i] = parse_double(key, v); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    const std::string model = "model problem";
    const std::string art = "artifact default";
    std::vector<Entry> t;
    t.push_back({"mode", art, [](const RunConfig& c) { return std::string(to_string(c.mode)); },
                 [](RunConfig& c, const std::string& v) {
                   c.mode = parse_enum<RunMode>("mode", v,
                                                {{"cells-only", RunMode::CellsOnly},
                                                 {"simulate", RunMode::Simulate},
                                                 {"convergence", RunMode::Convergence},
                                                 {"sweep", RunMode::Sweep}});
                 }});
    t.push_back(component("geometry.lower_x", model + ": domain (-1/2, 1/2)^2", &RunConfig::lower, 0));
    t.push_back(component("geometry.lower_y", model + ": domain (-1/2, 1/2)^2", &RunConfig::lower, 1));
    t.push_back(component("geometry.upper_x", model + ": domain (-1/2, 1/2)^2", &RunConfig::upper, 0));
    t.push_back(component("geometry.upper_y", model + ": domain (-1/2, 1/2)^2", &RunConfig::upper, 1));
    t.push_back(integer("geometry.macro_refinement", art + ": 16 x 16 macro cells", &RunConfig::macro_refinement));
    t.push_back(integer("geometry.cell_refinement", art + ": 5120 cross cells", &RunConfig::cell_refinement));
    t.push_back(real("physics.lambda", model + ": lambda = mu = 1", &RunConfig::lambda));
    t.push_back(real("physics.mu", model + ": lambda = mu = 1", &RunConfig::mu));
    t.push_back({"physics.d11", model + ": D_hat = 0.5 I", [](const RunConfig& c) { return fmt(c.D_hat(0, 0)); },
                 [](RunConfig& c, const std::string& v) { c.D_hat(0, 0) = parse_double("physics.d11", v); }});
    t.push_back({"physics.d12", model + ": D_hat = 0.5 I", [](const RunConfig& c) { return fmt(c.D_hat(0, 1)); },
                 [](RunConfig& c, const std::string& v) {
                   c.D_hat(0, 1) = c.D_hat(1, 0) = parse_double("physics.d12", v);
                 }});
    t.push_back({"physics.d22", model + ": D_hat = 0.5 I", [](const RunConfig& c) { return fmt(c.D_hat(1, 1)); },
                 [](RunConfig& c, const std::string& v) { c.D_hat(1, 1) = parse_double("physics.d22", v); }});
    t.push_back(real("physics.amplitude", model + ": a = 0.25", &RunConfig::amplitude));
    t.push_back(real("physics.frequency", model + ": f = 1", &RunConfig::frequency));
    t.push_back({"physics.variant", model + ": mixed boundary conditions",
                 [](const RunConfig& c) { return std::string(to_string(c.variant)); },
                 [](RunConfig& c, const std::string& v) {
                   c.variant = parse_enum<ProblemVariant>(
                       "physics.variant", v,
                       {{"mixed", ProblemVariant::MixedModel}, {"pure-dirichlet", ProblemVariant::PureDirichlet}});
                 }});
    t.push_back({"physics.profile", model + ": constant front (mixed), parabola (pure-dirichlet)",
                 [](const RunConfig& c) { return std::string(profile_name(c.profile)); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.profile.reset();
                     return;
                   }
                   c.profile = parse_enum<BoundaryProfile>(
                       "physics.profile", v,
                       {{"constant-front", BoundaryProfile::ConstantFront}, {"parabola", BoundaryProfile::Parabola}});
                 }});
    t.push_back(real("physics.theta", art + ": Crank-Nicolson", &RunConfig::theta));
    t.push_back(real("physics.dt", art + ": 20 steps per period at f = 1", &RunConfig::dt));
    t.push_back(real("physics.t_end", art, &RunConfig::t_end));
    t.push_back(real("physics.j_min", art + ": smallest admissible det F0", &RunConfig::j_min));
    t.push_back({"physics.solid_fraction", art + ": area of the cell grid (5/9)",
                 [](const RunConfig& c) { return c.solid_fraction ? fmt(*c.solid_fraction) : std::string("auto"); },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.solid_fraction.reset();
                   } else {
                     c.solid_fraction = parse_double("physics.solid_fraction", v);
                   }
                 }});
    t.push_back(integer("study.max_cycle", art + ": macro refinements 0..6", &RunConfig::max_cycle));
    t.push_back(real("study.t_eval", model + ": errors compared at t = 1.5", &RunConfig::t_eval));
    t.push_back({"study.sweep_parameter", model + ": amplitude sweep",
                 [](const RunConfig& c) { return std::string(to_string(c.sweep_parameter)); },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep_parameter = parse_enum<SweepParameter>(
                       "study.sweep_parameter", v,
                       {{"amplitude", SweepParameter::Amplitude}, {"frequency", SweepParameter::Frequency}});
                 }});
    t.push_back({"study.sweep_values", model + ": compression, rest, extension",
                 [](const RunConfig& c) { return fmt_list(c.sweep_values); },
                 [](RunConfig& c, const std::string& v) { c.sweep_values = parse_list("study.sweep_values", v); }});
    t.push_back({"output.directory", art, [](const RunConfig& c) { return c.output_directory.string(); },
                 [](RunConfig& c, const std::string& v) {
                   if (v.empty()) bad("output.directory", "must not be empty");
                   c.output_directory = v;
                 }});
    t.push_back(integer("output.vtk_stride", art + ": no snapshots", &RunConfig::vtk_stride));
    t.push_back(integer("run.workers", art, &RunConfig::workers));
    t.push_back({"run.cache", art + ": exact-match cache", [](const RunConfig& c) { return std::string(c.cache ? "true" : "false"); },
                 [](RunConfig& c, const std::string& v) { c.cache = parse_bool("run.cache", v); }});
    t.push_back(real("run.cache_quantization", art + ": exact match", &RunConfig::cache_quantization));
    t.push_back({"run.log_level", art, [](const RunConfig& c) { return std::string(level_name(c.log_level)); },
                 [](RunConfig& c, const std::string& v) {
                   c.log_level = parse_enum<log::Level>("run.log_level", v,
                                                        {{"debug", log::Level::Debug},
                                                         {"info", log::Level::Info},
                                                         {"warn", log::Level::Warn},
                                                         {"error", log::Level::Error},
                                                         {"off", log::Level::Off}});
                 }});
    return t;
  }();
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries())
    if (e.key == key) return e;
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::CellsOnly: return "cells-only";
    case RunMode::Simulate: return "simulate";
    case RunMode::Convergence: return "convergence";
    case RunMode::Sweep: return "sweep";
  }
  return "simulate";
}

const char* to_string(ProblemVariant variant) {
  return variant == ProblemVariant::PureDirichlet ? "pure-dirichlet" : "mixed";
}

bool RunConfig::operator==(const RunConfig& other) const { return serialize(*this) == serialize(other); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Entry& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_entry(key).set(config, value);
  config.explicit_keys.insert(key);
}

void parse_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c;
  parse_config_text(c, buf.str(), path.string());
  return c;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set_config_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) bad(key, what);
  };
  require(c.lower.x() < c.upper.x(), "geometry.upper_x", "must exceed geometry.lower_x");
  require(c.lower.y() < c.upper.y(), "geometry.upper_y", "must exceed geometry.lower_y");
  require(c.macro_refinement >= 0 && c.macro_refinement <= 12, "geometry.macro_refinement", "must lie in [0, 12]");
  require(c.cell_refinement >= 0 && c.cell_refinement <= 8, "geometry.cell_refinement", "must lie in [0, 8]");
  require(c.lambda >= 0.0, "physics.lambda", "must be non-negative");
  require(c.mu > 0.0, "physics.mu", "must be positive");
  require(c.D_hat(0, 0) > 0.0 && det2(c.D_hat) > 0.0, "physics.d12", "D_hat must be positive definite");
  require(c.frequency > 0.0, "physics.frequency", "must be positive");
  require(c.theta >= 0.0 && c.theta <= 1.0, "physics.theta", "must lie in [0, 1]");
  require(c.dt > 0.0, "physics.dt", "must be positive");
  require(c.t_end >= 0.0, "physics.t_end", "must be non-negative");
  require(c.j_min > 0.0, "physics.j_min", "must be positive");
  require(!c.solid_fraction || *c.solid_fraction > 0.0, "physics.solid_fraction", "must be positive");
  require(c.max_cycle >= 2 && c.max_cycle <= 10, "study.max_cycle", "must lie in [2, 10]");
  require(c.t_eval >= 0.0, "study.t_eval", "must be non-negative");
  require(!c.sweep_values.empty(), "study.sweep_values", "must not be empty");
  if (c.sweep_parameter == SweepParameter::Frequency) {
    for (double v : c.sweep_values) require(v > 0.0, "study.sweep_values", "frequencies must be positive");
  }
  require(c.vtk_stride >= 0, "output.vtk_stride", "must be non-negative");
  require(c.workers >= 1, "run.workers", "must be at least 1");
  require(c.cache_quantization >= 0.0, "run.cache_quantization", "must be non-negative");
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const Entry& e : entries()) out += e.key + " = " + e.get(config) + "\n";
  return out;
}

std::string resolved_config(const RunConfig& config) {
  std::string out = "# resolved configuration; valid input for --config\n";
  for (const Entry& e : entries()) {
    out += e.key + " = " + e.get(config);
    if (!config.explicit_keys.count(e.key)) out += "  # default, " + e.origin;
    out += "\n";
  }
  return out;
}

std::vector<RunConfig> expand_sweep(const RunConfig& base) {
  std::vector<RunConfig> runs;
  for (double v : base.sweep_values) {
    RunConfig c = base;
    c.mode = RunMode::Simulate;
    if (base.sweep_parameter == SweepParameter::Frequency) {
      c.frequency = v;
    } else {
      c.amplitude = v;
    }
    runs.push_back(std::move(c));
  }
  return runs;
}

StudySetup make_study_setup(const RunConfig& config, std::shared_ptr<const CellInfrastructure> infra,
                            const Tensor4Sym& A_star) {
  StudySetup s;
  s.solid_fraction = config.solid_fraction ? *config.solid_fraction : infra->cell_grid.total_area();
  s.infra = std::move(infra);
  s.A_star = A_star;
  s.amplitude = config.amplitude;
  s.frequency = config.frequency;
  s.profile = config.profile;
  s.theta = config.theta;
  s.dt = config.dt;
  s.lower = config.lower;
  s.upper = config.upper;
  s.update.workers = config.workers;
  s.update.cache = config.cache;
  s.update.quantization = config.cache_quantization;
  return s;
}

}  // namespace twoscale
