// Command-line driver: cell problems, coupled simulation, convergence and
// sensitivity studies.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twoscale/config.hpp"
#include "twoscale/diffusion_cell.hpp"
#include "twoscale/elastic_cell.hpp"
#include "twoscale/macro.hpp"
#include "twoscale/output.hpp"
#include "twoscale/studies.hpp"

namespace fs = std::filesystem;
using namespace twoscale;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kSolver = 3,
  kDegenerate = 4,
  kIo = 5,
};

struct CellData {
  ElasticHomogenization elastic;
  std::shared_ptr<const CellInfrastructure> infra;
  EffectivePointValue rest;  // J*, D* of the undeformed cell
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CellData solve_cells(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  StructuredGrid cell_grid = build_cell_grid(config.cell_refinement);
  const Tensor4Sym A = isotropic_tensor(config.lambda, config.mu);
  CellData out;
  out.elastic = homogenize_elasticity(cell_grid, A);
  out.infra = std::make_shared<const CellInfrastructure>(std::move(cell_grid), out.elastic.chi, config.D_hat,
                                                         config.j_min);
  EffectiveFieldUpdater updater(out.infra);
  out.rest = updater.evaluate(MacroGradientSample());
  log::info("cell problems: ", out.infra->cell_grid.num_cells(), " cells, ", seconds_since(start), " s");
  return out;
}

void write_cell_outputs(const RunConfig& config, const CellData& cells) {
  const fs::path& dir = config.output_directory;
  const Tensor4Sym A = isotropic_tensor(config.lambda, config.mu);
  emit_tensor_table(A, cells.elastic.effective, config.D_hat, cells.rest.D_star, dir / "tensors.txt");
  write_tensor_full(cells.elastic.effective, dir / "A_star_full.txt");
}

void write_snapshot(const fs::path& dir, int step, const StructuredGrid& grid, const MacroState& state,
                    const EffectiveFieldState& eff) {
  const WarpedGrid warped = push_forward(grid, state);
  std::vector<DataArray> point_data = {{"c", 1, state.c}, {"u", 2, state.u}};
  char name[32];
  std::snprintf(name, sizeof name, "solution_%05d.vtk", step);
  write_vtk(warped.grid, point_data, effective_cell_data(grid, eff), dir / name);
}

int simulate(const RunConfig& config, const CellData& cells) {
  const StudySetup setup = make_study_setup(config, cells.infra, cells.elastic.symmetrized);
  const ProblemData data = study_problem(setup, config.variant);
  const StructuredGrid grid =
      classify_boundary(build_macro_grid(config.lower, config.upper, config.macro_refinement), config.variant);
  RunOptions options;
  options.t_end = config.t_end;
  options.update = setup.update;

  const fs::path& dir = config.output_directory;
  const int n_steps = static_cast<int>(std::ceil(config.t_end / config.dt - 1e-9));
  StepObserver observer;
  if (config.vtk_stride > 0) {
    observer = [&](int step, const MacroState& state, const EffectiveFieldState& eff) {
      if (step % config.vtk_stride == 0 || step == n_steps) write_snapshot(dir, step, grid, state, eff);
    };
  }
  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run(grid, data, cells.infra, options, observer);
  write_observables_csv(result.observables, dir / "observables.csv");

  double c_max = -std::numeric_limits<double>::infinity();
  double t_at_max = 0.0;
  for (const Observables& o : result.observables) {
    if (o.c_max > c_max) {
      c_max = o.c_max;
      t_at_max = o.t;
    }
  }
  const Observables& last = result.observables.back();
  std::cout << "steps " << result.observables.size() - 1 << ", " << grid.num_cells() << " macro cells, "
            << seconds_since(start) << " s\n"
            << "cell solves " << result.update_stats.cell_solves << ", cache hits " << result.update_stats.cache_hits
            << "\n"
            << "t = " << format_number(last.t) << ": M = " << format_number(last.mass)
            << ", c in [" << format_number(last.c_min) << ", " << format_number(last.c_max) << "]\n"
            << "max c = " << format_number(c_max) << " at t = " << format_number(t_at_max) << "\n";
  return kOk;
}

int convergence(const RunConfig& config, const CellData& cells) {
  const StudySetup setup = make_study_setup(config, cells.infra, cells.elastic.symmetrized);
  const std::vector<ConvergenceRecord> records =
      run_convergence(setup, config.variant, config.max_cycle, config.t_eval);
  write_convergence_csv(records, config.output_directory / "convergence.csv");
  std::printf("%5s %8s %12s %12s %12s %12s %6s %6s %6s %6s\n", "cycle", "cells", "u_L2", "u_H1", "c_L2", "c_H1",
              "eoc", "eoc", "eoc", "eoc");
  for (const ConvergenceRecord& r : records) {
    std::printf("%5d %8lld %12s %12s %12s %12s %6s %6s %6s %6s\n", r.cycle, static_cast<long long>(r.cells),
                format_number(r.u_l2, 4).c_str(), format_number(r.u_h1, 4).c_str(),
                format_number(r.c_l2, 4).c_str(), format_number(r.c_h1, 4).c_str(),
                format_number(r.eoc_u_l2, 3).c_str(), format_number(r.eoc_u_h1, 3).c_str(),
                format_number(r.eoc_c_l2, 3).c_str(), format_number(r.eoc_c_h1, 3).c_str());
  }
  return kOk;
}

int sweep(const RunConfig& config, const CellData& cells) {
  const StudySetup setup = make_study_setup(config, cells.infra, cells.elastic.symmetrized);
  const SweepSpec spec{config.sweep_parameter, config.sweep_values};
  const std::vector<SweepRecord> records =
      run_sensitivity(setup, config.variant, spec, config.t_end, config.macro_refinement);
  const fs::path& dir = config.output_directory;
  write_sweep_csv(records, dir / (std::string("sweep_") + to_string(spec.parameter) + ".csv"));
  for (const RunConfig& run_config : expand_sweep(config)) {
    const double value =
        spec.parameter == SweepParameter::Amplitude ? run_config.amplitude : run_config.frequency;
    write_text(dir / "runs" / (std::string(to_string(spec.parameter)) + "_" + format_number(value) + ".cfg"),
               serialize(run_config));
  }

  const double width = config.upper.x() - config.lower.x();
  int failed = 0;
  std::printf("%10s %14s %14s %14s\n", to_string(spec.parameter), "max_extension", "extension_%", "M(t_end)");
  for (const SweepRecord& r : records) {
    if (!r.error.empty()) {
      ++failed;
      std::printf("%10s  failed: %s\n", format_number(r.value).c_str(), r.error.c_str());
      continue;
    }
    std::printf("%10s %14s %14s %14s\n", format_number(r.value).c_str(), format_number(r.max_extension, 6).c_str(),
                format_number(100.0 * r.max_extension / width, 4).c_str(), format_number(r.mass.back()).c_str());
  }
  return failed == 0 ? kOk : kSolver;
}

int execute(const RunConfig& config) {
  log::set_level(config.log_level);
  const fs::path& dir = config.output_directory;
  write_text(dir / "resolved_config", resolved_config(config));
  write_schema(dir / "schema.txt");

  const CellData cells = solve_cells(config);
  write_cell_outputs(config, cells);
  switch (config.mode) {
    case RunMode::CellsOnly:
      std::cout << tensor_table(isotropic_tensor(config.lambda, config.mu), cells.elastic.effective, config.D_hat,
                                cells.rest.D_star)
                << "J* = " << format_number(cells.rest.J_star) << "\n";
      return kOk;
    case RunMode::Simulate:
      return simulate(config, cells);
    case RunMode::Convergence:
      return convergence(config, cells);
    case RunMode::Sweep:
      return sweep(config, cells);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale elasticity-diffusion simulator"};
  std::string config_path;
  std::string mode;
  std::string out_dir;
  int workers = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "configuration file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "cells-only, simulate, convergence or sweep");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "key=value override, may be repeated");
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print all configuration keys and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (list_keys) {
    for (const std::string& key : config_keys()) std::cout << key << "\n";
    return kOk;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = parse_config_file(config_path);
    if (!mode.empty()) apply_override(config, "mode=" + mode);
    if (!out_dir.empty()) apply_override(config, "output.directory=" + out_dir);
    if (workers > 0) apply_override(config, "run.workers=" + std::to_string(workers));
    for (const std::string& o : overrides) apply_override(config, o);
    validate(config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  }

  try {
    return execute(config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const DegenerateDeformation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const SolverBreakdown& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const SolverNonConvergence& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
}
