#include "twoscale/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "twoscale/log.hpp"

namespace twoscale {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

ProblemData study_problem(const StudySetup& setup, ProblemVariant variant) {
  ProblemData d = model_problem(variant, setup.A_star);
  d.D_hat = setup.infra ? setup.infra->D_hat : d.D_hat;
  d.solid_fraction = setup.solid_fraction;
  d.motion.amplitude = setup.amplitude;
  d.motion.frequency = setup.frequency;
  if (setup.profile) d.motion.profile = *setup.profile;
  d.theta = setup.theta;
  d.dt = setup.dt;
  return d;
}

FieldNorms field_norms(const StructuredGrid& grid, const Vector& field, int components) {
  if (field.size() != components * grid.num_vertices()) throw ConfigError("field does not match the grid");
  const Q1Values q1(grid);
  double l2 = 0.0;
  double grad = 0.0;
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const auto g = field_gradient(q1, grid, field, components, c, q);
      for (int m = 0; m < components; ++m) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += q1.phi[q][a] * field[components * grid.cells[c][a] + m];
        l2 += q1.jxw[q] * v * v;
      }
      grad += q1.jxw[q] * g.squaredNorm();
    }
  return {std::sqrt(l2), std::sqrt(l2 + grad)};
}

Vector prolongate(const StructuredGrid& coarse, const Vector& field, int components, const StructuredGrid& fine) {
  if (field.size() != components * coarse.num_vertices()) throw ConfigError("field does not match the coarse grid");
  Vector out(components * fine.num_vertices());
  for (Index n = 0; n < fine.num_vertices(); ++n) {
    const Vec2& x = fine.vertices[n];
    const Index cell = locate_cell(coarse, x);
    if (cell < 0) throw ConfigError("fine grid node outside the coarse grid");
    const Q1PointValues v = evaluate_q1(coarse, cell, x);
    for (int m = 0; m < components; ++m) {
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += v.phi[a] * field[components * coarse.cells[cell][a] + m];
      out[components * n + m] = s;
    }
  }
  return out;
}

double eoc(double previous, double current) { return std::log2(previous / current); }

std::vector<ConvergenceRecord> run_convergence(const StudySetup& setup, ProblemVariant variant, int max_cycle,
                                               double t_eval) {
  if (max_cycle < 2) throw ConfigError("convergence study needs at least 3 cycles (max_cycle >= 2)");
  if (!(t_eval >= 0.0)) throw ConfigError("evaluation time must be non-negative");
  const ProblemData data = study_problem(setup, variant);

  std::vector<ConvergenceRecord> records;
  StructuredGrid prev_grid;
  MacroState prev;
  for (int cycle = 0; cycle <= max_cycle; ++cycle) {
    const StructuredGrid grid = classify_boundary(build_macro_grid(setup.lower, setup.upper, cycle), variant);
    RunOptions options;
    options.t_end = t_eval;
    options.update = setup.update;
    MacroState state;
    try {
      state = run(grid, data, setup.infra, options).final_state;
    } catch (const DegenerateDeformation& e) {
      throw e.with_context("convergence cycle " + std::to_string(cycle));
    } catch (const SolverBreakdown& e) {
      throw SolverBreakdown("convergence cycle " + std::to_string(cycle) + ": " + e.what());
    } catch (const SolverNonConvergence& e) {
      throw SolverNonConvergence("convergence cycle " + std::to_string(cycle) + ": " + e.what());
    }

    ConvergenceRecord r;
    r.cycle = cycle;
    r.cells = grid.num_cells();
    r.h = grid.h;
    r.u_l2 = r.u_h1 = r.c_l2 = r.c_h1 = kNaN;
    r.eoc_u_l2 = r.eoc_u_h1 = r.eoc_c_l2 = r.eoc_c_h1 = kNaN;
    if (cycle >= 1) {
      const FieldNorms eu = field_norms(grid, state.u - prolongate(prev_grid, prev.u, 2, grid), 2);
      const FieldNorms ec = field_norms(grid, state.c - prolongate(prev_grid, prev.c, 1, grid), 1);
      r.u_l2 = eu.l2;
      r.u_h1 = eu.h1;
      r.c_l2 = ec.l2;
      r.c_h1 = ec.h1;
    }
    if (cycle >= 2) {
      const ConvergenceRecord& p = records.back();
      r.eoc_u_l2 = eoc(p.u_l2, r.u_l2);
      r.eoc_u_h1 = eoc(p.u_h1, r.u_h1);
      r.eoc_c_l2 = eoc(p.c_l2, r.c_l2);
      r.eoc_c_h1 = eoc(p.c_h1, r.c_h1);
    }
    log::info("convergence cycle ", cycle, ": ", r.cells, " cells, |du|_L2 = ", r.u_l2, ", |dc|_L2 = ", r.c_l2);
    records.push_back(r);
    prev_grid = grid;
    prev = std::move(state);
  }
  return records;
}

const char* to_string(SweepParameter p) { return p == SweepParameter::Frequency ? "frequency" : "amplitude"; }

StudySetup with_parameter(StudySetup setup, SweepParameter parameter, double value) {
  if (parameter == SweepParameter::Frequency) {
    setup.frequency = value;
  } else {
    setup.amplitude = value;
  }
  return setup;
}

std::vector<SweepRecord> run_sensitivity(const StudySetup& setup, ProblemVariant variant, const SweepSpec& sweep,
                                         double t_end, int macro_refinement) {
  const StructuredGrid grid =
      classify_boundary(build_macro_grid(setup.lower, setup.upper, macro_refinement), variant);
  std::vector<double> values = sweep.values;
  std::sort(values.begin(), values.end());
  std::vector<SweepRecord> records(values.size());
  const double width = setup.upper.x() - setup.lower.x();

  auto one = [&](std::size_t i, int cell_workers) {
    SweepRecord& rec = records[i];
    rec.parameter = sweep.parameter;
    rec.value = values[i];
    StudySetup s = with_parameter(setup, sweep.parameter, values[i]);
    s.update.workers = cell_workers;
    try {
      const ProblemData data = study_problem(s, variant);
      RunOptions options;
      options.t_end = t_end;
      options.update = s.update;
      const auto observer = [&](int, const MacroState& state, const EffectiveFieldState&) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (Index n = 0; n < grid.num_vertices(); ++n) {
          const double x = grid.vertices[n].x() + state.u[2 * n];
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        rec.max_extension = std::max(rec.max_extension, hi - lo - width);
      };
      const RunResult result = run(grid, data, s.infra, options, observer);
      for (const Observables& o : result.observables) {
        rec.t.push_back(o.t);
        rec.mass.push_back(o.mass);
      }
    } catch (const Error& e) {
      rec.error = e.what();
      log::warn("sweep run ", to_string(sweep.parameter), " = ", values[i], " failed: ", e.what());
    }
  };

  const int workers = std::max(1, setup.update.workers);
  if (workers == 1 || values.size() <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) one(i, workers);
  } else {
    std::atomic<std::size_t> next{0};
    const int threads = static_cast<int>(std::min<std::size_t>(workers, values.size()));
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < values.size(); i = next++) one(i, 1);
      });
    }
  }
  return records;
}

}  // namespace twoscale
