#include "twoscale/macro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twoscale/log.hpp"

namespace twoscale {

Vec2 dirichlet_h(double t, const Vec2& x, const BoundaryMotion& motion, const Vec2& lower, const Vec2& upper) {
  const double tol = 1e-12 * (upper - lower).maxCoeff();
  double side = 0.0;
  if (std::abs(x.x() - upper.x()) <= tol) side = 1.0;
  if (std::abs(x.x() - lower.x()) <= tol) side = -1.0;
  if (side == 0.0) return Vec2::Zero();
  double value = side * motion.amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * motion.frequency * t));
  if (motion.profile == BoundaryProfile::Parabola) {
    const double half = 0.5 * (upper.y() - lower.y());
    const double s = x.y() - 0.5 * (upper.y() + lower.y());
    value *= (half * half - s * s) / (half * half);
  }
  return Vec2(value, 0.0);
}

void ProblemData::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(motion.frequency > 0.0) || !std::isfinite(motion.frequency)) throw ConfigError("frequency must be positive");
  if (!std::isfinite(motion.amplitude)) throw ConfigError("amplitude must be finite");
  if (!(solid_fraction > 0.0)) throw ConfigError("solid fraction must be positive");
  if (!g || !c0) throw ConfigError("boundary value g and initial value c0 must be set");
}

ProblemData model_problem(ProblemVariant variant, const Tensor4Sym& A_star) {
  ProblemData d;
  d.A_star = A_star;
  if (variant == ProblemVariant::PureDirichlet) {
    d.motion.profile = BoundaryProfile::Parabola;
    d.c0 = [](const Vec2&) { return 1.0; };
  }
  return d;
}

// ---------------------------------------------------------------------------
// Elasticity

ElasticMacroSolver::ElasticMacroSolver(StructuredGrid grid, ProblemData data)
    : grid_(std::move(grid)), data_(std::move(data)) {
  if (grid_.kind != GridKind::Macro) throw ConfigError("macro elasticity needs a macro grid");
  data_.validate();
  dirichlet_nodes_ = grid_.nodes_with_tag(Subproblem::Elasticity, BoundaryTag::ElastDirichlet);
  stiffness_ = assemble_elasticity(grid_, data_.A_star);
  system_ = std::make_unique<ConstrainedSystem>(stiffness_, constraints_at(0.0));
}

ConstraintSet ElasticMacroSolver::constraints_at(double t) const {
  ConstraintSet cs;
  cs.components = 2;
  for (Index n : dirichlet_nodes_) {
    const Vec2& x = grid_.vertices[n];
    const Vec2 h = data_.displacement_bc ? data_.displacement_bc(t, x)
                                         : dirichlet_h(t, x, data_.motion, grid_.lower, grid_.upper);
    cs.add_dirichlet(2 * n, h.x());
    cs.add_dirichlet(2 * n + 1, h.y());
  }
  return cs;
}

Vector ElasticMacroSolver::solve(double t) const {
  Vector load = Vector::Zero(2 * grid_.num_vertices());
  if (data_.f_elast) {
    const Q1Values q1(grid_);
    for (Index c = 0; c < grid_.num_cells(); ++c)
      for (int q = 0; q < kQuadPerCell; ++q) {
        const Vec2 f = data_.solid_fraction * data_.f_elast(t, q1.point(grid_, c, q));
        for (int a = 0; a < 4; ++a) {
          const Index n = grid_.cells[c][a];
          load[2 * n] += q1.jxw[q] * f.x() * q1.phi[q][a];
          load[2 * n + 1] += q1.jxw[q] * f.y() * q1.phi[q][a];
        }
      }
  }
  const ConstraintSet cs = constraints_at(t);
  return system_->expand(twoscale::solve(system_->op(), system_->reduce_rhs(load, cs)), cs);
}

Vector elastic_macro_solve(const StructuredGrid& grid, const ProblemData& data, double t) {
  return ElasticMacroSolver(grid, data).solve(t);
}

// ---------------------------------------------------------------------------
// Transport

namespace {

void require_layout(const StructuredGrid& grid, const EffectiveFieldState& eff) {
  if (static_cast<Index>(eff.points.size()) != grid.num_cells() * kQuadPerCell) {
    throw ConfigError("effective field does not match the macro grid quadrature");
  }
}

Mat2 symmetric_part(const Mat2& d) { return 0.5 * (d + d.transpose()); }

}  // namespace

Vector diffusion_step(const StructuredGrid& grid, const Vector& c_k, const EffectiveFieldState& eff_k,
                      const EffectiveFieldState& eff_k1, const ProblemData& data) {
  require_layout(grid, eff_k);
  require_layout(grid, eff_k1);
  if (c_k.size() != grid.num_vertices()) throw ConfigError("concentration does not match the macro grid");
  const double dt = eff_k1.t - eff_k.t;
  if (!(dt > 0.0)) throw ConfigError("diffusion step needs t_{k+1} > t_k");
  const double theta = data.theta;
  const Q1Values q1(grid);

  auto J = [](const EffectiveFieldState& e) {
    return [&e](Index c, int q) { return e.points[kQuadPerCell * c + q].J_star; };
  };
  auto D = [](const EffectiveFieldState& e) {
    return [&e](Index c, int q) { return symmetric_part(e.points[kQuadPerCell * c + q].D_star); };
  };
  auto load = [&](const EffectiveFieldState& e) {
    if (!data.f_diff) return Vector(Vector::Zero(grid.num_vertices()));
    return assemble_source(grid, [&](Index c, int q) {
      return e.points[kQuadPerCell * c + q].J_star * data.f_diff(e.t, q1.point(grid, c, q));
    });
  };

  const SparseOperator M1 = assemble_weighted_mass(grid, J(eff_k1));
  const SparseOperator M0 = assemble_weighted_mass(grid, J(eff_k));
  SparseMatrix lhs = M1.matrix() / dt;
  Vector rhs = M0.matrix() * c_k / dt;
  if (theta > 0.0) {
    lhs += theta * assemble_diffusion(grid, D(eff_k1)).matrix();
    rhs += theta * load(eff_k1);
  }
  if (theta < 1.0) {
    rhs -= (1.0 - theta) * (assemble_diffusion(grid, D(eff_k)).matrix() * c_k);
    rhs += (1.0 - theta) * load(eff_k);
  }

  ConstraintSet cs;
  for (Index n : grid.nodes_with_tag(Subproblem::Diffusion, BoundaryTag::DiffDirichlet)) {
    cs.add_dirichlet(n, data.g(eff_k1.t, grid.vertices[n]));
  }
  const ConstrainedSystem system(SparseOperator(std::move(lhs)), cs);
  return system.solve(rhs);
}

double mass_observable(const StructuredGrid& grid, const Vector& c, const EffectiveFieldState& eff) {
  require_layout(grid, eff);
  const Q1Values q1(grid);
  double m = 0.0;
  for (Index cell = 0; cell < grid.num_cells(); ++cell)
    for (int q = 0; q < kQuadPerCell; ++q) {
      double cq = 0.0;
      for (int a = 0; a < 4; ++a) cq += q1.phi[q][a] * c[grid.cells[cell][a]];
      m += q1.jxw[q] * cq * eff.points[kQuadPerCell * cell + q].J_star;
    }
  return m;
}

Vector initial_concentration(const StructuredGrid& grid, const ProblemData& data) {
  Vector c(grid.num_vertices());
  for (Index n = 0; n < grid.num_vertices(); ++n) c[n] = data.c0(grid.vertices[n]);
  return c;
}

// ---------------------------------------------------------------------------
// Post-processing

Vector reconstruct_corrector(const StructuredGrid& macro_grid, const Vector& u, const StructuredGrid& cell_grid,
                             const ElasticCellSolution& chi, const Vec2& x_star, double epsilon) {
  const Index cell = locate_cell(macro_grid, x_star);
  if (cell < 0) throw ConfigError("corrector anchor lies outside the macro domain");
  if (u.size() != 2 * macro_grid.num_vertices()) throw ConfigError("displacement does not match the macro grid");
  const Q1PointValues v = evaluate_q1(macro_grid, cell, x_star);
  Vec2 u_star = Vec2::Zero();
  Mat2 G = Mat2::Zero();
  for (int a = 0; a < 4; ++a) {
    const Index n = macro_grid.cells[cell][a];
    const Vec2 un(u[2 * n], u[2 * n + 1]);
    u_star += v.phi[a] * un;
    G += un * v.grad[a].transpose();
  }
  const Mat2 E = 0.5 * (G + G.transpose());
  const double w[3] = {E(0, 0), 2.0 * E(0, 1), E(1, 1)};
  Vector out(2 * cell_grid.num_vertices());
  for (Index n = 0; n < cell_grid.num_vertices(); ++n) {
    const Vec2& y = cell_grid.vertices[n];
    Vec2 val = G * y;
    for (int s = 0; s < 3; ++s) val += w[s] * Vec2(chi.chi[s][2 * n], chi.chi[s][2 * n + 1]);
    out.segment<2>(2 * n) = u_star + epsilon * val;
  }
  return out;
}

WarpedGrid push_forward(const StructuredGrid& grid, const MacroState& state) {
  if (state.u.size() != 2 * grid.num_vertices()) throw ConfigError("displacement does not match the grid");
  WarpedGrid w{grid, state.c, {}};
  for (Index n = 0; n < grid.num_vertices(); ++n) w.grid.vertices[n] += state.u.segment<2>(2 * n);
  Vec2 lo = w.grid.vertices.empty() ? Vec2::Zero() : w.grid.vertices[0];
  Vec2 hi = lo;
  for (const Vec2& x : w.grid.vertices) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  w.grid.lower = lo;
  w.grid.upper = hi;
  for (Index c = 0; c < grid.num_cells(); ++c) {
    const auto& nodes = w.grid.cells[c];
    for (int a = 0; a < 4; ++a) {
      const Vec2 e1 = w.grid.vertices[nodes[(a + 1) % 4]] - w.grid.vertices[nodes[a]];
      const Vec2 e0 = w.grid.vertices[nodes[(a + 3) % 4]] - w.grid.vertices[nodes[a]];
      if (e1.x() * e0.y() - e1.y() * e0.x() <= 0.0) {
        w.inverted_cells.push_back(c);
        break;
      }
    }
  }
  if (!w.inverted_cells.empty()) {
    log::warn("push-forward at t = ", state.t, ": ", w.inverted_cells.size(),
              " warped cells have a non-positive Jacobian (first: cell ", w.inverted_cells.front(), ")");
  }
  return w;
}

Observables observe(const StructuredGrid& grid, const MacroState& state, const EffectiveFieldState& eff) {
  Observables o;
  o.t = state.t;
  o.mass = mass_observable(grid, state.c, eff);
  o.c_min = state.c.size() ? state.c.minCoeff() : 0.0;
  o.c_max = state.c.size() ? state.c.maxCoeff() : 0.0;
  for (Index n = 0; n < grid.num_vertices(); ++n) o.u_max = std::max(o.u_max, state.u.segment<2>(2 * n).norm());
  return o;
}

// ---------------------------------------------------------------------------
// Time loop

namespace {

template <class E>
[[noreturn]] void rethrow_with_step(const E& e, int step, double t) {
  std::ostringstream s;
  s << "step " << step << " (t = " << t << "): " << e.what();
  throw E(s.str());
}

}  // namespace

RunResult run(const StructuredGrid& macro_grid, const ProblemData& data,
              std::shared_ptr<const CellInfrastructure> infra, const RunOptions& options,
              const StepObserver& observer) {
  data.validate();
  if (!(options.t_end >= 0.0) || !std::isfinite(options.t_end)) throw ConfigError("t_end must be non-negative");
  const int steps = static_cast<int>(std::ceil(options.t_end / data.dt - 1e-9));
  auto time_of = [&](int k) { return k >= steps ? options.t_end : k * data.dt; };

  const ElasticMacroSolver elastic(macro_grid, data);
  EffectiveFieldUpdater updater(std::move(infra), options.update);

  RunResult result;
  MacroState state;
  state.t = 0.0;
  state.u = elastic.solve(0.0);
  state.c = initial_concentration(macro_grid, data);
  EffectiveFieldState eff = updater.update(macro_grid, state.u, 0.0);
  result.observables.push_back(observe(macro_grid, state, eff));
  if (observer) observer(0, state, eff);

  for (int k = 0; k < steps; ++k) {
    const double t1 = time_of(k + 1);
    try {
      MacroState next;
      next.t = t1;
      next.u = elastic.solve(t1);
      EffectiveFieldState eff1 = updater.update(macro_grid, next.u, t1);
      next.c = diffusion_step(macro_grid, state.c, eff, eff1, data);
      state = std::move(next);
      eff = std::move(eff1);
    } catch (const DegenerateDeformation&) {
      throw;
    } catch (const SolverBreakdown& e) {
      rethrow_with_step(e, k + 1, t1);
    } catch (const SolverNonConvergence& e) {
      rethrow_with_step(e, k + 1, t1);
    } catch (const ConfigError& e) {
      rethrow_with_step(e, k + 1, t1);
    }
    result.observables.push_back(observe(macro_grid, state, eff));
    if (observer) observer(k + 1, state, eff);
  }
  result.final_state = std::move(state);
  result.final_effective = std::move(eff);
  result.update_stats = updater.stats();
  return result;
}

}  // namespace twoscale
