#include "twoscale/diffusion_cell.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

namespace twoscale {

namespace {

ConstraintSet periodic_mean_zero(const StructuredGrid& cell_grid) {
  if (cell_grid.kind != GridKind::Cell || cell_grid.periodic_pairs.empty()) {
    throw ConfigError("diffusion cell problems need a cell grid with periodic pairs");
  }
  ConstraintSet cs;
  cs.components = 1;
  cs.periodic = cell_grid.periodic_pairs;
  cs.mean_zero = true;
  cs.mean_weights = nodal_integrals(cell_grid);
  return cs;
}

void require_field_size(const StructuredGrid& cell_grid, const CellCoefficientField& field) {
  const Index n = cell_grid.num_cells() * kQuadPerCell;
  if (field.size() != n || static_cast<Index>(field.D0.size()) != n || static_cast<Index>(field.J0.size()) != n) {
    throw ConfigError("coefficient field does not match the cell grid quadrature");
  }
}

// Load  -int D0 e_i . grad phi  of cell problem i.
Vector corrector_load(const StructuredGrid& grid, const Q1Values& q1, const CellCoefficientField& field, int i) {
  Vector b = Vector::Zero(grid.num_vertices());
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Vec2 flux = field.D0[kQuadPerCell * c + q].col(i);
      for (int a = 0; a < 4; ++a) b[grid.cells[c][a]] -= q1.jxw[q] * q1.grad[q][a].dot(flux);
    }
  return b;
}

}  // namespace

DiffusionCellSolution solve_diffusion_cells(const StructuredGrid& cell_grid, const CellCoefficientField& field) {
  const ConstraintSet constraints = periodic_mean_zero(cell_grid);
  require_field_size(cell_grid, field);
  const SparseOperator stiffness =
      assemble_diffusion(cell_grid, [&](Index c, int q) { return field.D0[kQuadPerCell * c + q]; });
  const ConstrainedSystem system(stiffness, constraints);
  const Q1Values q1(cell_grid);
  DiffusionCellSolution out;
  for (int i = 0; i < 2; ++i) out.eta[i] = system.solve(corrector_load(cell_grid, q1, field, i));
  return out;
}

EffectivePointValue effective_point(const StructuredGrid& cell_grid, const CellCoefficientField& field,
                                    const DiffusionCellSolution& eta) {
  require_field_size(cell_grid, field);
  const Q1Values q1(cell_grid);
  EffectivePointValue v;
  for (Index c = 0; c < cell_grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Index k = kQuadPerCell * c + q;
      Mat2 H = Mat2::Zero();  // H(k, j) = d eta_j / d y_k
      for (int a = 0; a < 4; ++a) {
        const Index n = cell_grid.cells[c][a];
        H.col(0) += eta.eta[0][n] * q1.grad[q][a];
        H.col(1) += eta.eta[1][n] * q1.grad[q][a];
      }
      v.J_star += q1.jxw[q] * field.J0[k];
      v.D_star += q1.jxw[q] * field.D0[k] * (Mat2::Identity() + H);
    }
  return v;
}

// ---------------------------------------------------------------------------
// PeriodicCellSolver

PeriodicCellSolver::PeriodicCellSolver(const StructuredGrid& cell_grid) : grid_(&cell_grid), q1_(cell_grid) {
  const ConstraintSet constraints = periodic_mean_zero(cell_grid);
  dofs_ = DofMap(cell_grid.num_vertices(), constraints);
  mean_weights_ = constraints.mean_weights;

  const Index nc = cell_grid.num_cells();
  cell_dofs_.resize(nc);
  std::vector<Eigen::Triplet<double, int>> pattern;
  for (Index c = 0; c < nc; ++c)
    for (int a = 0; a < 4; ++a) {
      cell_dofs_[c][a] = static_cast<int>(dofs_.reduced(cell_grid.cells[c][a]));
    }
  for (Index c = 0; c < nc; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const int ra = cell_dofs_[c][a];
        const int rb = cell_dofs_[c][b];
        if (ra >= 0 && rb >= 0 && ra >= rb) pattern.emplace_back(ra, rb, 0.0);
      }
  const int n = static_cast<int>(dofs_.num_unknowns());
  matrix_.resize(n, n);
  matrix_.setFromTriplets(pattern.begin(), pattern.end());
  matrix_.makeCompressed();

  cell_slots_.resize(nc);
  const int* outer = matrix_.outerIndexPtr();
  const int* inner = matrix_.innerIndexPtr();
  for (Index c = 0; c < nc; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const int ra = cell_dofs_[c][a];
        const int rb = cell_dofs_[c][b];
        int slot = -1;
        if (ra >= 0 && rb >= 0 && ra >= rb) {
          const int* pos = std::lower_bound(inner + outer[rb], inner + outer[rb + 1], ra);
          slot = static_cast<int>(pos - inner);
        }
        cell_slots_[c][4 * a + b] = slot;
      }
  ldlt_.analyzePattern(matrix_);
  for (auto& r : reduced_) r.resize(n);
}

void PeriodicCellSolver::factorize_and_solve(const CellCoefficientField& field) {
  require_field_size(*grid_, field);
  const Index nc = grid_->num_cells();
  double* values = matrix_.valuePtr();
  std::fill(values, values + matrix_.nonZeros(), 0.0);
  Vector rhs[2] = {Vector::Zero(matrix_.rows()), Vector::Zero(matrix_.rows())};

  for (Index c = 0; c < nc; ++c) {
    Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 2> load = Eigen::Matrix<double, 4, 2>::Zero();
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Mat2& D = field.D0[kQuadPerCell * c + q];
      const double w = q1_.jxw[q];
      for (int a = 0; a < 4; ++a) {
        const Vec2 Dg = D.transpose() * q1_.grad[q][a];  // D^T grad phi_a
        load(a, 0) -= w * Dg.x();
        load(a, 1) -= w * Dg.y();
        for (int b = 0; b < 4; ++b) K(a, b) += w * Dg.dot(q1_.grad[q][b]);
      }
    }
    const auto& slots = cell_slots_[c];
    const auto& rd = cell_dofs_[c];
    for (int a = 0; a < 4; ++a) {
      if (rd[a] < 0) continue;
      rhs[0][rd[a]] += load(a, 0);
      rhs[1][rd[a]] += load(a, 1);
      for (int b = 0; b < 4; ++b)
        if (slots[4 * a + b] >= 0) values[slots[4 * a + b]] += K(a, b);
    }
  }

  ldlt_.factorize(matrix_);
  ++factorizations_;
  if (ldlt_.info() != Eigen::Success) throw SolverBreakdown("diffusion cell factorization failed");
  const Vector& d = ldlt_.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-12 * dmax)) {
    throw SolverBreakdown("diffusion cell operator is not positive definite after constraints");
  }
  for (int i = 0; i < 2; ++i) {
    const double tol = 1e-10 * (1.0 + rhs[i].norm());
    Vector& x = reduced_[i];
    x = ldlt_.solve(rhs[i]);
    Vector r = rhs[i] - matrix_.selfadjointView<Eigen::Lower>() * x;
    if (r.norm() > tol) {
      x += ldlt_.solve(r);
      r = rhs[i] - matrix_.selfadjointView<Eigen::Lower>() * x;
    }
    if (!(r.norm() <= tol)) {
      std::ostringstream msg;
      msg << "diffusion cell solve residual " << r.norm() << " exceeds tolerance " << tol;
      throw SolverNonConvergence(msg.str());
    }
  }
}

DiffusionCellSolution PeriodicCellSolver::solve(const CellCoefficientField& field) {
  factorize_and_solve(field);
  DiffusionCellSolution out;
  for (int i = 0; i < 2; ++i) {
    out.eta[i] = dofs_.expand(reduced_[i]);
    remove_weighted_mean(out.eta[i], 1, mean_weights_);
  }
  return out;
}

EffectivePointValue PeriodicCellSolver::effective(const CellCoefficientField& field) {
  factorize_and_solve(field);
  EffectivePointValue v;
  for (Index c = 0; c < grid_->num_cells(); ++c) {
    const auto& rd = cell_dofs_[c];
    double e0[4];
    double e1[4];
    for (int a = 0; a < 4; ++a) {
      e0[a] = rd[a] >= 0 ? reduced_[0][rd[a]] : 0.0;
      e1[a] = rd[a] >= 0 ? reduced_[1][rd[a]] : 0.0;
    }
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Index k = kQuadPerCell * c + q;
      Mat2 H = Mat2::Zero();
      for (int a = 0; a < 4; ++a) {
        H.col(0) += e0[a] * q1_.grad[q][a];
        H.col(1) += e1[a] * q1_.grad[q][a];
      }
      v.J_star += q1_.jxw[q] * field.J0[k];
      v.D_star += q1_.jxw[q] * field.D0[k] * (Mat2::Identity() + H);
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Per-point pipeline

CellInfrastructure::CellInfrastructure(StructuredGrid grid, const ElasticCellSolution& chi, const Mat2& d_hat,
                                       double jmin)
    : cell_grid(std::move(grid)), corrector_gradients(twoscale::corrector_gradients(cell_grid, chi)),
      D_hat(d_hat), j_min(jmin) {
  if (!(j_min > 0.0)) throw ConfigError("j_min must be positive");
  if (std::abs(D_hat(0, 1) - D_hat(1, 0)) > 1e-14 * D_hat.norm() || det2(D_hat) <= 0.0 ||
      D_hat(0, 0) <= 0.0) {
    throw ConfigError("D_hat must be symmetric positive definite");
  }
}

CacheKey cache_key(const MacroGradientSample& sample, double quantization) {
  CacheKey key;
  // + 0.0 folds -0.0 onto +0.0 so both share a key
  const double g[4] = {sample.G(0, 0) + 0.0, sample.G(0, 1) + 0.0, sample.G(1, 0) + 0.0, sample.G(1, 1) + 0.0};
  for (int i = 0; i < 4; ++i) {
    key.v[i] = quantization > 0.0 ? std::llround(g[i] / quantization) : std::bit_cast<std::int64_t>(g[i]);
  }
  return key;
}

EffectiveFieldUpdater::EffectiveFieldUpdater(std::shared_ptr<const CellInfrastructure> infra, UpdateOptions options)
    : infra_(std::move(infra)), options_(options) {
  if (!infra_) throw ConfigError("effective field updater needs cell infrastructure");
  if (options_.workers < 1) throw ConfigError("worker count must be at least 1");
  if (options_.quantization < 0.0) throw ConfigError("cache quantization must be non-negative");
  solvers_.resize(options_.workers);
}

PeriodicCellSolver& EffectiveFieldUpdater::solver(int worker) {
  auto& s = solvers_[worker];
  if (!s) s = std::make_unique<PeriodicCellSolver>(infra_->cell_grid);
  return *s;
}

EffectivePointValue EffectiveFieldUpdater::evaluate(const MacroGradientSample& sample) {
  CellCoefficientField field = compute_F0(sample, infra_->corrector_gradients);
  compute_J0_D0(field, infra_->D_hat, infra_->j_min, infra_->corrector_gradients.points);
  ++stats_.cell_solves;
  return solver(0).effective(field);
}

namespace {

[[noreturn]] void rethrow_at(const std::exception_ptr& error, double t, Index qp, const Vec2& x) {
  try {
    std::rethrow_exception(error);
  } catch (const DegenerateDeformation& e) {
    throw e.with_macro_location(t, qp, x);
  } catch (const SolverBreakdown& e) {
    std::ostringstream s;
    s << e.what() << " (t = " << t << ", macro quadrature point " << qp << ", x = (" << x.x() << ", " << x.y()
      << "))";
    throw SolverBreakdown(s.str());
  } catch (const SolverNonConvergence& e) {
    std::ostringstream s;
    s << e.what() << " (t = " << t << ", macro quadrature point " << qp << ", x = (" << x.x() << ", " << x.y()
      << "))";
    throw SolverNonConvergence(s.str());
  }
}

}  // namespace

EffectiveFieldState EffectiveFieldUpdater::update(const StructuredGrid& macro_grid, const Vector& u, double t) {
  if (macro_grid.kind != GridKind::Macro) throw ConfigError("effective field update needs a macro grid");
  if (u.size() != 2 * macro_grid.num_vertices()) throw ConfigError("displacement does not match the macro grid");
  const Q1Values q1(macro_grid);
  const Index nq = macro_grid.num_cells() * kQuadPerCell;

  std::vector<MacroGradientSample> samples(nq);
  for (Index c = 0; c < macro_grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q)
      samples[kQuadPerCell * c + q] = MacroGradientSample(vector_gradient(q1, macro_grid, u, c, q));

  // Tasks are the first occurrences of each key, in quadrature-point order.
  std::vector<Index> task_qp;
  std::vector<Index> task_of(nq);
  if (options_.cache) {
    std::map<CacheKey, Index> seen;
    for (Index k = 0; k < nq; ++k) {
      auto [it, inserted] = seen.emplace(cache_key(samples[k], options_.quantization), task_qp.size());
      if (inserted) task_qp.push_back(k);
      task_of[k] = it->second;
    }
  } else {
    task_qp.resize(nq);
    for (Index k = 0; k < nq; ++k) task_qp[k] = task_of[k] = k;
  }

  const Index ntasks = static_cast<Index>(task_qp.size());
  std::vector<EffectivePointValue> results(ntasks);
  std::vector<std::exception_ptr> errors(ntasks);
  std::atomic<Index> next{0};
  std::atomic<Index> first_failure{ntasks};
  const CellInfrastructure& infra = *infra_;

  auto work = [&](int w) {
    PeriodicCellSolver& s = solver(w);
    CellCoefficientField field;
    for (Index i = next++; i < ntasks; i = next++) {
      if (i > first_failure.load()) continue;
      try {
        compute_F0(samples[task_qp[i]], infra.corrector_gradients, field);
        compute_J0_D0(field, infra.D_hat, infra.j_min, infra.corrector_gradients.points);
        results[i] = s.effective(field);
      } catch (const Error&) {
        errors[i] = std::current_exception();
        Index f = first_failure.load();
        while (i < f && !first_failure.compare_exchange_weak(f, i)) {
        }
      }
    }
  };
  const int workers = static_cast<int>(std::min<Index>(options_.workers, std::max<Index>(ntasks, 1)));
  for (int w = 0; w < workers; ++w) solver(w);
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  const Index failed = first_failure.load();
  if (failed < ntasks) {
    const Index qp = task_qp[failed];
    const Index cell = qp / kQuadPerCell;
    rethrow_at(errors[failed], t, qp, q1.point(macro_grid, cell, static_cast<int>(qp % kQuadPerCell)));
  }

  ++stats_.updates;
  stats_.cell_solves += ntasks;
  stats_.cache_hits += nq - ntasks;
  EffectiveFieldState state;
  state.t = t;
  state.points.resize(nq);
  for (Index k = 0; k < nq; ++k) state.points[k] = results[task_of[k]];
  return state;
}

EffectiveFieldState update_effective_field(const StructuredGrid& macro_grid, const Vector& u, double t,
                                           std::shared_ptr<const CellInfrastructure> infra, UpdateOptions options) {
  EffectiveFieldUpdater updater(std::move(infra), options);
  return updater.update(macro_grid, u, t);
}

}  // namespace twoscale
