#include "twoscale/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace twoscale {

namespace {

constexpr std::array<std::array<double, 2>, 4> kNodeSigns = {{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};

using Triplets = std::vector<Eigen::Triplet<double, int>>;

SparseMatrix from_triplets(Index n, const Triplets& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

std::string where(Index cell, int q) {
  std::ostringstream s;
  s << "cell " << cell << ", quadrature point " << q;
  return s.str();
}

}  // namespace

QuadratureRule QuadratureRule::gauss2x2() {
  const double g = 1.0 / std::sqrt(3.0);
  QuadratureRule rule;
  rule.points = {Vec2(-g, -g), Vec2(g, -g), Vec2(g, g), Vec2(-g, g)};
  rule.weights = {1.0, 1.0, 1.0, 1.0};
  return rule;
}

Q1Values::Q1Values(const StructuredGrid& grid) {
  const QuadratureRule rule = QuadratureRule::gauss2x2();
  const double hx = grid.cell_size.x();
  const double hy = grid.cell_size.y();
  for (int q = 0; q < kQuadPerCell; ++q) {
    const double xi = rule.points[q].x();
    const double eta = rule.points[q].y();
    for (int a = 0; a < 4; ++a) {
      const double sx = kNodeSigns[a][0];
      const double sy = kNodeSigns[a][1];
      phi[q][a] = 0.25 * (1 + sx * xi) * (1 + sy * eta);
      grad[q][a] = Vec2(0.25 * sx * (1 + sy * eta) * 2.0 / hx, 0.25 * sy * (1 + sx * xi) * 2.0 / hy);
    }
    jxw[q] = rule.weights[q] * 0.25 * hx * hy;
    offset[q] = Vec2(0.5 * hx * (1 + xi), 0.5 * hy * (1 + eta));
  }
}

Q1PointValues evaluate_q1(const StructuredGrid& grid, Index cell, const Vec2& x) {
  const Vec2 local = x - grid.cell_origin(cell);
  const double hx = grid.cell_size.x();
  const double hy = grid.cell_size.y();
  const double xi = 2.0 * local.x() / hx - 1.0;
  const double eta = 2.0 * local.y() / hy - 1.0;
  Q1PointValues v;
  for (int a = 0; a < 4; ++a) {
    const double sx = kNodeSigns[a][0];
    const double sy = kNodeSigns[a][1];
    v.phi[a] = 0.25 * (1 + sx * xi) * (1 + sy * eta);
    v.grad[a] = Vec2(0.5 * sx * (1 + sy * eta) / hx, 0.5 * sy * (1 + sx * xi) / hy);
  }
  return v;
}

// ---------------------------------------------------------------------------
// SparseOperator

struct SparseOperator::Cache {
  std::mutex mutex;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor;
  SolveStats stats;
};

SparseOperator::SparseOperator(SparseMatrix matrix, SolverOptions options)
    : matrix_(std::move(matrix)), options_(options), cache_(std::make_unique<Cache>()) {
  matrix_.makeCompressed();
}

SparseOperator::SparseOperator(const SparseOperator& other)
    : matrix_(other.matrix_), options_(other.options_), cache_(std::make_unique<Cache>()) {}

SparseOperator& SparseOperator::operator=(const SparseOperator& other) {
  if (this != &other) {
    matrix_ = other.matrix_;
    options_ = other.options_;
    cache_ = std::make_unique<Cache>();
  }
  return *this;
}

SparseOperator::SparseOperator() = default;
SparseOperator::SparseOperator(SparseOperator&&) noexcept = default;
SparseOperator& SparseOperator::operator=(SparseOperator&&) noexcept = default;
SparseOperator::~SparseOperator() = default;

void SparseOperator::assign(SparseMatrix matrix) {
  matrix_ = std::move(matrix);
  matrix_.makeCompressed();
  cache_ = std::make_unique<Cache>();
}

SolveStats SparseOperator::stats() const {
  if (!cache_) return {};
  std::lock_guard lock(cache_->mutex);
  return cache_->stats;
}

double SparseOperator::asymmetry() const {
  const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.transpose());
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) num = std::max(num, std::abs(it.value()));
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) den = std::max(den, std::abs(it.value()));
  return den > 0.0 ? num / den : 0.0;
}

namespace {

std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factorize(const SparseMatrix& m) {
  auto f = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  f->compute(m);
  if (f->info() != Eigen::Success) {
    throw SolverBreakdown("sparse LDL^T factorization failed");
  }
  const Vector& d = f->vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 1e-12 * dmax)) {
      std::ostringstream msg;
      msg << "operator is not positive definite after constraints (pivot " << i << " = " << d[i]
          << ", max pivot " << dmax << ")";
      throw SolverBreakdown(msg.str());
    }
  }
  return f;
}

}  // namespace

Vector solve(const SparseOperator& op, const Vector& rhs, bool reuse) {
  const Index n = op.size();
  if (rhs.size() != n) {
    throw ConfigError("solve: rhs size does not match operator");
  }
  if (n == 0) return Vector();
  auto& cache = *op.cache_;

  SolverKind kind = op.options().kind;
  if (kind == SolverKind::Auto) {
    kind = n > op.options().direct_limit ? SolverKind::ConjugateGradient : SolverKind::Direct;
  }

  Vector x;
  const double tol = 1e-10 * (1.0 + rhs.norm());
  if (kind == SolverKind::Direct) {
    std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> f;
    {
      std::lock_guard lock(cache.mutex);
      if (reuse && cache.factor) {
        f = cache.factor;
      } else {
        f = factorize(op.matrix());
        ++cache.stats.factorizations;
        if (reuse) cache.factor = f;
      }
      ++cache.stats.solves;
    }
    x = f->solve(rhs);
    Vector r = rhs - op.matrix() * x;
    if (r.norm() > tol) {
      x += f->solve(r);  // one step of iterative refinement
      r = rhs - op.matrix() * x;
    }
    if (!(r.norm() <= tol)) {
      std::ostringstream msg;
      msg << "direct solve residual " << r.norm() << " exceeds tolerance " << tol;
      throw SolverNonConvergence(msg.str());
    }
    return x;
  }

  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(op.options().cg_tolerance);
  cg.setMaxIterations(op.options().cg_max_iterations);
  cg.compute(op.matrix());
  x = cg.solve(rhs);
  {
    std::lock_guard lock(cache.mutex);
    ++cache.stats.solves;
    cache.stats.cg_iterations += cg.iterations();
  }
  if (cg.info() == Eigen::NumericalIssue) {
    throw SolverBreakdown("conjugate gradient breakdown (operator not SPD)");
  }
  const Vector r = rhs - op.matrix() * x;
  if (cg.info() != Eigen::Success || !(r.norm() <= tol)) {
    std::ostringstream msg;
    msg << "conjugate gradient did not converge: " << cg.iterations() << " iterations, residual "
        << r.norm();
    throw SolverNonConvergence(msg.str());
  }
  return x;
}

// ---------------------------------------------------------------------------
// Assembly

SparseOperator assemble_diffusion(const StructuredGrid& grid, const MatrixCoefficient& coeff) {
  const Q1Values q1(grid);
  Triplets t;
  t.reserve(static_cast<size_t>(grid.num_cells()) * 16);
  for (Index c = 0; c < grid.num_cells(); ++c) {
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Mat2 d = coeff(c, q);
      const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
      if (std::abs(d(0, 1) - d(1, 0)) > 1e-12 * scale) {
        throw ConfigError("diffusion coefficient is not symmetric at " + where(c, q));
      }
      const double tr = d.trace();
      const double disc = std::hypot(d(0, 0) - d(1, 1), d(0, 1) + d(1, 0));
      if (!(0.5 * (tr - disc) > 1e-14)) {
        throw ConfigError("diffusion coefficient is not positive definite at " + where(c, q));
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) local(a, b) += q1.jxw[q] * q1.grad[q][a].dot(d * q1.grad[q][b]);
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        t.emplace_back(static_cast<int>(grid.cells[c][a]), static_cast<int>(grid.cells[c][b]), local(a, b));
  }
  return SparseOperator(from_triplets(grid.num_vertices(), t));
}

SparseOperator assemble_elasticity(const StructuredGrid& grid, const Tensor4Sym& tensor) {
  const Q1Values q1(grid);
  // All cells share the element matrix.
  Eigen::Matrix<double, 8, 8> local = Eigen::Matrix<double, 8, 8>::Zero();
  for (int q = 0; q < kQuadPerCell; ++q)
    for (int a = 0; a < 4; ++a)
      for (int m = 0; m < 2; ++m)
        for (int b = 0; b < 4; ++b)
          for (int n = 0; n < 2; ++n) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j)
              for (int l = 0; l < 2; ++l) s += tensor(m, j, n, l) * q1.grad[q][a][j] * q1.grad[q][b][l];
            local(2 * a + m, 2 * b + n) += q1.jxw[q] * s;
          }
  Triplets t;
  t.reserve(static_cast<size_t>(grid.num_cells()) * 64);
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        t.emplace_back(static_cast<int>(2 * grid.cells[c][a / 2] + a % 2),
                       static_cast<int>(2 * grid.cells[c][b / 2] + b % 2), local(a, b));
  return SparseOperator(from_triplets(2 * grid.num_vertices(), t));
}

SparseOperator assemble_weighted_mass(const StructuredGrid& grid, const ScalarCoefficient& weight) {
  const Q1Values q1(grid);
  Triplets t;
  t.reserve(static_cast<size_t>(grid.num_cells()) * 16);
  for (Index c = 0; c < grid.num_cells(); ++c) {
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (int q = 0; q < kQuadPerCell; ++q) {
      const double w = weight(c, q);
      if (!(w > 0.0)) {
        throw ConfigError("mass weight is not positive at " + where(c, q));
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) local(a, b) += q1.jxw[q] * w * q1.phi[q][a] * q1.phi[q][b];
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        t.emplace_back(static_cast<int>(grid.cells[c][a]), static_cast<int>(grid.cells[c][b]), local(a, b));
  }
  return SparseOperator(from_triplets(grid.num_vertices(), t));
}

Vector assemble_strain_load(const StructuredGrid& grid, const Tensor4Sym& tensor, const Mat2& strain) {
  const Q1Values q1(grid);
  const Mat2 stress = tensor.contract(strain);
  Eigen::Matrix<double, 8, 1> local = Eigen::Matrix<double, 8, 1>::Zero();
  for (int q = 0; q < kQuadPerCell; ++q)
    for (int a = 0; a < 4; ++a)
      for (int m = 0; m < 2; ++m) local(2 * a + m) -= q1.jxw[q] * stress.row(m).dot(q1.grad[q][a]);
  Vector rhs = Vector::Zero(2 * grid.num_vertices());
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int a = 0; a < 8; ++a) rhs[2 * grid.cells[c][a / 2] + a % 2] += local(a);
  return rhs;
}

Vector assemble_source(const StructuredGrid& grid, const ScalarCoefficient& source) {
  const Q1Values q1(grid);
  Vector rhs = Vector::Zero(grid.num_vertices());
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const double f = source(c, q);
      for (int a = 0; a < 4; ++a) rhs[grid.cells[c][a]] += q1.jxw[q] * f * q1.phi[q][a];
    }
  return rhs;
}

Vector nodal_integrals(const StructuredGrid& grid) {
  return assemble_source(grid, [](Index, int) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Constraints

void ConstraintSet::add_dirichlet(Index dof, double value) {
  auto [it, inserted] = dirichlet.emplace(dof, value);
  if (!inserted && it->second != value) {
    std::ostringstream msg;
    msg << "inconsistent Dirichlet values on dof " << dof << ": " << it->second << " vs " << value;
    throw ConfigError(msg.str());
  }
}

DofMap::DofMap(Index num_dofs, const ConstraintSet& constraints)
    : reduced_(num_dofs, 0), fixed_(num_dofs, 0.0) {
  const int nc = constraints.components;
  if (nc <= 0 || num_dofs % nc != 0) {
    throw ConfigError("constraint set: component count does not divide dof count");
  }
  const Index num_nodes = num_dofs / nc;

  std::vector<Index> master_of(num_nodes, -1);
  std::vector<bool> is_master(num_nodes, false);
  for (const PeriodicPair& p : constraints.periodic) {
    if (p.master < 0 || p.slave < 0 || p.master >= num_nodes || p.slave >= num_nodes) {
      throw ConfigError("periodic pair references a node outside the field");
    }
    if (master_of[p.slave] >= 0 && master_of[p.slave] != p.master) {
      throw ConfigError("node " + std::to_string(p.slave) + " is slaved to two masters");
    }
    master_of[p.slave] = p.master;
    is_master[p.master] = true;
  }
  for (Index n = 0; n < num_nodes; ++n) {
    if (master_of[n] >= 0 && is_master[n]) {
      throw ConfigError("node " + std::to_string(n) + " is both periodic master and slave");
    }
  }

  std::vector<bool> fixed(num_dofs, false);
  for (const auto& [dof, value] : constraints.dirichlet) {
    if (dof < 0 || dof >= num_dofs) throw ConfigError("Dirichlet dof out of range");
    const Index node = dof / nc;
    if (master_of[node] >= 0 || is_master[node]) {
      throw ConfigError("dof " + std::to_string(dof) + " is both Dirichlet and periodic");
    }
    fixed[dof] = true;
    fixed_[dof] = value;
  }
  if (constraints.mean_zero) {
    if (constraints.mean_weights.size() != num_nodes) {
      throw ConfigError("mean-zero constraint needs one weight per node");
    }
    Index pin = -1;
    for (Index n = 0; n < num_nodes && pin < 0; ++n) {
      bool free = master_of[n] < 0;
      for (int c = 0; c < nc; ++c) free = free && !fixed[nc * n + c];
      if (free) pin = n;
    }
    if (pin < 0) throw ConfigError("mean-zero constraint: no node left to pin");
    for (int c = 0; c < nc; ++c) {
      fixed[nc * pin + c] = true;
      fixed_[nc * pin + c] = 0.0;
      pinned_.push_back(nc * pin + c);
    }
  }

  num_unknowns_ = 0;
  for (Index d = 0; d < num_dofs; ++d) {
    if (master_of[d / nc] >= 0) continue;
    reduced_[d] = fixed[d] ? kFixed : num_unknowns_++;
  }
  for (Index d = 0; d < num_dofs; ++d) {
    const Index m = master_of[d / nc];
    if (m < 0) continue;
    const Index md = nc * m + d % nc;
    reduced_[d] = reduced_[md];
    fixed_[d] = fixed_[md];
  }
}

Vector DofMap::expand(const Vector& reduced) const {
  Vector full(num_dofs());
  for (Index d = 0; d < num_dofs(); ++d) full[d] = reduced_[d] >= 0 ? reduced[reduced_[d]] : fixed_[d];
  return full;
}

namespace {

// Fixed values of every full dof for the Dirichlet data in `constraints`.
Vector fixed_vector(const DofMap& dofs, const ConstraintSet& constraints) {
  Vector g = Vector::Zero(dofs.num_dofs());
  for (Index d = 0; d < dofs.num_dofs(); ++d)
    if (dofs.reduced(d) == DofMap::kFixed) g[d] = dofs.fixed_value(d);
  for (const auto& [dof, value] : constraints.dirichlet) {
    if (dofs.reduced(dof) != DofMap::kFixed) {
      throw ConfigError("Dirichlet dof " + std::to_string(dof) + " was free when the system was built");
    }
    g[dof] = value;
  }
  return g;
}

}  // namespace

ConstrainedSystem::ConstrainedSystem(const SparseOperator& op, const ConstraintSet& constraints)
    : constraints_(constraints), dofs_(op.size(), constraints) {
  const SparseMatrix& a = op.matrix();
  Triplets inner;
  Triplets couple;
  inner.reserve(static_cast<size_t>(a.nonZeros()));
  for (int j = 0; j < a.outerSize(); ++j) {
    const Index rj = dofs_.reduced(j);
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      const Index ri = dofs_.reduced(it.row());
      if (ri < 0) continue;
      if (rj >= 0) {
        inner.emplace_back(static_cast<int>(ri), static_cast<int>(rj), it.value());
      } else {
        couple.emplace_back(static_cast<int>(ri), j, it.value());
      }
    }
  }
  reduced_op_ = SparseOperator(from_triplets(dofs_.num_unknowns(), inner), op.options());
  coupling_ = SparseMatrix(dofs_.num_unknowns(), op.size());
  coupling_.setFromTriplets(couple.begin(), couple.end());
  coupling_.makeCompressed();
}

Vector ConstrainedSystem::reduce_rhs(const Vector& full_rhs, const ConstraintSet& constraints) const {
  if (full_rhs.size() != dofs_.num_dofs()) {
    throw ConfigError("rhs size does not match the constrained operator");
  }
  Vector r = Vector::Zero(dofs_.num_unknowns());
  for (Index d = 0; d < dofs_.num_dofs(); ++d) {
    const Index rd = dofs_.reduced(d);
    if (rd >= 0) r[rd] += full_rhs[d];
  }
  if (coupling_.nonZeros() > 0) r -= coupling_ * fixed_vector(dofs_, constraints);
  return r;
}

Vector ConstrainedSystem::expand(const Vector& reduced, const ConstraintSet& constraints) const {
  const Vector g = fixed_vector(dofs_, constraints);
  Vector full(dofs_.num_dofs());
  for (Index d = 0; d < dofs_.num_dofs(); ++d) {
    const Index rd = dofs_.reduced(d);
    full[d] = rd >= 0 ? reduced[rd] : g[d];
  }
  if (constraints.mean_zero) remove_weighted_mean(full, constraints.components, constraints.mean_weights);
  return full;
}

Vector ConstrainedSystem::expand(const Vector& reduced) const { return expand(reduced, constraints_); }

std::pair<ConstrainedSystem, Vector> apply_constraints(const SparseOperator& op, const Vector& rhs,
                                                       const ConstraintSet& constraints) {
  ConstrainedSystem system(op, constraints);
  Vector reduced = system.reduce_rhs(rhs);
  return {std::move(system), std::move(reduced)};
}

void remove_weighted_mean(Vector& field, int components, const Vector& node_weights) {
  const double total = node_weights.sum();
  const Index nodes = node_weights.size();
  for (int c = 0; c < components; ++c) {
    double mean = 0.0;
    for (Index n = 0; n < nodes; ++n) mean += node_weights[n] * field[components * n + c];
    mean /= total;
    for (Index n = 0; n < nodes; ++n) field[components * n + c] -= mean;
  }
}

Vector integrate_field(const StructuredGrid& grid, const Vector& field, int components) {
  const Vector w = nodal_integrals(grid);
  Vector out = Vector::Zero(components);
  for (Index n = 0; n < grid.num_vertices(); ++n)
    for (int c = 0; c < components; ++c) out[c] += w[n] * field[components * n + c];
  return out;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> field_gradient(const Q1Values& q1, const StructuredGrid& grid,
                                                        const Vector& field, int components, Index cell,
                                                        int q) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> g = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(components, 2);
  for (int a = 0; a < 4; ++a) {
    const Index n = grid.cells[cell][a];
    for (int c = 0; c < components; ++c) g.row(c) += field[components * n + c] * q1.grad[q][a].transpose();
  }
  return g;
}

Mat2 vector_gradient(const Q1Values& q1, const StructuredGrid& grid, const Vector& field, Index cell,
                     int q) {
  Mat2 g = Mat2::Zero();
  for (int a = 0; a < 4; ++a) {
    const Index n = grid.cells[cell][a];
    g.row(0) += field[2 * n] * q1.grad[q][a].transpose();
    g.row(1) += field[2 * n + 1] * q1.grad[q][a].transpose();
  }
  return g;
}

}  // namespace twoscale
