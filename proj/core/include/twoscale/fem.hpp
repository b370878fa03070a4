#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Sparse>

#include "twoscale/mesh.hpp"
#include "twoscale/tensor.hpp"
#include "twoscale/types.hpp"

namespace twoscale {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Quadrature on the reference square [-1,1]^2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  static QuadratureRule gauss2x2();
};

inline constexpr int kQuadPerCell = 4;

/// Bilinear shape data at the 2x2 Gauss points. All cells of a structured
/// grid are congruent, so one table serves the whole grid.
struct Q1Values {
  std::array<std::array<double, 4>, kQuadPerCell> phi{};  // [q][a]
  std::array<std::array<Vec2, 4>, kQuadPerCell> grad{};   // [q][a], physical
  std::array<double, kQuadPerCell> jxw{};                 // weight * |J|
  std::array<Vec2, kQuadPerCell> offset{};                // point - cell origin

  explicit Q1Values(const StructuredGrid& grid);

  Vec2 point(const StructuredGrid& grid, Index cell, int q) const {
    return grid.cell_origin(cell) + offset[q];
  }
};

/// Values and gradients of the four Q1 basis functions of a cell at an
/// arbitrary point of that cell.
struct Q1PointValues {
  std::array<double, 4> phi{};
  std::array<Vec2, 4> grad{};
};
Q1PointValues evaluate_q1(const StructuredGrid& grid, Index cell, const Vec2& x);

struct SolveStats {
  long factorizations = 0;
  long solves = 0;
  long cg_iterations = 0;
};

enum class SolverKind { Auto, Direct, ConjugateGradient };

struct SolverOptions {
  SolverKind kind = SolverKind::Auto;
  Index direct_limit = 400000;  // Auto switches to CG above this many unknowns
  double cg_tolerance = 1e-10;
  Index cg_max_iterations = 20000;
};

/// Symmetric sparse matrix plus a lazily built, cached factorization. The
/// factorization is created once (under a lock) and afterwards read-only, so
/// concurrent solves against one operator are safe.
class SparseOperator {
 public:
  SparseOperator();
  explicit SparseOperator(SparseMatrix matrix, SolverOptions options = {});
  SparseOperator(const SparseOperator& other);
  SparseOperator& operator=(const SparseOperator& other);
  SparseOperator(SparseOperator&&) noexcept;
  SparseOperator& operator=(SparseOperator&&) noexcept;
  ~SparseOperator();

  const SparseMatrix& matrix() const { return matrix_; }
  Index size() const { return matrix_.rows(); }
  const SolverOptions& options() const { return options_; }

  /// Replaces the matrix and drops any cached factorization.
  void assign(SparseMatrix matrix);

  SolveStats stats() const;

  /// Relative symmetry defect max|A - A^T| / max|A|.
  double asymmetry() const;

 private:
  friend Vector solve(const SparseOperator& op, const Vector& rhs, bool reuse);
  struct Cache;

  SparseMatrix matrix_;
  SolverOptions options_;
  std::unique_ptr<Cache> cache_;
};

/// Solves op x = rhs. With reuse the cached factorization is used when it
/// exists (and created otherwise); without reuse the operator is factorized
/// afresh. Throws SolverBreakdown on non-SPD pivots and SolverNonConvergence
/// when the residual exceeds 1e-10 (1 + |rhs|).
Vector solve(const SparseOperator& op, const Vector& rhs, bool reuse = true);

/// Per-(cell, quadrature point) coefficient callbacks.
using MatrixCoefficient = std::function<Mat2(Index cell, int q)>;
using ScalarCoefficient = std::function<double(Index cell, int q)>;

/// Galerkin matrix of  -div(coeff grad .)  on one scalar field. Throws
/// ConfigError at the first point where coeff is not symmetric positive
/// definite.
SparseOperator assemble_diffusion(const StructuredGrid& grid, const MatrixCoefficient& coeff);

/// Galerkin matrix of  -div(A e(.))  on a 2-vector field, dof = 2*node + comp.
SparseOperator assemble_elasticity(const StructuredGrid& grid, const Tensor4Sym& tensor);

/// Matrix of  int weight phi_i phi_j. Throws ConfigError at the first
/// non-positive weight.
SparseOperator assemble_weighted_mass(const StructuredGrid& grid, const ScalarCoefficient& weight);

/// Load  -int (A E) : e(v)  of a constant strain E, i.e. the weak form of
/// -div(A E) with the natural boundary condition.
Vector assemble_strain_load(const StructuredGrid& grid, const Tensor4Sym& tensor, const Mat2& strain);

/// Load  int f v  for a source sampled at quadrature points.
Vector assemble_source(const StructuredGrid& grid, const ScalarCoefficient& source);

/// int phi_n over the grid, per node.
Vector nodal_integrals(const StructuredGrid& grid);

/// Constraints on a field with `components` values per node
/// (dof = components * node + comp).
struct ConstraintSet {
  int components = 1;
  std::map<Index, double> dirichlet;
  std::vector<PeriodicPair> periodic;
  bool mean_zero = false;
  Vector mean_weights;  // per node, typically nodal_integrals(grid)

  /// Throws ConfigError when the dof already carries a different value.
  void add_dirichlet(Index dof, double value);
};

/// Full dof -> reduced unknown map. Periodic slaves share their master's
/// unknown, Dirichlet and pinned dofs are eliminated.
class DofMap {
 public:
  static constexpr Index kFixed = -1;

  DofMap() = default;
  DofMap(Index num_dofs, const ConstraintSet& constraints);

  Index num_dofs() const { return static_cast<Index>(reduced_.size()); }
  Index num_unknowns() const { return num_unknowns_; }
  Index reduced(Index dof) const { return reduced_[dof]; }
  double fixed_value(Index dof) const { return fixed_[dof]; }
  const std::vector<Index>& pinned() const { return pinned_; }

  /// Fills every full dof from the reduced solution (fixed dofs get their
  /// prescribed values).
  Vector expand(const Vector& reduced) const;

 private:
  std::vector<Index> reduced_;
  std::vector<double> fixed_;
  std::vector<Index> pinned_;
  Index num_unknowns_ = 0;
};

/// Operator and right-hand side on the reduced unknowns. Dirichlet
/// elimination is symmetric: the coupling columns are moved to the rhs.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseOperator& op, const ConstraintSet& constraints);

  const SparseOperator& op() const { return reduced_op_; }
  const DofMap& dofs() const { return dofs_; }

  /// Reduced rhs for a full load vector and the Dirichlet values currently
  /// in `constraints` (which must have the same constrained dofs as the
  /// set used at construction).
  Vector reduce_rhs(const Vector& full_rhs, const ConstraintSet& constraints) const;
  Vector reduce_rhs(const Vector& full_rhs) const { return reduce_rhs(full_rhs, constraints_); }

  /// Full field from a reduced solution, including the mean-zero shift.
  Vector expand(const Vector& reduced) const;
  Vector expand(const Vector& reduced, const ConstraintSet& constraints) const;

  /// Reduced solve + expansion, reusing the cached factorization.
  Vector solve(const Vector& full_rhs) const { return expand(twoscale::solve(reduced_op_, reduce_rhs(full_rhs))); }

 private:
  ConstraintSet constraints_;
  DofMap dofs_;
  SparseOperator reduced_op_;
  SparseMatrix coupling_;  // reduced rows x full fixed columns
};

/// Builds the constrained system for op x = rhs.
std::pair<ConstrainedSystem, Vector> apply_constraints(const SparseOperator& op, const Vector& rhs,
                                                       const ConstraintSet& constraints);

/// Subtracts the weighted mean of each component.
void remove_weighted_mean(Vector& field, int components, const Vector& node_weights);

/// int field over the grid, per component.
Vector integrate_field(const StructuredGrid& grid, const Vector& field, int components);

/// Gradient of a nodal field at a quadrature point of a cell: row m holds
/// d field^m / d x.
Eigen::Matrix<double, Eigen::Dynamic, 2> field_gradient(const Q1Values& q1, const StructuredGrid& grid,
                                                        const Vector& field, int components, Index cell,
                                                        int q);

/// 2x2 gradient of a 2-vector nodal field, G(m, n) = d u^m / d x_n.
Mat2 vector_gradient(const Q1Values& q1, const StructuredGrid& grid, const Vector& field, Index cell,
                     int q);

}  // namespace twoscale
