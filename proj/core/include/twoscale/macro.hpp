#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "twoscale/diffusion_cell.hpp"
#include "twoscale/elastic_cell.hpp"
#include "twoscale/fem.hpp"
#include "twoscale/mesh.hpp"
#include "twoscale/tensor.hpp"

namespace twoscale {

enum class BoundaryProfile { ConstantFront, Parabola };

/// Lateral boundary motion h(t, x) = +-a (1 - cos 2 pi f t) / 2 e_1, scaled by
/// a parabola in x_2 for the Parabola profile.
struct BoundaryMotion {
  double amplitude = 0.25;
  double frequency = 1.0;
  BoundaryProfile profile = BoundaryProfile::ConstantFront;
};

/// h on the boundary of the box [lower, upper]: the sign follows the lateral
/// side, points on neither lateral side get zero. Parabola vanishes on the
/// top and bottom sides.
Vec2 dirichlet_h(double t, const Vec2& x, const BoundaryMotion& motion, const Vec2& lower = Vec2(-0.5, -0.5),
                 const Vec2& upper = Vec2(0.5, 0.5));

using VectorFunction = std::function<Vec2(double t, const Vec2& x)>;
using ScalarFunction = std::function<double(double t, const Vec2& x)>;

struct ProblemData {
  Tensor4Sym A_star;
  Mat2 D_hat = 0.5 * Mat2::Identity();
  double solid_fraction = 5.0 / 9.0;  // |Y^s|, scales the body force
  BoundaryMotion motion;
  VectorFunction displacement_bc;  // replaces dirichlet_h when set
  VectorFunction f_elast;          // zero when unset
  ScalarFunction f_diff;           // zero when unset
  ScalarFunction g = [](double, const Vec2&) { return 1.0; };
  std::function<double(const Vec2&)> c0 = [](const Vec2&) { return 0.0; };
  double theta = 0.5;
  double dt = 0.05;

  /// Throws ConfigError for theta outside [0, 1], dt <= 0, f <= 0 or a
  /// non-finite amplitude.
  void validate() const;
};

/// Model problem data: mixed boundary conditions with a constant front,
/// c0 = 0; or the pure Dirichlet variant with a parabolic front and c0 = 1.
ProblemData model_problem(ProblemVariant variant, const Tensor4Sym& A_star);

struct MacroState {
  double t = 0.0;
  Vector u;  // dof = 2 * node + comp
  Vector c;
};

/// Quasi-static elasticity on a classified macro grid. The stiffness matrix
/// and its factorization are built once; each solve only changes the
/// Dirichlet data and the load.
class ElasticMacroSolver {
 public:
  ElasticMacroSolver(StructuredGrid grid, ProblemData data);

  /// Solves -div(A* e(u)) = |Y^s| f_elast with u = h(t) on ElastDirichlet
  /// nodes. Throws SolverBreakdown when the Dirichlet data do not fix the
  /// rigid motions.
  Vector solve(double t) const;

  const SparseOperator& stiffness() const { return stiffness_; }

 private:
  ConstraintSet constraints_at(double t) const;

  StructuredGrid grid_;
  ProblemData data_;
  std::vector<Index> dirichlet_nodes_;
  SparseOperator stiffness_;
  std::unique_ptr<ConstrainedSystem> system_;
};

Vector elastic_macro_solve(const StructuredGrid& grid, const ProblemData& data, double t);

/// One theta-scheme step for  d/dt(J* c) - div(D* grad c) = J* f_diff  from
/// t_k = eff_k.t to t_{k+1} = eff_k1.t, with c = g(t_{k+1}) on DiffDirichlet
/// nodes.
Vector diffusion_step(const StructuredGrid& grid, const Vector& c_k, const EffectiveFieldState& eff_k,
                      const EffectiveFieldState& eff_k1, const ProblemData& data);

/// M = int c J* dx by quadrature.
double mass_observable(const StructuredGrid& grid, const Vector& c, const EffectiveFieldState& eff);

/// Nodal c0, with no boundary values imposed.
Vector initial_concentration(const StructuredGrid& grid, const ProblemData& data);

/// Micro displacement y -> u(x*) + eps sum_ij du^i/dx_j (y_j d_im + chi^m_ij(y))
/// on the cell grid nodes (dof = 2 * node + comp). Throws ConfigError when x*
/// lies outside the macro grid.
Vector reconstruct_corrector(const StructuredGrid& macro_grid, const Vector& u, const StructuredGrid& cell_grid,
                             const ElasticCellSolution& chi, const Vec2& x_star, double epsilon);

struct WarpedGrid {
  StructuredGrid grid;  // vertices moved to x + u(x)
  Vector c;
  std::vector<Index> inverted_cells;  // cells with a non-positive corner Jacobian
};

/// Reference grid moved by u, carrying c unchanged. Logs a warning for
/// inverted cells instead of failing.
WarpedGrid push_forward(const StructuredGrid& grid, const MacroState& state);

struct Observables {
  double t = 0.0;
  double mass = 0.0;
  double c_min = 0.0;
  double c_max = 0.0;
  double u_max = 0.0;  // max nodal |u|
};

Observables observe(const StructuredGrid& grid, const MacroState& state, const EffectiveFieldState& eff);

struct RunOptions {
  double t_end = 1.0;
  UpdateOptions update;
};

struct RunResult {
  std::vector<Observables> observables;
  MacroState final_state;
  EffectiveFieldState final_effective;
  UpdateStats update_stats;
};

/// Called after the initial state (step 0) and after every step.
using StepObserver = std::function<void(int step, const MacroState&, const EffectiveFieldState&)>;

/// Time levels t_k = k dt for k < N and t_N = t_end, N = ceil(t_end / dt).
/// Each step solves elasticity at t_{k+1}, updates J*, D*, then advances c.
/// Errors other than DegenerateDeformation are rethrown with the step added.
RunResult run(const StructuredGrid& macro_grid, const ProblemData& data,
              std::shared_ptr<const CellInfrastructure> infra, const RunOptions& options,
              const StepObserver& observer = {});

}  // namespace twoscale
