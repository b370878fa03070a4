#include "twoscale/kinematics.hpp"

#include <limits>
#include <sstream>

#include "twoscale/fem.hpp"

namespace twoscale {

namespace {

std::string describe(double det, const Vec2& y, Index cell_qp) {
  std::ostringstream s;
  s.precision(9);
  s << "degenerate deformation: det F0 = " << det << " at cell quadrature point " << cell_qp << ", y = ("
    << y.x() << ", " << y.y() << ")";
  return s.str();
}

}  // namespace

DegenerateDeformation::DegenerateDeformation(double det, Vec2 y, Index cell_qp)
    : Error(describe(det, y, cell_qp)), det_(det), y_(std::move(y)), cell_qp_(cell_qp) {}

DegenerateDeformation::DegenerateDeformation(const std::string& what, double det, Vec2 y, Index cell_qp,
                                             double t, Index macro_qp, Vec2 x)
    : Error(what), det_(det), y_(std::move(y)), cell_qp_(cell_qp), t_(t), macro_qp_(macro_qp), x_(std::move(x)) {}

DegenerateDeformation DegenerateDeformation::with_macro_location(double t, Index macro_qp, Vec2 x) const {
  std::ostringstream s;
  s.precision(9);
  s << describe(det_, y_, cell_qp_) << "; t = " << t << ", macro quadrature point " << macro_qp << ", x = ("
    << x.x() << ", " << x.y() << ")";
  return DegenerateDeformation(s.str(), det_, y_, cell_qp_, t, macro_qp, std::move(x));
}

DegenerateDeformation DegenerateDeformation::with_context(const std::string& context) const {
  return DegenerateDeformation(context + ": " + what(), det_, y_, cell_qp_, t_, macro_qp_, x_);
}

CorrectorGradients corrector_gradients(const StructuredGrid& cell_grid, const ElasticCellSolution& chi) {
  const Q1Values q1(cell_grid);
  const Index n = cell_grid.num_cells() * kQuadPerCell;
  CorrectorGradients out;
  for (auto& g : out.grad) g.resize(n);
  out.points.resize(n);
  for (Index c = 0; c < cell_grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const Index k = kQuadPerCell * c + q;
      out.points[k] = q1.point(cell_grid, c, q);
      for (int s = 0; s < 3; ++s) out.grad[s][k] = vector_gradient(q1, cell_grid, chi.chi[s], c, q);
    }
  return out;
}

void compute_F0(const MacroGradientSample& sample, const CorrectorGradients& grads, CellCoefficientField& out) {
  const Index n = grads.size();
  // E_12 and E_21 share the chi_12 slot
  const double w[3] = {sample.E(0, 0), 2.0 * sample.E(0, 1), sample.E(1, 1)};
  const Mat2 base = Mat2::Identity() + sample.G;
  out.F0.resize(n);
  for (Index k = 0; k < n; ++k)
    out.F0[k] = base + w[0] * grads.grad[0][k] + w[1] * grads.grad[1][k] + w[2] * grads.grad[2][k];
}

CellCoefficientField compute_F0(const MacroGradientSample& sample, const CorrectorGradients& grads) {
  CellCoefficientField f;
  compute_F0(sample, grads, f);
  return f;
}

CellCoefficientField compute_F0(const MacroGradientSample& sample, const ElasticCellSolution& chi,
                                const StructuredGrid& cell_grid) {
  return compute_F0(sample, corrector_gradients(cell_grid, chi));
}

void compute_J0_D0(CellCoefficientField& field, const Mat2& D_hat, double j_min, const std::vector<Vec2>& points) {
  const Index n = field.size();
  field.J0.resize(n);
  field.D0.resize(n);
  const bool symmetric = D_hat(0, 1) == D_hat(1, 0);
  for (Index k = 0; k < n; ++k) {
    const Mat2& F = field.F0[k];
    const double J = det2(F);
    if (!(J > j_min)) {
      const Vec2 y = k < static_cast<Index>(points.size())
                         ? points[k]
                         : Vec2::Constant(std::numeric_limits<double>::quiet_NaN()).eval();
      throw DegenerateDeformation(J, y, k);
    }
    const Mat2 adj = adjugate(F);
    Mat2 D = adj * D_hat * adj.transpose() / J;
    if (symmetric) D(1, 0) = D(0, 1) = 0.5 * (D(0, 1) + D(1, 0));
    field.J0[k] = J;
    field.D0[k] = D;
  }
}

}  // namespace twoscale
