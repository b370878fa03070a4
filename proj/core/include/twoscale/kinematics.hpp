#pragma once

#include <array>
#include <vector>

#include "twoscale/elastic_cell.hpp"
#include "twoscale/mesh.hpp"
#include "twoscale/types.hpp"

namespace twoscale {

/// Macroscopic displacement gradient G = grad_x u at one (t, x_q), with its
/// symmetric part E.
struct MacroGradientSample {
  Mat2 G = Mat2::Zero();
  Mat2 E = Mat2::Zero();

  MacroGradientSample() = default;
  explicit MacroGradientSample(const Mat2& gradient) : G(gradient), E(0.5 * (gradient + gradient.transpose())) {}
};

/// grad_y chi_ij at every cell quadrature point (index 4*cell + q), one
/// 2x2 matrix per slot of ElasticCellSolution.
struct CorrectorGradients {
  std::array<std::vector<Mat2>, 3> grad;
  std::vector<Vec2> points;  // y of each quadrature point

  Index size() const { return static_cast<Index>(points.size()); }
};

CorrectorGradients corrector_gradients(const StructuredGrid& cell_grid, const ElasticCellSolution& chi);

/// F0, J0, D0 per cell quadrature point.
struct CellCoefficientField {
  std::vector<Mat2> F0;
  std::vector<double> J0;
  std::vector<Mat2> D0;

  Index size() const { return static_cast<Index>(F0.size()); }
};

/// F0 = I + G + sum_ij E_ij grad_y chi_ij. Only F0 is filled.
CellCoefficientField compute_F0(const MacroGradientSample& sample, const CorrectorGradients& grads);
void compute_F0(const MacroGradientSample& sample, const CorrectorGradients& grads, CellCoefficientField& out);
CellCoefficientField compute_F0(const MacroGradientSample& sample, const ElasticCellSolution& chi,
                                const StructuredGrid& cell_grid);

/// J0 = det F0 and D0 = J0 F0^-1 D_hat F0^-T via the adjugate. Throws
/// DegenerateDeformation at the first point with J0 <= j_min; `points`
/// supplies the y reported with it (may be empty).
void compute_J0_D0(CellCoefficientField& field, const Mat2& D_hat, double j_min,
                   const std::vector<Vec2>& points = {});

/// Closed-form 2x2 adjugate, adj(F) = det(F) F^-1.
inline Mat2 adjugate(const Mat2& f) {
  Mat2 a;
  a << f(1, 1), -f(0, 1), -f(1, 0), f(0, 0);
  return a;
}

inline double det2(const Mat2& f) { return f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0); }

inline constexpr double kDefaultJMin = 1e-8;

}  // namespace twoscale
