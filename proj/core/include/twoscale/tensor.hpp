#pragma once

#include <array>

#include <Eigen/Core>

#include "twoscale/types.hpp"

namespace twoscale {

/// Fourth-order tensor in 2D, stored as all 16 components with zero-based
/// indices. Holds both the stiffness A and the effective tensor A*; the
/// symmetry checks are explicit so a computed A* can be inspected before it
/// is symmetrized.
class Tensor4Sym {
 public:
  Tensor4Sym() { c_.fill(0.0); }

  double operator()(int i, int j, int k, int l) const { return c_[flat(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return c_[flat(i, j, k, l)]; }

  const std::array<double, 16>& data() const { return c_; }

  /// max |A_ijkl - A_jikl|, max |A_ijkl - A_ijlk|
  double minor_asymmetry() const;
  /// max |A_ijkl - A_klij|
  double major_asymmetry() const;
  /// Throws ConfigError unless minor and major symmetry hold to `tol`.
  void require_symmetric(double tol, const char* what) const;

  /// (A + A^T)/2 with respect to the (ij),(kl) pairing.
  Tensor4Sym major_symmetrized() const;

  /// 3x3 matrix in the (11, 22, 12) basis with engineering shear, so that
  /// the quadratic form e^T V e equals A e : e for symmetric e.
  Eigen::Matrix3d voigt() const;

  /// (A e)_ij = A_ijkl e_kl
  Mat2 contract(const Mat2& e) const;

  double max_abs() const;

 private:
  static constexpr int flat(int i, int j, int k, int l) { return ((i * 2 + j) * 2 + k) * 2 + l; }
  std::array<double, 16> c_;
};

/// A_ijkl = mu (d_ik d_jl + d_il d_jk) + lambda d_ij d_kl.
Tensor4Sym isotropic_tensor(double lambda, double mu);

/// Symmetrized dyad (e_i x e_j + e_j x e_i)/2, zero-based indices.
Mat2 unit_strain(int i, int j);

inline Mat2 sym(const Mat2& g) { return 0.5 * (g + g.transpose()); }

}  // namespace twoscale
