#include "twoscale/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twoscale {

double Tensor4Sym::minor_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          m = std::max(m, std::abs((*this)(i, j, k, l) - (*this)(j, i, k, l)));
          m = std::max(m, std::abs((*this)(i, j, k, l) - (*this)(i, j, l, k)));
        }
  return m;
}

double Tensor4Sym::major_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          m = std::max(m, std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)));
  return m;
}

void Tensor4Sym::require_symmetric(double tol, const char* what) const {
  const double scale = std::max(1.0, max_abs());
  if (minor_asymmetry() > tol * scale || major_asymmetry() > tol * scale) {
    throw ConfigError(std::string(what) + ": tensor lacks minor/major symmetry");
  }
}

Tensor4Sym Tensor4Sym::major_symmetrized() const {
  Tensor4Sym out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(i, j, k, l) = 0.5 * ((*this)(i, j, k, l) + (*this)(k, l, i, j));
  return out;
}

Eigen::Matrix3d Tensor4Sym::voigt() const {
  static constexpr int ij[3][2] = {{0, 0}, {1, 1}, {0, 1}};
  Eigen::Matrix3d v;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      v(a, b) = (*this)(ij[a][0], ij[a][1], ij[b][0], ij[b][1]);
  return v;
}

Mat2 Tensor4Sym::contract(const Mat2& e) const {
  Mat2 s = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s(i, j) += (*this)(i, j, k, l) * e(k, l);
  return s;
}

double Tensor4Sym::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

Tensor4Sym isotropic_tensor(double lambda, double mu) {
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  Tensor4Sym t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          t(i, j, k, l) = mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k)) + lambda * d(i, j) * d(k, l);
  return t;
}

Mat2 unit_strain(int i, int j) {
  Mat2 e = Mat2::Zero();
  e(i, j) += 0.5;
  e(j, i) += 0.5;
  return e;
}

}  // namespace twoscale
