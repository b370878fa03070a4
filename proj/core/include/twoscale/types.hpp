#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace twoscale {

using Index = std::int64_t;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (bad key, out-of-range value, wrong grid kind).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Linear solver failure: the constrained operator is not SPD (pivot breakdown).
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

/// Linear solver failure: the iteration or residual tolerance was not met.
class SolverNonConvergence : public Error {
 public:
  using Error::Error;
};

/// File could not be created or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Thrown when det F0 drops to or below the admissible minimum somewhere in
/// the cell. The location is filled in as the error propagates up: the
/// kinematics layer knows y, the effective-field update adds t and x_q.
class DegenerateDeformation : public Error {
 public:
  DegenerateDeformation(double det, Vec2 y, Index cell_qp);

  double det() const { return det_; }
  const Vec2& y() const { return y_; }
  Index cell_quadrature_point() const { return cell_qp_; }

  bool has_macro_location() const { return macro_qp_ >= 0; }
  double t() const { return t_; }
  Index macro_quadrature_point() const { return macro_qp_; }
  const Vec2& x() const { return x_; }

  DegenerateDeformation with_macro_location(double t, Index macro_qp, Vec2 x) const;
  /// Same location data, message prefixed with `context: `.
  DegenerateDeformation with_context(const std::string& context) const;

 private:
  DegenerateDeformation(const std::string& what, double det, Vec2 y, Index cell_qp,
                        double t, Index macro_qp, Vec2 x);

  double det_;
  Vec2 y_;
  Index cell_qp_;
  double t_ = 0.0;
  Index macro_qp_ = -1;
  Vec2 x_ = Vec2::Zero();
};

}  // namespace twoscale
