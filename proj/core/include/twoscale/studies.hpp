#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twoscale/macro.hpp"

namespace twoscale {

/// Shared inputs of every run in a study.
struct StudySetup {
  std::shared_ptr<const CellInfrastructure> infra;
  Tensor4Sym A_star;  // symmetrized
  double solid_fraction = 5.0 / 9.0;
  double amplitude = 0.25;
  double frequency = 1.0;
  std::optional<BoundaryProfile> profile;  // default follows the variant
  double theta = 0.5;
  double dt = 0.05;
  Vec2 lower = Vec2(-0.5, -0.5);
  Vec2 upper = Vec2(0.5, 0.5);
  UpdateOptions update;
};

/// Model-problem data for the variant with the setup's overrides applied.
ProblemData study_problem(const StudySetup& setup, ProblemVariant variant);

struct FieldNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // full norm, sqrt(|f|_L2^2 + |grad f|_L2^2)
};

/// Norms of a nodal field (dof = components * node + comp) by 2x2 Gauss
/// quadrature on its grid.
FieldNorms field_norms(const StructuredGrid& grid, const Vector& field, int components);

/// Bilinear interpolant of a coarse field at the nodes of a finer grid of
/// the same box. Exact for nested uniform grids.
Vector prolongate(const StructuredGrid& coarse, const Vector& field, int components, const StructuredGrid& fine);

/// log2(previous / current).
double eoc(double previous, double current);

struct ConvergenceRecord {
  int cycle = 0;
  Index cells = 0;
  double h = 0.0;
  // NaN where undefined: errors before cycle 1, EOCs before cycle 2
  double u_l2 = 0.0, u_h1 = 0.0, c_l2 = 0.0, c_h1 = 0.0;
  double eoc_u_l2 = 0.0, eoc_u_h1 = 0.0, eoc_c_l2 = 0.0, eoc_c_h1 = 0.0;
};

/// Runs the coupled problem to t_eval on macro refinements 0..max_cycle and
/// differences consecutive cycles on the finer grid.
std::vector<ConvergenceRecord> run_convergence(const StudySetup& setup, ProblemVariant variant, int max_cycle,
                                               double t_eval = 1.5);

enum class SweepParameter { Frequency, Amplitude };

const char* to_string(SweepParameter p);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::Amplitude;
  std::vector<double> values;
};

/// Setup with the swept parameter replaced, nothing else touched.
StudySetup with_parameter(StudySetup setup, SweepParameter parameter, double value);

struct SweepRecord {
  SweepParameter parameter = SweepParameter::Amplitude;
  double value = 0.0;
  std::vector<double> t;
  std::vector<double> mass;
  double max_extension = 0.0;  // max over time of the domain width minus the reference width
  std::string error;           // non-empty when the run failed
};

/// One run per value on the macro grid of the given refinement; records are
/// sorted by value. A failing run records its error and the others continue.
/// With more than one worker, runs execute concurrently (one cell worker each).
std::vector<SweepRecord> run_sensitivity(const StudySetup& setup, ProblemVariant variant, const SweepSpec& sweep,
                                         double t_end, int macro_refinement);

}  // namespace twoscale
