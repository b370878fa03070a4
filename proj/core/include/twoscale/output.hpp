#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twoscale/diffusion_cell.hpp"
#include "twoscale/macro.hpp"
#include "twoscale/mesh.hpp"
#include "twoscale/studies.hpp"
#include "twoscale/tensor.hpp"

namespace twoscale {

/// Named nodal or cellwise array with 1 (scalar) or 2 (vector) components.
struct DataArray {
  std::string name;
  int components = 1;
  Vector values;
};

/// Legacy ASCII VTK unstructured grid of quads (cell type 9). Byte-identical
/// for identical input. Throws ConfigError on size mismatch and IoError on I/O
/// failure.
void write_vtk(const StructuredGrid& grid, const std::vector<DataArray>& point_data,
               const std::vector<DataArray>& cell_data, const std::filesystem::path& path);

/// J*, D*_11, D*_12, D*_21, D*_22 averaged over the quadrature points of each
/// macro cell.
std::vector<DataArray> effective_cell_data(const StructuredGrid& grid, const EffectiveFieldState& eff);

/// Rows "i j k l  A_ijkl  A*_ijkl" for the non-zero entries and
/// "i j  D_hat_ij  D*_ij", six significant digits, one-based indices.
std::string tensor_table(const Tensor4Sym& A, const Tensor4Sym& A_star, const Mat2& D_hat, const Mat2& D_star);
void emit_tensor_table(const Tensor4Sym& A, const Tensor4Sym& A_star, const Mat2& D_hat, const Mat2& D_star,
                       const std::filesystem::path& path);

/// The 16 entries of A*, row-major in (i, j, k, l), full precision.
void write_tensor_full(const Tensor4Sym& A_star, const std::filesystem::path& path);

/// CSV writers, 9 significant digits. Undefined convergence values are
/// written as "-".
void write_observables_csv(const std::vector<Observables>& rows, const std::filesystem::path& path);
void write_convergence_csv(const std::vector<ConvergenceRecord>& rows, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRecord>& rows, const std::filesystem::path& path);

/// Column documentation of every CSV this library writes.
void write_schema(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

std::string format_number(double v, int digits = 9);

}  // namespace twoscale
