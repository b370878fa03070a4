#include "twoscale/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace twoscale {

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

namespace {

void append_arrays(std::ostringstream& s, const std::vector<DataArray>& arrays, Index count, const char* what) {
  for (const DataArray& a : arrays) {
    if (a.components != 1 && a.components != 2) throw ConfigError("VTK array '" + a.name + "' must have 1 or 2 components");
    if (a.values.size() != a.components * count) {
      throw ConfigError(std::string("VTK ") + what + " array '" + a.name + "' has the wrong size");
    }
    if (a.components == 1) {
      s << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
      for (Index i = 0; i < count; ++i) s << format_number(a.values[i], 10) << "\n";
    } else {
      s << "VECTORS " << a.name << " double\n";
      for (Index i = 0; i < count; ++i) {
        s << format_number(a.values[2 * i], 10) << " " << format_number(a.values[2 * i + 1], 10) << " 0\n";
      }
    }
  }
}

}  // namespace

void write_vtk(const StructuredGrid& grid, const std::vector<DataArray>& point_data,
               const std::vector<DataArray>& cell_data, const std::filesystem::path& path) {
  std::ostringstream s;
  s << "# vtk DataFile Version 3.0\ntwoscale\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  s << "POINTS " << grid.num_vertices() << " double\n";
  for (const Vec2& x : grid.vertices) s << format_number(x.x(), 12) << " " << format_number(x.y(), 12) << " 0\n";
  s << "CELLS " << grid.num_cells() << " " << 5 * grid.num_cells() << "\n";
  for (const auto& c : grid.cells) s << "4 " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
  s << "CELL_TYPES " << grid.num_cells() << "\n";
  for (Index c = 0; c < grid.num_cells(); ++c) s << "9\n";
  if (!point_data.empty()) {
    s << "POINT_DATA " << grid.num_vertices() << "\n";
    append_arrays(s, point_data, grid.num_vertices(), "point");
  }
  if (!cell_data.empty()) {
    s << "CELL_DATA " << grid.num_cells() << "\n";
    append_arrays(s, cell_data, grid.num_cells(), "cell");
  }
  write_text(path, s.str());
}

std::vector<DataArray> effective_cell_data(const StructuredGrid& grid, const EffectiveFieldState& eff) {
  if (static_cast<Index>(eff.points.size()) != grid.num_cells() * kQuadPerCell) {
    throw ConfigError("effective field does not match the grid");
  }
  const char* names[5] = {"J_star", "D_star_11", "D_star_12", "D_star_21", "D_star_22"};
  std::vector<DataArray> out(5);
  for (int i = 0; i < 5; ++i) out[i] = {names[i], 1, Vector::Zero(grid.num_cells())};
  for (Index c = 0; c < grid.num_cells(); ++c)
    for (int q = 0; q < kQuadPerCell; ++q) {
      const EffectivePointValue& p = eff.points[kQuadPerCell * c + q];
      out[0].values[c] += p.J_star / kQuadPerCell;
      out[1].values[c] += p.D_star(0, 0) / kQuadPerCell;
      out[2].values[c] += p.D_star(0, 1) / kQuadPerCell;
      out[3].values[c] += p.D_star(1, 0) / kQuadPerCell;
      out[4].values[c] += p.D_star(1, 1) / kQuadPerCell;
    }
  return out;
}

std::string tensor_table(const Tensor4Sym& A, const Tensor4Sym& A_star, const Mat2& D_hat, const Mat2& D_star) {
  std::ostringstream s;
  s << "# i j k l  A  A*\n";
  const double scale = std::max(A.max_abs(), A_star.max_abs());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          if (std::abs(A(i, j, k, l)) <= 1e-12 * scale && std::abs(A_star(i, j, k, l)) <= 1e-9 * scale) continue;
          s << i + 1 << " " << j + 1 << " " << k + 1 << " " << l + 1 << "  " << format_number(A(i, j, k, l), 6)
            << "  " << format_number(A_star(i, j, k, l), 6) << "\n";
        }
  s << "# i j  D_hat  D*\n";
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      s << i + 1 << " " << j + 1 << "  " << format_number(D_hat(i, j), 6) << "  " << format_number(D_star(i, j), 6)
        << "\n";
    }
  return s.str();
}

void emit_tensor_table(const Tensor4Sym& A, const Tensor4Sym& A_star, const Mat2& D_hat, const Mat2& D_star,
                       const std::filesystem::path& path) {
  write_text(path, tensor_table(A, A_star, D_hat, D_star));
}

void write_tensor_full(const Tensor4Sym& A_star, const std::filesystem::path& path) {
  std::ostringstream s;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s << format_number(A_star(i, j, k, l), 17) << (l == 1 ? "\n" : " ");
  write_text(path, s.str());
}

void write_observables_csv(const std::vector<Observables>& rows, const std::filesystem::path& path) {
  std::ostringstream s;
  s << "t,M,c_min,c_max,u_max\n";
  for (const Observables& o : rows) {
    s << format_number(o.t) << "," << format_number(o.mass) << "," << format_number(o.c_min) << ","
      << format_number(o.c_max) << "," << format_number(o.u_max) << "\n";
  }
  write_text(path, s.str());
}

void write_convergence_csv(const std::vector<ConvergenceRecord>& rows, const std::filesystem::path& path) {
  std::ostringstream s;
  s << "cycle,cells,h,u_L2,u_H1,c_L2,c_H1,EOC_u_L2,EOC_u_H1,EOC_c_L2,EOC_c_H1\n";
  for (const ConvergenceRecord& r : rows) {
    s << r.cycle << "," << r.cells << "," << format_number(r.h) << "," << format_number(r.u_l2) << ","
      << format_number(r.u_h1) << "," << format_number(r.c_l2) << "," << format_number(r.c_h1) << ","
      << format_number(r.eoc_u_l2) << "," << format_number(r.eoc_u_h1) << "," << format_number(r.eoc_c_l2) << ","
      << format_number(r.eoc_c_h1) << "\n";
  }
  write_text(path, s.str());
}

void write_sweep_csv(const std::vector<SweepRecord>& rows, const std::filesystem::path& path) {
  std::ostringstream s;
  s << "param_value,t,M\n";
  for (const SweepRecord& r : rows)
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      s << format_number(r.value) << "," << format_number(r.t[k]) << "," << format_number(r.mass[k]) << "\n";
    }
  write_text(path, s.str());
}

void write_schema(const std::filesystem::path& path) {
  write_text(path,
             "# Numbers carry 9 significant digits; '-' marks an undefined value.\n"
             "\n"
             "observables.csv: one row per time level\n"
             "  t      time\n"
             "  M      integral of c J* over the macro domain\n"
             "  c_min  smallest nodal concentration\n"
             "  c_max  largest nodal concentration\n"
             "  u_max  largest nodal displacement magnitude\n"
             "\n"
             "convergence.csv: one row per refinement cycle\n"
             "  cycle     macro refinement level (2^cycle cells per side)\n"
             "  cells     number of macro cells\n"
             "  h         cell diagonal\n"
             "  u_L2      L2 norm of u(cycle) - u(cycle-1), '-' for cycle 0\n"
             "  u_H1      H1 norm of the same difference\n"
             "  c_L2      L2 norm of c(cycle) - c(cycle-1)\n"
             "  c_H1      H1 norm of the same difference\n"
             "  EOC_u_L2  log2 ratio of consecutive u_L2, '-' before cycle 2\n"
             "  EOC_u_H1  same for u_H1\n"
             "  EOC_c_L2  same for c_L2\n"
             "  EOC_c_H1  same for c_H1\n"
             "\n"
             "sweep_<parameter>.csv: long format, one row per run and time level\n"
             "  param_value  value of the swept parameter (amplitude or frequency)\n"
             "  t            time\n"
             "  M            integral of c J* over the macro domain\n");
}

}  // namespace twoscale
