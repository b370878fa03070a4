#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "twoscale/output.hpp"

using namespace twoscale;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "twoscale_output_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Vtk, SingleCell) {
  const StructuredGrid g = build_macro_grid(Vec2(0, 0), Vec2(1, 1), 0);
  const fs::path p = scratch("one.vtk");
  write_vtk(g, {{"c", 1, Vector::Zero(4)}}, {}, p);
  const std::string text = slurp(p);
  EXPECT_NE(text.find("POINTS 4 double"), std::string::npos);
  EXPECT_NE(text.find("CELLS 1 5"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 1\n9\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS c double 1"), std::string::npos);
}

TEST(Vtk, DeterministicBytes) {
  const StructuredGrid g = build_macro_grid(Vec2(-0.5, -0.5), Vec2(0.5, 0.5), 2);
  Vector c(g.num_vertices());
  for (Index n = 0; n < g.num_vertices(); ++n) c[n] = std::sin(3.0 * g.vertices[n].x()) / 7.0;
  Vector u = Vector::LinSpaced(2 * g.num_vertices(), 0.0, 1.0 / 3.0);
  const std::vector<DataArray> cells = {{"k", 1, Vector::LinSpaced(g.num_cells(), 0.0, 1.0)}};
  write_vtk(g, {{"c", 1, c}, {"u", 2, u}}, cells, scratch("a.vtk"));
  write_vtk(g, {{"c", 1, c}, {"u", 2, u}}, cells, scratch("b.vtk"));
  EXPECT_EQ(slurp(scratch("a.vtk")), slurp(scratch("b.vtk")));
  EXPECT_NE(slurp(scratch("a.vtk")).find("VECTORS u double"), std::string::npos);
}

TEST(Vtk, SizeMismatchAndIoErrors) {
  const StructuredGrid g = build_macro_grid(Vec2(0, 0), Vec2(1, 1), 1);
  EXPECT_THROW(write_vtk(g, {{"c", 1, Vector::Zero(3)}}, {}, scratch("bad.vtk")), ConfigError);
  EXPECT_THROW(write_vtk(g, {{"c", 3, Vector::Zero(27)}}, {}, scratch("bad.vtk")), ConfigError);
  std::ofstream(scratch("blocker")) << "x";
  EXPECT_THROW(write_vtk(g, {}, {}, scratch("blocker") / "x.vtk"), IoError);
}

TEST(TensorTable, LayoutAndDigits) {
  const Tensor4Sym A = isotropic_tensor(1.0, 1.0);
  const std::string t = tensor_table(A, A, 0.5 * Mat2::Identity(), 0.5 * Mat2::Identity());
  EXPECT_NE(t.find("1 1 1 1  3  3\n"), std::string::npos);
  EXPECT_NE(t.find("1 1 2 2  1  1\n"), std::string::npos);
  EXPECT_NE(t.find("1 2 2 1  1  1\n"), std::string::npos);
  EXPECT_EQ(t.find("1 1 1 2"), std::string::npos);
  EXPECT_NE(t.find("1 1  0.5  0.5\n"), std::string::npos);
  EXPECT_NE(t.find("1 2  0  0\n"), std::string::npos);
  Tensor4Sym B = A;
  B(0, 0, 0, 0) = 0.95265603;
  EXPECT_NE(tensor_table(A, B, Mat2::Identity(), Mat2::Identity()).find("1 1 1 1  3  0.952656\n"),
            std::string::npos);
}

TEST(Csv, ConvergenceDashesForUndefined) {
  ConvergenceRecord r;
  r.cycle = 0;
  r.cells = 1;
  r.h = std::sqrt(2.0);
  r.u_l2 = r.u_h1 = r.c_l2 = r.c_h1 = std::numeric_limits<double>::quiet_NaN();
  r.eoc_u_l2 = r.eoc_u_h1 = r.eoc_c_l2 = r.eoc_c_h1 = std::numeric_limits<double>::quiet_NaN();
  write_convergence_csv({r}, scratch("conv.csv"));
  EXPECT_EQ(slurp(scratch("conv.csv")),
            "cycle,cells,h,u_L2,u_H1,c_L2,c_H1,EOC_u_L2,EOC_u_H1,EOC_c_L2,EOC_c_H1\n"
            "0,1,1.41421356,-,-,-,-,-,-,-,-\n");
}

TEST(Csv, SweepLongFormat) {
  SweepRecord a;
  a.value = -0.125;
  a.t = {0.0, 0.5};
  a.mass = {0.0, 0.1};
  SweepRecord b;
  b.value = 0.25;
  b.t = {0.0};
  b.mass = {0.0};
  write_sweep_csv({a, b}, scratch("sweep.csv"));
  EXPECT_EQ(slurp(scratch("sweep.csv")), "param_value,t,M\n-0.125,0,0\n-0.125,0.5,0.1\n0.25,0,0\n");
}

TEST(Csv, SchemaNamesEveryColumn) {
  write_schema(scratch("schema.txt"));
  const std::string s = slurp(scratch("schema.txt"));
  for (const char* col : {"EOC_c_H1", "param_value", "u_max", "c_min"}) EXPECT_NE(s.find(col), std::string::npos);
}

TEST(FormatNumber, NineSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "-");
  EXPECT_EQ(format_number(0.0), "0");
}
