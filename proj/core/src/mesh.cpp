#include "twoscale/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twoscale {

namespace {

constexpr double kPairTolerance = 1e-12;

// Local face f of a cell joins local vertices f and (f+1)%4.
const std::array<Vec2, 4> kFaceNormals = {Vec2(0, -1), Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0)};

struct LatticeMesh {
  int m = 0;  // lattice cells per side
  std::vector<std::vector<bool>> included;
};

// Builds vertices/cells/boundary faces from a boolean occupancy lattice on
// the box [lower, upper] split m times per side. Nodes are numbered row by
// row (y major).
StructuredGrid build_from_lattice(const LatticeMesh& lattice, const Vec2& lower, const Vec2& upper,
                                  GridKind kind) {
  const int m = lattice.m;
  const Vec2 spacing = (upper - lower) / static_cast<double>(m);
  StructuredGrid grid;
  grid.kind = kind;
  grid.cell_size = spacing;
  grid.h = spacing.norm();
  grid.lower = lower;
  grid.upper = upper;

  auto in = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < m && j < m && lattice.included[j][i];
  };

  std::vector<Index> node_id(static_cast<size_t>(m + 1) * (m + 1), -1);
  auto nid = [&](int i, int j) -> Index& { return node_id[static_cast<size_t>(j) * (m + 1) + i]; };
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (!in(i, j)) continue;
      nid(i, j) = nid(i + 1, j) = nid(i + 1, j + 1) = nid(i, j + 1) = 0;
    }
  }
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      if (nid(i, j) < 0) continue;
      nid(i, j) = grid.num_vertices();
      grid.vertices.emplace_back(lower.x() + spacing.x() * (static_cast<double>(i)),
                                 lower.y() + spacing.y() * (static_cast<double>(j)));
    }
  }
  // Pin the outer coordinates to the exact box so that face predicates work
  // with equality.
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      if (nid(i, j) < 0) continue;
      Vec2& v = grid.vertices[nid(i, j)];
      if (i == m) v.x() = grid.upper.x();
      if (j == m) v.y() = grid.upper.y();
    }
  }

  const std::array<std::array<int, 2>, 4> neighbor = {{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      if (!in(i, j)) continue;
      const Index c = grid.num_cells();
      grid.cells.push_back({nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)});
      for (int f = 0; f < 4; ++f) {
        if (in(i + neighbor[f][0], j + neighbor[f][1])) continue;
        BoundaryFace face;
        face.cell = c;
        face.local_face = f;
        face.nodes = {grid.cells[c][f], grid.cells[c][(f + 1) % 4]};
        face.outward_normal = kFaceNormals[f];
        grid.boundary_faces.push_back(face);
      }
    }
  }
  return grid;
}

// Pairs the nodes of `masters` with those of `slaves` where
// slave = master + shift, matching on coordinates.
void pair_faces(StructuredGrid& grid, std::vector<Index> masters, std::vector<Index> slaves,
                const Vec2& shift) {
  if (masters.size() != slaves.size()) {
    std::ostringstream msg;
    msg << "periodic faces discretize differently: " << masters.size() << " vs " << slaves.size()
        << " nodes";
    throw Error(msg.str());
  }
  const int along = shift.x() != 0.0 ? 1 : 0;
  auto by_coord = [&](Index a, Index b) { return grid.vertices[a][along] < grid.vertices[b][along]; };
  std::sort(masters.begin(), masters.end(), by_coord);
  std::sort(slaves.begin(), slaves.end(), by_coord);
  for (size_t k = 0; k < masters.size(); ++k) {
    const Vec2 d = grid.vertices[slaves[k]] - grid.vertices[masters[k]] - shift;
    if (d.cwiseAbs().maxCoeff() > kPairTolerance) {
      throw Error("periodic node pairing failed: no coordinate match for node " +
                  std::to_string(masters[k]));
    }
    grid.periodic_pairs.push_back({masters[k], slaves[k]});
  }
}

void tag_cell_faces(StructuredGrid& grid) {
  for (BoundaryFace& face : grid.boundary_faces) {
    const Vec2 a = grid.vertices[face.nodes[0]];
    const Vec2 b = grid.vertices[face.nodes[1]];
    const bool on_unit_face = (a.x() == 0.0 && b.x() == 0.0) || (a.x() == 1.0 && b.x() == 1.0) ||
                              (a.y() == 0.0 && b.y() == 0.0) || (a.y() == 1.0 && b.y() == 1.0);
    const BoundaryTag tag = on_unit_face ? BoundaryTag::CellPeriodic : BoundaryTag::CellInterior;
    face.tags = {tag, tag};
  }
}

void require_refinement(int refinement) {
  if (refinement < 0 || refinement > 14) {
    throw ConfigError("refinement level must lie in [0, 14], got " + std::to_string(refinement));
  }
}

}  // namespace

std::vector<Index> StructuredGrid::nodes_with_tag(Subproblem p, BoundaryTag tag) const {
  std::vector<Index> out;
  for (const BoundaryFace& face : boundary_faces) {
    if (face.tag(p) != tag) continue;
    out.push_back(face.nodes[0]);
    out.push_back(face.nodes[1]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StructuredGrid build_macro_grid(const Vec2& lower, const Vec2& upper, int refinement) {
  require_refinement(refinement);
  if (!(lower.x() < upper.x() && lower.y() < upper.y())) {
    throw ConfigError("macro grid requires lower < upper componentwise");
  }
  LatticeMesh lattice;
  lattice.m = 1 << refinement;
  lattice.included.assign(lattice.m, std::vector<bool>(lattice.m, true));
  StructuredGrid grid = build_from_lattice(lattice, lower, upper, GridKind::Macro);
  grid.refinement = refinement;
  return classify_boundary(std::move(grid), ProblemVariant::MixedModel);
}

StructuredGrid build_cell_grid(int refinement) {
  require_refinement(refinement);
  LatticeMesh lattice;
  const int k = 1 << refinement;
  lattice.m = 3 * k;
  lattice.included.assign(lattice.m, std::vector<bool>(lattice.m, false));
  for (int j = 0; j < lattice.m; ++j) {
    for (int i = 0; i < lattice.m; ++i) {
      lattice.included[j][i] = (i / k == 1) || (j / k == 1);
    }
  }
  StructuredGrid grid = build_from_lattice(lattice, Vec2::Zero(), Vec2::Ones(), GridKind::Cell);
  grid.refinement = refinement;
  tag_cell_faces(grid);

  std::vector<Index> left, right, bottom, top;
  for (Index n = 0; n < grid.num_vertices(); ++n) {
    const Vec2& v = grid.vertices[n];
    const bool on_x = v.x() == 0.0 || v.x() == 1.0;
    const bool on_y = v.y() == 0.0 || v.y() == 1.0;
    if (on_x && on_y) {
      throw Error("cell geometry has a node on two periodic faces; not supported");
    }
    if (v.x() == 0.0) left.push_back(n);
    if (v.x() == 1.0) right.push_back(n);
    if (v.y() == 0.0) bottom.push_back(n);
    if (v.y() == 1.0) top.push_back(n);
  }
  pair_faces(grid, left, right, Vec2(1, 0));
  pair_faces(grid, bottom, top, Vec2(0, 1));
  return grid;
}

StructuredGrid build_full_cell_grid(int refinement) {
  require_refinement(refinement);
  LatticeMesh lattice;
  lattice.m = 3 * (1 << refinement);
  lattice.included.assign(lattice.m, std::vector<bool>(lattice.m, true));
  StructuredGrid grid = build_from_lattice(lattice, Vec2::Zero(), Vec2::Ones(), GridKind::Cell);
  grid.refinement = refinement;
  tag_cell_faces(grid);

  const int m = lattice.m;
  auto node = [m](int i, int j) { return static_cast<Index>(j) * (m + 1) + i; };
  std::vector<Index> left, right, bottom, top;
  for (int j = 1; j < m; ++j) {
    left.push_back(node(0, j));
    right.push_back(node(m, j));
  }
  for (int i = 1; i < m; ++i) {
    bottom.push_back(node(i, 0));
    top.push_back(node(i, m));
  }
  pair_faces(grid, left, right, Vec2(1, 0));
  pair_faces(grid, bottom, top, Vec2(0, 1));
  grid.periodic_pairs.push_back({node(0, 0), node(m, 0)});
  grid.periodic_pairs.push_back({node(0, 0), node(0, m)});
  grid.periodic_pairs.push_back({node(0, 0), node(m, m)});
  return grid;
}

StructuredGrid classify_boundary(StructuredGrid grid, ProblemVariant variant) {
  if (grid.kind != GridKind::Macro || !grid.periodic_pairs.empty()) {
    throw ConfigError("classify_boundary expects a macro grid");
  }
  for (BoundaryFace& face : grid.boundary_faces) {
    if (variant == ProblemVariant::PureDirichlet) {
      face.tags = {BoundaryTag::ElastDirichlet, BoundaryTag::DiffDirichlet};
      continue;
    }
    const bool lateral = face.local_face == 1 || face.local_face == 3;
    const bool upper = face.local_face == 2;
    face.tags = {lateral ? BoundaryTag::ElastDirichlet : BoundaryTag::ElastNeumann,
                 upper ? BoundaryTag::DiffDirichlet : BoundaryTag::DiffNeumann};
  }
  return grid;
}

Index locate_cell(const StructuredGrid& grid, const Vec2& x) {
  if (grid.kind != GridKind::Macro) {
    throw ConfigError("locate_cell is only defined on macro grids");
  }
  const double tol = 1e-12 * grid.h;
  if (x.x() < grid.lower.x() - tol || x.x() > grid.upper.x() + tol ||
      x.y() < grid.lower.y() - tol || x.y() > grid.upper.y() + tol) {
    return -1;
  }
  const Index n = Index{1} << grid.refinement;
  auto clamp = [n](double v) {
    return std::clamp(static_cast<Index>(std::floor(v)), Index{0}, n - 1);
  };
  const Index i = clamp((x.x() - grid.lower.x()) / grid.cell_size.x());
  const Index j = clamp((x.y() - grid.lower.y()) / grid.cell_size.y());
  return j * n + i;
}

}  // namespace twoscale
