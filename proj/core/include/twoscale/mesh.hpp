#pragma once

#include <array>
#include <vector>

#include "twoscale/types.hpp"

namespace twoscale {

/// Boundary role of a face, one per subproblem.
enum class BoundaryTag {
  ElastDirichlet,
  ElastNeumann,
  DiffDirichlet,
  DiffNeumann,
  CellInterior,  // Γ: the perforation boundary inside the cell
  CellPeriodic,
};

enum class Subproblem { Elasticity = 0, Diffusion = 1 };

enum class ProblemVariant { MixedModel, PureDirichlet };

enum class GridKind { Macro, Cell };

struct BoundaryFace {
  Index cell = 0;
  int local_face = 0;  // 0: bottom, 1: right, 2: top, 3: left
  std::array<Index, 2> nodes{};
  Vec2 outward_normal = Vec2::Zero();
  std::array<BoundaryTag, 2> tags{BoundaryTag::ElastNeumann, BoundaryTag::DiffNeumann};

  BoundaryTag tag(Subproblem p) const { return tags[static_cast<int>(p)]; }
};

/// slave coordinate = master coordinate + shift, shift a unit lattice vector.
struct PeriodicPair {
  Index master = 0;
  Index slave = 0;
};

/// Uniform quadrilateral mesh made of identical axis-aligned rectangles
/// (squares for every grid this library builds). Cell vertices are stored
/// counterclockwise starting at the lower-left corner. Immutable once built.
struct StructuredGrid {
  GridKind kind = GridKind::Macro;
  std::vector<Vec2> vertices;
  std::vector<std::array<Index, 4>> cells;
  std::vector<BoundaryFace> boundary_faces;
  std::vector<PeriodicPair> periodic_pairs;
  Vec2 cell_size = Vec2::Zero();  // edge lengths (hx, hy)
  double h = 0.0;                 // cell diagonal
  Vec2 lower = Vec2::Zero();      // bounding box
  Vec2 upper = Vec2::Zero();
  int refinement = 0;

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_cells() const { return static_cast<Index>(cells.size()); }
  double cell_area() const { return cell_size.x() * cell_size.y(); }
  double total_area() const { return cell_area() * static_cast<double>(cells.size()); }
  Vec2 cell_origin(Index c) const { return vertices[cells[c][0]]; }

  /// Nodes touched by at least one face carrying `tag` for subproblem `p`,
  /// sorted ascending.
  std::vector<Index> nodes_with_tag(Subproblem p, BoundaryTag tag) const;
};

/// Rectangle [lower, upper] split into 2^r x 2^r cells, faces tagged as for
/// the mixed model variant.
StructuredGrid build_macro_grid(const Vec2& lower, const Vec2& upper, int refinement);

/// The cross-shaped solid part of the unit cell,
/// ((1/3,2/3) x (0,1)) u ((0,1) x (1/3,2/3)), built from five squares of side
/// 1/3 and refined uniformly. Faces on the unit-square boundary are paired
/// periodically, every other boundary face is tagged CellInterior.
StructuredGrid build_cell_grid(int refinement);

/// The unperforated unit cell (Y^s = Y) on a (3*2^r)^2 grid. All four corners
/// are slaved to (0,0); used as the reference case where no microstructure
/// is present.
StructuredGrid build_full_cell_grid(int refinement);

/// Retags the faces of a macro grid for the given boundary-condition variant.
/// Throws ConfigError on a cell grid.
StructuredGrid classify_boundary(StructuredGrid grid, ProblemVariant variant);

/// Locates the cell containing `x` on a macro grid. A point on an interior
/// edge belongs to the cell above or to the right of it, a point on the outer
/// boundary to the adjacent cell. Returns -1 outside the bounding box.
Index locate_cell(const StructuredGrid& grid, const Vec2& x);

}  // namespace twoscale
