#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <utility>

#include "twoscale/diffusion_cell.hpp"
#include "twoscale/elastic_cell.hpp"
#include "twoscale/mesh.hpp"

namespace twoscale::testing {

/// Node lookup by coordinates on a grid whose vertices sit on a lattice of
/// spacing `step`.
class NodeLocator {
 public:
  NodeLocator(const StructuredGrid& grid, double step) : step_(step) {
    for (Index n = 0; n < grid.num_vertices(); ++n) nodes_.emplace(key(grid.vertices[n]), n);
  }
  Index operator()(const Vec2& x) const {
    const auto it = nodes_.find(key(x));
    return it == nodes_.end() ? -1 : it->second;
  }

 private:
  std::pair<long, long> key(const Vec2& x) const {
    return {std::lround(x.x() / step_), std::lround(x.y() / step_)};
  }
  double step_;
  std::multimap<std::pair<long, long>, Index> nodes_;
};

inline std::shared_ptr<const CellInfrastructure> cross_infrastructure(int r, const Mat2& D_hat = 0.5 * Mat2::Identity()) {
  StructuredGrid grid = build_cell_grid(r);
  const ElasticCellSolution chi = solve_elastic_cells(grid, isotropic_tensor(1.0, 1.0));
  return std::make_shared<const CellInfrastructure>(std::move(grid), chi, D_hat, kDefaultJMin);
}

}  // namespace twoscale::testing
