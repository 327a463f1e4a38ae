#include "cemdg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cemdg {

std::vector<int> GridModel::region_dofs(const Region& region) const {
  if (region.elements.empty()) throw ConfigError("region_dofs: empty region");
  std::vector<int> out;
  for (int b : region.elements) {
    const int first = dofs.block_first_dof[b];
    const int count = dofs.block_num_dofs[b];
    for (int d = 0; d < count; ++d) out.push_back(first + d);
  }
  // block-major dof assignment keeps this sorted and duplicate-free
  return out;
}

GridModel build_grid(const GridConfig& config) {
  if (config.coarse_nx < 1 || config.coarse_ny < 1)
    throw ConfigError("build_grid: coarse cell counts must be positive");
  if (config.fine_per_coarse_x < 1 || config.fine_per_coarse_y < 1)
    throw ConfigError("build_grid: fine refinement counts must be positive");
  if (!(config.x1 > config.x0) || !(config.y1 > config.y0))
    throw ConfigError("build_grid: degenerate domain rectangle");

  GridModel g;
  g.config = config;
  const int nx = config.coarse_nx, ny = config.coarse_ny;
  g.topo.nx = nx;
  g.topo.ny = ny;
  g.topo.n_elements = nx * ny;
  g.topo.n_nodes = (nx + 1) * (ny + 1);
  g.Hx = (config.x1 - config.x0) / nx;
  g.Hy = (config.y1 - config.y0) / ny;
  g.hx = g.Hx / config.fine_per_coarse_x;
  g.hy = g.Hy / config.fine_per_coarse_y;

  // coarse edges: vertical grid lines first, then horizontal ones
  for (int line = 0; line <= nx; ++line) {
    for (int cy = 0; cy < ny; ++cy) {
      CoarseEdge e;
      e.vertical = true;
      e.line = line;
      e.along = cy;
      if (line == 0) {
        e.plus_block = g.block_id(0, cy);
        e.nx = -1.0;
      } else if (line == nx) {
        e.plus_block = g.block_id(nx - 1, cy);
        e.nx = 1.0;
      } else {
        e.plus_block = g.block_id(line - 1, cy);
        e.minus_block = g.block_id(line, cy);
        e.nx = 1.0;
      }
      g.topo.edges.push_back(e);
    }
  }
  for (int line = 0; line <= ny; ++line) {
    for (int cx = 0; cx < nx; ++cx) {
      CoarseEdge e;
      e.vertical = false;
      e.line = line;
      e.along = cx;
      if (line == 0) {
        e.plus_block = g.block_id(cx, 0);
        e.ny = -1.0;
      } else if (line == ny) {
        e.plus_block = g.block_id(cx, ny - 1);
        e.ny = 1.0;
      } else {
        e.plus_block = g.block_id(cx, line - 1);
        e.minus_block = g.block_id(cx, line);
        e.ny = 1.0;
      }
      g.topo.edges.push_back(e);
    }
  }

  // node neighborhoods omega_i
  g.topo.node_cells.resize(g.topo.n_nodes);
  for (int gy = 0; gy <= ny; ++gy) {
    for (int gx = 0; gx <= nx; ++gx) {
      auto& cells = g.topo.node_cells[g.coarse_node_id(gx, gy)];
      for (int cy = gy - 1; cy <= gy; ++cy)
        for (int cx = gx - 1; cx <= gx; ++cx)
          if (cx >= 0 && cx < nx && cy >= 0 && cy < ny)
            cells.push_back(g.block_id(cx, cy));
      std::sort(cells.begin(), cells.end());
    }
  }

  // dof map, block-major, Dirichlet nodes eliminated
  const int nfx = config.fine_per_coarse_x, nfy = config.fine_per_coarse_y;
  g.dofs.nodes_per_block = (nfx + 1) * (nfy + 1);
  g.dofs.local_to_global.assign(
      static_cast<std::size_t>(g.topo.n_elements) * g.dofs.nodes_per_block, -1);
  g.dofs.block_first_dof.resize(g.topo.n_elements);
  g.dofs.block_num_dofs.resize(g.topo.n_elements);
  int next = 0;
  for (int b = 0; b < g.topo.n_elements; ++b) {
    g.dofs.block_first_dof[b] = next;
    for (int fy = 0; fy <= nfy; ++fy) {
      for (int fx = 0; fx <= nfx; ++fx) {
        if (g.node_on_boundary(g.global_fx(b, fx), g.global_fy(b, fy))) continue;
        g.dofs.local_to_global[static_cast<std::size_t>(b) * g.dofs.nodes_per_block +
                               g.local_node(fx, fy)] = next++;
      }
    }
    g.dofs.block_num_dofs[b] = next - g.dofs.block_first_dof[b];
  }
  g.dofs.total_dofs = next;
  return g;
}

namespace {

// one vertex-adjacency dilation on the structured coarse grid, clipped
std::vector<int> dilate(const GridModel& g, const std::vector<int>& cells) {
  std::set<int> out;
  for (int c : cells) {
    const int cx = g.block_cx(c), cy = g.block_cy(c);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int px = cx + dx, py = cy + dy;
        if (px >= 0 && px < g.topo.nx && py >= 0 && py < g.topo.ny)
          out.insert(g.block_id(px, py));
      }
  }
  return {out.begin(), out.end()};
}

Region grow(const GridModel& g, std::vector<int> seed, int m, RegionKind kind, int center) {
  for (int step = 0; step < m; ++step) seed = dilate(g, seed);
  Region r;
  r.elements = std::move(seed);
  r.kind = kind;
  r.center = center;
  r.layers = m;
  return r;
}

}  // namespace

Region oversample_block(const GridModel& grid, int i, int m) {
  if (i < 0 || i >= grid.topo.n_elements)
    throw ConfigError("oversample_block: element index out of range");
  if (m < 0) throw ConfigError("oversample_block: negative layer count");
  return grow(grid, {i}, m, RegionKind::block, i);
}

Region oversample_neighborhood(const GridModel& grid, int i, int m) {
  if (i < 0 || i >= grid.topo.n_nodes)
    throw ConfigError("oversample_neighborhood: node index out of range");
  if (m < 0) throw ConfigError("oversample_neighborhood: negative layer count");
  return grow(grid, grid.topo.node_cells[i], m, RegionKind::neighborhood, i);
}

}  // namespace cemdg
