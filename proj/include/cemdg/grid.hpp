#ifndef CEMDG_GRID_HPP
#define CEMDG_GRID_HPP

#include <array>
#include <vector>

#include "cemdg/types.hpp"

namespace cemdg {

/// Structured coarse/fine grid hierarchy on an axis-aligned rectangle.
/// The coarse grid carries the DG block structure; every coarse cell is
/// refined into the same fine tensor grid. All indices are row-major
/// starting from the bottom-left corner.
struct GridConfig {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  int coarse_nx = 16, coarse_ny = 16;
  int fine_per_coarse_x = 16, fine_per_coarse_y = 16;
};

struct CoarseEdge {
  int plus_block = -1;   // K+ (always present)
  int minus_block = -1;  // K- ; -1 on a boundary edge
  bool vertical = false; // edge lies on a vertical grid line
  double nx = 0.0, ny = 0.0; // unit normal, points from K+ to K- (outward on the boundary)
  int line = 0;   // index of the coarse grid line the edge lies on
  int along = 0;  // coarse cell index along the edge direction
  bool boundary() const { return minus_block < 0; }
};

enum class RegionKind { block, neighborhood };

/// A union of coarse elements obtained by dilating a block K_i or a node
/// neighborhood omega_i. Element ids are sorted ascending.
struct Region {
  std::vector<int> elements;
  RegionKind kind = RegionKind::block;
  int center = 0;
  int layers = 0;
};

struct CoarseTopology {
  int nx = 0, ny = 0;          // coarse cells per direction
  int n_elements = 0;          // N
  int n_nodes = 0;             // N_c
  std::vector<CoarseEdge> edges;
  std::vector<std::vector<int>> node_cells; // omega_i per coarse node, sorted
};

/// Per-block map from local fine nodes to global DG degrees of freedom.
/// Fine nodes on interior coarse edges are duplicated (one dof per adjacent
/// block); fine nodes on the domain boundary carry no dof (value -1).
struct DofMap {
  int nodes_per_block = 0;           // (nfx+1)*(nfy+1)
  std::vector<int> local_to_global;  // N * nodes_per_block entries
  std::vector<int> block_first_dof;  // dof range per block (contiguous)
  std::vector<int> block_num_dofs;
  int total_dofs = 0;

  int dof(int block, int local_node) const {
    return local_to_global[static_cast<std::size_t>(block) * nodes_per_block + local_node];
  }
};

struct GridModel {
  GridConfig config;
  CoarseTopology topo;
  DofMap dofs;

  double hx = 0.0, hy = 0.0;   // fine cell sides
  double Hx = 0.0, Hy = 0.0;   // coarse cell sides

  double coarse_h() const { return std::sqrt(Hx * Hx + Hy * Hy); }
  double fine_h() const { return std::sqrt(hx * hx + hy * hy); }

  int nfx() const { return config.fine_per_coarse_x; }
  int nfy() const { return config.fine_per_coarse_y; }
  int n_blocks() const { return topo.n_elements; }
  int n_coarse_nodes() const { return topo.n_nodes; }

  int block_id(int cx, int cy) const { return cy * topo.nx + cx; }
  int block_cx(int i) const { return i % topo.nx; }
  int block_cy(int i) const { return i / topo.nx; }
  int coarse_node_id(int gx, int gy) const { return gy * (topo.nx + 1) + gx; }

  int local_node(int fx, int fy) const { return fy * (nfx() + 1) + fx; }

  // global fine-node integer coordinates of a block-local node
  int global_fx(int block, int fx) const { return block_cx(block) * nfx() + fx; }
  int global_fy(int block, int fy) const { return block_cy(block) * nfy() + fy; }

  double node_x(int gfx) const { return config.x0 + gfx * hx; }
  double node_y(int gfy) const { return config.y0 + gfy * hy; }
  Vector2 coarse_node_xy(int node) const {
    const int gx = node % (topo.nx + 1), gy = node / (topo.nx + 1);
    return {config.x0 + gx * Hx, config.y0 + gy * Hy};
  }

  bool node_on_boundary(int gfx, int gfy) const {
    return gfx == 0 || gfx == topo.nx * nfx() || gfy == 0 || gfy == topo.ny * nfy();
  }

  // fine cells, global row-major indexing
  int n_fine_x() const { return topo.nx * nfx(); }
  int n_fine_y() const { return topo.ny * nfy(); }
  int fine_cell_id(int gx, int gy) const { return gy * n_fine_x() + gx; }

  /// Sorted global dofs of all blocks in a region (block-major order is
  /// ascending by construction). Throws on an empty region.
  std::vector<int> region_dofs(const Region& region) const;
};

GridModel build_grid(const GridConfig& config);

/// K_{i,m}: m vertex-adjacency dilations of coarse block i, clipped at the
/// domain boundary. m = 0 gives {K_i}.
Region oversample_block(const GridModel& grid, int i, int m);

/// omega_{i,m}: m dilations of the neighborhood omega_i of coarse node i.
Region oversample_neighborhood(const GridModel& grid, int i, int m);

}  // namespace cemdg

#endif
