#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "cemdg/grid.hpp"
#include "oracles.hpp"

using namespace cemdg;

namespace {

GridModel paper_grid() {
  GridConfig c;
  c.coarse_nx = c.coarse_ny = 16;
  c.fine_per_coarse_x = c.fine_per_coarse_y = 16;
  return build_grid(c);
}

GridModel small_grid(int coarse, int fine) {
  GridConfig c;
  c.coarse_nx = c.coarse_ny = coarse;
  c.fine_per_coarse_x = c.fine_per_coarse_y = fine;
  return build_grid(c);
}

}  // namespace

TEST_CASE("paper-scale grid counts and mesh sizes") {
  const GridModel g = paper_grid();
  CHECK(g.n_blocks() == 256);
  CHECK(g.n_coarse_nodes() == 289);
  CHECK(g.fine_h() == doctest::Approx(std::sqrt(2.0) / 256).epsilon(1e-15));
  CHECK(g.coarse_h() == doctest::Approx(std::sqrt(2.0) / 16).epsilon(1e-15));

  // independent enumeration: per-block fine nodes not on the domain boundary
  int dofs = 0;
  for (int b = 0; b < g.n_blocks(); ++b)
    for (int fy = 0; fy <= g.nfy(); ++fy)
      for (int fx = 0; fx <= g.nfx(); ++fx)
        if (!g.node_on_boundary(g.global_fx(b, fx), g.global_fy(b, fy))) ++dofs;
  CHECK(dofs == 72900);
  CHECK(g.dofs.total_dofs == 72900);
}

TEST_CASE("fully constrained single-cell grid") {
  const GridModel g = small_grid(1, 1);
  CHECK(g.n_blocks() == 1);
  CHECK(g.n_coarse_nodes() == 4);
  CHECK(g.dofs.total_dofs == 0);
}

TEST_CASE("invalid configurations are rejected") {
  GridConfig c;
  c.coarse_nx = 0;
  CHECK_THROWS_AS(build_grid(c), ConfigError);
  c.coarse_nx = 4;
  c.fine_per_coarse_y = -2;
  CHECK_THROWS_AS(build_grid(c), ConfigError);
}

TEST_CASE("block oversampling matches brute-force vertex adjacency") {
  const GridModel g = paper_grid();
  const int interior = g.block_id(7, 8);
  const int corner = g.block_id(0, 0);

  CHECK(oversample_block(g, interior, 0).elements == std::vector<int>{interior});

  const Region r1 = oversample_block(g, interior, 1);
  CHECK(r1.elements.size() == 9);
  const auto expected = oracle::region_block(g, interior, 1);
  CHECK(std::vector<int>(expected.begin(), expected.end()) == r1.elements);

  const Region rc = oversample_block(g, corner, 1);
  CHECK(rc.elements.size() == 4);
  const auto expected_c = oracle::region_block(g, corner, 1);
  CHECK(std::vector<int>(expected_c.begin(), expected_c.end()) == rc.elements);

  CHECK_THROWS_AS(oversample_block(g, -1, 1), ConfigError);
  CHECK_THROWS_AS(oversample_block(g, g.n_blocks(), 1), ConfigError);
}

TEST_CASE("neighborhood oversampling matches brute-force vertex adjacency") {
  const GridModel g = paper_grid();
  const int interior = g.coarse_node_id(8, 8);
  CHECK(oversample_neighborhood(g, interior, 0).elements.size() == 4);
  CHECK(oversample_neighborhood(g, interior, 1).elements.size() == 16);

  const int edge_node = g.coarse_node_id(5, 0);
  CHECK(oversample_neighborhood(g, edge_node, 0).elements.size() == 2);

  for (int node : {interior, edge_node, g.coarse_node_id(0, 0)}) {
    for (int m = 0; m <= 2; ++m) {
      const auto expected = oracle::region_neighborhood(g, node, m);
      CHECK(std::vector<int>(expected.begin(), expected.end()) ==
            oversample_neighborhood(g, node, m).elements);
    }
  }
  CHECK_THROWS_AS(oversample_neighborhood(g, g.n_coarse_nodes(), 0), ConfigError);
}

TEST_CASE("region monotonicity in the layer count") {
  const GridModel g = small_grid(5, 2);
  for (int i = 0; i < g.n_blocks(); ++i) {
    for (int m = 0; m < 6; ++m) {
      const auto a = oversample_block(g, i, m).elements;
      const auto b = oversample_block(g, i, m + 1).elements;
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
      if (static_cast<int>(a.size()) < g.n_blocks()) CHECK(b.size() > a.size());
    }
  }
  for (int i = 0; i < g.n_coarse_nodes(); ++i) {
    for (int m = 0; m < 6; ++m) {
      const auto a = oversample_neighborhood(g, i, m).elements;
      const auto b = oversample_neighborhood(g, i, m + 1).elements;
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
}

TEST_CASE("interior-edge fine nodes carry exactly two dofs") {
  const GridModel g = small_grid(4, 4);
  for (const auto& e : g.topo.edges) {
    if (e.boundary()) continue;
    int count = 0, expected = 0;
    const int nseg = e.vertical ? g.nfy() : g.nfx();
    for (int s = 0; s <= nseg; ++s) {
      int pl, ml;
      if (e.vertical) {
        pl = g.local_node(g.nfx(), s);
        ml = g.local_node(0, s);
      } else {
        pl = g.local_node(s, g.nfy());
        ml = g.local_node(s, 0);
      }
      const int dp = g.dofs.dof(e.plus_block, pl);
      const int dm = g.dofs.dof(e.minus_block, ml);
      CHECK((dp >= 0) == (dm >= 0));  // both copies live or both eliminated
      if (dp >= 0) count += 2;
      const int gfx = e.vertical ? g.global_fx(e.plus_block, g.nfx())
                                 : g.global_fx(e.plus_block, s);
      const int gfy = e.vertical ? g.global_fy(e.plus_block, s)
                                 : g.global_fy(e.plus_block, g.nfy());
      if (!g.node_on_boundary(gfx, gfy)) expected += 2;
    }
    CHECK(count == expected);
  }
}

TEST_CASE("edge normals recompute from adjacency") {
  const GridModel g = small_grid(3, 2);
  for (const auto& e : g.topo.edges) {
    CHECK(std::abs(e.nx * e.nx + e.ny * e.ny - 1.0) == 0.0);
    if (!e.boundary()) {
      // normal points from K+ toward K-
      const double dx = g.block_cx(e.minus_block) - g.block_cx(e.plus_block);
      const double dy = g.block_cy(e.minus_block) - g.block_cy(e.plus_block);
      CHECK(e.nx == (dx > 0 ? 1.0 : 0.0));
      CHECK(e.ny == (dy > 0 ? 1.0 : 0.0));
    } else {
      // outward on the boundary
      const int cx = g.block_cx(e.plus_block), cy = g.block_cy(e.plus_block);
      if (e.vertical) CHECK(e.nx == (cx == 0 ? -1.0 : 1.0));
      else CHECK(e.ny == (cy == 0 ? -1.0 : 1.0));
    }
  }
}

TEST_CASE("region dof extraction is sorted, unique, and complete") {
  const GridModel g = small_grid(4, 3);
  const Region r = oversample_block(g, g.block_id(1, 2), 1);
  const auto dofs = g.region_dofs(r);
  CHECK(std::is_sorted(dofs.begin(), dofs.end()));
  CHECK(std::adjacent_find(dofs.begin(), dofs.end()) == dofs.end());

  Region omega;
  for (int b = 0; b < g.n_blocks(); ++b) omega.elements.push_back(b);
  const auto all = g.region_dofs(omega);
  CHECK(static_cast<int>(all.size()) == g.dofs.total_dofs);
  CHECK(all.front() == 0);
  CHECK(all.back() == g.dofs.total_dofs - 1);

  Region empty;
  CHECK_THROWS_AS(g.region_dofs(empty), ConfigError);
}
