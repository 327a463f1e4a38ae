// Test-only reference implementations, kept independent of the library's
// assembly and solver paths: direct quadrature from the definitions,
// brute-force set enumeration, manual eigensolver reduction.
#ifndef CEMDG_TEST_ORACLES_HPP
#define CEMDG_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "cemdg/assembly.hpp"
#include "cemdg/grid.hpp"
#include "cemdg/medium.hpp"
#include "cemdg/types.hpp"

namespace oracle {

using cemdg::GridModel;
using cemdg::Matrix;
using cemdg::PermeabilityField;
using cemdg::SparseMat;
using cemdg::Vector;

// 5-point Gauss-Legendre on [0,1]
inline const double kGx[5] = {0.046910077030668004, 0.230765344947158454, 0.5,
                              0.769234655052841546, 0.953089922969331996};
inline const double kGw[5] = {0.118463442528094544, 0.239314335249683234, 0.284444444444444444,
                              0.239314335249683234, 0.118463442528094544};

inline double shape(int corner, double xi, double eta) {
  switch (corner) {  // counterclockwise from bottom-left
    case 0: return (1 - xi) * (1 - eta);
    case 1: return xi * (1 - eta);
    case 2: return xi * eta;
    default: return (1 - xi) * eta;
  }
}

inline void shape_grad(int corner, double xi, double eta, double hx, double hy, double& gx,
                       double& gy) {
  switch (corner) {
    case 0: gx = -(1 - eta) / hx; gy = -(1 - xi) / hy; return;
    case 1: gx = (1 - eta) / hx;  gy = -xi / hy;       return;
    case 2: gx = eta / hx;        gy = xi / hy;        return;
    default: gx = -eta / hx;      gy = (1 - xi) / hy;  return;
  }
}

inline Matrix local_stiffness(double hx, double hy, double kappa) {
  Matrix K = Matrix::Zero(4, 4);
  for (int qi = 0; qi < 5; ++qi)
    for (int qj = 0; qj < 5; ++qj) {
      const double w = kGw[qi] * kGw[qj] * hx * hy * kappa;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          double ax, ay, bx, by;
          shape_grad(a, kGx[qi], kGx[qj], hx, hy, ax, ay);
          shape_grad(b, kGx[qi], kGx[qj], hx, hy, bx, by);
          K(a, b) += w * (ax * bx + ay * by);
        }
    }
  return K;
}

inline Matrix local_mass(double hx, double hy, double weight) {
  Matrix M = Matrix::Zero(4, 4);
  for (int qi = 0; qi < 5; ++qi)
    for (int qj = 0; qj < 5; ++qj) {
      const double w = kGw[qi] * kGw[qj] * hx * hy * weight;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          M(a, b) += w * shape(a, kGx[qi], kGx[qj]) * shape(b, kGx[qi], kGx[qj]);
    }
  return M;
}

// brute-force oversampling: dilate by explicit cell-vertex set intersection
inline std::set<int> dilate_by_vertices(const GridModel& g, const std::set<int>& cells) {
  auto vertices = [&](int cell) {
    const int cx = g.block_cx(cell), cy = g.block_cy(cell);
    return std::set<int>{g.coarse_node_id(cx, cy), g.coarse_node_id(cx + 1, cy),
                         g.coarse_node_id(cx, cy + 1), g.coarse_node_id(cx + 1, cy + 1)};
  };
  std::set<int> region_verts;
  for (int c : cells) {
    const auto v = vertices(c);
    region_verts.insert(v.begin(), v.end());
  }
  std::set<int> out;
  for (int c = 0; c < g.n_blocks(); ++c) {
    const auto v = vertices(c);
    if (std::any_of(v.begin(), v.end(),
                    [&](int n) { return region_verts.count(n) > 0; }))
      out.insert(c);
  }
  return out;
}

inline std::set<int> region_block(const GridModel& g, int i, int m) {
  std::set<int> cells = {i};
  for (int s = 0; s < m; ++s) cells = dilate_by_vertices(g, cells);
  return cells;
}

inline std::set<int> region_neighborhood(const GridModel& g, int node, int m) {
  std::set<int> cells(g.topo.node_cells[node].begin(), g.topo.node_cells[node].end());
  for (int s = 0; s < m; ++s) cells = dilate_by_vertices(g, cells);
  return cells;
}

// dense generalized eigensolve via explicit Cholesky reduction of B
struct EigResult {
  Vector values;
  Matrix vectors;  // B-orthonormal
};

inline EigResult generalized_eig(const Matrix& A, const Matrix& B) {
  const Eigen::LLT<Matrix> llt(B);
  const Matrix L = llt.matrixL();
  const Matrix Linv = L.inverse();
  const Matrix C = Linv * A * Linv.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (C + C.transpose()));
  EigResult r;
  r.values = es.eigenvalues();
  r.vectors = Linv.transpose() * es.eigenvectors();
  return r;
}

inline Vector dense_solve(const Matrix& A, const Vector& b) {
  return Eigen::FullPivLU<Matrix>(A).solve(b);
}

// conforming bilinear FEM stiffness on the global fine grid, Dirichlet
// nodes eliminated; plus maps between conforming and DG coefficients
struct ConformingFEM {
  std::vector<int> node_dof;  // (nxf+1)*(nyf+1), -1 on the boundary
  int n_dofs = 0;
  Matrix K;

  ConformingFEM(const PermeabilityField& field, const GridModel& g) {
    const int nxn = g.n_fine_x() + 1, nyn = g.n_fine_y() + 1;
    node_dof.assign(nxn * nyn, -1);
    for (int gy = 0; gy < nyn; ++gy)
      for (int gx = 0; gx < nxn; ++gx)
        if (!g.node_on_boundary(gx, gy)) node_dof[gy * nxn + gx] = n_dofs++;
    K = Matrix::Zero(n_dofs, n_dofs);
    for (int gy = 0; gy < g.n_fine_y(); ++gy)
      for (int gx = 0; gx < g.n_fine_x(); ++gx) {
        const Matrix ke = local_stiffness(g.hx, g.hy, field.cell(gx, gy));
        const int corner[4] = {gy * nxn + gx, gy * nxn + gx + 1, (gy + 1) * nxn + gx + 1,
                               (gy + 1) * nxn + gx};
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const int da = node_dof[corner[a]], db = node_dof[corner[b]];
            if (da >= 0 && db >= 0) K(da, db) += ke(a, b);
          }
      }
  }

  // spread conforming coefficients to the duplicated DG dofs
  Vector to_dg(const Vector& vc, const GridModel& g) const {
    Vector out = Vector::Zero(g.dofs.total_dofs);
    const int nxn = g.n_fine_x() + 1;
    for (int b = 0; b < g.n_blocks(); ++b)
      for (int fy = 0; fy <= g.nfy(); ++fy)
        for (int fx = 0; fx <= g.nfx(); ++fx) {
          const int d = g.dofs.dof(b, g.local_node(fx, fy));
          if (d < 0) continue;
          const int cd = node_dof[g.global_fy(b, fy) * nxn + g.global_fx(b, fx)];
          out[d] = cd >= 0 ? vc[cd] : 0.0;
        }
    return out;
  }
};

// DG norm straight from its definition: elementwise quadrature of the
// weighted gradient plus the penalized jump integral per coarse edge
inline double dg_norm_sq(const Vector& v, const PermeabilityField& field, const GridModel& g,
                         double gamma) {
  double vol = 0.0;
  for (int b = 0; b < g.n_blocks(); ++b)
    for (int cfy = 0; cfy < g.nfy(); ++cfy)
      for (int cfx = 0; cfx < g.nfx(); ++cfx) {
        double c[4];
        const int lf[4][2] = {{cfx, cfy}, {cfx + 1, cfy}, {cfx + 1, cfy + 1}, {cfx, cfy + 1}};
        for (int a = 0; a < 4; ++a) {
          const int d = g.dofs.dof(b, g.local_node(lf[a][0], lf[a][1]));
          c[a] = d >= 0 ? v[d] : 0.0;
        }
        const double kappa = field.cell(g.global_fx(b, cfx), g.global_fy(b, cfy));
        for (int qi = 0; qi < 5; ++qi)
          for (int qj = 0; qj < 5; ++qj) {
            double gx = 0.0, gy = 0.0;
            for (int a = 0; a < 4; ++a) {
              double ax, ay;
              shape_grad(a, kGx[qi], kGx[qj], g.hx, g.hy, ax, ay);
              gx += c[a] * ax;
              gy += c[a] * ay;
            }
            vol += kGw[qi] * kGw[qj] * g.hx * g.hy * kappa * (gx * gx + gy * gy);
          }
      }

  auto block_max = [&](int blk) {
    double m = 0.0;
    for (int cfy = 0; cfy < g.nfy(); ++cfy)
      for (int cfx = 0; cfx < g.nfx(); ++cfx)
        m = std::max(m, field.cell(g.global_fx(blk, cfx), g.global_fy(blk, cfy)));
    return m;
  };

  // trace of v along a coarse edge from one side, sampled at parameter t of
  // fine segment `seg`
  auto side_trace = [&](const cemdg::CoarseEdge& e, bool plus, int seg, double t) {
    const int blk = plus ? e.plus_block : e.minus_block;
    int n0, n1;
    if (e.vertical) {
      const bool left = e.boundary() ? (e.nx > 0) : plus;
      const int fx = left ? g.nfx() : 0;
      n0 = g.local_node(fx, seg);
      n1 = g.local_node(fx, seg + 1);
    } else {
      const bool lower = e.boundary() ? (e.ny > 0) : plus;
      const int fy = lower ? g.nfy() : 0;
      n0 = g.local_node(seg, fy);
      n1 = g.local_node(seg + 1, fy);
    }
    const int d0 = g.dofs.dof(blk, n0), d1 = g.dofs.dof(blk, n1);
    return (1 - t) * (d0 >= 0 ? v[d0] : 0.0) + t * (d1 >= 0 ? v[d1] : 0.0);
  };

  double pen = 0.0;
  const double h = g.fine_h();
  for (const auto& e : g.topo.edges) {
    const double kbar = e.boundary() ? block_max(e.plus_block)
                                     : 0.5 * (block_max(e.plus_block) + block_max(e.minus_block));
    const int nseg = e.vertical ? g.nfy() : g.nfx();
    const double len = e.vertical ? g.hy : g.hx;
    for (int seg = 0; seg < nseg; ++seg)
      for (int q = 0; q < 5; ++q) {
        const double jump = e.boundary()
                                ? side_trace(e, true, seg, kGx[q])
                                : side_trace(e, true, seg, kGx[q]) -
                                      side_trace(e, false, seg, kGx[q]);
        pen += kGw[q] * len * (gamma / h) * kbar * jump * jump;
      }
  }
  return vol + pen;
}

inline PermeabilityField constant_field(const GridModel& g, double value = 1.0) {
  PermeabilityField f;
  f.nx = g.n_fine_x();
  f.ny = g.n_fine_y();
  f.values = Vector::Constant(static_cast<Eigen::Index>(f.nx) * f.ny, value);
  f.source = "test:constant";
  return f;
}

inline Vector random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace oracle

#endif
