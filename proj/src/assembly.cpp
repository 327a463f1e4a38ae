#include "cemdg/assembly.hpp"

#include <array>
#include <cmath>

namespace cemdg {

namespace {

constexpr double kGauss1 = 0.21132486540518711775;  // (1 - 1/sqrt(3))/2
constexpr double kGauss2 = 0.78867513459481288225;

// mirror an upper-triangle triplet list into a full symmetric matrix;
// keeps A == A^T bit-exact
SparseMat symmetric_from_upper(std::vector<Triplet>& upper, int n) {
  SparseMat u(n, n);
  u.setFromTriplets(upper.begin(), upper.end());
  SparseMat a(n, n);
  a = u.selfadjointView<Eigen::Upper>();
  a.makeCompressed();
  return a;
}

void scatter_symmetric(const Eigen::Matrix4d& local, const std::array<int, 4>& dof,
                       std::vector<Triplet>& upper) {
  for (int a = 0; a < 4; ++a) {
    if (dof[a] < 0) continue;
    for (int b = 0; b < 4; ++b) {
      if (dof[b] < 0 || dof[a] > dof[b]) continue;
      upper.emplace_back(dof[a], dof[b], local(a, b));
    }
  }
}

std::array<int, 4> cell_corner_dofs(const GridModel& g, int block, int cfx, int cfy) {
  return {g.dofs.dof(block, g.local_node(cfx, cfy)),
          g.dofs.dof(block, g.local_node(cfx + 1, cfy)),
          g.dofs.dof(block, g.local_node(cfx + 1, cfy + 1)),
          g.dofs.dof(block, g.local_node(cfx, cfy + 1))};
}

SparseMat assemble_block_diagonal(const GridModel& g,
                                  const std::function<Eigen::Matrix4d(int, int, int)>& local) {
  std::vector<Triplet> upper;
  upper.reserve(static_cast<std::size_t>(g.n_blocks()) * g.nfx() * g.nfy() * 10);
  for (int b = 0; b < g.n_blocks(); ++b) {
    for (int cfy = 0; cfy < g.nfy(); ++cfy) {
      for (int cfx = 0; cfx < g.nfx(); ++cfx) {
        scatter_symmetric(local(b, cfx, cfy), cell_corner_dofs(g, b, cfx, cfy), upper);
      }
    }
  }
  return symmetric_from_upper(upper, g.dofs.total_dofs);
}

}  // namespace

SparseMat assemble_volume(const PermeabilityField& field, const GridModel& grid) {
  return assemble_block_diagonal(grid, [&](int b, int cfx, int cfy) {
    const double k = field.cell(grid.global_fx(b, cfx), grid.global_fy(b, cfy));
    return local_stiffness<double>(grid.hx, grid.hy, k);
  });
}

SparseMat assemble_weighted_mass(const WeightField& ktilde, const GridModel& grid) {
  const int nfxg = grid.n_fine_x();
  return assemble_block_diagonal(grid, [&](int b, int cfx, int cfy) {
    const double w = ktilde.values[grid.global_fy(b, cfy) * nfxg + grid.global_fx(b, cfx)];
    return local_mass<double>(grid.hx, grid.hy, w);
  });
}

SparseMat assemble_unweighted_mass(const GridModel& grid) {
  const Eigen::Matrix4d m = local_mass<double>(grid.hx, grid.hy, 1.0);
  return assemble_block_diagonal(grid, [&](int, int, int) { return m; });
}

Vector assemble_load(const SourceFn& f, const GridModel& grid) {
  Vector F = Vector::Zero(grid.dofs.total_dofs);
  const double wq = grid.hx * grid.hy / 4.0;
  for (int b = 0; b < grid.n_blocks(); ++b) {
    for (int cfy = 0; cfy < grid.nfy(); ++cfy) {
      for (int cfx = 0; cfx < grid.nfx(); ++cfx) {
        const double x0 = grid.node_x(grid.global_fx(b, cfx));
        const double y0 = grid.node_y(grid.global_fy(b, cfy));
        const double xc = x0 + 0.5 * grid.hx, yc = y0 + 0.5 * grid.hy;
        const auto dof = cell_corner_dofs(grid, b, cfx, cfy);
        for (double xi : {kGauss1, kGauss2}) {
          for (double eta : {kGauss1, kGauss2}) {
            double xq = x0 + xi * grid.hx, yq = y0 + eta * grid.hy;
            double fq = f(xq, yq);
            if (!std::isfinite(fq)) {
              // singularity protection: nudge toward the cell center
              xq += 0.1 * (xc - xq);
              yq += 0.1 * (yc - yq);
              fq = f(xq, yq);
              if (!std::isfinite(fq))
                throw InputError("assemble_load: source not finite at quadrature point");
            }
            const double N[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta,
                                 (1 - xi) * eta};
            for (int a = 0; a < 4; ++a)
              if (dof[a] >= 0) F[dof[a]] += wq * fq * N[a];
          }
        }
      }
    }
  }
  return F;
}

namespace {

// one side of a coarse edge: the adjacent fine cell, its corner dofs, the
// grad.n coefficient row and the trace coefficient row over those corners
struct EdgeSide {
  std::array<int, 4> dof;
  double kappa = 0.0;
  // grad v . n = dn_scale * ((c[d1]-c[d0])(1-t) + (c[d2]-c[d3]) t)
  double dn_scale = 0.0;
  int d0 = 0, d1 = 0, d2 = 0, d3 = 0;
  // trace(t) = (1-t) c[t0] + t c[t1]
  int t0 = 0, t1 = 0;

  Eigen::Vector4d grad_n(double t) const {
    Eigen::Vector4d g = Eigen::Vector4d::Zero();
    g[d0] -= (1 - t) * dn_scale;
    g[d1] += (1 - t) * dn_scale;
    g[d3] -= t * dn_scale;
    g[d2] += t * dn_scale;
    return g;
  }
  Eigen::Vector4d trace(double t) const {
    Eigen::Vector4d v = Eigen::Vector4d::Zero();
    v[t0] = 1 - t;
    v[t1] = t;
    return v;
  }
};

// side descriptor for segment seg of a coarse edge; `plus` selects K+ or K-
EdgeSide make_side(const GridModel& g, const PermeabilityField& field, const CoarseEdge& e,
                   int seg, bool plus) {
  EdgeSide s;
  const int block = plus ? e.plus_block : e.minus_block;
  int cfx, cfy;
  if (e.vertical) {
    // interior: K+ is the left block (nx=+1); a left-boundary edge (nx=-1)
    // has its only cell to the right of the line
    const bool left = e.boundary() ? (e.nx > 0) : plus;
    cfx = left ? g.nfx() - 1 : 0;
    cfy = seg;
    s.dn_scale = (e.nx) / g.hx;  // grad v . n = nx * dv/dx
    s.d0 = 0; s.d1 = 1; s.d2 = 2; s.d3 = 3;  // dv/dx over CCW corners
    if (left) { s.t0 = 1; s.t1 = 2; } else { s.t0 = 0; s.t1 = 3; }
  } else {
    const bool lower = e.boundary() ? (e.ny > 0) : plus;
    cfx = seg;
    cfy = lower ? g.nfy() - 1 : 0;
    s.dn_scale = (e.ny) / g.hy;  // grad v . n = ny * dv/dy
    s.d0 = 0; s.d1 = 3; s.d2 = 2; s.d3 = 1;  // dv/dy over CCW corners
    if (lower) { s.t0 = 3; s.t1 = 2; } else { s.t0 = 0; s.t1 = 1; }
  }
  s.dof = cell_corner_dofs(g, block, cfx, cfy);
  s.kappa = field.cell(g.global_fx(block, cfx), g.global_fy(block, cfy));
  return s;
}

double block_max_kappa(const GridModel& g, const PermeabilityField& field, int block) {
  double m = 0.0;
  for (int cfy = 0; cfy < g.nfy(); ++cfy)
    for (int cfx = 0; cfx < g.nfx(); ++cfx)
      m = std::max(m, field.cell(g.global_fx(block, cfx), g.global_fy(block, cfy)));
  return m;
}

void scatter_symmetric8(const Eigen::Matrix<double, 8, 8>& local,
                        const std::array<int, 8>& dof, std::vector<Triplet>& upper) {
  for (int a = 0; a < 8; ++a) {
    if (dof[a] < 0) continue;
    for (int b = 0; b < 8; ++b) {
      if (dof[b] < 0 || dof[a] > dof[b]) continue;
      upper.emplace_back(dof[a], dof[b], local(a, b));
    }
  }
}

}  // namespace

EdgeForms assemble_ipdg_edges(const PermeabilityField& field, const GridModel& grid,
                              double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("assemble_ipdg_edges: gamma must be positive");
  EdgeForms out;
  out.kbar.reserve(grid.topo.edges.size());
  std::vector<Triplet> flux_upper, pen_upper;

  const double pen_scale = gamma / grid.fine_h();
  for (const CoarseEdge& e : grid.topo.edges) {
    const bool interior = !e.boundary();
    const double kp = block_max_kappa(grid, field, e.plus_block);
    const double kbar = interior
        ? 0.5 * (kp + block_max_kappa(grid, field, e.minus_block))
        : kp;
    out.kbar.push_back(kbar);

    const int nseg = e.vertical ? grid.nfy() : grid.nfx();
    const double seg_len = e.vertical ? grid.hy : grid.hx;
    for (int seg = 0; seg < nseg; ++seg) {
      const EdgeSide sp = make_side(grid, field, e, seg, true);
      EdgeSide sm;
      std::array<int, 8> dof{};
      for (int a = 0; a < 4; ++a) dof[a] = sp.dof[a];
      if (interior) {
        sm = make_side(grid, field, e, seg, false);
        for (int a = 0; a < 4; ++a) dof[4 + a] = sm.dof[a];
      } else {
        for (int a = 0; a < 4; ++a) dof[4 + a] = -1;
      }

      Eigen::Matrix<double, 8, 8> lflux = Eigen::Matrix<double, 8, 8>::Zero();
      Eigen::Matrix<double, 8, 8> lpen = Eigen::Matrix<double, 8, 8>::Zero();
      for (double t : {kGauss1, kGauss2}) {
        const double wq = 0.5 * seg_len;
        Eigen::Matrix<double, 8, 1> avg = Eigen::Matrix<double, 8, 1>::Zero();
        Eigen::Matrix<double, 8, 1> jump = Eigen::Matrix<double, 8, 1>::Zero();
        if (interior) {
          avg.head<4>() = 0.5 * sp.kappa * sp.grad_n(t);
          avg.tail<4>() = 0.5 * sm.kappa * sm.grad_n(t);
          jump.head<4>() = sp.trace(t);
          jump.tail<4>() = -sm.trace(t);
        } else {
          avg.head<4>() = sp.kappa * sp.grad_n(t);
          jump.head<4>() = sp.trace(t);
        }
        lflux -= wq * (avg * jump.transpose() + jump * avg.transpose());
        lpen += wq * pen_scale * kbar * (jump * jump.transpose());
      }
      scatter_symmetric8(lflux, dof, flux_upper);
      scatter_symmetric8(lpen, dof, pen_upper);
    }
  }
  out.flux = symmetric_from_upper(flux_upper, grid.dofs.total_dofs);
  out.penalty = symmetric_from_upper(pen_upper, grid.dofs.total_dofs);
  return out;
}

AssembledForms assemble_forms(const PermeabilityField& field, const WeightField& ktilde,
                              const GridModel& grid, double gamma, const SourceFn& f) {
  AssembledForms forms;
  forms.A_vol = assemble_volume(field, grid);
  EdgeForms edges = assemble_ipdg_edges(field, grid, gamma);
  forms.A_flux = std::move(edges.flux);
  forms.A_pen = std::move(edges.penalty);
  forms.kbar = std::move(edges.kbar);
  forms.A = forms.A_vol + forms.A_flux + forms.A_pen;
  forms.A.makeCompressed();
  forms.S = assemble_weighted_mass(ktilde, grid);
  forms.M = assemble_unweighted_mass(grid);
  forms.F = assemble_load(f, grid);
  forms.gamma = gamma;
  forms.penalty_h = grid.fine_h();
  return forms;
}

NormValues norms(const Vector& v, const AssembledForms& forms) {
  NormValues n;
  const double a2 = v.dot(forms.A * v);
  if (a2 < -1e-12 * v.squaredNorm())
    throw SolverError("norms: a_DG(v,v) < 0, bilinear form not coercive (gamma too small)");
  n.a = std::sqrt(std::max(a2, 0.0));
  n.dg = std::sqrt(std::max(v.dot(forms.A_vol * v) + v.dot(forms.A_pen * v), 0.0));
  n.l2 = std::sqrt(std::max(v.dot(forms.M * v), 0.0));
  return n;
}

SparseMat restrict_operator(const SparseMat& op, const std::vector<int>& dofs) {
  if (dofs.empty()) throw ConfigError("restrict_operator: empty region");
  std::vector<int> pos(op.rows(), -1);
  for (int i = 0; i < static_cast<int>(dofs.size()); ++i) pos[dofs[i]] = i;
  std::vector<Triplet> trips;
  for (int j = 0; j < static_cast<int>(dofs.size()); ++j) {
    for (SparseMat::InnerIterator it(op, dofs[j]); it; ++it) {
      const int r = pos[it.row()];
      if (r >= 0) trips.emplace_back(r, j, it.value());
    }
  }
  SparseMat sub(static_cast<int>(dofs.size()), static_cast<int>(dofs.size()));
  sub.setFromTriplets(trips.begin(), trips.end());
  sub.makeCompressed();
  return sub;
}

Vector restrict_vector(const Vector& v, const std::vector<int>& dofs) {
  Vector out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[dofs[i]];
  return out;
}

Vector extend_vector(const Vector& local, const std::vector<int>& dofs, Eigen::Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t i = 0; i < dofs.size(); ++i) out[dofs[i]] = local[static_cast<Eigen::Index>(i)];
  return out;
}

Matrix block_dense(const SparseMat& block_diag_op, const GridModel& grid, int block) {
  const int first = grid.dofs.block_first_dof[block];
  const int count = grid.dofs.block_num_dofs[block];
  Matrix out = Matrix::Zero(count, count);
  for (int j = 0; j < count; ++j) {
    for (SparseMat::InnerIterator it(block_diag_op, first + j); it; ++it) {
      const int r = static_cast<int>(it.row()) - first;
      if (r >= 0 && r < count) out(r, j) = it.value();
    }
  }
  return out;
}

}  // namespace cemdg
