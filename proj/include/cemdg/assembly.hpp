#ifndef CEMDG_ASSEMBLY_HPP
#define CEMDG_ASSEMBLY_HPP

#include <functional>
#include <vector>

#include "cemdg/grid.hpp"
#include "cemdg/medium.hpp"
#include "cemdg/types.hpp"

namespace cemdg {

using SourceFn = std::function<double(double, double)>;

/// Element stiffness of the bilinear quad (kappa constant on the cell),
/// corners ordered counterclockwise from the bottom-left:
/// (0,0), (1,0), (1,1), (0,1). 2x2 Gauss, exact for this integrand.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> local_stiffness(Scalar hx, Scalar hy, Scalar kappa) {
  Eigen::Matrix<Scalar, 4, 4> K = Eigen::Matrix<Scalar, 4, 4>::Zero();
  const Scalar g0 = Scalar(0.5) * (Scalar(1) - Scalar(1) / std::sqrt(Scalar(3)));
  const Scalar g1 = Scalar(1) - g0;
  const Scalar w = kappa * hx * hy / Scalar(4);
  for (Scalar xi : {g0, g1}) {
    for (Scalar eta : {g0, g1}) {
      Eigen::Matrix<Scalar, 4, 2> grad;
      grad << -(1 - eta) / hx, -(1 - xi) / hy,
               (1 - eta) / hx, -xi / hy,
               eta / hx,        xi / hy,
              -eta / hx,        (1 - xi) / hy;
      K += w * grad * grad.transpose();
    }
  }
  return K;
}

/// Element mass with a constant weight, same corner order. 2x2 Gauss,
/// exact for bilinear x bilinear.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> local_mass(Scalar hx, Scalar hy, Scalar weight) {
  Eigen::Matrix<Scalar, 4, 4> M = Eigen::Matrix<Scalar, 4, 4>::Zero();
  const Scalar g0 = Scalar(0.5) * (Scalar(1) - Scalar(1) / std::sqrt(Scalar(3)));
  const Scalar g1 = Scalar(1) - g0;
  const Scalar w = weight * hx * hy / Scalar(4);
  for (Scalar xi : {g0, g1}) {
    for (Scalar eta : {g0, g1}) {
      Eigen::Matrix<Scalar, 4, 1> N;
      N << (1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta;
      M += w * N * N.transpose();
    }
  }
  return M;
}

struct EdgeForms {
  SparseMat flux;          // consistency + symmetry terms
  SparseMat penalty;       // (gamma/h) kbar jump-jump term
  std::vector<double> kbar;  // per coarse edge, in topology order
};

/// Volume stiffness sum_K int_K kappa grad v . grad w; block diagonal.
SparseMat assemble_volume(const PermeabilityField& field, const GridModel& grid);

/// Edge terms of the IPDG form: flux averages and jump penalty on every
/// coarse edge, fine-edge 2-point Gauss. Boundary edges use the one-sided
/// convention {G} = G, [[G]] = G (their contributions vanish after the
/// Dirichlet elimination but the code path is the same).
EdgeForms assemble_ipdg_edges(const PermeabilityField& field, const GridModel& grid,
                              double gamma);

/// Load vector int f v, 2x2 Gauss per fine cell. A non-finite value at a
/// Gauss point is re-evaluated one tenth of the way toward the cell center;
/// if still non-finite the assembly fails.
Vector assemble_load(const SourceFn& f, const GridModel& grid);

/// Weighted mass sum_i int_{K_i} kappa_tilde v w; block diagonal, SPD.
SparseMat assemble_weighted_mass(const WeightField& ktilde, const GridModel& grid);

/// Unweighted mass (weight 1), used for L2 norms.
SparseMat assemble_unweighted_mass(const GridModel& grid);

struct AssembledForms {
  SparseMat A;      // full IPDG operator (vol + flux + penalty)
  SparseMat A_vol;
  SparseMat A_flux;
  SparseMat A_pen;
  SparseMat S;      // kappa_tilde-weighted mass
  SparseMat M;      // unweighted mass
  Vector F;
  double gamma = 0.0;
  double penalty_h = 0.0;    // fine diameter in the gamma/h scaling
  std::vector<double> kbar;  // per coarse edge
};

AssembledForms assemble_forms(const PermeabilityField& field, const WeightField& ktilde,
                              const GridModel& grid, double gamma, const SourceFn& f);

struct NormValues {
  double a = 0.0;   // sqrt(v' A v)
  double dg = 0.0;  // volume stiffness + penalty only
  double l2 = 0.0;  // unweighted mass
};

NormValues norms(const Vector& v, const AssembledForms& forms);

/// Extension-by-zero restriction: rows/columns of the operator at the given
/// sorted dof list. For v supported in the region, v'Av is preserved exactly.
SparseMat restrict_operator(const SparseMat& op, const std::vector<int>& dofs);
Vector restrict_vector(const Vector& v, const std::vector<int>& dofs);
Vector extend_vector(const Vector& local, const std::vector<int>& dofs, Eigen::Index n);

/// Dense copy of a block-diagonal operator's block (a_i from A_vol, s_i from S).
Matrix block_dense(const SparseMat& block_diag_op, const GridModel& grid, int block);

}  // namespace cemdg

#endif
