#ifndef CEMDG_OFFLINE_HPP
#define CEMDG_OFFLINE_HPP

#include <string>
#include <vector>

#include "cemdg/assembly.hpp"
#include "cemdg/grid.hpp"
#include "cemdg/numkernel.hpp"
#include "cemdg/types.hpp"

namespace cemdg {

/// Per-block spectral space of the a_i vs s_i generalized eigenproblem.
/// The first L_i eigenfunctions per block (s_i-orthonormal, ascending
/// eigenvalues) span the auxiliary space. L_i is the requested count capped
/// at the block dimension; Lambda = min_i lambda_{L_i+1} over blocks where
/// that mode exists (+inf if none does).
struct AuxiliarySpace {
  int requested_modes = 0;
  std::vector<int> modes;               // L_i per block
  std::vector<Vector> eigenvalues;      // per block: L_i values (+1 more when available)
  double Lambda = 0.0;
  double lambda_max = 0.0;
  std::vector<int> mode_offset;         // prefix sums of modes, plus total at the end
  SparseMat Phi;  // total_dofs x total_modes, block-diagonal eigenvector columns
  SparseMat W;    // total_dofs x total_modes, columns S_i phi_j

  int total_modes() const { return mode_offset.back(); }
};

AuxiliarySpace build_auxiliary_space(const AssembledForms& forms, const GridModel& grid,
                                     int modes_per_block, int threads = 1);

/// Coefficients s_i(v, phi_j) of the block-wise s-projection, one per (i, j).
Vector pi_coefficients(const AuxiliarySpace& aux, const Vector& v);
/// pi(v) as a fine-dof vector.
Vector apply_pi(const AuxiliarySpace& aux, const Vector& v);

struct MultiscaleBasis {
  enum class Origin { offline, online, global };
  Origin origin = Origin::offline;
  int home = 0;        // block id (offline/global) or coarse node id (online)
  int mode = -1;       // auxiliary mode index for offline/global
  int iteration = -1;  // enrichment level for online bases
  Region support;
  std::vector<int> dofs;  // sorted global dofs of the support
  Vector values;

  Vector dense(Eigen::Index total_dofs) const;
};

struct MultiscaleSpace {
  std::vector<MultiscaleBasis> basis;
  std::vector<std::string> provenance;

  SparseMat prolongation(Eigen::Index total_dofs) const;
  int size() const { return static_cast<int>(basis.size()); }
};

/// Localized constraint-energy-minimizing basis for (block, mode) on the
/// m-times oversampled region: solve
///   a_DG(psi, v) + s(pi(psi), pi(v)) = s_i(phi_mode, v)  on V_h(K_{i,m}).
MultiscaleBasis build_cem_basis(int block, int mode, int layers, const AssembledForms& forms,
                                const AuxiliarySpace& aux, const GridModel& grid);

/// Same system posed on the whole domain; the localized bases approximate it.
MultiscaleBasis build_global_basis(int block, int mode, const AssembledForms& forms,
                                   const AuxiliarySpace& aux, const GridModel& grid);

/// All offline bases, blocks ascending and modes ascending within a block.
MultiscaleSpace build_offline_space(const AssembledForms& forms, const AuxiliarySpace& aux,
                                    const GridModel& grid, int layers, int threads = 1);

/// Factorized restriction of the constraint operator A + W W' to a region
/// (extension-by-zero). Shared by the offline and online cell problems; the
/// low-rank part is applied through the Woodbury identity, never formed.
class ConstraintSystem {
 public:
  ConstraintSystem(Region region, const AssembledForms& forms, const AuxiliarySpace& aux,
                   const GridModel& grid);

  Vector solve(const Vector& rhs_local) const;

  const Region& region() const { return region_; }
  const std::vector<int>& dofs() const { return dofs_; }
  const std::vector<int>& mode_columns() const { return cols_; }
  const Matrix& w_local() const { return w_r_; }

 private:
  Region region_;
  std::vector<int> dofs_;
  std::vector<int> cols_;
  Matrix w_r_;
  SpdSolver solver_;
};

struct CoarseSolution {
  Vector u;             // fine-dof solution R c
  Vector coefficients;  // per basis; dropped entries are zero
  std::vector<int> dropped;  // indices of dropped (near-dependent) bases
};

/// Galerkin solve on the space: (R' A R) c = R' F with pivot dropping.
CoarseSolution solve_coarse(const MultiscaleSpace& space, const AssembledForms& forms);

/// Dense rows x cols copy of a sparse matrix (Woodbury blocks, W columns of
/// the region's blocks).
Matrix dense_submatrix(const SparseMat& m, const std::vector<int>& rows,
                       const std::vector<int>& cols);

/// Column ids of aux-space modes whose block lies in the region, ascending.
std::vector<int> region_mode_columns(const AuxiliarySpace& aux, const Region& region);

Region whole_domain_region(const GridModel& grid);

}  // namespace cemdg

#endif
