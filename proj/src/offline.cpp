#include "cemdg/offline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cemdg/parallel.hpp"

namespace cemdg {

AuxiliarySpace build_auxiliary_space(const AssembledForms& forms, const GridModel& grid,
                                     int modes_per_block, int threads) {
  if (modes_per_block < 1)
    throw ConfigError("build_auxiliary_space: need at least one mode per block");
  const int nb = grid.n_blocks();
  AuxiliarySpace aux;
  aux.requested_modes = modes_per_block;
  aux.modes.assign(nb, 0);
  aux.eigenvalues.resize(nb);
  std::vector<Matrix> vectors(nb);

  parallel_for(nb, threads, [&](int b) {
    const int dim = grid.dofs.block_num_dofs[b];
    if (dim == 0) return;
    const int li = std::min(modes_per_block, dim);
    const int count = std::min(li + 1, dim);
    const Matrix a_i = block_dense(forms.A_vol, grid, b);
    const Matrix s_i = block_dense(forms.S, grid, b);
    EigenPairs pairs;
    try {
      pairs = generalized_eig_sym(a_i, s_i, count);
    } catch (const std::exception& e) {
      throw SolverError("build_auxiliary_space: block " + std::to_string(b) + ": " + e.what());
    }
    aux.modes[b] = li;
    aux.eigenvalues[b] = pairs.values;
    vectors[b] = pairs.vectors.leftCols(li);
  });

  aux.Lambda = std::numeric_limits<double>::infinity();
  aux.lambda_max = 0.0;
  aux.mode_offset.assign(nb + 1, 0);
  for (int b = 0; b < nb; ++b) {
    aux.mode_offset[b + 1] = aux.mode_offset[b] + aux.modes[b];
    if (aux.modes[b] == 0) continue;
    if (aux.eigenvalues[b].size() > aux.modes[b])
      aux.Lambda = std::min(aux.Lambda, aux.eigenvalues[b][aux.modes[b]]);
    aux.lambda_max = std::max(aux.lambda_max, aux.eigenvalues[b][aux.modes[b] - 1]);
  }

  std::vector<Triplet> phi_trips, w_trips;
  for (int b = 0; b < nb; ++b) {
    if (aux.modes[b] == 0) continue;
    const int first = grid.dofs.block_first_dof[b];
    const int dim = grid.dofs.block_num_dofs[b];
    const Matrix s_i = block_dense(forms.S, grid, b);
    const Matrix w_i = s_i * vectors[b];
    for (int j = 0; j < aux.modes[b]; ++j) {
      const int col = aux.mode_offset[b] + j;
      for (int r = 0; r < dim; ++r) {
        phi_trips.emplace_back(first + r, col, vectors[b](r, j));
        w_trips.emplace_back(first + r, col, w_i(r, j));
      }
    }
  }
  aux.Phi.resize(grid.dofs.total_dofs, aux.mode_offset[nb]);
  aux.Phi.setFromTriplets(phi_trips.begin(), phi_trips.end());
  aux.W.resize(grid.dofs.total_dofs, aux.mode_offset[nb]);
  aux.W.setFromTriplets(w_trips.begin(), w_trips.end());
  return aux;
}

Vector pi_coefficients(const AuxiliarySpace& aux, const Vector& v) {
  return aux.W.transpose() * v;
}

Vector apply_pi(const AuxiliarySpace& aux, const Vector& v) {
  return aux.Phi * (aux.W.transpose() * v);
}

Vector MultiscaleBasis::dense(Eigen::Index total_dofs) const {
  return extend_vector(values, dofs, total_dofs);
}

SparseMat MultiscaleSpace::prolongation(Eigen::Index total_dofs) const {
  std::vector<Triplet> trips;
  std::size_t nnz = 0;
  for (const auto& b : basis) nnz += b.dofs.size();
  trips.reserve(nnz);
  for (int col = 0; col < size(); ++col) {
    const auto& b = basis[col];
    for (std::size_t i = 0; i < b.dofs.size(); ++i)
      trips.emplace_back(b.dofs[i], col, b.values[static_cast<Eigen::Index>(i)]);
  }
  SparseMat R(total_dofs, size());
  R.setFromTriplets(trips.begin(), trips.end());
  R.makeCompressed();
  return R;
}

Matrix dense_submatrix(const SparseMat& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  std::vector<int> pos(m.rows(), -1);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) pos[rows[i]] = i;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                            static_cast<Eigen::Index>(cols.size()));
  for (int j = 0; j < static_cast<int>(cols.size()); ++j)
    for (SparseMat::InnerIterator it(m, cols[j]); it; ++it) {
      const int r = pos[it.row()];
      if (r >= 0) out(r, j) = it.value();
    }
  return out;
}

std::vector<int> region_mode_columns(const AuxiliarySpace& aux, const Region& region) {
  std::vector<int> cols;
  for (int b : region.elements)
    for (int j = 0; j < aux.modes[b]; ++j) cols.push_back(aux.mode_offset[b] + j);
  return cols;
}

Region whole_domain_region(const GridModel& grid) {
  Region r;
  r.elements.resize(grid.n_blocks());
  for (int b = 0; b < grid.n_blocks(); ++b) r.elements[b] = b;
  r.kind = RegionKind::block;
  r.center = -1;
  r.layers = -1;
  return r;
}

ConstraintSystem::ConstraintSystem(Region region, const AssembledForms& forms,
                                   const AuxiliarySpace& aux, const GridModel& grid)
    : region_(std::move(region)),
      dofs_(grid.region_dofs(region_)),
      cols_(region_mode_columns(aux, region_)),
      w_r_(dense_submatrix(aux.W, dofs_, cols_)),
      solver_(restrict_operator(forms.A, dofs_)) {}

Vector ConstraintSystem::solve(const Vector& rhs_local) const {
  return solve_lowrank_update(solver_, w_r_, rhs_local);
}

namespace {

MultiscaleBasis cem_basis_from_system(const ConstraintSystem& sys, int block, int mode,
                                      const AuxiliarySpace& aux,
                                      MultiscaleBasis::Origin origin) {
  const auto& cols = sys.mode_columns();
  const int col = aux.mode_offset[block] + mode;
  const auto pos = std::lower_bound(cols.begin(), cols.end(), col);
  if (pos == cols.end() || *pos != col)
    throw ConfigError("cem basis: mode column not in region");
  const Vector rhs = sys.w_local().col(pos - cols.begin());

  MultiscaleBasis b;
  b.origin = origin;
  b.home = block;
  b.mode = mode;
  b.support = sys.region();
  b.dofs = sys.dofs();
  b.values = sys.solve(rhs);
  return b;
}

}  // namespace

MultiscaleBasis build_cem_basis(int block, int mode, int layers, const AssembledForms& forms,
                                const AuxiliarySpace& aux, const GridModel& grid) {
  if (block < 0 || block >= grid.n_blocks())
    throw ConfigError("build_cem_basis: block out of range");
  if (mode < 0 || mode >= aux.modes[block])
    throw ConfigError("build_cem_basis: mode out of range for block");
  ConstraintSystem sys(oversample_block(grid, block, layers), forms, aux, grid);
  return cem_basis_from_system(sys, block, mode, aux, MultiscaleBasis::Origin::offline);
}

MultiscaleBasis build_global_basis(int block, int mode, const AssembledForms& forms,
                                   const AuxiliarySpace& aux, const GridModel& grid) {
  if (block < 0 || block >= grid.n_blocks())
    throw ConfigError("build_global_basis: block out of range");
  if (mode < 0 || mode >= aux.modes[block])
    throw ConfigError("build_global_basis: mode out of range for block");
  ConstraintSystem sys(whole_domain_region(grid), forms, aux, grid);
  return cem_basis_from_system(sys, block, mode, aux, MultiscaleBasis::Origin::global);
}

MultiscaleSpace build_offline_space(const AssembledForms& forms, const AuxiliarySpace& aux,
                                    const GridModel& grid, int layers, int threads) {
  const int nb = grid.n_blocks();
  std::vector<std::vector<MultiscaleBasis>> slots(nb);
  parallel_for(nb, threads, [&](int b) {
    if (aux.modes[b] == 0) return;
    ConstraintSystem sys(oversample_block(grid, b, layers), forms, aux, grid);
    for (int j = 0; j < aux.modes[b]; ++j)
      slots[b].push_back(cem_basis_from_system(sys, b, j, aux, MultiscaleBasis::Origin::offline));
  });

  MultiscaleSpace space;
  for (int b = 0; b < nb; ++b) {
    for (auto& basis : slots[b]) {
      std::ostringstream line;
      line << "offline block=" << b << " mode=" << basis.mode << " layers=" << layers;
      space.provenance.push_back(line.str());
      space.basis.push_back(std::move(basis));
    }
  }
  return space;
}

CoarseSolution solve_coarse(const MultiscaleSpace& space, const AssembledForms& forms) {
  if (space.basis.empty()) throw SolverError("solve_coarse: empty multiscale space");
  const SparseMat R = space.prolongation(forms.A.rows());
  const SparseMat AR = forms.A * R;
  const Matrix Ac = Matrix(SparseMat(R.transpose() * AR));
  const Vector Fc = R.transpose() * forms.F;
  PivotedSolveResult sol = solve_pivoted(Ac, Fc);
  CoarseSolution out;
  out.coefficients = sol.x;
  out.dropped = std::move(sol.dropped);
  out.u = R * out.coefficients;
  return out;
}

}  // namespace cemdg
