#ifndef CEMDG_ONLINE_HPP
#define CEMDG_ONLINE_HPP

#include <iosfwd>
#include <utility>
#include <vector>

#include "cemdg/assembly.hpp"
#include "cemdg/grid.hpp"
#include "cemdg/medium.hpp"
#include "cemdg/offline.hpp"
#include "cemdg/types.hpp"

namespace cemdg {

/// One level of the residual-driven enrichment loop.
struct EnrichmentState {
  int k = 0;
  Vector u;
  Vector residual;            // A u - F
  Vector deltas;              // indicator per coarse node
  std::vector<int> selected;  // nodes enriched from this state, ascending
  int dofs = 0;               // active basis count of the space that produced u
  double e_l2 = -1.0, e_a = -1.0;  // vs reference when available
};

/// r(v) = a_DG(u, v) - int f v, represented by the coefficient vector A u - F.
Vector global_residual(const Vector& u, const AssembledForms& forms);

/// delta_i = dual norm of the residual over V_h(omega_i): sqrt(b' A|^-1 b)
/// with b the residual restricted to the neighborhood dofs.
double local_indicator(int node, const Vector& residual, const AssembledForms& forms,
                       const GridModel& grid);

Vector all_indicators(const Vector& residual, const AssembledForms& forms,
                      const GridModel& grid, int threads = 1);

/// Descending-indicator prefix rule: smallest p with
///   sum_{i>p} delta_i^2 < theta * sum_i delta_i^2.
/// Ties break by ascending node index; theta = 0 selects every node whose
/// indicator exceeds eps_skip times the largest one (uniform enrichment with
/// singularity protection). Returns (p, selected nodes ascending).
std::pair<int, std::vector<int>> select_regions(const Vector& deltas, double theta,
                                                double eps_skip = 1e-12);

/// Online basis for a coarse node: solve the cell problem
///   a_DG(beta, v) + s(pi(beta), pi(v)) = r_i(v)  on V_h(omega_{i,m})
/// with r_i(v) = v' D_i (A u - F), D_i the diagonal of chi_i nodal values.
MultiscaleBasis build_online_basis(int node, const Vector& residual, int layers,
                                   const AssembledForms& forms, const AuxiliarySpace& aux,
                                   const GridModel& grid, const PartitionOfUnity& pou);

struct AdaptiveOptions {
  double theta = 0.0;
  int n_iter = 3;
  int m_online = 3;
  int threads = 1;
  double eps_skip = 1e-12;
  bool delta_floor_exit = false;   // optional early exit, off by default
  double delta_floor = 1e-13;      // times ||F||
};

/// Algorithm: start from the offline space, then per iteration compute
/// indicators, select nodes, append their online bases (ascending node
/// order) and re-solve. The space is modified in place; dropped bases are
/// pruned and logged in its provenance.
std::vector<EnrichmentState> run_adaptive(const AdaptiveOptions& opt,
                                          const AssembledForms& forms, const GridModel& grid,
                                          const AuxiliarySpace& aux,
                                          const PartitionOfUnity& pou, MultiscaleSpace& space,
                                          const Vector* u_reference = nullptr,
                                          std::ostream* log = nullptr);

}  // namespace cemdg

#endif
