#include "cemdg/online.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cemdg/parallel.hpp"

namespace cemdg {

Vector global_residual(const Vector& u, const AssembledForms& forms) {
  if (u.size() != forms.F.size()) throw ConfigError("global_residual: dimension mismatch");
  return forms.A * u - forms.F;
}

double local_indicator(int node, const Vector& residual, const AssembledForms& forms,
                       const GridModel& grid) {
  const Region region = oversample_neighborhood(grid, node, 0);
  const auto dofs = grid.region_dofs(region);
  const Vector b = restrict_vector(residual, dofs);
  try {
    SpdSolver solver(restrict_operator(forms.A, dofs));
    const Vector rho = solver.solve(b);
    return std::sqrt(std::max(b.dot(rho), 0.0));
  } catch (const SolverError& e) {
    throw ConfigError("local_indicator: node " + std::to_string(node) +
                      ": restricted operator not SPD (" + e.what() + ")");
  }
}

Vector all_indicators(const Vector& residual, const AssembledForms& forms,
                      const GridModel& grid, int threads) {
  Vector deltas(grid.n_coarse_nodes());
  parallel_for(grid.n_coarse_nodes(), threads,
               [&](int i) { deltas[i] = local_indicator(i, residual, forms, grid); });
  return deltas;
}

std::pair<int, std::vector<int>> select_regions(const Vector& deltas, double theta,
                                                double eps_skip) {
  if (theta < 0.0 || theta >= 1.0) throw ConfigError("select_regions: theta must be in [0,1)");
  const Eigen::Index n = deltas.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(deltas[i] >= 0.0)) throw InputError("select_regions: negative indicator");

  const double max_delta = n > 0 ? deltas.maxCoeff() : 0.0;
  if (max_delta == 0.0) return {0, {}};

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (deltas[a] != deltas[b]) return deltas[a] > deltas[b];
    return a < b;
  });

  std::vector<int> picked;
  if (theta == 0.0) {
    for (int i : order)
      if (deltas[i] > eps_skip * max_delta) picked.push_back(i);
  } else {
    const double total = deltas.squaredNorm();
    double head = 0.0;
    for (int i : order) {
      head += deltas[i] * deltas[i];
      picked.push_back(i);
      if (total - head < theta * total) break;
    }
  }
  const int p = static_cast<int>(picked.size());
  std::sort(picked.begin(), picked.end());
  return {p, picked};
}

MultiscaleBasis build_online_basis(int node, const Vector& residual, int layers,
                                   const AssembledForms& forms, const AuxiliarySpace& aux,
                                   const GridModel& grid, const PartitionOfUnity& pou) {
  Region region = oversample_neighborhood(grid, node, layers);
  ConstraintSystem sys(std::move(region), forms, aux, grid);

  // r_i(v) = v' D_i (A u - F): scale the restricted residual by the chi_i
  // nodal values at each dof location
  const auto& dofs = sys.dofs();
  Vector rhs(static_cast<Eigen::Index>(dofs.size()));
  {
    std::size_t pos = 0;
    for (int b : sys.region().elements) {
      for (int fy = 0; fy <= grid.nfy(); ++fy) {
        for (int fx = 0; fx <= grid.nfx(); ++fx) {
          const int d = grid.dofs.dof(b, grid.local_node(fx, fy));
          if (d < 0) continue;
          const double chi = pou.value(node, grid.node_x(grid.global_fx(b, fx)),
                                       grid.node_y(grid.global_fy(b, fy)));
          rhs[static_cast<Eigen::Index>(pos++)] = chi * residual[d];
        }
      }
    }
  }

  MultiscaleBasis basis;
  basis.origin = MultiscaleBasis::Origin::online;
  basis.home = node;
  basis.support = sys.region();
  basis.dofs = dofs;
  try {
    basis.values = sys.solve(rhs);
  } catch (const std::exception& e) {
    throw SolverError("build_online_basis: node " + std::to_string(node) + ": " + e.what());
  }
  return basis;
}

namespace {

void prune_dropped(MultiscaleSpace& space, const std::vector<int>& dropped, std::ostream* log) {
  if (dropped.empty()) return;
  for (auto it = dropped.rbegin(); it != dropped.rend(); ++it) {
    const auto& b = space.basis[*it];
    std::ostringstream line;
    line << "dropped basis " << *it << " (";
    switch (b.origin) {
      case MultiscaleBasis::Origin::offline:
        line << "offline block=" << b.home << " mode=" << b.mode;
        break;
      case MultiscaleBasis::Origin::online:
        line << "online node=" << b.home << " iter=" << b.iteration;
        break;
      case MultiscaleBasis::Origin::global:
        line << "global block=" << b.home << " mode=" << b.mode;
        break;
    }
    line << "): pivot below drop tolerance";
    space.provenance.push_back(line.str());
    if (log) *log << "warning: " << line.str() << "\n";
    space.basis.erase(space.basis.begin() + *it);
  }
}

}  // namespace

std::vector<EnrichmentState> run_adaptive(const AdaptiveOptions& opt,
                                          const AssembledForms& forms, const GridModel& grid,
                                          const AuxiliarySpace& aux,
                                          const PartitionOfUnity& pou, MultiscaleSpace& space,
                                          const Vector* u_reference, std::ostream* log) {
  if (opt.n_iter < 0) throw ConfigError("run_adaptive: n_iter must be nonnegative");

  NormValues ref_norms;
  if (u_reference) ref_norms = norms(*u_reference, forms);

  auto make_state = [&](int k) {
    EnrichmentState st;
    st.k = k;
    CoarseSolution sol;
    try {
      sol = solve_coarse(space, forms);
    } catch (const std::exception& e) {
      throw SolverError("run_adaptive: iteration " + std::to_string(k) + ": " + e.what());
    }
    prune_dropped(space, sol.dropped, log);
    st.u = std::move(sol.u);
    st.dofs = space.size();
    st.residual = global_residual(st.u, forms);
    st.deltas = all_indicators(st.residual, forms, grid, opt.threads);
    if (u_reference) {
      const NormValues err = norms(*u_reference - st.u, forms);
      st.e_l2 = err.l2 / ref_norms.l2;
      st.e_a = err.a / ref_norms.a;
    }
    return st;
  };

  std::vector<EnrichmentState> states;
  states.push_back(make_state(0));

  const double floor = opt.delta_floor * forms.F.norm();
  for (int k = 0; k < opt.n_iter; ++k) {
    EnrichmentState& cur = states.back();
    if (opt.delta_floor_exit && cur.deltas.maxCoeff() <= floor) {
      if (log) *log << "run_adaptive: indicators below floor at iteration " << k << ", stopping\n";
      break;
    }
    auto [p, selected] = select_regions(cur.deltas, opt.theta, opt.eps_skip);
    cur.selected = selected;
    if (selected.empty()) {
      if (log) *log << "run_adaptive: all indicators zero at iteration " << k << ", stopping\n";
      break;
    }

    std::vector<MultiscaleBasis> fresh(selected.size());
    try {
      parallel_for(static_cast<int>(selected.size()), opt.threads, [&](int s) {
        fresh[s] = build_online_basis(selected[s], cur.residual, opt.m_online, forms, aux,
                                      grid, pou);
        fresh[s].iteration = k;
      });
    } catch (const std::exception& e) {
      throw SolverError("run_adaptive: iteration " + std::to_string(k) + ": " + e.what());
    }
    for (auto& b : fresh) {
      std::ostringstream line;
      line << "online iter=" << k << " node=" << b.home << " layers=" << opt.m_online;
      space.provenance.push_back(line.str());
      space.basis.push_back(std::move(b));
    }
    states.push_back(make_state(k + 1));
  }
  return states;
}

}  // namespace cemdg
