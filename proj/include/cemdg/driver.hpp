#ifndef CEMDG_DRIVER_HPP
#define CEMDG_DRIVER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cemdg/assembly.hpp"
#include "cemdg/grid.hpp"
#include "cemdg/medium.hpp"
#include "cemdg/offline.hpp"
#include "cemdg/online.hpp"
#include "cemdg/types.hpp"

namespace cemdg {

/// Flat key=value experiment configuration. Defaults follow the standard
/// desk-scale setup: 16x16 coarse cells, 16x16 fine cells per coarse cell,
/// gamma = 4, 2 auxiliary modes, offline oversampling 2, online
/// oversampling 3.
struct ExperimentConfig {
  GridConfig grid;
  std::string medium_file;  // empty -> use the generator below
  FieldKind medium_kind = FieldKind::channels;
  double contrast = 1e4;
  std::uint64_t seed = 1;
  double gamma = 4.0;
  int aux_modes = 2;
  int m_offline = 2;
  int m_online = 3;
  double theta = 0.0;
  int n_iter = 3;
  std::string source = "radial_quarter";
  double solver_tol = 1e-10;
  int threads = 0;  // 0 = hardware concurrency
  bool write_maps = false;
  bool early_stop = false;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_keys(const std::map<std::string, std::string>& keys);
  std::map<std::string, std::string> to_keys() const;
  void echo(const std::string& path) const;
};

/// Built-in sources: "constant", "sin2d" (manufactured right-hand side of
/// sin(pi x) sin(pi y)), "radial_quarter" = ((x-.5)^2+(y-.5)^2)^(-1/4).
SourceFn make_source(const std::string& name);

/// Fine-scale IPDG reference solution A u = F.
Vector solve_fine_reference(const AssembledForms& forms, double tol = 1e-10);

/// Relative L2 and energy errors of u_ms against the reference u_h.
std::pair<double, double> compute_errors(const Vector& u_ms, const Vector& u_h,
                                         const AssembledForms& forms);

/// Largest successive squared-energy-error ratio over the enrichment
/// states; ratios whose (relative) squared denominator is below 1e-13 are
/// excluded. Throws when fewer than two usable states exist.
double compute_rate(const std::vector<double>& e_a);

struct ResultsRow {
  int k = 0;
  int dofs = 0;
  double e_l2 = 0.0;
  double e_a = 0.0;
  int p_selected = 0;
};

struct ResultsTable {
  std::vector<ResultsRow> rows;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double Lambda = 0.0;
  int fine_dofs = 0;
};

/// Full pipeline: grid, medium, forms, auxiliary space, offline space,
/// reference solve, adaptive loop. Writes results.csv and config_echo.cfg
/// into out_dir (optional map CSVs with write_maps).
ResultsTable run_experiment(const ExperimentConfig& config, const std::string& out_dir);

void write_results_csv(const std::string& path, const ResultsTable& table);

struct DecayRow {
  int mode = 0;    // auxiliary mode index (0-based)
  int layers = 0;  // oversampling layers m
  double e_a = 0.0;  // energy distance between global and localized basis
};

/// Localization decay study for one coarse block: e(m) = ||psi_glo -
/// psi_ms(m)||_a for m = 1..max_layers and each of the first `modes` modes.
std::vector<DecayRow> decay_study(const ExperimentConfig& config, int block, int modes,
                                  int max_layers);

struct CheckRow {
  int fine_per_coarse = 0;
  double h = 0.0;
  double e_l2 = 0.0;
  double e_energy = 0.0;
};

struct CheckResult {
  std::vector<CheckRow> rows;
  double order_l2 = 0.0;      // mean observed order between levels
  double order_energy = 0.0;
};

/// Manufactured-solution study: kappa = 1, u = sin(pi x) sin(pi y), coarse
/// 4x4, fine cell sizes halving per level starting at 1/16.
CheckResult convergence_check(int levels, int threads = 0);

}  // namespace cemdg

#endif
