#include "cemdg/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cemdg/numkernel.hpp"
#include "cemdg/parallel.hpp"

namespace cemdg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw ConfigError("config: bad value for " + key + ": '" + value + "'");
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

template <class Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (InputError& e) {
    throw InputError(name + ": " + e.what());
  } catch (SolverError& e) {
    throw SolverError(name + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_keys(const std::map<std::string, std::string>& keys) {
  ExperimentConfig c;
  for (const auto& [key, value] : keys) {
    if (key == "coarse_nx") c.grid.coarse_nx = parse_int(key, value);
    else if (key == "coarse_ny") c.grid.coarse_ny = parse_int(key, value);
    else if (key == "fine_per_coarse_x") c.grid.fine_per_coarse_x = parse_int(key, value);
    else if (key == "fine_per_coarse_y") c.grid.fine_per_coarse_y = parse_int(key, value);
    else if (key == "domain_x0") c.grid.x0 = parse_double(key, value);
    else if (key == "domain_y0") c.grid.y0 = parse_double(key, value);
    else if (key == "domain_x1") c.grid.x1 = parse_double(key, value);
    else if (key == "domain_y1") c.grid.y1 = parse_double(key, value);
    else if (key == "medium_file") c.medium_file = value;
    else if (key == "medium_kind") c.medium_kind = parse_field_kind(value);
    else if (key == "contrast") c.contrast = parse_double(key, value);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "gamma") c.gamma = parse_double(key, value);
    else if (key == "aux_modes") c.aux_modes = parse_int(key, value);
    else if (key == "m_offline") c.m_offline = parse_int(key, value);
    else if (key == "m_online") c.m_online = parse_int(key, value);
    else if (key == "theta") c.theta = parse_double(key, value);
    else if (key == "n_iter") c.n_iter = parse_int(key, value);
    else if (key == "source") c.source = value;
    else if (key == "solver_tol") c.solver_tol = parse_double(key, value);
    else if (key == "threads") c.threads = parse_int(key, value);
    else if (key == "write_maps") c.write_maps = parse_bool(key, value);
    else if (key == "early_stop") c.early_stop = parse_bool(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (c.theta < 0.0 || c.theta >= 1.0) throw ConfigError("config: theta must be in [0,1)");
  if (c.n_iter < 0) throw ConfigError("config: n_iter must be nonnegative");
  if (c.aux_modes < 1) throw ConfigError("config: aux_modes must be positive");
  if (c.m_offline < 0 || c.m_online < 0)
    throw ConfigError("config: oversampling layers must be nonnegative");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::map<std::string, std::string> keys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + path + ":" + std::to_string(lineno) + ": expected key=value");
    keys[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return from_keys(keys);
}

std::map<std::string, std::string> ExperimentConfig::to_keys() const {
  std::map<std::string, std::string> k;
  k["coarse_nx"] = std::to_string(grid.coarse_nx);
  k["coarse_ny"] = std::to_string(grid.coarse_ny);
  k["fine_per_coarse_x"] = std::to_string(grid.fine_per_coarse_x);
  k["fine_per_coarse_y"] = std::to_string(grid.fine_per_coarse_y);
  k["domain_x0"] = fmt_double(grid.x0);
  k["domain_y0"] = fmt_double(grid.y0);
  k["domain_x1"] = fmt_double(grid.x1);
  k["domain_y1"] = fmt_double(grid.y1);
  k["medium_file"] = medium_file;
  k["medium_kind"] = field_kind_name(medium_kind);
  k["contrast"] = fmt_double(contrast);
  k["seed"] = std::to_string(seed);
  k["gamma"] = fmt_double(gamma);
  k["aux_modes"] = std::to_string(aux_modes);
  k["m_offline"] = std::to_string(m_offline);
  k["m_online"] = std::to_string(m_online);
  k["theta"] = fmt_double(theta);
  k["n_iter"] = std::to_string(n_iter);
  k["source"] = source;
  k["solver_tol"] = fmt_double(solver_tol);
  k["threads"] = std::to_string(threads);
  k["write_maps"] = write_maps ? "1" : "0";
  k["early_stop"] = early_stop ? "1" : "0";
  return k;
}

void ExperimentConfig::echo(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("config echo: cannot open " + path);
  for (const auto& [key, value] : to_keys()) out << key << "=" << value << "\n";
}

SourceFn make_source(const std::string& name) {
  if (name == "constant") return [](double, double) { return 1.0; };
  if (name == "sin2d") {
    return [](double x, double y) {
      return 2.0 * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y);
    };
  }
  if (name == "radial_quarter") {
    return [](double x, double y) {
      const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
      return std::pow(r2, -0.25);
    };
  }
  throw ConfigError("unknown source '" + name + "'");
}

Vector solve_fine_reference(const AssembledForms& forms, double tol) {
  return solve_spd(forms.A, forms.F, tol);
}

std::pair<double, double> compute_errors(const Vector& u_ms, const Vector& u_h,
                                         const AssembledForms& forms) {
  const NormValues ref = norms(u_h, forms);
  if (ref.l2 == 0.0 || ref.a == 0.0) throw InputError("compute_errors: zero reference norm");
  const NormValues err = norms(u_h - u_ms, forms);
  return {err.l2 / ref.l2, err.a / ref.a};
}

double compute_rate(const std::vector<double>& e_a) {
  double rate = -1.0;
  for (std::size_t k = 0; k + 1 < e_a.size(); ++k) {
    const double denom = e_a[k] * e_a[k];
    if (denom < 1e-13) continue;
    rate = std::max(rate, e_a[k + 1] * e_a[k + 1] / denom);
  }
  if (rate < 0.0) throw InputError("compute_rate: fewer than two usable states");
  return rate;
}

void write_results_csv(const std::string& path, const ResultsTable& table) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open " + path);
  std::fprintf(f, "k,dofs,e_l2,e_a,p_selected\n");
  for (const auto& r : table.rows)
    std::fprintf(f, "%d,%d,%.8e,%.8e,%d\n", r.k, r.dofs, r.e_l2, r.e_a, r.p_selected);
  std::fclose(f);
}

namespace {

void write_node_grid_csv(const std::string& path, const GridModel& grid, const Vector& values) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open " + path);
  for (int gy = 0; gy <= grid.topo.ny; ++gy) {
    for (int gx = 0; gx <= grid.topo.nx; ++gx) {
      if (gx) std::fputc(',', f);
      std::fprintf(f, "%.8e", values[grid.coarse_node_id(gx, gy)]);
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  const auto path = [&](const std::string& name) {
    return out_dir.empty() ? name : out_dir + "/" + name;
  };

  const GridModel grid = stage("grid", [&] { return build_grid(config.grid); });
  const PermeabilityField field = stage("medium", [&] {
    return config.medium_file.empty()
               ? generate_field(config.medium_kind, config.contrast, config.seed, grid)
               : load_field(config.medium_file, grid);
  });
  const PartitionOfUnity pou(grid);
  const WeightField ktilde = stage("weight", [&] { return compute_kappa_tilde(field, pou); });
  const AssembledForms forms = stage("assembly", [&] {
    return assemble_forms(field, ktilde, grid, config.gamma, make_source(config.source));
  });
  const Vector u_h =
      stage("fine reference", [&] { return solve_fine_reference(forms, config.solver_tol); });
  const AuxiliarySpace aux = stage("auxiliary space", [&] {
    return build_auxiliary_space(forms, grid, config.aux_modes, config.threads);
  });
  MultiscaleSpace space = stage("offline space", [&] {
    return build_offline_space(forms, aux, grid, config.m_offline, config.threads);
  });

  AdaptiveOptions opt;
  opt.theta = config.theta;
  opt.n_iter = config.n_iter;
  opt.m_online = config.m_online;
  opt.threads = config.threads;
  opt.delta_floor_exit = config.early_stop;
  const std::vector<EnrichmentState> states = stage("adaptive loop", [&] {
    return run_adaptive(opt, forms, grid, aux, pou, space, &u_h, &std::cerr);
  });

  ResultsTable table;
  table.Lambda = aux.Lambda;
  table.fine_dofs = grid.dofs.total_dofs;
  std::vector<double> e_a;
  for (const auto& st : states) {
    ResultsRow row;
    row.k = st.k;
    row.dofs = st.dofs;
    row.e_l2 = st.e_l2;
    row.e_a = st.e_a;
    row.p_selected = static_cast<int>(st.selected.size());
    table.rows.push_back(row);
    e_a.push_back(st.e_a);
  }
  try {
    table.rate = compute_rate(e_a);
  } catch (const InputError&) {
    // fewer than two usable states; rate stays NaN
  }

  write_results_csv(path("results.csv"), table);
  config.echo(path("config_echo.cfg"));
  if (config.write_maps) {
    save_field(path("medium.txt"), field);
    Vector counts = Vector::Zero(grid.n_coarse_nodes());
    for (const auto& st : states) {
      write_node_grid_csv(path("indicators_k" + std::to_string(st.k) + ".csv"), grid, st.deltas);
      for (int node : st.selected) counts[node] += 1.0;
    }
    write_node_grid_csv(path("enrichment_counts.csv"), grid, counts);
  }
  return table;
}

std::vector<DecayRow> decay_study(const ExperimentConfig& config, int block, int modes,
                                  int max_layers) {
  const GridModel grid = stage("grid", [&] { return build_grid(config.grid); });
  if (block < 0) block = grid.block_id(grid.topo.nx / 2, grid.topo.ny / 2);
  const PermeabilityField field = stage("medium", [&] {
    return config.medium_file.empty()
               ? generate_field(config.medium_kind, config.contrast, config.seed, grid)
               : load_field(config.medium_file, grid);
  });
  const PartitionOfUnity pou(grid);
  const WeightField ktilde = compute_kappa_tilde(field, pou);
  const AssembledForms forms = stage("assembly", [&] {
    return assemble_forms(field, ktilde, grid, config.gamma, make_source(config.source));
  });
  const AuxiliarySpace aux = stage("auxiliary space", [&] {
    return build_auxiliary_space(forms, grid, config.aux_modes, config.threads);
  });

  std::vector<DecayRow> rows;
  for (int j = 0; j < std::min(modes, aux.modes[block]); ++j) {
    const MultiscaleBasis glo = build_global_basis(block, j, forms, aux, grid);
    const Vector glo_dense = glo.dense(grid.dofs.total_dofs);
    for (int m = 1; m <= max_layers; ++m) {
      const MultiscaleBasis ms = build_cem_basis(block, j, m, forms, aux, grid);
      DecayRow row;
      row.mode = j;
      row.layers = m;
      row.e_a = norms(glo_dense - ms.dense(grid.dofs.total_dofs), forms).a;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

// 3-point Gauss on [0,1]
constexpr double kG3x[3] = {0.11270166537925831148, 0.5, 0.88729833462074168852};
constexpr double kG3w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct ExactErrors {
  double l2 = 0.0;
  double energy = 0.0;
};

ExactErrors manufactured_errors(const Vector& u_h, const GridModel& grid,
                                const AssembledForms& forms) {
  const auto exact = [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); };
  const auto exact_dx = [](double x, double y) {
    return M_PI * std::cos(M_PI * x) * std::sin(M_PI * y);
  };
  const auto exact_dy = [](double x, double y) {
    return M_PI * std::sin(M_PI * x) * std::cos(M_PI * y);
  };

  double l2 = 0.0, grad = 0.0;
  for (int b = 0; b < grid.n_blocks(); ++b) {
    for (int cfy = 0; cfy < grid.nfy(); ++cfy) {
      for (int cfx = 0; cfx < grid.nfx(); ++cfx) {
        double corner[4] = {0, 0, 0, 0};
        const int lf[4][2] = {{cfx, cfy}, {cfx + 1, cfy}, {cfx + 1, cfy + 1}, {cfx, cfy + 1}};
        for (int a = 0; a < 4; ++a) {
          const int d = grid.dofs.dof(b, grid.local_node(lf[a][0], lf[a][1]));
          corner[a] = d >= 0 ? u_h[d] : 0.0;
        }
        const double x0 = grid.node_x(grid.global_fx(b, cfx));
        const double y0 = grid.node_y(grid.global_fy(b, cfy));
        for (int qi = 0; qi < 3; ++qi) {
          for (int qj = 0; qj < 3; ++qj) {
            const double xi = kG3x[qi], eta = kG3x[qj];
            const double w = kG3w[qi] * kG3w[qj] * grid.hx * grid.hy;
            const double x = x0 + xi * grid.hx, y = y0 + eta * grid.hy;
            const double uh = corner[0] * (1 - xi) * (1 - eta) + corner[1] * xi * (1 - eta) +
                              corner[2] * xi * eta + corner[3] * (1 - xi) * eta;
            const double uhx = ((corner[1] - corner[0]) * (1 - eta) +
                                (corner[2] - corner[3]) * eta) / grid.hx;
            const double uhy = ((corner[3] - corner[0]) * (1 - xi) +
                                (corner[2] - corner[1]) * xi) / grid.hy;
            const double de = uh - exact(x, y);
            const double dgx = uhx - exact_dx(x, y);
            const double dgy = uhy - exact_dy(x, y);
            l2 += w * de * de;
            grad += w * (dgx * dgx + dgy * dgy);
          }
        }
      }
    }
  }
  ExactErrors e;
  e.l2 = std::sqrt(l2);
  e.energy = std::sqrt(grad + u_h.dot(forms.A_pen * u_h));
  return e;
}

}  // namespace

CheckResult convergence_check(int levels, int threads) {
  if (levels < 2) throw ConfigError("convergence_check: need at least 2 levels");
  (void)threads;
  CheckResult result;
  for (int l = 0; l < levels; ++l) {
    GridConfig gc;
    gc.coarse_nx = gc.coarse_ny = 4;
    gc.fine_per_coarse_x = gc.fine_per_coarse_y = 4 << l;
    const GridModel grid = build_grid(gc);
    PermeabilityField ones;
    ones.nx = grid.n_fine_x();
    ones.ny = grid.n_fine_y();
    ones.values = Vector::Ones(static_cast<Eigen::Index>(ones.nx) * ones.ny);
    ones.source = "constant:1";
    const PartitionOfUnity pou(grid);
    const WeightField ktilde = compute_kappa_tilde(ones, pou);
    const AssembledForms forms =
        assemble_forms(ones, ktilde, grid, 4.0, make_source("sin2d"));
    const Vector u_h = solve_fine_reference(forms);
    const ExactErrors err = manufactured_errors(u_h, grid, forms);
    CheckRow row;
    row.fine_per_coarse = gc.fine_per_coarse_x;
    row.h = grid.hx;
    row.e_l2 = err.l2;
    row.e_energy = err.energy;
    result.rows.push_back(row);
  }
  double sum_l2 = 0.0, sum_en = 0.0;
  for (std::size_t l = 0; l + 1 < result.rows.size(); ++l) {
    sum_l2 += std::log2(result.rows[l].e_l2 / result.rows[l + 1].e_l2);
    sum_en += std::log2(result.rows[l].e_energy / result.rows[l + 1].e_energy);
  }
  result.order_l2 = sum_l2 / (levels - 1);
  result.order_energy = sum_en / (levels - 1);
  return result;
}

}  // namespace cemdg
