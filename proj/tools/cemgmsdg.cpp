#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cemdg/driver.hpp"

namespace {

void apply_overrides(cemdg::ExperimentConfig& config, const CLI::Option* theta_opt, double theta,
                     const CLI::Option* niter_opt, int niter, const CLI::Option* seed_opt,
                     std::uint64_t seed, const CLI::Option* threads_opt, int threads,
                     const CLI::Option* maps_opt, bool maps) {
  if (theta_opt->count()) config.theta = theta;
  if (niter_opt->count()) config.n_iter = niter;
  if (seed_opt->count()) config.seed = seed;
  if (threads_opt->count()) config.threads = threads;
  if (maps_opt->count()) config.write_maps = maps;
  if (config.theta < 0.0 || config.theta >= 1.0)
    throw cemdg::ConfigError("theta must be in [0,1)");
}

void print_table(const cemdg::ResultsTable& table) {
  std::printf("%-6s %-8s %-14s %-14s %-10s\n", "k", "DOFs", "e_L2", "e_a", "p");
  for (const auto& r : table.rows)
    std::printf("%-6d %-8d %-13.6f%% %-13.6f%% %-10d\n", r.k, r.dofs, 100.0 * r.e_l2,
                100.0 * r.e_a, r.p_selected);
  if (std::isfinite(table.rate)) std::printf("convergence rate: %.4f\n", table.rate);
  std::printf("fine dofs: %d   Lambda: %g\n", table.fine_dofs, table.Lambda);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint energy minimizing multiscale DG solver with online enrichment"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  double theta = 0.0;
  int niter = 3, threads = 0, modes = 2, layers = 4, block = -1, levels = 3;
  std::uint64_t seed = 1;
  bool maps = false;

  CLI::App* run = app.add_subcommand("run", "full adaptive experiment");
  run->add_option("--config", config_path, "key=value config file");
  auto* r_theta = run->add_option("--theta", theta, "selection parameter in [0,1)");
  auto* r_niter = run->add_option("--niter", niter, "number of online iterations");
  auto* r_seed = run->add_option("--seed", seed, "medium generator seed");
  auto* r_threads = run->add_option("--threads", threads, "worker threads (0 = auto)");
  auto* r_maps = run->add_flag("--maps", maps, "write indicator / enrichment map CSVs");
  run->add_option("--out", out_dir, "output directory");

  CLI::App* decay = app.add_subcommand("decay", "basis localization decay study");
  decay->add_option("--config", config_path, "key=value config file");
  decay->add_option("--modes", modes, "number of auxiliary modes to study");
  decay->add_option("--layers", layers, "maximum oversampling layers");
  decay->add_option("--block", block, "coarse block id (default: center)");
  decay->add_option("--out", out_dir, "output directory");
  auto* d_threads = decay->add_option("--threads", threads, "worker threads (0 = auto)");

  CLI::App* check = app.add_subcommand("check", "manufactured-solution convergence study");
  check->add_option("--levels", levels, "number of fine-grid levels");
  check->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cemdg::ExperimentConfig config;
    if (!config_path.empty()) config = cemdg::ExperimentConfig::from_file(config_path);

    if (run->parsed()) {
      apply_overrides(config, r_theta, theta, r_niter, niter, r_seed, seed, r_threads, threads,
                      r_maps, maps);
      const cemdg::ResultsTable table = cemdg::run_experiment(config, out_dir);
      print_table(table);
      std::printf("wrote %s/results.csv\n", out_dir.c_str());
    } else if (decay->parsed()) {
      if (d_threads->count()) config.threads = threads;
      const auto rows = cemdg::decay_study(config, block, modes, layers);
      std::filesystem::create_directories(out_dir);
      std::FILE* f = std::fopen((out_dir + "/decay.csv").c_str(), "w");
      if (!f) throw cemdg::ConfigError("cannot open " + out_dir + "/decay.csv");
      std::fprintf(f, "mode,m,e_a\n");
      std::printf("%-6s %-4s %-14s\n", "mode", "m", "e_a");
      for (const auto& r : rows) {
        std::fprintf(f, "%d,%d,%.8e\n", r.mode, r.layers, r.e_a);
        std::printf("%-6d %-4d %-14.6e\n", r.mode, r.layers, r.e_a);
      }
      std::fclose(f);
      std::printf("wrote %s/decay.csv\n", out_dir.c_str());
    } else if (check->parsed()) {
      const auto result = cemdg::convergence_check(levels);
      std::printf("%-8s %-12s %-14s %-14s\n", "n_fine", "h", "e_L2", "e_energy");
      for (const auto& r : result.rows)
        std::printf("%-8d %-12.6e %-14.6e %-14.6e\n", r.fine_per_coarse, r.h, r.e_l2,
                    r.e_energy);
      std::printf("observed orders: L2 %.3f, energy %.3f\n", result.order_l2,
                  result.order_energy);
    }
  } catch (const cemdg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
