#include <CLI11.hpp>

#include "stokesdarcy/experiments.hpp"

#include <filesystem>
#include <iostream>

using namespace stokesdarcy;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string precond;
  int newton_iters = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file (key = value sections)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory for CSV and field dumps");
  cmd->add_option("--precond", opts.precond, "interface preconditioner")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--newton-iters", opts.newton_iters, "outer Newton iterations")
      ->check(CLI::PositiveNumber);
}

ExperimentConfig load_config(const CommonOpts& opts, const ExperimentConfig& defaults) {
  ExperimentConfig cfg =
      opts.config_path.empty() ? defaults : parse_config(opts.config_path);
  if (opts.precond == "on") cfg.solver.precond = true;
  if (opts.precond == "off") cfg.solver.precond = false;
  if (opts.newton_iters > 0) cfg.solver.newton_maxit = opts.newton_iters;
  return cfg;
}

std::string emit(const CommonOpts& opts, const std::string& name,
                 const std::vector<RunRecord>& records) {
  std::filesystem::create_directories(opts.out_dir);
  const std::string path = opts.out_dir + "/" + name;
  write_csv_file(path, records);
  write_csv(std::cout, records);
  return path;
}

void print_iterations(const std::vector<NewtonIterationInfo>& its) {
  for (std::size_t k = 0; k < its.size(); ++k)
    std::cout << "newton " << k + 1 << ": |psi| = " << its[k].psi_norm
              << "  |step| = " << its[k].step_norm << "  gmres = " << its[k].gmres_iterations
              << (its[k].gmres_converged ? "" : " (not converged)") << "\n";
}

Eigen::VectorXd vertex_field(const DofMap& dofs, const Eigen::VectorXd& state, int n_vertices,
                             bool velocity) {
  if (!velocity) return state.segment(dofs.pressure(0), n_vertices);
  Eigen::VectorXd out(2 * n_vertices);
  for (int v = 0; v < n_vertices; ++v) {
    out[v] = state[dofs.ux(v)];
    out[n_vertices + v] = state[dofs.uy(v)];
  }
  return out;
}

void dump_fields(const std::string& dir, const Discretization& disc,
                 const Eigen::VectorXd& fluid, const Eigen::VectorXd& porous) {
  std::filesystem::create_directories(dir);
  write_vtk_mesh(disc.mesh_f, dir + "/fluid.vtk",
                 {{"velocity", vertex_field(disc.dofs_f, fluid, disc.mesh_f.n_vertices(), true)},
                  {"pressure",
                   vertex_field(disc.dofs_f, fluid, disc.mesh_f.n_vertices(), false)}});
  write_vtk_mesh(disc.mesh_p, dir + "/porous.vtk",
                 {{"velocity", vertex_field(disc.dofs_p, porous, disc.mesh_p.n_vertices(), true)},
                  {"pressure",
                   vertex_field(disc.dofs_p, porous, disc.mesh_p.n_vertices(), false)}});
}

int run_single(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts, ExperimentConfig{});
  std::filesystem::create_directories(opts.out_dir);
  if (cfg.test_case == 1) {
    const RunRecord rec = run_manufactured_case(cfg, cfg.resolution, cfg.fluid_grid(),
                                                cfg.porous_grid(), cfg.fluid_visc.r, "run");
    write_csv_file(opts.out_dir + "/run.csv", {rec});
    write_csv(std::cout, {rec});
    return rec.converged ? 0 : 1;
  }
  const ProblemData data = pressure_drop_data(cfg);
  const Discretization disc = build_discretization(
      cfg.fluid_rect, cfg.porous_rect, cfg.resolution, cfg.resolution, cfg.resolution);
  const PressureDropSolution sol = solve_pressure_drop(disc, data, cfg.solver, cfg.horizon,
                                                       cfg.dt_fluid, cfg.dt_porous);
  print_iterations(sol.iterations);
  std::cout << "wall_seconds = " << sol.wall_seconds << "\n";
  dump_fields(opts.out_dir, disc, sol.fluid_final, sol.porous_final);
  return sol.iterations.empty() || sol.iterations.back().gmres_converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global-in-time decoupled solver for coupled free and porous-medium flow"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string run_config;

  CLI::App* space = app.add_subcommand("convergence-space", "spatial accuracy sweep");
  CLI::App* time = app.add_subcommand("convergence-time",
                                      "temporal accuracy sweep on conforming and "
                                      "nonconforming grids");
  CLI::App* gmres = app.add_subcommand("gmres-study", "GMRES iteration counts vs mesh size");
  CLI::App* tc2 = app.add_subcommand("testcase2", "pressure-drop self-convergence study");
  CLI::App* runc = app.add_subcommand("run", "solve a single configuration");
  for (CLI::App* cmd : {space, time, gmres, tc2, runc}) add_common(cmd, opts);
  runc->add_option("config_file", run_config, "configuration file")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (space->parsed()) {
      emit(opts, "convergence_space.csv", run_convergence_space(load_config(opts, {})));
    } else if (time->parsed()) {
      ExperimentConfig defaults;
      defaults.resolution = 32;
      emit(opts, "convergence_time.csv", run_convergence_time(load_config(opts, defaults)));
    } else if (gmres->parsed()) {
      emit(opts, "gmres_study.csv", run_gmres_count_study(load_config(opts, {})));
    } else if (tc2->parsed()) {
      const ExperimentConfig cfg = load_config(opts, pressure_drop_defaults());
      std::vector<RunRecord> records = run_pressure_drop_study(cfg);
      if (opts.config_path.empty()) {
        ExperimentConfig disc_cfg = pressure_drop_discontinuous_defaults();
        disc_cfg.solver = cfg.solver;
        for (RunRecord rec : run_pressure_drop_study(disc_cfg, false)) {
          rec.label = "discontinuous-" + rec.label;
          records.push_back(rec);
        }
      }
      emit(opts, "testcase2.csv", records);
    } else if (runc->parsed()) {
      if (!run_config.empty()) opts.config_path = run_config;
      return run_single(opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
