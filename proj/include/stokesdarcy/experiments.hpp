#pragma once

#include "stokesdarcy/config.hpp"
#include "stokesdarcy/error_norms.hpp"
#include "stokesdarcy/interface_solver.hpp"
#include "stokesdarcy/manufactured.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace stokesdarcy {

/// One solved configuration: discretization parameters, the six error
/// columns, solver counts and the wall-clock of the interface solve.
struct RunRecord {
  std::string label;
  double h = 0.0;
  double dt_f = 0.0;
  double dt_p = 0.0;
  double r_f = 2.0;
  double r_p = 2.0;
  bool precond = false;
  FieldErrors fluid{};   // u_f L2 / H1, p_f L2
  FieldErrors porous{};  // u_p L2 / div, p_p L2
  int newton_iterations = 0;
  int gmres_iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;

  double up_hdiv() const { return std::hypot(porous.u_l2, porous.u_div); }

  /// Errors in CSV column order.
  std::array<double, 6> error_columns() const {
    return {fluid.u_l2, fluid.u_h1, fluid.p_l2, porous.u_l2, up_hdiv(), porous.p_l2};
  }
};

inline const char* csv_header() {
  return "case,h,dt_f,dt_p,r_f,r_p,precond,"
         "uf_l2,uf_h1,pf_l2,up_l2,up_hdiv,pp_l2,"
         "order_uf_l2,order_uf_h1,order_pf_l2,order_up_l2,order_up_hdiv,order_pp_l2,"
         "gmres_iterations,wall_seconds";
}

/// Writes one row per record; observed orders log2(e_prev/e_cur) are filled
/// whenever the previous record carries the same label (refinement pairs).
inline void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << csv_header() << "\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunRecord& rec = records[i];
    out << rec.label << ',' << rec.h << ',' << rec.dt_f << ',' << rec.dt_p << ',' << rec.r_f
        << ',' << rec.r_p << ',' << (rec.precond ? "on" : "off");
    for (double e : rec.error_columns()) out << ',' << e;
    const bool chained = i > 0 && records[i - 1].label == rec.label;
    for (int c = 0; c < 6; ++c) {
      out << ',';
      if (chained) {
        const double prev = records[i - 1].error_columns()[c];
        const double cur = rec.error_columns()[c];
        if (prev > 0.0 && cur > 0.0) out << std::log2(prev / cur);
      }
    }
    out << ',' << rec.gmres_iterations << ',' << rec.wall_seconds << "\n";
  }
}

inline void write_csv_file(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, records);
}

namespace detail {

inline CrossModelParams with_exponent(CrossModelParams p, double r) {
  p.r = r;
  return p;
}

}  // namespace detail

/// Solves the manufactured problem on an n x n mesh per subdomain and
/// measures errors against the exact solution at the final time.
inline RunRecord run_manufactured_case(const ExperimentConfig& cfg, int n, const TimeGrid& gf,
                                       const TimeGrid& gp, double r,
                                       const std::string& label = "manufactured") {
  const ManufacturedCase mc =
      manufactured_case(detail::with_exponent(cfg.fluid_visc, r),
                        detail::with_exponent(cfg.porous_visc, r), cfg.kappa, cfg.S_p);
  const Discretization disc = build_discretization(mc.fluid_rect, mc.porous_rect, n, n, n);
  const auto lam0 = PiecewiseConstantTimeField::zero(gf, disc.n_lambda());

  // A single Newton iteration solves the Newtonian (r = 2) interface problem
  // exactly. For shear-thinning viscosities the accuracy study needs the
  // interface Newton iterated to tolerance, otherwise the leftover Newton
  // residual dominates the discretization error.
  OuterConfig solver = cfg.solver;
  if (r != 2.0) {
    solver.newton_maxit = std::max(solver.newton_maxit, 12);
    if (solver.newton_tol <= 0.0) solver.newton_tol = 1e-9;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const NewtonResult sol = newton_solve(disc, mc.data, lam0, gp, solver);
  const auto t1 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.label = label;
  rec.h = 1.0 / n;
  rec.dt_f = gf.length(0);
  rec.dt_p = gp.length(0);
  rec.r_f = rec.r_p = r;
  rec.precond = cfg.solver.precond;
  const double T = gf.horizon();
  rec.fluid = compute_errors(disc.mesh_f, disc.dofs_f, sol.final_eval.fluid.states.back(),
                             mc.u_f, mc.p_f, T);
  rec.porous = compute_errors(disc.mesh_p, disc.dofs_p, sol.final_eval.darcy.states.back(),
                              mc.u_p, mc.p_p, T);
  rec.newton_iterations = static_cast<int>(sol.iterations.size());
  rec.gmres_iterations = sol.iterations.empty() ? 0 : sol.iterations.front().gmres_iterations;
  rec.converged = sol.iterations.empty() || sol.iterations.front().gmres_converged;
  rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return rec;
}

/// Spatial accuracy sweep: h-halving under fixed time grids, once with the
/// Newtonian limit r = 2 and once shear-thinning r = 1.5.
inline std::vector<RunRecord> run_convergence_space(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  const TimeGrid gf = cfg.fluid_grid();
  const TimeGrid gp = cfg.porous_grid();
  for (double r : {2.0, 1.5}) {
    const std::string label = r == 2.0 ? "space-linear" : "space-nonlinear";
    for (int n : {4, 8, 16, 32})
      records.push_back(run_manufactured_case(cfg, n, gf, gp, r, label));
  }
  return records;
}

/// Temporal accuracy sweep on a fixed mesh: coarse-conforming,
/// fine-conforming and nonconforming (fluid coarse / porous fine) grids for a
/// sequence of halved steps, errors at T = 0.2.
inline std::vector<RunRecord> run_convergence_time(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  const double T = 0.2;
  const std::vector<double> coarse_steps{0.2, 0.1, 0.05, 0.025};
  const double r = cfg.fluid_visc.r;
  const int n = cfg.resolution;
  for (const char* type : {"time-coarse", "time-fine", "time-nonconforming"}) {
    for (double dtc : coarse_steps) {
      const int mc = static_cast<int>(std::round(T / dtc));
      const TimeGrid coarse = uniform_grid(T, mc);
      const TimeGrid fine = uniform_grid(T, 2 * mc);
      TimeGrid gf = coarse, gp = coarse;
      if (std::string(type) == "time-fine") gf = gp = fine;
      if (std::string(type) == "time-nonconforming") gp = fine;
      records.push_back(run_manufactured_case(cfg, n, gf, gp, r, type));
    }
  }
  return records;
}

/// GMRES iteration counts under mesh refinement, with and without the
/// interface preconditioner, at a tight tolerance.
inline std::vector<RunRecord> run_gmres_count_study(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  ExperimentConfig local = cfg;
  local.solver.gmres_tol = 1e-10;
  local.solver.gmres_maxit = std::max(local.solver.gmres_maxit, 200);
  const TimeGrid gf = local.fluid_grid();
  const TimeGrid gp = local.porous_grid();
  for (double r : {2.0, 1.5}) {
    for (bool precond : {false, true}) {
      local.solver.precond = precond;
      std::ostringstream label;
      label << "gmres-" << (r == 2.0 ? "linear" : "nonlinear") << '-'
            << (precond ? "precond" : "plain");
      for (int n : {4, 8, 16, 32})
        records.push_back(run_manufactured_case(local, n, gf, gp, r, label.str()));
    }
  }
  return records;
}

/// Pressure-drop problem data: unit normal stress on the fluid top, zero
/// pressure datum on the porous bottom, no-slip / no-flow side walls, zero
/// initial velocity and pressure.
inline ProblemData pressure_drop_data(const ExperimentConfig& cfg) {
  ProblemData d = default_problem_data();
  d.fluid_visc = cfg.fluid_visc;
  d.porous_visc = cfg.porous_visc;
  d.kappa = cfg.kappa;
  d.S_p = cfg.S_p;
  d.c_bjs = cfg.alpha_bjs;
  d.eta_stab = cfg.eta_stab;
  d.stokes_bc.dirichlet[static_cast<int>(Side::top)] = {};
  d.stokes_bc.normal_stress[static_cast<int>(Side::top)] = [](const Vec2&, double) {
    return 1.0;
  };
  d.darcy_bc.normal_flux[static_cast<int>(Side::bottom)] = {};
  d.darcy_bc.pressure[static_cast<int>(Side::bottom)] = [](const Vec2&, double) {
    return 0.0;
  };
  d.initial_velocity = [](const Vec2&, double) { return Vec2{0.0, 0.0}; };
  d.initial_pressure = [](const Vec2&, double) { return 0.0; };
  return d;
}

/// Shear-thinning pressure-drop defaults: matching Cross parameters in both
/// subdomains, unit square stack, T = 1 and a fine reference time step.
inline ExperimentConfig pressure_drop_defaults() {
  ExperimentConfig cfg;
  cfg.test_case = 2;
  cfg.resolution = 32;
  cfg.horizon = 1.0;
  cfg.dt_fluid = 0.0625;
  cfg.dt_porous = 0.125;
  cfg.fluid_visc = CrossModelParams{1.0, 10.0, 1.0, 1.35};
  cfg.porous_visc = CrossModelParams{1.0, 10.0, 1.0, 1.35};
  return cfg;
}

/// Discontinuous-parameter variant of the pressure-drop case.
inline ExperimentConfig pressure_drop_discontinuous_defaults() {
  ExperimentConfig cfg = pressure_drop_defaults();
  cfg.dt_fluid = 0.125;
  cfg.dt_porous = 0.25;
  cfg.fluid_visc = CrossModelParams{0.5, 1.0, 1.0, 1.35};
  cfg.porous_visc = CrossModelParams{1.0, 10.0, 0.001, 1.35};
  return cfg;
}

struct PressureDropSolution {
  Eigen::VectorXd fluid_final;
  Eigen::VectorXd porous_final;
  std::vector<NewtonIterationInfo> iterations;
  double wall_seconds = 0.0;
};

inline PressureDropSolution solve_pressure_drop(const Discretization& disc,
                                                const ProblemData& data,
                                                const OuterConfig& solver, double T,
                                                double dt_f, double dt_p) {
  const TimeGrid gf = uniform_grid(T, static_cast<int>(std::round(T / dt_f)));
  const TimeGrid gp = uniform_grid(T, static_cast<int>(std::round(T / dt_p)));
  const auto lam0 = PiecewiseConstantTimeField::zero(gf, disc.n_lambda());
  const auto t0 = std::chrono::steady_clock::now();
  const NewtonResult sol = newton_solve(disc, data, lam0, gp, solver);
  const auto t1 = std::chrono::steady_clock::now();
  PressureDropSolution out;
  out.fluid_final = sol.final_eval.fluid.states.back();
  out.porous_final = sol.final_eval.darcy.states.back();
  out.iterations = sol.iterations;
  out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return out;
}

/// Self-convergence study of the pressure-drop case against a shared
/// fine-time-step reference: the halved-step sweep with the fluid step equal
/// to half the porous one, then the conforming/nonconforming comparison.
inline std::vector<RunRecord> run_pressure_drop_study(const ExperimentConfig& cfg,
                                                      bool include_sweep = true,
                                                      double dt_ref = 0.01) {
  const ProblemData data = pressure_drop_data(cfg);
  const Discretization disc = build_discretization(cfg.fluid_rect, cfg.porous_rect,
                                                   cfg.resolution, cfg.resolution,
                                                   cfg.resolution);
  const double T = cfg.horizon;
  const PressureDropSolution ref =
      solve_pressure_drop(disc, data, cfg.solver, T, dt_ref, dt_ref);

  auto record = [&](const std::string& label, double dt_f, double dt_p) {
    const PressureDropSolution run =
        solve_pressure_drop(disc, data, cfg.solver, T, dt_f, dt_p);
    RunRecord rec;
    rec.label = label;
    rec.h = 1.0 / cfg.resolution;
    rec.dt_f = dt_f;
    rec.dt_p = dt_p;
    rec.r_f = cfg.fluid_visc.r;
    rec.r_p = cfg.porous_visc.r;
    rec.precond = cfg.solver.precond;
    rec.fluid = compute_difference_errors(disc.mesh_f, disc.dofs_f, run.fluid_final,
                                          ref.fluid_final);
    rec.porous = compute_difference_errors(disc.mesh_p, disc.dofs_p, run.porous_final,
                                           ref.porous_final);
    rec.newton_iterations = static_cast<int>(run.iterations.size());
    rec.gmres_iterations =
        run.iterations.empty() ? 0 : run.iterations.front().gmres_iterations;
    rec.converged = run.iterations.empty() || run.iterations.front().gmres_converged;
    rec.wall_seconds = run.wall_seconds;
    return rec;
  };

  std::vector<RunRecord> records;
  if (include_sweep)
    for (double dt_p : {0.5, 0.25, 0.125, 0.0625})
      records.push_back(record("drop-nonconforming", dt_p / 2.0, dt_p));
  records.push_back(record("drop-coarse-conforming", cfg.dt_porous, cfg.dt_porous));
  records.push_back(record("drop-compare-nonconforming", cfg.dt_fluid, cfg.dt_porous));
  records.push_back(record("drop-fine-conforming", cfg.dt_fluid, cfg.dt_fluid));
  return records;
}

}  // namespace stokesdarcy
