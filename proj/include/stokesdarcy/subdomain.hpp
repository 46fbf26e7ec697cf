#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stokesdarcy/assembly.hpp"
#include "stokesdarcy/problem_data.hpp"
#include "stokesdarcy/sparse.hpp"
#include "stokesdarcy/time_grid.hpp"

namespace stokesdarcy {

struct InnerTolerances {
  double tol = 1e-10;          // relative increment
  double residual_tol = 1e-9;  // relative algebraic residual
  int maxit = 20;
};

/// Discrete trajectory of one subdomain: the initial state plus one full
/// coefficient vector per time step.
struct SubdomainTrajectory {
  TimeGrid grid;
  Eigen::VectorXd initial;
  std::vector<Eigen::VectorXd> states;

  const Eigen::VectorXd& at_step(int m) const { return m < 0 ? initial : states[m]; }
};

namespace detail {

// Damped Newton iteration for one implicit time step. `assemble` receives the
// current iterate and a flag selecting whether the Newton correction block is
// needed; it returns the assembled step with Dirichlet data filled in.
inline Eigen::VectorXd newton_step(
    const std::function<AssembledStep(const Eigen::VectorXd&, bool)>& assemble,
    const Eigen::VectorXd& guess, const InnerTolerances& inner, bool linear,
    ConstrainedOperator* cached_jac) {
  if (linear) {
    if (cached_jac && cached_jac->full().rows() > 0) {
      AssembledStep step = assemble(guess, false);
      return cached_jac->solve(step.system.rhs, step.system.dirichlet);
    }
    AssembledStep step = assemble(guess, false);
    ConstrainedOperator op(step.system.n, step.system.triplets, step.system.dirichlet);
    Eigen::VectorXd u = op.solve(step.system.rhs);
    if (cached_jac) *cached_jac = std::move(op);
    return u;
  }

  Eigen::VectorXd u = guess;
  AssembledStep step = assemble(u, true);
  const int n = step.system.n;
  // Impose the Dirichlet data on the iterate before measuring the residual.
  for (int i = 0; i < n; ++i)
    if (step.system.constrained(i)) u[i] = step.system.dirichlet[i];

  for (int it = 0; it < inner.maxit; ++it) {
    if (it > 0) step = assemble(u, true);
    ConstrainedOperator picard(n, step.system.triplets, step.system.dirichlet);
    Eigen::VectorXd res = picard.residual(u, step.system.rhs);
    const double scale = std::max(1.0, step.system.rhs.norm());
    if (res.norm() <= inner.residual_tol * scale) return u;

    std::vector<Triplet> jac = step.system.triplets;
    jac.insert(jac.end(), step.newton.begin(), step.newton.end());
    ConstrainedOperator jac_op(n, jac, step.system.dirichlet);
    Eigen::VectorXd delta = jac_op.solve_homogeneous(-res);

    double alpha = 1.0;
    Eigen::VectorXd trial;
    for (int k = 0; k < 6; ++k) {
      trial = u + alpha * delta;
      AssembledStep probe = assemble(trial, false);
      ConstrainedOperator probe_op(n, probe.system.triplets, probe.system.dirichlet);
      if (probe_op.residual(trial, probe.system.rhs).norm() < res.norm()) break;
      alpha *= 0.5;
    }
    u = trial;
    if (alpha * delta.norm() <= inner.tol * std::max(1.0, u.norm())) {
      step = assemble(u, true);
      ConstrainedOperator check(n, step.system.triplets, step.system.dirichlet);
      if (check.residual(u, step.system.rhs).norm() <= inner.residual_tol * scale) return u;
    }
  }
  throw std::runtime_error("subdomain Newton iteration did not converge");
}

inline Eigen::Vector2d node_coordinate(const Mesh& mesh, const DofMap& dofs, int node) {
  const int nv = static_cast<int>(mesh.vertices.size());
  if (node < nv) return mesh.vertices[node];
  const Edge& e = mesh.edges[node - nv];
  return 0.5 * (mesh.vertices[e.v0] + mesh.vertices[e.v1]);
}

}  // namespace detail

inline Eigen::VectorXd stokes_initial_state(const Discretization& disc, const ProblemData& data) {
  const DofMap& dofs = disc.dofs_f;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.n_total());
  if (!data.initial_velocity) return u;
  for (int n = 0; n < dofs.n_scalar; ++n) {
    Vec2 x = detail::node_coordinate(disc.mesh_f, dofs, n);
    Vec2 v = data.initial_velocity(x, 0.0);
    u[dofs.ux(n)] = v[0];
    u[dofs.uy(n)] = v[1];
  }
  return u;
}

inline Eigen::VectorXd darcy_initial_state(const Discretization& disc, const ProblemData& data) {
  const DofMap& dofs = disc.dofs_p;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.n_total());
  if (!data.initial_pressure) return u;
  for (int v = 0; v < dofs.n_pressure; ++v)
    u[dofs.pressure(v)] = data.initial_pressure(disc.mesh_p.vertices[v], 0.0);
  return u;
}

/// Solve the nonlinear Stokes trajectory for a given multiplier field on the
/// fluid time grid. Backward Euler in time, damped Newton per step. For a
/// Newtonian fluid each step is a single linear solve and the factorization
/// is cached across steps of equal length.
inline SubdomainTrajectory solve_stokes_trajectory(const Discretization& disc,
                                                   const ProblemData& data,
                                                   const PiecewiseConstantTimeField& lambda,
                                                   const InnerTolerances& inner = {}) {
  SubdomainTrajectory traj;
  traj.grid = lambda.grid;
  traj.initial = stokes_initial_state(disc, data);
  const bool linear = data.fluid_visc.linear();
  std::map<double, ConstrainedOperator> cache;

  Eigen::VectorXd prev = traj.initial;
  for (int m = 0; m < traj.grid.intervals(); ++m) {
    const double dt = traj.grid.length(m);
    const double t = traj.grid.end_of(m);
    const Eigen::VectorXd& lam = lambda.slabs[m];
    auto assemble = [&](const Eigen::VectorXd& u_star, bool with_newton) {
      StokesStepSpec spec;
      spec.visc = data.fluid_visc;
      spec.c_bjs = data.c_bjs;
      spec.dt = dt;
      spec.time = t;
      spec.u_star = &u_star;
      spec.with_newton = with_newton;
      spec.u_prev = &prev;
      spec.body_force = data.body_force;
      spec.mass_source = data.mass_source;
      spec.lambda = &lam;
      spec.stress_jump = data.stress_jump;
      spec.bc = &data.stokes_bc;
      return assemble_stokes_system(disc.mesh_f, disc.dofs_f, spec);
    };
    ConstrainedOperator* slot = linear ? &cache[dt] : nullptr;
    prev = detail::newton_step(assemble, prev, inner, linear, slot);
    traj.states.push_back(prev);
  }
  return traj;
}

/// Solve the nonlinear Darcy trajectory for a given multiplier field on the
/// porous time grid.
inline SubdomainTrajectory solve_darcy_trajectory(const Discretization& disc,
                                                  const ProblemData& data,
                                                  const PiecewiseConstantTimeField& lambda,
                                                  const InnerTolerances& inner = {}) {
  SubdomainTrajectory traj;
  traj.grid = lambda.grid;
  traj.initial = darcy_initial_state(disc, data);
  const bool linear = data.porous_visc.linear();
  std::map<double, ConstrainedOperator> cache;

  Eigen::VectorXd prev = traj.initial;
  for (int m = 0; m < traj.grid.intervals(); ++m) {
    const double dt = traj.grid.length(m);
    const double t = traj.grid.end_of(m);
    const Eigen::VectorXd& lam = lambda.slabs[m];
    auto assemble = [&](const Eigen::VectorXd& u_star, bool with_newton) {
      DarcyStepSpec spec;
      spec.visc = data.porous_visc;
      spec.kappa = data.kappa;
      spec.S_p = data.S_p;
      spec.eta_stab = data.eta_stab;
      spec.dt = dt;
      spec.time = t;
      spec.u_star = &u_star;
      spec.with_newton = with_newton;
      spec.p_prev = &prev;
      spec.sink_source = data.sink_source;
      spec.momentum_source = data.momentum_source;
      spec.lambda = &lam;
      spec.bc = &data.darcy_bc;
      return assemble_darcy_system(disc.mesh_p, disc.dofs_p, spec);
    };
    ConstrainedOperator* slot = linear ? &cache[dt] : nullptr;
    prev = detail::newton_step(assemble, prev, inner, linear, slot);
    traj.states.push_back(prev);
  }
  return traj;
}

/// Frozen linearization of the Stokes trajectory map around a base
/// trajectory: applies the derivative with respect to the multiplier field.
/// Factorizations are built once and reused for every application.
class LinearizedStokesOp {
public:
  LinearizedStokesOp() = default;
  LinearizedStokesOp(const Discretization& disc, const ProblemData& data,
                     const SubdomainTrajectory& base)
      : disc_(&disc), grid_(base.grid) {
    const bool linear = data.fluid_visc.linear();
    std::map<double, int> linear_cache;
    for (int m = 0; m < grid_.intervals(); ++m) {
      const double dt = grid_.length(m);
      if (linear) {
        auto it = linear_cache.find(dt);
        if (it != linear_cache.end()) {
          step_index_.push_back(it->second);
          continue;
        }
      }
      StokesStepSpec spec;
      spec.visc = data.fluid_visc;
      spec.c_bjs = data.c_bjs;
      spec.dt = dt;
      spec.time = grid_.end_of(m);
      spec.u_star = &base.states[m];
      spec.with_newton = true;
      spec.homogeneous_bc = true;
      spec.bc = &data.stokes_bc;
      AssembledStep step = assemble_stokes_system(disc.mesh_f, disc.dofs_f, spec);
      std::vector<Triplet> jac = step.system.triplets;
      jac.insert(jac.end(), step.newton.begin(), step.newton.end());
      if (linear) {
        ops_.emplace_back(step.system.n, jac, step.system.dirichlet);
        step_index_.push_back(static_cast<int>(ops_.size()) - 1);
        linear_cache[dt] = step_index_.back();
      } else {
        // Nonlinear viscosity: one distinct matrix per step. Holding a direct
        // factorization per step would exhaust memory on long trajectories,
        // so the steps share one factorization through the family.
        family_.add(step.system.n, jac, step.system.dirichlet);
      }
    }
  }

  const TimeGrid& grid() const { return grid_; }

  /// States of the linearized trajectory driven by multiplier slabs `h`.
  std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& h) const {
    std::vector<Eigen::VectorXd> states;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(disc_->dofs_f.n_total());
    for (int m = 0; m < grid_.intervals(); ++m) {
      Eigen::VectorXd rhs = -(disc_->C_f * h[m]);
      rhs += (1.0 / grid_.length(m)) * (disc_->Mv_f * prev);
      prev = family_.size() > 0 ? family_.solve_homogeneous(m, rhs)
                                : ops_[step_index_[m]].solve_homogeneous(rhs);
      states.push_back(prev);
    }
    return states;
  }

private:
  const Discretization* disc_ = nullptr;
  TimeGrid grid_;
  std::vector<ConstrainedOperator> ops_;
  std::vector<int> step_index_;
  SharedFactorizationFamily family_;
};

/// Frozen linearization of the Darcy trajectory map.
class LinearizedDarcyOp {
public:
  LinearizedDarcyOp() = default;
  LinearizedDarcyOp(const Discretization& disc, const ProblemData& data,
                    const SubdomainTrajectory& base)
      : disc_(&disc), grid_(base.grid), S_p_(data.S_p) {
    const bool linear = data.porous_visc.linear();
    std::map<double, int> linear_cache;
    for (int m = 0; m < grid_.intervals(); ++m) {
      const double dt = grid_.length(m);
      if (linear) {
        auto it = linear_cache.find(dt);
        if (it != linear_cache.end()) {
          step_index_.push_back(it->second);
          continue;
        }
      }
      DarcyStepSpec spec;
      spec.visc = data.porous_visc;
      spec.kappa = data.kappa;
      spec.S_p = data.S_p;
      spec.eta_stab = data.eta_stab;
      spec.dt = dt;
      spec.time = grid_.end_of(m);
      spec.u_star = &base.states[m];
      spec.with_newton = true;
      spec.homogeneous_bc = true;
      spec.bc = &data.darcy_bc;
      AssembledStep step = assemble_darcy_system(disc.mesh_p, disc.dofs_p, spec);
      std::vector<Triplet> jac = step.system.triplets;
      jac.insert(jac.end(), step.newton.begin(), step.newton.end());
      ops_.emplace_back(step.system.n, jac, step.system.dirichlet);
      step_index_.push_back(static_cast<int>(ops_.size()) - 1);
      if (linear) linear_cache[dt] = step_index_.back();
    }
  }

  const TimeGrid& grid() const { return grid_; }

  std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& h) const {
    std::vector<Eigen::VectorXd> states;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(disc_->dofs_p.n_total());
    for (int m = 0; m < grid_.intervals(); ++m) {
      Eigen::VectorXd rhs = -(disc_->C_p * h[m]);
      rhs += (S_p_ / grid_.length(m)) * (disc_->Mp_p * prev);
      prev = ops_[step_index_[m]].solve_homogeneous(rhs);
      states.push_back(prev);
    }
    return states;
  }

private:
  const Discretization* disc_ = nullptr;
  TimeGrid grid_;
  double S_p_ = 1.0;
  std::vector<ConstrainedOperator> ops_;
  std::vector<int> step_index_;
};

/// Linearized porous-medium steps augmented with a weak normal-flux
/// constraint on the interface: solves for the multiplier that realizes a
/// prescribed normal trace. The storage term makes each augmented step
/// nonsingular, so no gauge fixing is needed.
class DarcyNormalTraceOp {
public:
  DarcyNormalTraceOp() = default;
  DarcyNormalTraceOp(const Discretization& disc, const ProblemData& data,
                     const SubdomainTrajectory& base)
      : disc_(&disc), grid_(base.grid), S_p_(data.S_p) {
    const int n = disc.dofs_p.n_total();
    const int nl = disc.n_lambda();
    const bool linear = data.porous_visc.linear();
    std::map<double, int> linear_cache;
    for (int m = 0; m < grid_.intervals(); ++m) {
      const double dt = grid_.length(m);
      if (linear) {
        auto it = linear_cache.find(dt);
        if (it != linear_cache.end()) {
          step_index_.push_back(it->second);
          continue;
        }
      }
      DarcyStepSpec spec;
      spec.visc = data.porous_visc;
      spec.kappa = data.kappa;
      spec.S_p = data.S_p;
      spec.eta_stab = data.eta_stab;
      spec.dt = dt;
      spec.time = grid_.end_of(m);
      spec.u_star = &base.states[m];
      spec.with_newton = true;
      spec.homogeneous_bc = true;
      spec.bc = &data.darcy_bc;
      AssembledStep step = assemble_darcy_system(disc.mesh_p, disc.dofs_p, spec);
      std::vector<Triplet> aug = step.system.triplets;
      aug.insert(aug.end(), step.newton.begin(), step.newton.end());
      for (int k = 0; k < disc.C_p.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(disc.C_p, k); it; ++it) {
          aug.emplace_back(static_cast<int>(it.row()), n + static_cast<int>(it.col()),
                           it.value());
          aug.emplace_back(n + static_cast<int>(it.col()), static_cast<int>(it.row()),
                           it.value());
        }
      std::vector<double> dirichlet(n + nl, std::numeric_limits<double>::quiet_NaN());
      for (int i = 0; i < n; ++i) dirichlet[i] = step.system.dirichlet[i];
      ops_.emplace_back(n + nl, aug, std::move(dirichlet));
      step_index_.push_back(static_cast<int>(ops_.size()) - 1);
      if (linear) linear_cache[dt] = step_index_.back();
    }
  }

  const TimeGrid& grid() const { return grid_; }

  /// For per-slab dual data `r` (already in dual form, i.e. tested against
  /// the multiplier basis) return the multiplier slabs realizing them.
  std::vector<Eigen::VectorXd> apply_dual(const std::vector<Eigen::VectorXd>& r) const {
    const int n = disc_->dofs_p.n_total();
    const int nl = disc_->n_lambda();
    std::vector<Eigen::VectorXd> mu;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
    for (int m = 0; m < grid_.intervals(); ++m) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + nl);
      rhs.head(n) = (S_p_ / grid_.length(m)) * (disc_->Mp_p * prev);
      rhs.tail(nl) = r[m];
      Eigen::VectorXd sol = ops_[step_index_[m]].solve_homogeneous(rhs);
      prev = sol.head(n);
      mu.push_back(sol.tail(nl));
    }
    return mu;
  }

  /// Nodal normal-trace data `g` per slab: constraint rhs is the mass-weighted
  /// dual of `g`.
  std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& g) const {
    std::vector<Eigen::VectorXd> dual(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) dual[m] = disc_->M_gamma * g[m];
    return apply_dual(dual);
  }

private:
  const Discretization* disc_ = nullptr;
  TimeGrid grid_;
  double S_p_ = 1.0;
  std::vector<ConstrainedOperator> ops_;
  std::vector<int> step_index_;
};

}  // namespace stokesdarcy
