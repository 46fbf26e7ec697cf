#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "stokesdarcy/problem_data.hpp"
#include "stokesdarcy/subdomain.hpp"
#include "stokesdarcy/time_grid.hpp"

namespace stokesdarcy {

struct OuterConfig {
  int newton_maxit = 1;
  double newton_tol = 0.0;  // 0: run the fixed number of iterations
  double gmres_tol = 1e-7;
  int gmres_maxit = 100;
  bool precond = false;
  InnerTolerances inner{};
};

inline Eigen::VectorXd stack_slabs(const std::vector<Eigen::VectorXd>& slabs) {
  if (slabs.empty()) return {};
  const int nl = static_cast<int>(slabs[0].size());
  Eigen::VectorXd out(nl * static_cast<int>(slabs.size()));
  for (std::size_t m = 0; m < slabs.size(); ++m) out.segment(nl * m, nl) = slabs[m];
  return out;
}

inline std::vector<Eigen::VectorXd> unstack_slabs(const Eigen::VectorXd& v, int n_slabs) {
  const int nl = static_cast<int>(v.size()) / n_slabs;
  std::vector<Eigen::VectorXd> out(n_slabs);
  for (int m = 0; m < n_slabs; ++m) out[m] = v.segment(nl * m, nl);
  return out;
}

/// Value of the interface flux-balance map at a multiplier field, together
/// with the subdomain trajectories it was evaluated from. Slab m of the
/// residual is |I_m| (C_f^T U_f^m + C_p^T U_p^{n(m)}), a dual vector on the
/// multiplier space, where n(m) is the porous step covering the end of the
/// fluid slab m.
struct PsiEvaluation {
  std::vector<Eigen::VectorXd> residual;
  SubdomainTrajectory fluid;
  SubdomainTrajectory darcy;
};

namespace detail {

/// Index of the porous interval whose value represents time t (the interval
/// (t_{n-1}, t_n] containing t, clamped to the grid).
inline int interval_containing(const TimeGrid& grid, double t) {
  const double tol = 1e-12 * grid.horizon();
  for (int n = 0; n < grid.intervals(); ++n)
    if (t <= grid.end_of(n) + tol) return n;
  return grid.intervals() - 1;
}

inline std::vector<Eigen::VectorXd> interface_flux_balance(
    const Discretization& disc, const TimeGrid& grid_f,
    const std::vector<Eigen::VectorXd>& states_f, const TimeGrid& grid_p,
    const std::vector<Eigen::VectorXd>& states_p) {
  // The backward-Euler flux balance is collocated at the end of each fluid
  // slab: the porous flux entering slab m is the one of the porous step that
  // covers the slab's end time. Averaging the porous flux over the slab
  // instead would shift the multiplier by O(dt_f * d(flux)/dt) and destroy
  // the accuracy of the finer subdomain on nonconforming grids.
  std::vector<Eigen::VectorXd> res;
  for (int m = 0; m < grid_f.intervals(); ++m) {
    const int n = interval_containing(grid_p, grid_f.end_of(m));
    res.push_back(grid_f.length(m) *
                  (disc.C_f.transpose() * states_f[m] +
                   disc.C_p.transpose() * states_p[n])
                      .eval());
  }
  return res;
}

}  // namespace detail

/// Evaluate the interface map: both subdomain trajectories are solved
/// concurrently, then the interface fluxes are matched on the fluid grid.
inline PsiEvaluation evaluate_psi(const Discretization& disc, const ProblemData& data,
                                  const PiecewiseConstantTimeField& lambda,
                                  const TimeGrid& grid_p, const InnerTolerances& inner = {}) {
  const PiecewiseConstantTimeField lambda_p = project(lambda, grid_p);

  PsiEvaluation out;
  std::exception_ptr err_f, err_p;
  std::thread worker([&] {
    try {
      out.darcy = solve_darcy_trajectory(disc, data, lambda_p, inner);
    } catch (...) {
      err_p = std::current_exception();
    }
  });
  try {
    out.fluid = solve_stokes_trajectory(disc, data, lambda, inner);
  } catch (...) {
    err_f = std::current_exception();
  }
  worker.join();
  if (err_f) std::rethrow_exception(err_f);
  if (err_p) std::rethrow_exception(err_p);

  out.residual = detail::interface_flux_balance(disc, lambda.grid, out.fluid.states, grid_p,
                                                out.darcy.states);
  return out;
}

/// Derivative of the interface map at the base trajectories: matrix-free
/// application to a multiplier increment given on the fluid grid.
class PsiPrime {
public:
  PsiPrime(const Discretization& disc, const ProblemData& data, const PsiEvaluation& base,
           const TimeGrid& grid_p)
      : disc_(&disc),
        grid_f_(base.fluid.grid),
        grid_p_(grid_p),
        stokes_(disc, data, base.fluid),
        darcy_(disc, data, base.darcy) {}

  std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& h) const {
    PiecewiseConstantTimeField hf;
    hf.grid = grid_f_;
    hf.slabs = h;
    const PiecewiseConstantTimeField hp = project(hf, grid_p_);

    std::vector<Eigen::VectorXd> states_f, states_p;
    std::exception_ptr err_f, err_p;
    std::thread worker([&] {
      try {
        states_p = darcy_.apply(hp.slabs);
      } catch (...) {
        err_p = std::current_exception();
      }
    });
    try {
      states_f = stokes_.apply(h);
    } catch (...) {
      err_f = std::current_exception();
    }
    worker.join();
    if (err_f) std::rethrow_exception(err_f);
    if (err_p) std::rethrow_exception(err_p);

    return detail::interface_flux_balance(*disc_, grid_f_, states_f, grid_p_, states_p);
  }

  Eigen::VectorXd apply_stacked(const Eigen::VectorXd& h) const {
    return stack_slabs(apply(unstack_slabs(h, grid_f_.intervals())));
  }

private:
  const Discretization* disc_;
  TimeGrid grid_f_, grid_p_;
  LinearizedStokesOp stokes_;
  LinearizedDarcyOp darcy_;
};

/// Approximate inverse of the fluid part of the linearized interface map:
/// per step, a linearized Stokes solve with the residual imposed as a weak
/// normal-trace constraint; the constraint multiplier is the output.
/// Approximate inverse of the interface derivative built from the porous
/// subproblem alone: the residual is rescaled to dual trace data, moved to
/// the porous grid, realized there by augmented flux-constrained solves, and
/// the resulting multiplier is carried back to the fluid grid. The porous
/// contribution dominates the interface operator under refinement, so this
/// clusters the preconditioned spectrum near unity.
class InterfacePreconditioner {
public:
  InterfacePreconditioner(const Discretization& disc, const ProblemData& data,
                          const PsiEvaluation& base)
      : grid_f_(base.fluid.grid), op_(disc, data, resample(base)) {}

  std::vector<Eigen::VectorXd> apply(const std::vector<Eigen::VectorXd>& res) const {
    std::vector<Eigen::VectorXd> duals;
    duals.reserve(res.size());
    for (std::size_t m = 0; m < res.size(); ++m)
      duals.push_back(res[m] / grid_f_.length(m));
    return op_.apply_dual(duals);
  }

  Eigen::VectorXd apply_stacked(const Eigen::VectorXd& r) const {
    return stack_slabs(apply(unstack_slabs(r, grid_f_.intervals())));
  }

private:
  /// The preconditioner steps on the multiplier (fluid) time grid so its map
  /// is square and full-rank on the multiplier space even when the two
  /// subdomain grids do not match; the linearization states are taken from
  /// the porous step covering each fluid slab.
  static SubdomainTrajectory resample(const PsiEvaluation& base) {
    SubdomainTrajectory out;
    out.grid = base.fluid.grid;
    out.initial = base.darcy.initial;
    for (int m = 0; m < out.grid.intervals(); ++m) {
      const int n = detail::interval_containing(base.darcy.grid, out.grid.end_of(m));
      out.states.push_back(base.darcy.states[n]);
    }
    return out;
  }

  TimeGrid grid_f_;
  DarcyNormalTraceOp op_;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // residual norms, starting with ||b||
};

/// Full (no restart) GMRES with modified Gram-Schmidt and optional right
/// preconditioning; the relative residual is measured against ||b||.
inline GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                         const Eigen::VectorXd& b, double tol, int maxit,
                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& precond =
                             {}) {
  GmresResult out;
  const int n = static_cast<int>(b.size());
  out.x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  out.history.push_back(bnorm);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  std::vector<Eigen::VectorXd> V;
  V.push_back(b / bnorm);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(maxit + 1, maxit);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(maxit + 1);
  g[0] = bnorm;
  std::vector<double> cs(maxit), sn(maxit);

  int k = 0;
  for (; k < maxit; ++k) {
    Eigen::VectorXd w = op(precond ? precond(V[k]).eval() : V[k]);
    for (int i = 0; i <= k; ++i) {
      H(i, k) = V[i].dot(w);
      w -= H(i, k) * V[i];
    }
    H(k + 1, k) = w.norm();

    for (int i = 0; i < k; ++i) {
      const double tmp = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
      H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
      H(i, k) = tmp;
    }
    const double denom = std::hypot(H(k, k), H(k + 1, k));
    cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
    sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
    H(k, k) = denom;
    g[k + 1] = -sn[k] * g[k];
    g[k] *= cs[k];

    out.history.push_back(std::abs(g[k + 1]));
    if (std::abs(g[k + 1]) <= tol * bnorm) {
      ++k;
      out.converged = true;
      break;
    }
    if (H(k + 1, k) == 0.0) {
      ++k;
      out.converged = true;
      break;
    }
    V.push_back(w / H(k + 1, k));
  }

  out.iterations = k;
  if (k > 0) {
    Eigen::VectorXd y =
        H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) z += y[i] * V[i];
    out.x = precond ? precond(z).eval() : z;
  }
  return out;
}

/// Norm used for the outer stopping test: time- and mass-weighted L2 norm of
/// a multiplier field given as per-slab nodal vectors on the fluid grid.
inline double multiplier_norm(const Discretization& disc, const TimeGrid& grid,
                              const std::vector<Eigen::VectorXd>& slabs) {
  double s = 0.0;
  for (int m = 0; m < grid.intervals(); ++m)
    s += grid.length(m) * slabs[m].dot(disc.M_gamma * slabs[m]);
  return std::sqrt(s);
}

struct NewtonIterationInfo {
  double psi_norm = 0.0;   // Euclidean norm of the stacked residual
  double step_norm = 0.0;  // weighted norm of the multiplier update
  int gmres_iterations = 0;
  bool gmres_converged = false;
};

struct NewtonResult {
  PiecewiseConstantTimeField lambda;
  PsiEvaluation final_eval;  // trajectories and residual at the returned lambda
  std::vector<NewtonIterationInfo> iterations;
};

/// Inexact Newton on the interface map: each iteration solves the linearized
/// interface problem with matrix-free GMRES around frozen trajectories.
inline NewtonResult newton_solve(const Discretization& disc, const ProblemData& data,
                                 const PiecewiseConstantTimeField& lambda0,
                                 const TimeGrid& grid_p, const OuterConfig& cfg = {}) {
  NewtonResult out;
  out.lambda = lambda0;
  out.final_eval = evaluate_psi(disc, data, out.lambda, grid_p, cfg.inner);

  for (int it = 0; it < cfg.newton_maxit; ++it) {
    const Eigen::VectorXd rhs = -stack_slabs(out.final_eval.residual);
    NewtonIterationInfo info;
    info.psi_norm = rhs.norm();

    PsiPrime deriv(disc, data, out.final_eval, grid_p);
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> op =
        [&](const Eigen::VectorXd& v) { return deriv.apply_stacked(v); };
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> prec;
    std::optional<InterfacePreconditioner> precond_storage;
    if (cfg.precond) {
      precond_storage.emplace(disc, data, out.final_eval);
      prec = [&precond_storage](const Eigen::VectorXd& v) {
        return precond_storage->apply_stacked(v);
      };
    }

    GmresResult lin = gmres(op, rhs, cfg.gmres_tol, cfg.gmres_maxit, prec);
    const std::vector<Eigen::VectorXd> h = unstack_slabs(lin.x, lambda0.grid.intervals());
    for (int m = 0; m < lambda0.grid.intervals(); ++m) out.lambda.slabs[m] += h[m];

    info.step_norm = multiplier_norm(disc, lambda0.grid, h);
    info.gmres_iterations = lin.iterations;
    info.gmres_converged = lin.converged;
    out.iterations.push_back(info);

    out.final_eval = evaluate_psi(disc, data, out.lambda, grid_p, cfg.inner);
    if (cfg.newton_tol > 0.0 && info.step_norm <= cfg.newton_tol) break;
  }
  return out;
}

}  // namespace stokesdarcy
