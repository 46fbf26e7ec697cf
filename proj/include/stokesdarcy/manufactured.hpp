#pragma once

#include <cmath>
#include <functional>

#include "stokesdarcy/problem_data.hpp"
#include "stokesdarcy/viscosity.hpp"

namespace stokesdarcy {

/// Exact vector field with the derivatives needed to derive forcing terms.
struct VectorFieldExact {
  VectorFn value;
  std::function<Mat2(const Vec2&, double)> grad;          // grad(i,j) = d_j u_i
  std::function<Mat2(const Vec2&, double, int)> hessian;  // of component i
  VectorFn dt;
};

struct ScalarFieldExact {
  ScalarFn value;
  VectorFn grad;
  ScalarFn dt;
};

/// Momentum forcing for the fluid: dt(u) - div(nu(|D|) D(u)) + grad(p).
inline VectorFn stokes_body_force(const CrossModelParams& visc, const VectorFieldExact& u,
                                  const ScalarFieldExact& p) {
  return [visc, u, p](const Vec2& x, double t) -> Vec2 {
    const Mat2 G = u.grad(x, t);
    const Mat2 D = 0.5 * (G + G.transpose());
    const Mat2 H[2] = {u.hessian(x, t, 0), u.hessian(x, t, 1)};
    const double d = D.norm();
    const double nu_val = nu(d, visc);
    const double nu_d = nu_deriv(d, visc);

    Vec2 divD = Vec2::Zero();
    Vec2 grad_d = Vec2::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) divD[i] += 0.5 * (H[i](j, j) + H[j](i, j));
    if (d > 1e-12) {
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int k = 0; k < 2; ++k) s += D(i, k) * 0.5 * (H[i](k, j) + H[k](i, j));
        grad_d[j] = s / d;
      }
    }
    const Vec2 div_stress = nu_val * divD + nu_d * (D * grad_d);
    return u.dt(x, t) - div_stress + p.grad(x, t);
  };
}

inline ScalarFn stokes_mass_source(const VectorFieldExact& u) {
  return [u](const Vec2& x, double t) { return u.grad(x, t).trace(); };
}

/// Mass forcing for the porous medium: S_p dt(p) + div(u).
inline ScalarFn darcy_sink_source(double S_p, const VectorFieldExact& u,
                                  const ScalarFieldExact& p) {
  return [S_p, u, p](const Vec2& x, double t) {
    return S_p * p.dt(x, t) + u.grad(x, t).trace();
  };
}

/// Momentum forcing for the porous medium: nu(|u|) kappa^{-1} u + grad(p).
inline VectorFn darcy_momentum_source(const CrossModelParams& visc, double kappa,
                                      const VectorFieldExact& u, const ScalarFieldExact& p) {
  return [visc, kappa, u, p](const Vec2& x, double t) -> Vec2 {
    const Vec2 uv = u.value(x, t);
    return nu(uv.norm(), visc) / kappa * uv + p.grad(x, t);
  };
}

/// Defect of the normal-stress balance on the interface (fluid normal
/// pointing down): the exact fluid normal stress minus the exact porous
/// pressure trace. Enters the fluid interface load alongside the multiplier.
inline ScalarFn interface_stress_jump(const CrossModelParams& visc, const VectorFieldExact& u_f,
                                      const ScalarFieldExact& p_f, const ScalarFieldExact& p_p) {
  return [visc, u_f, p_f, p_p](const Vec2& x, double t) {
    const Mat2 G = u_f.grad(x, t);
    const Mat2 D = 0.5 * (G + G.transpose());
    const double lam = -nu(D.norm(), visc) * D(1, 1) + p_f.value(x, t);
    return lam - p_p.value(x, t);
  };
}

/// A manufactured unsteady case on Omega_f = (0,1)x(1,2), Omega_p = (0,1)^2
/// with interface at y = 1; all fields grow like 1 + t^2.
struct ManufacturedCase {
  ProblemData data;
  Rect fluid_rect{0.0, 1.0, 1.0, 2.0};
  Rect porous_rect{0.0, 0.0, 1.0, 1.0};
  VectorFieldExact u_f;
  ScalarFieldExact p_f;
  VectorFieldExact u_p;
  ScalarFieldExact p_p;
  ScalarFn exact_lambda;  // porous pressure trace on the interface
};

inline ManufacturedCase manufactured_case(const CrossModelParams& fluid_visc,
                                          const CrossModelParams& porous_visc,
                                          double kappa = 1.0, double S_p = 1.0) {
  const double E = std::exp(1.0);
  auto g = [](double t) { return 1.0 + t * t; };
  auto gdot = [](double t) { return 2.0 * t; };

  ManufacturedCase mc;

  mc.u_f.value = [=](const Vec2& x, double t) -> Vec2 {
    return {std::pow(x[0], 3) * std::pow(x[1] - 1.0, 2) * g(t), -E * std::cos(x[1]) * g(t)};
  };
  mc.u_f.grad = [=](const Vec2& x, double t) -> Mat2 {
    Mat2 G;
    G(0, 0) = 3.0 * x[0] * x[0] * std::pow(x[1] - 1.0, 2) * g(t);
    G(0, 1) = 2.0 * std::pow(x[0], 3) * (x[1] - 1.0) * g(t);
    G(1, 0) = 0.0;
    G(1, 1) = E * std::sin(x[1]) * g(t);
    return G;
  };
  mc.u_f.hessian = [=](const Vec2& x, double t, int i) -> Mat2 {
    Mat2 H = Mat2::Zero();
    if (i == 0) {
      H(0, 0) = 6.0 * x[0] * std::pow(x[1] - 1.0, 2) * g(t);
      H(0, 1) = H(1, 0) = 6.0 * x[0] * x[0] * (x[1] - 1.0) * g(t);
      H(1, 1) = 2.0 * std::pow(x[0], 3) * g(t);
    } else {
      H(1, 1) = E * std::cos(x[1]) * g(t);
    }
    return H;
  };
  mc.u_f.dt = [=](const Vec2& x, double t) -> Vec2 {
    return {std::pow(x[0], 3) * std::pow(x[1] - 1.0, 2) * gdot(t), -E * std::cos(x[1]) * gdot(t)};
  };

  mc.p_f.value = [=](const Vec2& x, double t) {
    return (std::cos(x[1]) * std::exp(x[1]) + std::pow(x[1] - 1.0, 2)) * g(t);
  };
  mc.p_f.grad = [=](const Vec2& x, double t) -> Vec2 {
    return {0.0, (std::exp(x[1]) * (std::cos(x[1]) - std::sin(x[1])) + 2.0 * (x[1] - 1.0)) * g(t)};
  };
  mc.p_f.dt = [=](const Vec2& x, double t) {
    return (std::cos(x[1]) * std::exp(x[1]) + std::pow(x[1] - 1.0, 2)) * gdot(t);
  };

  mc.u_p.value = [=](const Vec2& x, double t) -> Vec2 {
    return {-x[0] * (E * std::sin(x[1]) + 2.0 * (x[1] - 1.0)) * g(t),
            (-E * std::cos(x[1]) + std::pow(x[1] - 1.0, 2)) * g(t)};
  };
  mc.u_p.grad = [=](const Vec2& x, double t) -> Mat2 {
    Mat2 G;
    G(0, 0) = -(E * std::sin(x[1]) + 2.0 * (x[1] - 1.0)) * g(t);
    G(0, 1) = -x[0] * (E * std::cos(x[1]) + 2.0) * g(t);
    G(1, 0) = 0.0;
    G(1, 1) = (E * std::sin(x[1]) + 2.0 * (x[1] - 1.0)) * g(t);
    return G;
  };
  mc.u_p.hessian = [=](const Vec2& x, double t, int i) -> Mat2 {
    Mat2 H = Mat2::Zero();
    if (i == 0) {
      H(0, 1) = H(1, 0) = -(E * std::cos(x[1]) + 2.0) * g(t);
      H(1, 1) = x[0] * E * std::sin(x[1]) * g(t);
    } else {
      H(1, 1) = (E * std::cos(x[1]) + 2.0) * g(t);
    }
    return H;
  };
  mc.u_p.dt = [=](const Vec2& x, double t) -> Vec2 {
    return {-x[0] * (E * std::sin(x[1]) + 2.0 * (x[1] - 1.0)) * gdot(t),
            (-E * std::cos(x[1]) + std::pow(x[1] - 1.0, 2)) * gdot(t)};
  };

  mc.p_p.value = [=](const Vec2& x, double t) {
    return (-E * std::sin(x[1]) + std::cos(x[0]) * std::exp(x[1]) + std::pow(x[1] - 1.0, 2)) *
           g(t);
  };
  mc.p_p.grad = [=](const Vec2& x, double t) -> Vec2 {
    return {-std::sin(x[0]) * std::exp(x[1]) * g(t),
            (-E * std::cos(x[1]) + std::cos(x[0]) * std::exp(x[1]) + 2.0 * (x[1] - 1.0)) * g(t)};
  };
  mc.p_p.dt = [=](const Vec2& x, double t) {
    return (-E * std::sin(x[1]) + std::cos(x[0]) * std::exp(x[1]) + std::pow(x[1] - 1.0, 2)) *
           gdot(t);
  };

  ProblemData& data = mc.data;
  data.fluid_visc = fluid_visc;
  data.porous_visc = porous_visc;
  data.kappa = kappa;
  data.S_p = S_p;
  data.c_bjs = 1.0;
  data.eta_stab = 10.0;
  data.body_force = stokes_body_force(fluid_visc, mc.u_f, mc.p_f);
  data.mass_source = stokes_mass_source(mc.u_f);
  data.sink_source = darcy_sink_source(S_p, mc.u_p, mc.p_p);
  data.momentum_source = darcy_momentum_source(porous_visc, kappa, mc.u_p, mc.p_p);
  data.stress_jump = interface_stress_jump(fluid_visc, mc.u_f, mc.p_f, mc.p_p);
  data.initial_velocity = mc.u_f.value;
  data.initial_pressure = mc.p_p.value;

  for (Side s : {Side::left, Side::right, Side::top})
    data.stokes_bc.dirichlet[static_cast<int>(s)] = mc.u_f.value;
  const auto flux = [&](const Vec2& n) -> ScalarFn {
    auto up = mc.u_p.value;
    return [up, n](const Vec2& x, double t) { return up(x, t).dot(n); };
  };
  data.darcy_bc.normal_flux[static_cast<int>(Side::left)] = flux(Vec2(-1.0, 0.0));
  data.darcy_bc.normal_flux[static_cast<int>(Side::right)] = flux(Vec2(1.0, 0.0));
  data.darcy_bc.normal_flux[static_cast<int>(Side::bottom)] = flux(Vec2(0.0, -1.0));

  mc.exact_lambda = mc.p_p.value;
  return mc;
}

/// Parameters of the convergence study case: Cross model with
/// nu_inf = 0.5, nu_0 = 1.5, K = 1 in both subdomains.
inline ManufacturedCase manufactured_case1(double r = 2.0) {
  CrossModelParams visc;
  visc.nu_inf = 0.5;
  visc.nu_0 = 1.5;
  visc.K = 1.0;
  visc.r = r;
  return manufactured_case(visc, visc, 1.0, 1.0);
}

}  // namespace stokesdarcy
