#pragma once

#include <cmath>
#include <functional>

#include "stokesdarcy/assembly.hpp"
#include "stokesdarcy/manufactured.hpp"

namespace stokesdarcy {

/// Error norms of one subdomain state against an exact solution at a fixed
/// time, integrated with a quadrature rule exact on the discrete spaces.
struct FieldErrors {
  double u_l2 = 0.0;
  double u_h1 = 0.0;  // full H1 norm of the velocity error
  double u_div = 0.0; // L2 norm of div of the velocity error
  double p_l2 = 0.0;
};

inline FieldErrors compute_errors(const Mesh& mesh, const DofMap& dofs,
                                  const Eigen::VectorXd& state, const VectorFieldExact& u_ex,
                                  const ScalarFieldExact& p_ex, double time) {
  FieldErrors err;
  const auto& quad = tri_quadrature_deg6();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    detail::ElementContext el(mesh, dofs, t);
    const double area_scale = std::abs(el.det_jac);
    for (const TriQuadPoint& q : quad) {
      detail::BasisAtPoint bas(el, q.x, q.y);
      const Vec2 x = el.map(q.x, q.y);
      const double w = q.w * area_scale;

      const Vec2 du = bas.velocity(el, dofs, state) - u_ex.value(x, time);
      const Mat2 dg = bas.velocity_gradient(el, dofs, state) - u_ex.grad(x, time);
      double dp = -p_ex.value(x, time);
      for (int c = 0; c < 3; ++c) dp += state[dofs.pressure(el.pnodes[c])] * bas.psi[c];

      err.u_l2 += w * du.squaredNorm();
      err.u_h1 += w * dg.squaredNorm();
      err.u_div += w * dg.trace() * dg.trace();
      err.p_l2 += w * dp * dp;
    }
  }
  err.u_h1 = std::sqrt(err.u_h1 + err.u_l2);
  err.u_l2 = std::sqrt(err.u_l2);
  err.u_div = std::sqrt(err.u_div);
  err.p_l2 = std::sqrt(err.p_l2);
  return err;
}

/// Norms of the FE function carried by `a - b` on a shared mesh; used for
/// self-convergence studies against a discrete reference state.
inline FieldErrors compute_difference_errors(const Mesh& mesh, const DofMap& dofs,
                                             const Eigen::VectorXd& a,
                                             const Eigen::VectorXd& b) {
  VectorFieldExact zero_u;
  zero_u.value = [](Vec2, double) { return Vec2{0.0, 0.0}; };
  zero_u.grad = [](Vec2, double) { return Mat2::Zero().eval(); };
  ScalarFieldExact zero_p;
  zero_p.value = [](Vec2, double) { return 0.0; };
  return compute_errors(mesh, dofs, (a - b).eval(), zero_u, zero_p, 0.0);
}

}  // namespace stokesdarcy
