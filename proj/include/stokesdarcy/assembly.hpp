#pragma once

#include "stokesdarcy/dofmap.hpp"
#include "stokesdarcy/mesh.hpp"
#include "stokesdarcy/quadrature.hpp"
#include "stokesdarcy/sparse.hpp"
#include "stokesdarcy/viscosity.hpp"

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>

namespace stokesdarcy {

using Mat2 = Eigen::Matrix2d;
using ScalarFn = std::function<double(const Vec2&, double)>;
using VectorFn = std::function<Vec2(const Vec2&, double)>;

/// Boundary data for the fluid subdomain, per rectangle side. A side with a
/// Dirichlet closure gets essential velocity values; otherwise the side is
/// natural and `normal_stress`, when set, contributes the load -<p, v.n>.
/// The interface side is always handled through the multiplier.
struct StokesBC {
  std::array<VectorFn, 4> dirichlet{};
  std::array<ScalarFn, 4> normal_stress{};
};

/// Boundary data for the porous subdomain: essential normal flux u.n = g per
/// side, or a natural pressure datum.
struct DarcyBC {
  std::array<ScalarFn, 4> normal_flux{};
  std::array<ScalarFn, 4> pressure{};
};

namespace detail {

/// Per-triangle geometry and P2/P1 node bookkeeping.
struct ElementContext {
  std::array<int, 6> nodes;   // P2 scalar nodes
  std::array<int, 3> pnodes;  // P1 vertices
  Mat2 jac, jac_inv_t;
  double det_jac;
  Vec2 origin;

  ElementContext(const Mesh& mesh, const DofMap& dofs, int t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      nodes[k] = tri[k];
      nodes[3 + k] = dofs.midpoint_node(mesh.tri_edges[t][k]);
      pnodes[k] = tri[k];
    }
    const Vec2& p0 = mesh.vertices[tri[0]];
    jac.col(0) = mesh.vertices[tri[1]] - p0;
    jac.col(1) = mesh.vertices[tri[2]] - p0;
    det_jac = jac.determinant();
    jac_inv_t = jac.inverse().transpose();
    origin = p0;
  }

  Vec2 map(double xr, double yr) const { return origin + jac * Vec2(xr, yr); }
};

/// Basis values at one quadrature point in physical coordinates.
struct BasisAtPoint {
  std::array<double, 6> phi;
  std::array<Vec2, 6> grad;
  std::array<double, 3> psi;

  BasisAtPoint(const ElementContext& el, double xr, double yr) {
    std::array<std::array<double, 2>, 6> dphi;
    p2_basis(xr, yr, phi, dphi);
    for (int a = 0; a < 6; ++a) grad[a] = el.jac_inv_t * Vec2(dphi[a][0], dphi[a][1]);
    std::array<std::array<double, 2>, 3> dpsi;
    p1_basis(xr, yr, psi, dpsi);
  }

  Vec2 velocity(const ElementContext& el, const DofMap& dofs, const Eigen::VectorXd& u) const {
    Vec2 v = Vec2::Zero();
    for (int a = 0; a < 6; ++a) {
      v.x() += u[dofs.ux(el.nodes[a])] * phi[a];
      v.y() += u[dofs.uy(el.nodes[a])] * phi[a];
    }
    return v;
  }

  Mat2 velocity_gradient(const ElementContext& el, const DofMap& dofs,
                         const Eigen::VectorXd& u) const {
    Mat2 g = Mat2::Zero(); // g(i,j) = d u_i / d x_j
    for (int a = 0; a < 6; ++a) {
      g.row(0) += u[dofs.ux(el.nodes[a])] * grad[a].transpose();
      g.row(1) += u[dofs.uy(el.nodes[a])] * grad[a].transpose();
    }
    return g;
  }
};

inline double frobenius(const Mat2& m) { return std::sqrt((m.array() * m.array()).sum()); }

inline void constrain(SparseSystem& sys, int dof, double value) { sys.dirichlet[dof] = value; }

} // namespace detail

/// Assembled backward-Euler step operator split into the Picard part (the
/// residual is picard * U - rhs) and the extra Gateaux-derivative term that
/// completes the Newton matrix.
struct AssembledStep {
  SparseSystem system;
  std::vector<Triplet> newton;
};

struct StokesStepSpec {
  CrossModelParams visc;
  double c_bjs = 0.0;
  double dt = 0.0;
  double time = 0.0;              // t^m, sources evaluated here
  const Eigen::VectorXd* u_star = nullptr; // linearization / viscosity state
  bool with_newton = false;
  const Eigen::VectorXd* u_prev = nullptr; // null = zero
  VectorFn body_force{};
  ScalarFn mass_source{};
  const Eigen::VectorXd* lambda = nullptr; // multiplier nodal values on Gamma
  ScalarFn stress_jump{};         // extra interface normal-stress datum
  const StokesBC* bc = nullptr;
  bool homogeneous_bc = false;    // zero essential values (linearized problems)
  const std::vector<TriQuadPoint>* quadrature = nullptr; // default: degree 4
};

inline AssembledStep assemble_stokes_system(const Mesh& mesh, const DofMap& dofs,
                                            const StokesStepSpec& spec) {
  const auto& rule = spec.quadrature ? *spec.quadrature : tri_quadrature_deg4();
  AssembledStep out;
  SparseSystem& sys = out.system;
  sys.resize(dofs.n_total());
  sys.triplets.reserve(mesh.n_triangles() * 200);
  const double inv_dt = 1.0 / spec.dt;

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    detail::ElementContext el(mesh, dofs, t);
    Eigen::Matrix<double, 12, 12> Kv = Eigen::Matrix<double, 12, 12>::Zero();
    Eigen::Matrix<double, 3, 12> B = Eigen::Matrix<double, 3, 12>::Zero();
    Eigen::Matrix<double, 12, 1> Fv = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 3, 1> Fq = Eigen::Matrix<double, 3, 1>::Zero();
    Eigen::Matrix<double, 12, 12> Nv = Eigen::Matrix<double, 12, 12>::Zero();

    for (const TriQuadPoint& q : rule) {
      detail::BasisAtPoint bas(el, q.x, q.y);
      const double w = q.w * std::abs(el.det_jac);
      const Vec2 x = el.map(q.x, q.y);

      Mat2 grad_star = Mat2::Zero();
      if (spec.u_star) grad_star = bas.velocity_gradient(el, dofs, *spec.u_star);
      const Mat2 d_star = 0.5 * (grad_star + grad_star.transpose());
      const double dmag = detail::frobenius(d_star);
      const double visc = nu(dmag, spec.visc);
      const double ncoef = spec.with_newton ? nu_prime_coeff(dmag, spec.visc) : 0.0;

      // s[a][i] = (D* grad phi_a)_i, the D*:D(phi_a e_i) contraction
      std::array<Vec2, 6> s;
      if (ncoef != 0.0)
        for (int a = 0; a < 6; ++a) s[a] = d_star * bas.grad[a];

      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          const double gg = bas.grad[a].dot(bas.grad[b]);
          const double mass = inv_dt * bas.phi[a] * bas.phi[b];
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
              double v = 0.5 * visc * ((i == j ? gg : 0.0) + bas.grad[a][j] * bas.grad[b][i]);
              if (i == j) v += mass;
              Kv(2 * a + i, 2 * b + j) += w * v;
              if (ncoef != 0.0) Nv(2 * a + i, 2 * b + j) += w * ncoef * s[a][i] * s[b][j];
            }
        }
        for (int c = 0; c < 3; ++c)
          for (int i = 0; i < 2; ++i) B(c, 2 * a + i) += w * bas.psi[c] * bas.grad[a][i];
      }

      Vec2 fq = Vec2::Zero();
      if (spec.body_force) fq = spec.body_force(x, spec.time);
      if (spec.u_prev) fq += inv_dt * bas.velocity(el, dofs, *spec.u_prev);
      if (!fq.isZero())
        for (int a = 0; a < 6; ++a)
          for (int i = 0; i < 2; ++i) Fv(2 * a + i) += w * fq[i] * bas.phi[a];
      if (spec.mass_source) {
        const double g = spec.mass_source(x, spec.time);
        for (int c = 0; c < 3; ++c) Fq(c) += w * g * bas.psi[c];
      }
    }

    // scatter: velocity block, -B^T coupling, +B continuity
    for (int a = 0; a < 6; ++a)
      for (int i = 0; i < 2; ++i) {
        const int ra = dofs.vel(el.nodes[a], i);
        for (int b = 0; b < 6; ++b)
          for (int j = 0; j < 2; ++j) {
            const double kv = Kv(2 * a + i, 2 * b + j);
            if (kv != 0.0) sys.triplets.emplace_back(ra, dofs.vel(el.nodes[b], j), kv);
            const double nv = Nv(2 * a + i, 2 * b + j);
            if (nv != 0.0) out.newton.emplace_back(ra, dofs.vel(el.nodes[b], j), nv);
          }
        for (int c = 0; c < 3; ++c) {
          const double bv = B(c, 2 * a + i);
          if (bv != 0.0) {
            sys.triplets.emplace_back(ra, dofs.pressure(el.pnodes[c]), -bv);
            sys.triplets.emplace_back(dofs.pressure(el.pnodes[c]), ra, bv);
          }
        }
        sys.rhs[ra] += Fv(2 * a + i);
      }
    for (int c = 0; c < 3; ++c) sys.rhs[dofs.pressure(el.pnodes[c])] += Fq(c);
  }

  // interface terms: BJS tangential friction and the multiplier load
  for (int e : dofs.interface_edges) {
    const Edge& ed = mesh.edges[e];
    const Vec2& p0 = mesh.vertices[ed.v0];
    const Vec2& p1 = mesh.vertices[ed.v1];
    const double len = (p1 - p0).norm();
    const Vec2 n = ed.normal;
    const std::array<int, 3> enodes = {ed.v0, ed.v1, dofs.midpoint_node(e)};
    const std::array<int, 3> mdofs = {dofs.multiplier_of_node[ed.v0],
                                      dofs.multiplier_of_node[ed.v1],
                                      dofs.multiplier_of_node[dofs.midpoint_node(e)]};

    for (const LineQuadPoint& q : line_quadrature()) {
      const double w = q.w * len;
      const auto tr = p2_edge_basis(q.s);
      const Vec2 x = p0 + q.s * (p1 - p0);
      if (spec.c_bjs != 0.0) {
        // tangent is the x-direction on the flat interface
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            sys.triplets.emplace_back(dofs.ux(enodes[a]), dofs.ux(enodes[b]),
                                      w * spec.c_bjs * tr[a] * tr[b]);
      }
      double datum = 0.0;
      if (spec.lambda)
        for (int m = 0; m < 3; ++m) datum += (*spec.lambda)[mdofs[m]] * tr[m];
      if (spec.stress_jump) datum += spec.stress_jump(x, spec.time);
      if (datum != 0.0)
        for (int a = 0; a < 3; ++a)
          for (int i = 0; i < 2; ++i)
            sys.rhs[dofs.vel(enodes[a], i)] -= w * datum * n[i] * tr[a];
    }
  }

  // external sides: natural normal-stress data, then essential velocities
  if (spec.bc) {
    for (const Edge& ed : mesh.edges) {
      if (ed.tag != EdgeTag::boundary) continue;
      const auto& datum_fn = spec.bc->normal_stress[static_cast<int>(ed.side)];
      if (!datum_fn || spec.bc->dirichlet[static_cast<int>(ed.side)]) continue;
      const Vec2& p0 = mesh.vertices[ed.v0];
      const Vec2& p1 = mesh.vertices[ed.v1];
      const double len = (p1 - p0).norm();
      const std::array<int, 3> enodes = {ed.v0, ed.v1,
                                         dofs.midpoint_node(static_cast<int>(&ed - mesh.edges.data()))};
      for (const LineQuadPoint& q : line_quadrature()) {
        const double w = q.w * len;
        const auto tr = p2_edge_basis(q.s);
        const double datum = datum_fn(p0 + q.s * (p1 - p0), spec.time);
        for (int a = 0; a < 3; ++a)
          for (int i = 0; i < 2; ++i)
            sys.rhs[dofs.vel(enodes[a], i)] -= w * datum * ed.normal[i] * tr[a];
      }
    }
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const Edge& ed = mesh.edges[e];
      if (ed.tag != EdgeTag::boundary) continue;
      const auto& g = spec.bc->dirichlet[static_cast<int>(ed.side)];
      if (!g) continue;
      for (int node : {ed.v0, ed.v1, dofs.midpoint_node(e)}) {
        Vec2 x;
        if (node < mesh.n_vertices())
          x = mesh.vertices[node];
        else
          x = 0.5 * (mesh.vertices[ed.v0] + mesh.vertices[ed.v1]);
        const Vec2 val = spec.homogeneous_bc ? Vec2::Zero().eval() : g(x, spec.time);
        detail::constrain(sys, dofs.ux(node), val.x());
        detail::constrain(sys, dofs.uy(node), val.y());
      }
    }
  }
  return out;
}

struct DarcyStepSpec {
  CrossModelParams visc;
  double kappa = 1.0;
  double S_p = 1.0;
  double eta_stab = 0.0;
  double dt = 0.0;
  double time = 0.0;
  const Eigen::VectorXd* u_star = nullptr;
  bool with_newton = false;
  const Eigen::VectorXd* p_prev = nullptr; // null = zero; reads pressure dofs of a full vector
  ScalarFn sink_source{};
  VectorFn momentum_source{};
  const Eigen::VectorXd* lambda = nullptr;
  const DarcyBC* bc = nullptr;
  bool homogeneous_bc = false;
  const std::vector<TriQuadPoint>* quadrature = nullptr;
};

inline AssembledStep assemble_darcy_system(const Mesh& mesh, const DofMap& dofs,
                                           const DarcyStepSpec& spec) {
  const auto& rule = spec.quadrature ? *spec.quadrature : tri_quadrature_deg4();
  AssembledStep out;
  SparseSystem& sys = out.system;
  sys.resize(dofs.n_total());
  sys.triplets.reserve(mesh.n_triangles() * 200);
  const double storage = spec.S_p / spec.dt;
  const double inv_kappa = 1.0 / spec.kappa;

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    detail::ElementContext el(mesh, dofs, t);
    Eigen::Matrix<double, 12, 12> Kv = Eigen::Matrix<double, 12, 12>::Zero();
    Eigen::Matrix<double, 12, 12> Nv = Eigen::Matrix<double, 12, 12>::Zero();
    Eigen::Matrix<double, 3, 12> B = Eigen::Matrix<double, 3, 12>::Zero();
    Eigen::Matrix<double, 3, 3> Mp = Eigen::Matrix<double, 3, 3>::Zero();
    Eigen::Matrix<double, 12, 1> Fv = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 3, 1> Fq = Eigen::Matrix<double, 3, 1>::Zero();

    for (const TriQuadPoint& q : rule) {
      detail::BasisAtPoint bas(el, q.x, q.y);
      const double w = q.w * std::abs(el.det_jac);
      const Vec2 x = el.map(q.x, q.y);

      Vec2 u_star = Vec2::Zero();
      if (spec.u_star) u_star = bas.velocity(el, dofs, *spec.u_star);
      const double umag = u_star.norm();
      const double visc = nu(umag, spec.visc) * inv_kappa;
      const double ncoef =
          spec.with_newton ? nu_prime_coeff(umag, spec.visc) * inv_kappa : 0.0;

      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          const double mass = visc * bas.phi[a] * bas.phi[b];
          for (int i = 0; i < 2; ++i) {
            Kv(2 * a + i, 2 * b + i) += w * mass;
            for (int j = 0; j < 2; ++j) {
              if (spec.eta_stab != 0.0)
                Kv(2 * a + i, 2 * b + j) += w * spec.eta_stab * bas.grad[a][i] * bas.grad[b][j];
              if (ncoef != 0.0)
                Nv(2 * a + i, 2 * b + j) +=
                    w * ncoef * u_star[i] * bas.phi[a] * u_star[j] * bas.phi[b];
            }
          }
        }
        for (int c = 0; c < 3; ++c)
          for (int i = 0; i < 2; ++i) B(c, 2 * a + i) += w * bas.psi[c] * bas.grad[a][i];
      }
      for (int c = 0; c < 3; ++c)
        for (int cc = 0; cc < 3; ++cc) Mp(c, cc) += w * storage * bas.psi[c] * bas.psi[cc];

      if (spec.momentum_source) {
        const Vec2 gq = spec.momentum_source(x, spec.time);
        for (int a = 0; a < 6; ++a)
          for (int i = 0; i < 2; ++i) Fv(2 * a + i) += w * gq[i] * bas.phi[a];
      }
      double src = 0.0;
      if (spec.sink_source) src += spec.sink_source(x, spec.time);
      if (src != 0.0)
        for (int c = 0; c < 3; ++c) Fq(c) += w * src * bas.psi[c];
      if (spec.p_prev) {
        double pv = 0.0;
        for (int c = 0; c < 3; ++c) pv += (*spec.p_prev)[dofs.pressure(el.pnodes[c])] * bas.psi[c];
        for (int c = 0; c < 3; ++c) Fq(c) += w * storage * pv * bas.psi[c];
      }
    }

    for (int a = 0; a < 6; ++a)
      for (int i = 0; i < 2; ++i) {
        const int ra = dofs.vel(el.nodes[a], i);
        for (int b = 0; b < 6; ++b)
          for (int j = 0; j < 2; ++j) {
            const double kv = Kv(2 * a + i, 2 * b + j);
            if (kv != 0.0) sys.triplets.emplace_back(ra, dofs.vel(el.nodes[b], j), kv);
            const double nv = Nv(2 * a + i, 2 * b + j);
            if (nv != 0.0) out.newton.emplace_back(ra, dofs.vel(el.nodes[b], j), nv);
          }
        for (int c = 0; c < 3; ++c) {
          const double bv = B(c, 2 * a + i);
          if (bv != 0.0) {
            sys.triplets.emplace_back(ra, dofs.pressure(el.pnodes[c]), -bv);
            sys.triplets.emplace_back(dofs.pressure(el.pnodes[c]), ra, bv);
          }
        }
        sys.rhs[ra] += Fv(2 * a + i);
      }
    for (int c = 0; c < 3; ++c) {
      const int rc = dofs.pressure(el.pnodes[c]);
      for (int cc = 0; cc < 3; ++cc)
        sys.triplets.emplace_back(rc, dofs.pressure(el.pnodes[cc]), Mp(c, cc));
      sys.rhs[rc] += Fq(c);
    }
  }

  // interface: Dirichlet datum p = lambda enters as the natural load
  for (int e : spec.lambda ? dofs.interface_edges : std::vector<int>{}) {
    const Edge& ed = mesh.edges[e];
    const Vec2& p0 = mesh.vertices[ed.v0];
    const Vec2& p1 = mesh.vertices[ed.v1];
    const double len = (p1 - p0).norm();
    const std::array<int, 3> enodes = {ed.v0, ed.v1, dofs.midpoint_node(e)};
    const std::array<int, 3> mdofs = {dofs.multiplier_of_node[ed.v0],
                                      dofs.multiplier_of_node[ed.v1],
                                      dofs.multiplier_of_node[dofs.midpoint_node(e)]};
    for (const LineQuadPoint& q : line_quadrature()) {
      const double w = q.w * len;
      const auto tr = p2_edge_basis(q.s);
      double lam = 0.0;
      for (int m = 0; m < 3; ++m) lam += (*spec.lambda)[mdofs[m]] * tr[m];
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 2; ++i)
          sys.rhs[dofs.vel(enodes[a], i)] -= w * lam * ed.normal[i] * tr[a];
    }
  }

  if (spec.bc) {
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const Edge& ed = mesh.edges[e];
      if (ed.tag != EdgeTag::boundary) continue;
      const int side = static_cast<int>(ed.side);
      if (const auto& g = spec.bc->normal_flux[side]) {
        // essential u.n = g on this side: constrain the normal component
        const int comp = (ed.side == Side::left || ed.side == Side::right) ? 0 : 1;
        const double nc = ed.normal[comp];
        for (int node : {ed.v0, ed.v1, dofs.midpoint_node(e)}) {
          const Vec2 x = node < mesh.n_vertices()
                             ? mesh.vertices[node]
                             : (0.5 * (mesh.vertices[ed.v0] + mesh.vertices[ed.v1])).eval();
          const double val = spec.homogeneous_bc ? 0.0 : g(x, spec.time) * nc;
          detail::constrain(sys, dofs.vel(node, comp), val);
        }
      } else if (const auto& pd = spec.bc->pressure[side]) {
        const Vec2& p0 = mesh.vertices[ed.v0];
        const Vec2& p1 = mesh.vertices[ed.v1];
        const double len = (p1 - p0).norm();
        const std::array<int, 3> enodes = {ed.v0, ed.v1, dofs.midpoint_node(e)};
        for (const LineQuadPoint& q : line_quadrature()) {
          const double w = q.w * len;
          const auto tr = p2_edge_basis(q.s);
          const double datum = pd(p0 + q.s * (p1 - p0), spec.time);
          if (datum == 0.0) continue;
          for (int a = 0; a < 3; ++a)
            for (int i = 0; i < 2; ++i)
              sys.rhs[dofs.vel(enodes[a], i)] -= w * datum * ed.normal[i] * tr[a];
        }
      }
    }
  }
  return out;
}

/// Coupling matrix C (n_total x n_multiplier): C(v, m) = int_Gamma psi_m (v . n)
/// with the subdomain's outward normal. C^T u is the dual interface flux;
/// -C h is the Neumann multiplier load.
inline SparseMatrix interface_coupling_matrix(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trips;
  for (int e : dofs.interface_edges) {
    const Edge& ed = mesh.edges[e];
    const Vec2& p0 = mesh.vertices[ed.v0];
    const Vec2& p1 = mesh.vertices[ed.v1];
    const double len = (p1 - p0).norm();
    const std::array<int, 3> enodes = {ed.v0, ed.v1, dofs.midpoint_node(e)};
    const std::array<int, 3> mdofs = {dofs.multiplier_of_node[ed.v0],
                                      dofs.multiplier_of_node[ed.v1],
                                      dofs.multiplier_of_node[dofs.midpoint_node(e)]};
    for (const LineQuadPoint& q : line_quadrature()) {
      const double w = q.w * len;
      const auto tr = p2_edge_basis(q.s);
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 2; ++i)
          for (int m = 0; m < 3; ++m)
            trips.emplace_back(dofs.vel(enodes[a], i), mdofs[m], w * tr[m] * tr[a] * ed.normal[i]);
    }
  }
  SparseMatrix mat(dofs.n_total(), dofs.n_multiplier);
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

/// 1D P2 mass matrix of the multiplier space along Gamma.
inline SparseMatrix interface_mass_matrix(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trips;
  for (int e : dofs.interface_edges) {
    const Edge& ed = mesh.edges[e];
    const double len = (mesh.vertices[ed.v1] - mesh.vertices[ed.v0]).norm();
    const std::array<int, 3> m = {dofs.multiplier_of_node[ed.v0],
                                  dofs.multiplier_of_node[ed.v1],
                                  dofs.multiplier_of_node[dofs.midpoint_node(e)]};
    for (const LineQuadPoint& q : line_quadrature()) {
      const double w = q.w * len;
      const auto tr = p2_edge_basis(q.s);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) trips.emplace_back(m[a], m[b], w * tr[a] * tr[b]);
    }
  }
  SparseMatrix mat(dofs.n_multiplier, dofs.n_multiplier);
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

/// Entries int_Gamma (u_f . n_f) psi_m + int_Gamma (u_p . n_p) psi_m: the
/// residual of the normal-velocity transmission condition in the dual space.
inline Eigen::VectorXd interface_trace_residual(const Mesh& mesh_f, const DofMap& dofs_f,
                                                const Eigen::VectorXd& u_f_step,
                                                const Mesh& mesh_p, const DofMap& dofs_p,
                                                const Eigen::VectorXd& u_p_step) {
  const SparseMatrix cf = interface_coupling_matrix(mesh_f, dofs_f);
  const SparseMatrix cp = interface_coupling_matrix(mesh_p, dofs_p);
  return cf.transpose() * u_f_step + cp.transpose() * u_p_step;
}

/// Velocity mass matrix (both components), zero in the pressure block.
inline SparseMatrix velocity_mass_matrix(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trips;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    detail::ElementContext el(mesh, dofs, t);
    for (const TriQuadPoint& q : tri_quadrature_deg4()) {
      detail::BasisAtPoint bas(el, q.x, q.y);
      const double w = q.w * std::abs(el.det_jac);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const double m = w * bas.phi[a] * bas.phi[b];
          for (int i = 0; i < 2; ++i)
            trips.emplace_back(dofs.vel(el.nodes[a], i), dofs.vel(el.nodes[b], i), m);
        }
    }
  }
  SparseMatrix mat(dofs.n_total(), dofs.n_total());
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

/// Pressure mass matrix in the pressure block of the full layout.
inline SparseMatrix pressure_mass_matrix(const Mesh& mesh, const DofMap& dofs) {
  std::vector<Triplet> trips;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    detail::ElementContext el(mesh, dofs, t);
    for (const TriQuadPoint& q : tri_quadrature_deg4()) {
      detail::BasisAtPoint bas(el, q.x, q.y);
      const double w = q.w * std::abs(el.det_jac);
      for (int c = 0; c < 3; ++c)
        for (int cc = 0; cc < 3; ++cc)
          trips.emplace_back(dofs.pressure(el.pnodes[c]), dofs.pressure(el.pnodes[cc]),
                             w * bas.psi[c] * bas.psi[cc]);
    }
  }
  SparseMatrix mat(dofs.n_total(), dofs.n_total());
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

inline Eigen::VectorXd apply_triplets(int n, const std::vector<Triplet>& trips,
                                      const Eigen::VectorXd& x) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (const Triplet& t : trips) y[t.row()] += t.value() * x[t.col()];
  return y;
}

} // namespace stokesdarcy
