#pragma once

#include "stokesdarcy/assembly.hpp"
#include "stokesdarcy/dofmap.hpp"
#include "stokesdarcy/mesh.hpp"
#include "stokesdarcy/time_grid.hpp"

#include <functional>

namespace stokesdarcy {

/// Physical parameters, sources, boundary and initial data of one coupled
/// configuration. Sources default to zero; boundary sides default to
/// homogeneous (no-slip fluid sides, no-flux porous sides).
struct ProblemData {
  CrossModelParams fluid_visc{};
  CrossModelParams porous_visc{};
  double kappa = 1.0;
  double S_p = 1.0;
  double c_bjs = 1.0;
  double eta_stab = 10.0;

  VectorFn body_force{};      // Stokes momentum source f_f
  ScalarFn mass_source{};     // Stokes continuity defect g_f (manufactured)
  ScalarFn sink_source{};     // Darcy source/sink f_p
  VectorFn momentum_source{}; // Darcy momentum defect g_p (manufactured)
  ScalarFn stress_jump{};     // normal-stress defect on Gamma (manufactured)

  VectorFn initial_velocity{}; // u_f0, evaluated at t = 0
  ScalarFn initial_pressure{}; // p_p0

  StokesBC stokes_bc{};
  DarcyBC darcy_bc{};

  void validate() const {
    fluid_visc.validate();
    porous_visc.validate();
    if (!(kappa > 0.0) || S_p < 0.0 || c_bjs < 0.0 || eta_stab < 0.0)
      throw std::invalid_argument("ProblemData: require kappa > 0, S_p, c_BJS, eta >= 0");
  }
};

/// No-slip on every external fluid side; no-flow on every external porous
/// side (the defaults of the model problem).
inline ProblemData default_problem_data() {
  ProblemData d;
  for (Side s : {Side::left, Side::right, Side::top})
    d.stokes_bc.dirichlet[static_cast<int>(s)] = [](const Vec2&, double) { return Vec2::Zero(); };
  for (Side s : {Side::left, Side::right, Side::bottom})
    d.darcy_bc.normal_flux[static_cast<int>(s)] = [](const Vec2&, double) { return 0.0; };
  return d;
}

/// Meshes, dof maps and the interface matrices of the stacked two-subdomain
/// geometry. Immutable after construction; shared read-only by the solvers.
struct Discretization {
  Mesh mesh_f, mesh_p;
  DofMap dofs_f, dofs_p;
  InterfaceMap imap;
  SparseMatrix C_f, C_p;   // interface coupling per subdomain
  SparseMatrix M_gamma;    // multiplier mass matrix
  SparseMatrix Mv_f;       // fluid velocity mass
  SparseMatrix Mp_p;       // porous pressure mass

  int n_lambda() const { return dofs_f.n_multiplier; }
};

inline Discretization build_discretization(const Rect& fluid, const Rect& porous, int nx, int ny_f,
                                           int ny_p) {
  if (std::abs(fluid.y0 - porous.y1) > detail::kGeomTol)
    throw std::invalid_argument("build_discretization: fluid must sit on top of the porous medium");
  Discretization d;
  const double iface = fluid.y0;
  d.mesh_f = build_rectangle_mesh(fluid, nx, ny_f, Subdomain::fluid, iface);
  d.mesh_p = build_rectangle_mesh(porous, nx, ny_p, Subdomain::porous, iface);
  d.dofs_f = build_dofmap(d.mesh_f);
  d.dofs_p = build_dofmap(d.mesh_p);
  d.imap = build_interface_map(d.mesh_f, d.mesh_p);
  d.C_f = interface_coupling_matrix(d.mesh_f, d.dofs_f);
  d.C_p = interface_coupling_matrix(d.mesh_p, d.dofs_p);
  d.M_gamma = interface_mass_matrix(d.mesh_f, d.dofs_f);
  d.Mv_f = velocity_mass_matrix(d.mesh_f, d.dofs_f);
  d.Mp_p = pressure_mass_matrix(d.mesh_p, d.dofs_p);
  return d;
}

} // namespace stokesdarcy
