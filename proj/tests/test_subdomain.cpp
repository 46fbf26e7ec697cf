#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "stokesdarcy/manufactured.hpp"
#include "stokesdarcy/subdomain.hpp"

using namespace stokesdarcy;

namespace {

Discretization make_disc(int n) {
  return build_discretization({0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0}, n, n, n);
}

// steady polynomial Stokes flow u = (x, -y), p = 2 + x with nu = 1,
// driven by the interface datum lambda = 3 + x
ProblemData steady_stokes_data() {
  ProblemData data;
  data.c_bjs = 0.0;
  data.body_force = [](const Vec2&, double) -> Vec2 { return {1.0, 0.0}; };
  data.initial_velocity = [](const Vec2& x, double) -> Vec2 { return {x[0], -x[1]}; };
  for (Side s : {Side::left, Side::right, Side::top})
    data.stokes_bc.dirichlet[static_cast<int>(s)] = data.initial_velocity;
  return data;
}

PiecewiseConstantTimeField steady_stokes_lambda(const Discretization& disc,
                                                const TimeGrid& grid) {
  PiecewiseConstantTimeField lam = PiecewiseConstantTimeField::zero(grid, disc.n_lambda());
  for (auto& slab : lam.slabs)
    for (int k = 0; k < disc.n_lambda(); ++k)
      slab[k] = 3.0 + node_position(disc.mesh_f, disc.dofs_f.interface_nodes[k]).x();
  return lam;
}

// steady polynomial Darcy flow u = (y, x), p = 1 + 2x - y with nu = 1
ProblemData steady_darcy_data() {
  ProblemData data;
  data.momentum_source = [](const Vec2& x, double) -> Vec2 {
    return Vec2(x[1], x[0]) + Vec2(2.0, -1.0);
  };
  data.initial_pressure = [](const Vec2& x, double) { return 1.0 + 2.0 * x[0] - x[1]; };
  auto u = [](const Vec2& x, double) -> Vec2 { return {x[1], x[0]}; };
  data.darcy_bc.normal_flux[static_cast<int>(Side::left)] = [u](const Vec2& x, double t) {
    return -u(x, t)[0];
  };
  data.darcy_bc.normal_flux[static_cast<int>(Side::right)] = [u](const Vec2& x, double t) {
    return u(x, t)[0];
  };
  data.darcy_bc.normal_flux[static_cast<int>(Side::bottom)] = [u](const Vec2& x, double t) {
    return -u(x, t)[1];
  };
  return data;
}

PiecewiseConstantTimeField steady_darcy_lambda(const Discretization& disc,
                                               const TimeGrid& grid) {
  PiecewiseConstantTimeField lam = PiecewiseConstantTimeField::zero(grid, disc.n_lambda());
  for (auto& slab : lam.slabs)
    for (int k = 0; k < disc.n_lambda(); ++k)
      slab[k] = 2.0 * node_position(disc.mesh_p, disc.dofs_p.interface_nodes[k]).x();
  return lam;
}

std::vector<Eigen::VectorXd> random_slabs(int n_slabs, int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Eigen::VectorXd> out(n_slabs, Eigen::VectorXd(dim));
  for (auto& s : out)
    for (int i = 0; i < dim; ++i) s[i] = unit(rng);
  return out;
}

}  // namespace

TEST_CASE("Stokes trajectory holds a steady polynomial state") {
  const Discretization disc = make_disc(3);
  const ProblemData data = steady_stokes_data();
  const TimeGrid grid = uniform_grid(0.3, 3);
  const auto lam = steady_stokes_lambda(disc, grid);
  const SubdomainTrajectory traj = solve_stokes_trajectory(disc, data, lam);
  REQUIRE(traj.states.size() == 3);
  for (const auto& state : traj.states) {
    CHECK((state - traj.initial).head(disc.dofs_f.n_velocity()).lpNorm<Eigen::Infinity>() <=
          1e-8);
    for (int v = 0; v < disc.dofs_f.n_pressure; ++v)
      CHECK(state[disc.dofs_f.pressure(v)] ==
            Catch::Approx(2.0 + disc.mesh_f.vertices[v].x()).margin(1e-8));
  }
}

TEST_CASE("Darcy trajectory holds a steady polynomial state") {
  const Discretization disc = make_disc(3);
  const ProblemData data = steady_darcy_data();
  const TimeGrid grid = uniform_grid(0.4, 2);
  const auto lam = steady_darcy_lambda(disc, grid);
  const SubdomainTrajectory traj = solve_darcy_trajectory(disc, data, lam);
  for (const auto& state : traj.states) {
    for (int v = 0; v < disc.dofs_p.n_pressure; ++v)
      CHECK(state[disc.dofs_p.pressure(v)] ==
            Catch::Approx(1.0 + 2.0 * disc.mesh_p.vertices[v].x() - disc.mesh_p.vertices[v].y())
                .margin(1e-8));
    for (int v = 0; v < disc.mesh_p.n_vertices(); ++v) {
      CHECK(state[disc.dofs_p.ux(v)] == Catch::Approx(disc.mesh_p.vertices[v].y()).margin(1e-8));
      CHECK(state[disc.dofs_p.uy(v)] == Catch::Approx(disc.mesh_p.vertices[v].x()).margin(1e-8));
    }
  }
}

TEST_CASE("linearized trajectory operator is linear") {
  const Discretization disc = make_disc(2);
  const ProblemData data = steady_stokes_data();
  const TimeGrid grid = uniform_grid(0.2, 2);
  const auto lam = steady_stokes_lambda(disc, grid);
  const SubdomainTrajectory base = solve_stokes_trajectory(disc, data, lam);
  const LinearizedStokesOp op(disc, data, base);

  const auto h1 = random_slabs(2, disc.n_lambda(), 31);
  const auto h2 = random_slabs(2, disc.n_lambda(), 32);
  std::vector<Eigen::VectorXd> combo(2);
  for (int m = 0; m < 2; ++m) combo[m] = 2.0 * h1[m] - 0.5 * h2[m];
  const auto y1 = op.apply(h1);
  const auto y2 = op.apply(h2);
  const auto yc = op.apply(combo);
  for (int m = 0; m < 2; ++m)
    CHECK((yc[m] - 2.0 * y1[m] + 0.5 * y2[m]).norm() <= 1e-10 * (1.0 + y1[m].norm()));
}

TEST_CASE("Newtonian trajectory map is affine in the multiplier") {
  const Discretization disc = make_disc(3);
  const TimeGrid grid = uniform_grid(0.3, 3);

  SECTION("fluid") {
    const ProblemData data = steady_stokes_data();
    const auto lam = steady_stokes_lambda(disc, grid);
    const SubdomainTrajectory base = solve_stokes_trajectory(disc, data, lam);
    auto shifted = lam;
    const auto h = random_slabs(3, disc.n_lambda(), 41);
    for (int m = 0; m < 3; ++m) shifted.slabs[m] += h[m];
    const SubdomainTrajectory moved = solve_stokes_trajectory(disc, data, shifted);
    const LinearizedStokesOp op(disc, data, base);
    const auto lin = op.apply(h);
    for (int m = 0; m < 3; ++m) {
      const Eigen::VectorXd diff = moved.states[m] - base.states[m];
      CHECK((diff - lin[m]).norm() <= 1e-9 * (1.0 + diff.norm()));
    }
  }

  SECTION("porous") {
    const ProblemData data = steady_darcy_data();
    const auto lam = steady_darcy_lambda(disc, grid);
    const SubdomainTrajectory base = solve_darcy_trajectory(disc, data, lam);
    auto shifted = lam;
    const auto h = random_slabs(3, disc.n_lambda(), 42);
    for (int m = 0; m < 3; ++m) shifted.slabs[m] += h[m];
    const SubdomainTrajectory moved = solve_darcy_trajectory(disc, data, shifted);
    const LinearizedDarcyOp op(disc, data, base);
    const auto lin = op.apply(h);
    for (int m = 0; m < 3; ++m) {
      const Eigen::VectorXd diff = moved.states[m] - base.states[m];
      CHECK((diff - lin[m]).norm() <= 1e-9 * (1.0 + diff.norm()));
    }
  }
}

TEST_CASE("shear-thinning steps satisfy the nonlinear residual") {
  const ManufacturedCase mc = manufactured_case1(1.5);
  const Discretization disc = make_disc(4);
  const TimeGrid grid = uniform_grid(0.01, 2);
  PiecewiseConstantTimeField lam = PiecewiseConstantTimeField::zero(grid, disc.n_lambda());
  for (int m = 0; m < grid.intervals(); ++m)
    for (int k = 0; k < disc.n_lambda(); ++k)
      lam.slabs[m][k] = mc.exact_lambda(
          node_position(disc.mesh_f, disc.dofs_f.interface_nodes[k]), grid.end_of(m));

  const SubdomainTrajectory traj = solve_stokes_trajectory(disc, mc.data, lam);
  // verify the algebraic residual of the last step independently
  const int m = grid.intervals() - 1;
  StokesStepSpec spec;
  spec.visc = mc.data.fluid_visc;
  spec.c_bjs = mc.data.c_bjs;
  spec.dt = grid.length(m);
  spec.time = grid.end_of(m);
  spec.u_star = &traj.states[m];
  spec.u_prev = &traj.states[m - 1];
  spec.body_force = mc.data.body_force;
  spec.mass_source = mc.data.mass_source;
  spec.lambda = &lam.slabs[m];
  spec.stress_jump = mc.data.stress_jump;
  spec.bc = &mc.data.stokes_bc;
  AssembledStep step = assemble_stokes_system(disc.mesh_f, disc.dofs_f, spec);
  Eigen::VectorXd res =
      apply_triplets(disc.dofs_f.n_total(), step.system.triplets, traj.states[m]) -
      step.system.rhs;
  for (int i = 0; i < disc.dofs_f.n_total(); ++i)
    if (step.system.constrained(i)) res[i] = 0.0;
  CHECK(res.norm() <= 1e-8 * std::max(1.0, step.system.rhs.norm()));
}

TEST_CASE("normal-trace solve inverts the linearized porous flux map") {
  const Discretization disc = make_disc(3);
  const ProblemData data = steady_darcy_data();
  const TimeGrid grid = uniform_grid(0.3, 3);
  const auto lam = steady_darcy_lambda(disc, grid);
  const SubdomainTrajectory base = solve_darcy_trajectory(disc, data, lam);
  const LinearizedDarcyOp lin(disc, data, base);
  const DarcyNormalTraceOp trace_op(disc, data, base);

  const auto h = random_slabs(3, disc.n_lambda(), 51);
  const auto states = lin.apply(h);
  std::vector<Eigen::VectorXd> dual(3);
  for (int m = 0; m < 3; ++m) dual[m] = disc.C_p.transpose() * states[m];
  const auto mu = trace_op.apply_dual(dual);

  for (int m = 0; m < 3; ++m) {
    const Eigen::VectorXd diff = mu[m] - h[m];
    CHECK(diff.lpNorm<Eigen::Infinity>() <= 1e-8 * (1.0 + h[m].lpNorm<Eigen::Infinity>()));
  }
}
