#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "stokesdarcy/error_norms.hpp"
#include "stokesdarcy/manufactured.hpp"
#include "stokesdarcy/subdomain.hpp"

using namespace stokesdarcy;

namespace {

const double E = std::exp(1.0);

Vec2 random_point(std::mt19937& rng, double y0, double y1) {
  std::uniform_real_distribution<double> ux(0.05, 0.95);
  std::uniform_real_distribution<double> uy(y0 + 0.05, y1 - 0.05);
  return {ux(rng), uy(rng)};
}

void check_vector_field(const VectorFieldExact& f, std::mt19937& rng, double y0, double y1) {
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 x = random_point(rng, y0, y1);
    const double t = 0.3 * trial;

    const Mat2 G = f.grad(x, t);
    for (int j = 0; j < 2; ++j) {
      Vec2 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Vec2 fd = (f.value(xp, t) - f.value(xm, t)) / (2.0 * h);
      for (int i = 0; i < 2; ++i) CHECK(G(i, j) == Catch::Approx(fd[i]).margin(1e-7));

      const Mat2 gp = f.grad(xp, t), gm = f.grad(xm, t);
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
          CHECK(f.hessian(x, t, i)(k, j) ==
                Catch::Approx((gp(i, k) - gm(i, k)) / (2.0 * h)).margin(1e-6));
    }
    const Vec2 fd_t = (f.value(x, t + h) - f.value(x, t - h)) / (2.0 * h);
    for (int i = 0; i < 2; ++i) CHECK(f.dt(x, t)[i] == Catch::Approx(fd_t[i]).margin(1e-7));
  }
}

void check_scalar_field(const ScalarFieldExact& f, std::mt19937& rng, double y0, double y1) {
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 x = random_point(rng, y0, y1);
    const double t = 0.25 * trial;
    for (int j = 0; j < 2; ++j) {
      Vec2 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      CHECK(f.grad(x, t)[j] ==
            Catch::Approx((f.value(xp, t) - f.value(xm, t)) / (2.0 * h)).margin(1e-7));
    }
    CHECK(f.dt(x, t) ==
          Catch::Approx((f.value(x, t + h) - f.value(x, t - h)) / (2.0 * h)).margin(1e-7));
  }
}

}  // namespace

TEST_CASE("hand-computed point values") {
  const ManufacturedCase mc = manufactured_case1();
  const Vec2 corner(1.0, 1.0);
  CHECK(mc.u_f.value(corner, 0.0)[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(mc.u_f.value(corner, 0.0)[1] == Catch::Approx(-E * std::cos(1.0)).epsilon(1e-13));
  // p_f(0, 1, 1) = (cos(1) e + 0) * 2
  CHECK(mc.p_f.value({0.0, 1.0}, 1.0) == Catch::Approx(2.0 * std::cos(1.0) * E).epsilon(1e-13));
  // p_p(0, 0, 0) = cos(0) e^0 + 1 = 2
  CHECK(mc.p_p.value({0.0, 0.0}, 0.0) == Catch::Approx(2.0).epsilon(1e-13));
  // u_p(1, 0, 0) = (2, -e + 1)
  CHECK(mc.u_p.value({1.0, 0.0}, 0.0)[0] == Catch::Approx(2.0).epsilon(1e-13));
  CHECK(mc.u_p.value({1.0, 0.0}, 0.0)[1] == Catch::Approx(1.0 - E).epsilon(1e-13));
}

TEST_CASE("derivative closures match finite differences") {
  const ManufacturedCase mc = manufactured_case1(1.5);
  std::mt19937 rng(2024);
  check_vector_field(mc.u_f, rng, 1.0, 2.0);
  check_vector_field(mc.u_p, rng, 0.0, 1.0);
  check_scalar_field(mc.p_f, rng, 1.0, 2.0);
  check_scalar_field(mc.p_p, rng, 0.0, 1.0);
}

TEST_CASE("porous velocity is solenoidal") {
  const ManufacturedCase mc = manufactured_case1();
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec2 x = random_point(rng, 0.0, 1.0);
    CHECK(mc.u_p.grad(x, 0.7 * trial).trace() == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("interface conditions at y = 1") {
  const ManufacturedCase mc = manufactured_case1(1.5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec2 x(ux(rng), 1.0);
    const double t = 0.15 * trial;
    // normal velocities match: u_f . (0,-1) + u_p . (0,1) = 0
    CHECK(-mc.u_f.value(x, t)[1] + mc.u_p.value(x, t)[1] == Catch::Approx(0.0).margin(1e-12));
    // no slip along the interface and no tangential shear
    CHECK(mc.u_f.value(x, t)[0] == Catch::Approx(0.0).margin(1e-12));
    const Mat2 G = mc.u_f.grad(x, t);
    CHECK(0.5 * (G(0, 1) + G(1, 0)) == Catch::Approx(0.0).margin(1e-12));
    // the stress jump closure is the normal-stress defect
    const Mat2 D = 0.5 * (G + G.transpose());
    const double lam =
        -nu(D.norm(), mc.data.fluid_visc) * D(1, 1) + mc.p_f.value(x, t);
    CHECK(mc.data.stress_jump(x, t) ==
          Catch::Approx(lam - mc.p_p.value(x, t)).margin(1e-12));
    CHECK(mc.exact_lambda(x, t) == Catch::Approx(mc.p_p.value(x, t)).margin(1e-14));
  }
  // the jump vanishes only where cos(x) and cos(1) coincide
  CHECK(mc.data.stress_jump({1.0, 1.0}, 0.4) != Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("forcing terms satisfy the strong equations via finite differences") {
  const ManufacturedCase mc = manufactured_case1(1.5);
  std::mt19937 rng(42);
  const double h = 1e-5;
  for (int trial = 0; trial < 8; ++trial) {
    const Vec2 x = random_point(rng, 1.0, 2.0);
    const double t = 0.1 + 0.2 * trial;

    // f_f = dt u - div(nu(|D|) D) + grad p, divergence by finite differences
    Vec2 div_stress = Vec2::Zero();
    for (int j = 0; j < 2; ++j) {
      Vec2 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      auto stress = [&](const Vec2& y) -> Mat2 {
        const Mat2 G = mc.u_f.grad(y, t);
        const Mat2 D = 0.5 * (G + G.transpose());
        return nu(D.norm(), mc.data.fluid_visc) * D;
      };
      const Mat2 ds = (stress(xp) - stress(xm)) / (2.0 * h);
      for (int i = 0; i < 2; ++i) div_stress[i] += ds(i, j);
    }
    const Vec2 f = mc.u_f.dt(x, t) - div_stress + mc.p_f.grad(x, t);
    const Vec2 got = mc.data.body_force(x, t);
    CHECK((got - f).lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + f.lpNorm<Eigen::Infinity>()));

    // g_f = div u_f
    CHECK(mc.data.mass_source(x, t) == Catch::Approx(mc.u_f.grad(x, t).trace()).margin(1e-12));

    const Vec2 xp = random_point(rng, 0.0, 1.0);
    // f_p = S_p dt p + div u_p, g_p = nu(|u|)/kappa u + grad p
    CHECK(mc.data.sink_source(xp, t) ==
          Catch::Approx(mc.p_p.dt(xp, t) + mc.u_p.grad(xp, t).trace()).margin(1e-10));
    const Vec2 up = mc.u_p.value(xp, t);
    const Vec2 gp = nu(up.norm(), mc.data.porous_visc) * up + mc.p_p.grad(xp, t);
    CHECK((mc.data.momentum_source(xp, t) - gp).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("single-step solves converge toward the exact fields") {
  // one backward-Euler step per subdomain with the exact multiplier trace:
  // halving h at fixed small dt shrinks the spatial error markedly
  const ManufacturedCase mc = manufactured_case1();
  const TimeGrid grid = uniform_grid(0.002, 1);
  double prev_uf = 0.0, prev_pp = 0.0;
  for (int n : {4, 8}) {
    const Discretization disc =
        build_discretization(mc.fluid_rect, mc.porous_rect, n, n, n);
    PiecewiseConstantTimeField lam = PiecewiseConstantTimeField::zero(grid, disc.n_lambda());
    for (int k = 0; k < disc.n_lambda(); ++k)
      lam.slabs[0][k] = mc.exact_lambda(
          node_position(disc.mesh_f, disc.dofs_f.interface_nodes[k]), grid.end_of(0));
    const SubdomainTrajectory tf = solve_stokes_trajectory(disc, mc.data, lam);
    const SubdomainTrajectory tp = solve_darcy_trajectory(disc, mc.data, lam);
    const FieldErrors ef =
        compute_errors(disc.mesh_f, disc.dofs_f, tf.states[0], mc.u_f, mc.p_f, grid.end_of(0));
    const FieldErrors ep =
        compute_errors(disc.mesh_p, disc.dofs_p, tp.states[0], mc.u_p, mc.p_p, grid.end_of(0));
    if (prev_uf > 0.0) {
      CHECK(ef.u_l2 < 0.25 * prev_uf);
      CHECK(ep.p_l2 < 0.35 * prev_pp);
    }
    prev_uf = ef.u_l2;
    prev_pp = ep.p_l2;
  }
}
