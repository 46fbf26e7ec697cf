#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "stokesdarcy/interface_solver.hpp"
#include "stokesdarcy/manufactured.hpp"

using namespace stokesdarcy;

namespace {

PiecewiseConstantTimeField exact_lambda_field(const Discretization& disc,
                                              const ManufacturedCase& mc, const TimeGrid& grid) {
  PiecewiseConstantTimeField lam = PiecewiseConstantTimeField::zero(grid, disc.n_lambda());
  for (int m = 0; m < grid.intervals(); ++m)
    for (int k = 0; k < disc.n_lambda(); ++k)
      lam.slabs[m][k] = mc.exact_lambda(
          node_position(disc.mesh_f, disc.dofs_f.interface_nodes[k]), grid.end_of(m));
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

double stacked_norm(const std::vector<Eigen::VectorXd>& slabs) {
  return stack_slabs(slabs).norm();
}

}  // namespace

TEST_CASE("stacking round trip") {
  const auto slabs = random_slabs(3, 4, 17);
  const Eigen::VectorXd v = stack_slabs(slabs);
  REQUIRE(v.size() == 12);
  const auto back = unstack_slabs(v, 3);
  for (int m = 0; m < 3; ++m) CHECK((back[m] - slabs[m]).norm() == 0.0);
}

TEST_CASE("gmres solves small systems") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = 24;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) * 4.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.5 * unit(rng);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = unit(rng);

  auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; };
  GmresResult res = gmres(op, b, 1e-12, n);
  CHECK(res.converged);
  CHECK((A * res.x - b).norm() <= 1e-10 * b.norm());
  // the recurrence residual matches the true residual
  CHECK(res.history.back() == Catch::Approx((A * res.x - b).norm()).margin(1e-10 * b.norm()));

  // exact right preconditioning converges immediately
  const Eigen::MatrixXd Ainv = A.inverse();
  auto prec = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Ainv * x; };
  GmresResult pres = gmres(op, b, 1e-12, n, prec);
  CHECK(pres.converged);
  CHECK(pres.iterations <= 2);
  CHECK((A * pres.x - b).norm() <= 1e-9 * b.norm());

  // zero right-hand side
  GmresResult zres = gmres(op, Eigen::VectorXd::Zero(n), 1e-12, n);
  CHECK(zres.converged);
  CHECK(zres.x.norm() == 0.0);
}

TEST_CASE("quiescent state is a fixed point") {
  const Discretization disc =
      build_discretization({0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0}, 4, 4, 4);
  ProblemData data;  // no sources, homogeneous everything
  for (Side s : {Side::left, Side::right, Side::top})
    data.stokes_bc.dirichlet[static_cast<int>(s)] = [](const Vec2&, double) -> Vec2 {
      return Vec2::Zero();
    };
  for (Side s : {Side::left, Side::right, Side::bottom})
    data.darcy_bc.normal_flux[static_cast<int>(s)] = [](const Vec2&, double) { return 0.0; };

  const TimeGrid grid_f = uniform_grid(0.01, 5);
  const TimeGrid grid_p = uniform_grid(0.01, 2);
  const auto lam = PiecewiseConstantTimeField::zero(grid_f, disc.n_lambda());
  const PsiEvaluation eval = evaluate_psi(disc, data, lam, grid_p);
  CHECK(stacked_norm(eval.residual) <= 1e-12);
  for (const auto& s : eval.fluid.states)
    CHECK(s.head(disc.dofs_f.n_velocity()).lpNorm<Eigen::Infinity>() <= 1e-12);
  for (const auto& s : eval.darcy.states)
    CHECK(s.head(disc.dofs_p.n_velocity()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("interface map is affine for Newtonian flow") {
  const ManufacturedCase mc = manufactured_case1(2.0);
  const Discretization disc = build_discretization(mc.fluid_rect, mc.porous_rect, 4, 4, 4);
  const TimeGrid grid_f = uniform_grid(0.01, 4);
  const TimeGrid grid_p = uniform_grid(0.01, 2);  // nonconforming in time
  const auto lam = exact_lambda_field(disc, mc, grid_f);

  const PsiEvaluation base = evaluate_psi(disc, mc.data, lam, grid_p);
  const PsiPrime deriv(disc, mc.data, base, grid_p);

  std::mt19937 rng(3);
  for (unsigned seed : {101u, 102u, 103u}) {
    const auto h = random_slabs(grid_f.intervals(), disc.n_lambda(), seed);
    auto shifted = lam;
    for (int m = 0; m < grid_f.intervals(); ++m) shifted.slabs[m] += h[m];
    const PsiEvaluation moved = evaluate_psi(disc, mc.data, shifted, grid_p);
    const auto lin = deriv.apply(h);
    double defect = 0.0, scale = 0.0;
    for (int m = 0; m < grid_f.intervals(); ++m) {
      defect += (moved.residual[m] - base.residual[m] - lin[m]).squaredNorm();
      scale += lin[m].squaredNorm();
    }
    CHECK(std::sqrt(defect) <= 1e-8 * std::sqrt(scale));
  }
}

TEST_CASE("derivative of the shear-thinning interface map is first order") {
  const ManufacturedCase mc = manufactured_case1(1.5);
  const Discretization disc = build_discretization(mc.fluid_rect, mc.porous_rect, 4, 4, 4);
  const TimeGrid grid_f = uniform_grid(0.01, 2);
  const TimeGrid grid_p = uniform_grid(0.01, 1);
  const auto lam = exact_lambda_field(disc, mc, grid_f);

  InnerTolerances tight;
  tight.tol = 1e-13;
  tight.residual_tol = 1e-12;
  tight.maxit = 40;
  const PsiEvaluation base = evaluate_psi(disc, mc.data, lam, grid_p, tight);
  const PsiPrime deriv(disc, mc.data, base, grid_p);
  const auto h = random_slabs(grid_f.intervals(), disc.n_lambda(), 77);
  const auto lin = deriv.apply(h);

  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double eps = 1e-2 / std::pow(2.0, k);
    auto shifted = lam;
    for (int m = 0; m < grid_f.intervals(); ++m) shifted.slabs[m] += eps * h[m];
    const PsiEvaluation moved = evaluate_psi(disc, mc.data, shifted, grid_p, tight);
    double defect = 0.0;
    for (int m = 0; m < grid_f.intervals(); ++m)
      defect += (moved.residual[m] - base.residual[m] - eps * lin[m]).squaredNorm();
    const double d = std::sqrt(defect);
    if (k > 0) {
      const double ratio = prev / d;
      CHECK(ratio > 3.2);
      CHECK(ratio < 4.8);
    }
    prev = d;
  }
}

TEST_CASE("one Newton iteration solves the Newtonian interface problem") {
  const ManufacturedCase mc = manufactured_case1(2.0);
  const Discretization disc = build_discretization(mc.fluid_rect, mc.porous_rect, 4, 4, 4);
  const TimeGrid grid_f = uniform_grid(0.01, 5);
  const TimeGrid grid_p = uniform_grid(0.01, 10);
  const auto lam0 = PiecewiseConstantTimeField::zero(grid_f, disc.n_lambda());

  OuterConfig cfg;
  cfg.newton_maxit = 1;
  cfg.gmres_tol = 1e-9;
  cfg.gmres_maxit = 200;

  const NewtonResult res = newton_solve(disc, mc.data, lam0, grid_p, cfg);
  REQUIRE(res.iterations.size() == 1);
  const double psi0 = res.iterations[0].psi_norm;
  CHECK(psi0 > 0.0);
  CHECK(stacked_norm(res.final_eval.residual) <= 10.0 * cfg.gmres_tol * psi0);
}

TEST_CASE("preconditioning cuts the iteration count") {
  // the payoff appears with mesh refinement: the unpreconditioned count
  // grows with 1/h while the preconditioned one stays flat
  const ManufacturedCase mc = manufactured_case1(2.0);
  const Discretization disc = build_discretization(mc.fluid_rect, mc.porous_rect, 16, 16, 16);
  const TimeGrid grid_f = uniform_grid(0.01, 5);
  const TimeGrid grid_p = uniform_grid(0.01, 10);
  const auto lam0 = PiecewiseConstantTimeField::zero(grid_f, disc.n_lambda());

  OuterConfig cfg;
  cfg.gmres_tol = 1e-10;
  cfg.gmres_maxit = 200;
  const NewtonResult plain = newton_solve(disc, mc.data, lam0, grid_p, cfg);
  cfg.precond = true;
  const NewtonResult prec = newton_solve(disc, mc.data, lam0, grid_p, cfg);

  CHECK(plain.iterations[0].gmres_converged);
  CHECK(prec.iterations[0].gmres_converged);
  CHECK(prec.iterations[0].gmres_iterations < plain.iterations[0].gmres_iterations);
  CHECK(prec.iterations[0].gmres_iterations <= 10);
  // both find the same multiplier
  for (int m = 0; m < grid_f.intervals(); ++m)
    CHECK((plain.lambda.slabs[m] - prec.lambda.slabs[m]).lpNorm<Eigen::Infinity>() <=
          1e-5 * (1.0 + plain.lambda.slabs[m].lpNorm<Eigen::Infinity>()));
}

TEST_CASE("weighted multiplier norm of a constant field") {
  const Discretization disc =
      build_discretization({0.0, 1.0, 1.0, 2.0}, {0.0, 0.0, 1.0, 1.0}, 4, 4, 4);
  const TimeGrid grid = uniform_grid(0.25, 5);
  std::vector<Eigen::VectorXd> ones(5, Eigen::VectorXd::Ones(disc.n_lambda()));
  // integral of 1 over Gamma x (0, T): sqrt(T * |Gamma|) = sqrt(0.25)
  CHECK(multiplier_norm(disc, grid, ones) == Catch::Approx(0.5).epsilon(1e-12));
}
