#include <catch2/catch_amalgamated.hpp>

#include "stokesdarcy/config.hpp"

#include <sstream>

using namespace stokesdarcy;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config_text(in, "test");
}

}  // namespace

TEST_CASE("empty config yields the linear manufactured-case defaults") {
  const ExperimentConfig cfg = parse("");
  CHECK(cfg.test_case == 1);
  CHECK(cfg.resolution == 8);
  CHECK(cfg.horizon == 0.01);
  CHECK(cfg.dt_fluid == 0.002);
  CHECK(cfg.dt_porous == 0.001);
  CHECK(cfg.fluid_visc.nu_inf == 0.5);
  CHECK(cfg.fluid_visc.nu_0 == 1.5);
  CHECK(cfg.fluid_visc.K == 1.0);
  CHECK(cfg.fluid_visc.r == 2.0);
  CHECK(cfg.porous_visc.nu_inf == 0.5);
  CHECK(cfg.kappa == 1.0);
  CHECK(cfg.S_p == 1.0);
  CHECK(cfg.alpha_bjs == 1.0);
  CHECK(cfg.eta_stab == 10.0);
  CHECK(cfg.solver.newton_maxit == 1);
  CHECK(cfg.solver.gmres_tol == 1e-7);
  CHECK(cfg.solver.gmres_maxit == 100);
  CHECK_FALSE(cfg.solver.precond);
  CHECK(cfg.fluid_rect.y0 == 1.0);
  CHECK(cfg.fluid_rect.y1 == 2.0);
  CHECK(cfg.porous_rect.y0 == 0.0);
}

TEST_CASE("sections, comments and values are parsed") {
  const ExperimentConfig cfg = parse(
      "test_case = 2\n"
      "out_dir = results\n"
      "\n"
      "[mesh]\n"
      "resolution = 32   # fine run\n"
      "[time]\n"
      "T = 1\n"
      "dt_f = 0.05\n"
      "dt_p = 0.1\n"
      "[fluid]\n"
      "nu_inf = 1\n"
      "nu_0 = 10\n"
      "r = 1.35\n"
      "[porous]\n"
      "nu_inf = 1\n"
      "nu_0 = 10\n"
      "r = 1.35\n"
      "kappa = 0.001\n"
      "[solver]\n"
      "precond = on\n"
      "gmres_tol = 1e-10\n"
      "newton_iters = 2\n");
  CHECK(cfg.test_case == 2);
  CHECK(cfg.out_dir == "results");
  CHECK(cfg.resolution == 32);
  CHECK(cfg.horizon == 1.0);
  CHECK(cfg.dt_fluid == 0.05);
  CHECK(cfg.dt_porous == 0.1);
  CHECK(cfg.fluid_visc.r == 1.35);
  CHECK(cfg.kappa == 0.001);
  CHECK(cfg.solver.precond);
  CHECK(cfg.solver.gmres_tol == 1e-10);
  CHECK(cfg.solver.newton_maxit == 2);
  CHECK(cfg.fluid_grid().intervals() == 20);
  CHECK(cfg.porous_grid().intervals() == 10);
}

TEST_CASE("unknown keys are rejected with the line number") {
  CHECK_THROWS_WITH(parse("[time]\nT = 1\ndt_x = 0.1\n"),
                    Catch::Matchers::ContainsSubstring("test:3") &&
                        Catch::Matchers::ContainsSubstring("dt_x"));
  CHECK_THROWS_WITH(parse("[nonsense]\nT = 1\n"),
                    Catch::Matchers::ContainsSubstring("test:2") &&
                        Catch::Matchers::ContainsSubstring("nonsense"));
  CHECK_THROWS_WITH(parse("resolution = 8\n"),
                    Catch::Matchers::ContainsSubstring("test:1"));
}

TEST_CASE("malformed lines and values are rejected") {
  CHECK_THROWS_AS(parse("[time\n"), ConfigError);
  CHECK_THROWS_AS(parse("just words\n"), ConfigError);
  CHECK_THROWS_WITH(parse("[time]\nT = fast\n"),
                    Catch::Matchers::ContainsSubstring("expected a number"));
  CHECK_THROWS_WITH(parse("[mesh]\nresolution = 8.5\n"),
                    Catch::Matchers::ContainsSubstring("integer"));
  CHECK_THROWS_WITH(parse("[solver]\nprecond = maybe\n"),
                    Catch::Matchers::ContainsSubstring("on/off"));
}

TEST_CASE("validation catches inconsistent settings") {
  CHECK_THROWS_AS(parse("[time]\ndt_f = -0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[time]\nT = 1\ndt_f = 0.3\ndt_p = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[mesh]\nresolution = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("test_case = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[fluid]\nr = 1\n"), ConfigError);
}

TEST_CASE("missing file reports its path") {
  CHECK_THROWS_WITH(parse_config("/no/such/file.cfg"),
                    Catch::Matchers::ContainsSubstring("/no/such/file.cfg"));
}
