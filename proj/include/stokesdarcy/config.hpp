#pragma once

#include "stokesdarcy/interface_solver.hpp"
#include "stokesdarcy/mesh.hpp"
#include "stokesdarcy/viscosity.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace stokesdarcy {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full description of one experiment run. Defaults reproduce the linear
/// manufactured-solution setup (test case 1 with r = 2).
struct ExperimentConfig {
  int test_case = 1;
  std::string out_dir = "out";

  Rect fluid_rect{0.0, 1.0, 1.0, 2.0};
  Rect porous_rect{0.0, 0.0, 1.0, 1.0};
  int resolution = 8;

  double horizon = 0.01;
  double dt_fluid = 0.002;
  double dt_porous = 0.001;

  CrossModelParams fluid_visc{0.5, 1.5, 1.0, 2.0};
  CrossModelParams porous_visc{0.5, 1.5, 1.0, 2.0};
  double kappa = 1.0;
  double S_p = 1.0;
  double alpha_bjs = 1.0;
  double eta_stab = 10.0;

  OuterConfig solver{};

  void validate() const {
    if (resolution <= 0) throw ConfigError("resolution must be positive");
    if (test_case != 1 && test_case != 2) throw ConfigError("test_case must be 1 or 2");
    if (!(horizon > 0.0)) throw ConfigError("T must be positive");
    for (double dt : {dt_fluid, dt_porous}) {
      if (!(dt > 0.0)) throw ConfigError("time steps must be positive");
      const double steps = horizon / dt;
      if (std::abs(steps - std::round(steps)) > 1e-12 * steps)
        throw ConfigError("time step does not divide the horizon T");
    }
    try {
      fluid_visc.validate();
      porous_visc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (!(kappa > 0.0) || S_p < 0.0 || alpha_bjs < 0.0 || eta_stab < 0.0)
      throw ConfigError("require kappa > 0 and S_p, alpha, eta >= 0");
    if (fluid_rect.y0 != porous_rect.y1 || fluid_rect.x0 != porous_rect.x0 ||
        fluid_rect.x1 != porous_rect.x1)
      throw ConfigError("fluid domain must sit on top of the porous domain");
    if (!(solver.gmres_tol > 0.0) || solver.gmres_maxit <= 0 || solver.newton_maxit <= 0)
      throw ConfigError("solver tolerances and iteration limits must be positive");
  }

  TimeGrid fluid_grid() const {
    return uniform_grid(horizon, static_cast<int>(std::round(horizon / dt_fluid)));
  }
  TimeGrid porous_grid() const {
    return uniform_grid(horizon, static_cast<int>(std::round(horizon / dt_porous)));
  }
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(where + ": trailing characters in '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, const std::string& where) {
  const double v = parse_double(s, where);
  if (std::abs(v - std::round(v)) > 0.0)
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return static_cast<int>(std::round(v));
}

inline bool parse_switch(const std::string& s, const std::string& where) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw ConfigError(where + ": expected on/off, got '" + s + "'");
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parses `key = value` lines grouped in [section] headers. `name` labels the
/// source in diagnostics. Unknown sections or keys are rejected with the line
/// number where they appear.
inline ExperimentConfig parse_config_text(std::istream& in, const std::string& name) {
  ExperimentConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> keys;

  auto dbl = [](double& target) {
    return [&target](const std::string& v, const std::string& w) {
      target = detail::parse_double(v, w);
    };
  };
  auto integer = [](int& target) {
    return [&target](const std::string& v, const std::string& w) {
      target = detail::parse_int(v, w);
    };
  };

  keys["/test_case"] = integer(cfg.test_case);
  keys["/out_dir"] = [&cfg](const std::string& v, const std::string&) { cfg.out_dir = v; };
  keys["mesh/resolution"] = integer(cfg.resolution);
  keys["mesh/x0"] = [&cfg](const std::string& v, const std::string& w) {
    cfg.fluid_rect.x0 = cfg.porous_rect.x0 = detail::parse_double(v, w);
  };
  keys["mesh/x1"] = [&cfg](const std::string& v, const std::string& w) {
    cfg.fluid_rect.x1 = cfg.porous_rect.x1 = detail::parse_double(v, w);
  };
  keys["mesh/y_bottom"] = dbl(cfg.porous_rect.y0);
  keys["mesh/y_interface"] = [&cfg](const std::string& v, const std::string& w) {
    cfg.porous_rect.y1 = cfg.fluid_rect.y0 = detail::parse_double(v, w);
  };
  keys["mesh/y_top"] = dbl(cfg.fluid_rect.y1);
  keys["time/T"] = dbl(cfg.horizon);
  keys["time/dt_f"] = dbl(cfg.dt_fluid);
  keys["time/dt_p"] = dbl(cfg.dt_porous);
  keys["fluid/nu_inf"] = dbl(cfg.fluid_visc.nu_inf);
  keys["fluid/nu_0"] = dbl(cfg.fluid_visc.nu_0);
  keys["fluid/K"] = dbl(cfg.fluid_visc.K);
  keys["fluid/r"] = dbl(cfg.fluid_visc.r);
  keys["porous/nu_inf"] = dbl(cfg.porous_visc.nu_inf);
  keys["porous/nu_0"] = dbl(cfg.porous_visc.nu_0);
  keys["porous/K"] = dbl(cfg.porous_visc.K);
  keys["porous/r"] = dbl(cfg.porous_visc.r);
  keys["porous/kappa"] = dbl(cfg.kappa);
  keys["porous/storage"] = dbl(cfg.S_p);
  keys["porous/stabilization"] = dbl(cfg.eta_stab);
  keys["interface/alpha"] = dbl(cfg.alpha_bjs);
  keys["solver/newton_iters"] = integer(cfg.solver.newton_maxit);
  keys["solver/newton_tol"] = dbl(cfg.solver.newton_tol);
  keys["solver/gmres_tol"] = dbl(cfg.solver.gmres_tol);
  keys["solver/gmres_maxit"] = integer(cfg.solver.gmres_maxit);
  keys["solver/precond"] = [&cfg](const std::string& v, const std::string& w) {
    cfg.solver.precond = detail::parse_switch(v, w);
  };
  keys["solver/inner_tol"] = dbl(cfg.solver.inner.tol);
  keys["solver/inner_residual_tol"] = dbl(cfg.solver.inner.residual_tol);
  keys["solver/inner_maxit"] = integer(cfg.solver.inner.maxit);

  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const auto it = keys.find(section + "/" + key);
    if (it == keys.end())
      throw ConfigError(where + ": unknown key '" + key + "' in section [" + section + "]");
    it->second(value, where);
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_text(in, path);
}

}  // namespace stokesdarcy
