#pragma once

#include <cmath>
#include <stdexcept>

namespace stokesdarcy {

/// Parameters of the Cross shear-thinning viscosity law
///   nu(d) = nu_inf + (nu_0 - nu_inf) / (1 + K d^(2-r)).
/// r = 2 recovers a constant (Newtonian) viscosity.
struct CrossModelParams {
  double nu_inf = 0.5;   // limiting viscosity at infinite shear
  double nu_0 = 1.5;     // zero-shear viscosity
  double K = 1.0;        // Cross constant
  double r = 2.0;        // exponent, > 1
  double eps_reg = 1e-8; // floor on the argument of the Newton coefficient

  void validate() const {
    if (!(nu_inf > 0.0) || !(nu_0 >= nu_inf))
      throw std::invalid_argument("CrossModelParams: require 0 < nu_inf <= nu_0");
    if (!(K > 0.0)) throw std::invalid_argument("CrossModelParams: require K > 0");
    if (!(r > 1.0)) throw std::invalid_argument("CrossModelParams: require r > 1");
    if (eps_reg < 0.0) throw std::invalid_argument("CrossModelParams: require eps_reg >= 0");
  }

  bool linear() const { return r == 2.0; }
};

/// Cross viscosity at shear magnitude d >= 0. The convention d^0 = 1 applies
/// for r = 2, so that case is the constant nu_inf + (nu_0 - nu_inf)/(1 + K).
inline double nu(double d, const CrossModelParams& p) {
  const double e = 2.0 - p.r;
  const double pw = (e == 0.0) ? 1.0 : std::pow(d, e);
  return p.nu_inf + (p.nu_0 - p.nu_inf) / (1.0 + p.K * pw);
}

/// Derivative d(nu)/dd. Unbounded as d -> 0 for 1 < r < 2; callers guard.
inline double nu_deriv(double d, const CrossModelParams& p) {
  if (p.r == 2.0) return 0.0;
  const double e = 2.0 - p.r;
  const double pw = std::pow(d, e);
  const double den = 1.0 + p.K * pw;
  // d/dd [ (nu0-nuinf) (1+K d^e)^-1 ] = -(nu0-nuinf) K e d^(e-1) / (1+K d^e)^2
  return -(p.nu_0 - p.nu_inf) * p.K * e * std::pow(d, e - 1.0) / (den * den);
}

/// Scalar coefficient of the Newton rank-modification term,
///   (r-2)(nu_0-nu_inf)K / ((1 + K d~^(2-r))^2 d~^r),  d~ = max(d, eps_reg).
/// Equals nu'(d)/d analytically for d > 0; identically 0 for r = 2.
inline double nu_prime_coeff(double d, const CrossModelParams& p) {
  if (p.r == 2.0) return 0.0;
  const double dt = std::max(d, p.eps_reg);
  const double pw = std::pow(dt, 2.0 - p.r);
  const double den = 1.0 + p.K * pw;
  return (p.r - 2.0) * (p.nu_0 - p.nu_inf) * p.K / (den * den * std::pow(dt, p.r));
}

} // namespace stokesdarcy
