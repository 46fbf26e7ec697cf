#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stokesdarcy {

/// Partition 0 = t^0 < t^1 < ... < t^M = T of the simulation interval.
struct TimeGrid {
  std::vector<double> breakpoints;

  int intervals() const { return static_cast<int>(breakpoints.size()) - 1; }
  double horizon() const { return breakpoints.back(); }
  double length(int m) const { return breakpoints[m + 1] - breakpoints[m]; }
  double end_of(int m) const { return breakpoints[m + 1]; }

  void validate() const {
    if (breakpoints.size() < 2 || breakpoints.front() != 0.0)
      throw std::invalid_argument("TimeGrid: need breakpoints starting at 0");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument("TimeGrid: breakpoints must strictly increase");
  }
};

inline TimeGrid uniform_grid(double T, int n) {
  if (!(T > 0.0) || n < 1) throw std::invalid_argument("uniform_grid: require T > 0, n >= 1");
  TimeGrid g;
  g.breakpoints.resize(n + 1);
  for (int k = 0; k <= n; ++k) g.breakpoints[k] = T * k / n;
  g.breakpoints[n] = T;
  return g;
}

/// Function of time that is constant on each interval of `grid`, with values
/// in a coefficient space (one vector per slab). Houses the interface
/// unknown lambda and its Newton updates.
struct PiecewiseConstantTimeField {
  TimeGrid grid;
  std::vector<Eigen::VectorXd> slabs;

  static PiecewiseConstantTimeField zero(const TimeGrid& g, int dim) {
    PiecewiseConstantTimeField f;
    f.grid = g;
    f.slabs.assign(g.intervals(), Eigen::VectorXd::Zero(dim));
    return f;
  }
};

/// L2 projection between piecewise-constant-in-time fields: each target slab
/// receives the overlap-weighted average of the source values. Single
/// forward sweep over the merged breakpoint sequence, cost O(M + N).
inline PiecewiseConstantTimeField project(const PiecewiseConstantTimeField& source,
                                          const TimeGrid& target) {
  const TimeGrid& sg = source.grid;
  const double T = sg.horizon();
  const double tol = 1e-12 * T;
  if (std::abs(target.horizon() - T) > tol)
    throw std::invalid_argument("project: source and target horizons differ");

  const int dim = source.slabs.empty() ? 0 : static_cast<int>(source.slabs.front().size());
  PiecewiseConstantTimeField out = PiecewiseConstantTimeField::zero(target, dim);

  int m = 0, n = 0;
  double t = 0.0;
  while (m < sg.intervals() && n < target.intervals()) {
    const double se = sg.breakpoints[m + 1];
    const double te = target.breakpoints[n + 1];
    const double next = std::min(se, te);
    const double w = next - t;
    if (w > 0.0) out.slabs[n] += w * source.slabs[m];
    t = next;
    // coincident breakpoints (within tol) advance both grids
    if (se <= next + tol) ++m;
    if (te <= next + tol) ++n;
  }
  for (int k = 0; k < target.intervals(); ++k) out.slabs[k] /= target.length(k);
  return out;
}

} // namespace stokesdarcy
