#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace stokesdarcy {

/// Quadrature point in barycentric-free reference coordinates (x, y) on the
/// triangle {(0,0),(1,0),(0,1)}; weights sum to 1/2 (reference area).
struct TriQuadPoint {
  double x, y, w;
};

/// Dunavant rule of polynomial degree 4 (6 points).
inline const std::vector<TriQuadPoint>& tri_quadrature_deg4() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> q;
    const double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
    auto add3 = [&](double a, double b, double w) {
      q.push_back({a, b, w / 2.0});
      q.push_back({b, a, w / 2.0});
      q.push_back({b, b, w / 2.0});
    };
    add3(a1, b1, w1);
    add3(a2, b2, w2);
    return q;
  }();
  return rule;
}

/// Dunavant rule of polynomial degree 6 (12 points).
inline const std::vector<TriQuadPoint>& tri_quadrature_deg6() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> q;
    auto add3 = [&](double a, double b, double w) {
      q.push_back({a, b, w / 2.0});
      q.push_back({b, a, w / 2.0});
      q.push_back({b, b, w / 2.0});
    };
    auto add6 = [&](double a, double b, double c, double w) {
      q.push_back({a, b, w / 2.0});
      q.push_back({b, a, w / 2.0});
      q.push_back({a, c, w / 2.0});
      q.push_back({c, a, w / 2.0});
      q.push_back({b, c, w / 2.0});
      q.push_back({c, b, w / 2.0});
    };
    add3(0.501426509658179, 0.249286745170910, 0.116786275726379);
    add3(0.873821971016996, 0.063089014491502, 0.050844906370207);
    add6(0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
    return q;
  }();
  return rule;
}

/// Gauss-Legendre points on [0, 1]; 3 points, exact to degree 5.
struct LineQuadPoint {
  double s, w;
};

inline const std::array<LineQuadPoint, 3>& line_quadrature() {
  static const std::array<LineQuadPoint, 3> rule = [] {
    const double c = std::sqrt(3.0 / 5.0);
    return std::array<LineQuadPoint, 3>{{{0.5 * (1.0 - c), 5.0 / 18.0},
                                         {0.5, 8.0 / 18.0},
                                         {0.5 * (1.0 + c), 5.0 / 18.0}}};
  }();
  return rule;
}

/// P2 Lagrange basis on the reference triangle. Node order: vertices 0..2,
/// then midpoints of the edges opposite each vertex (3: edge 1-2, 4: edge
/// 2-0, 5: edge 0-1).
inline void p2_basis(double x, double y, std::array<double, 6>& phi,
                     std::array<std::array<double, 2>, 6>& dphi) {
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  phi = {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
         4 * l1 * l2,       4 * l2 * l0,       4 * l0 * l1};
  // gradients of (l0,l1,l2): (-1,-1), (1,0), (0,1)
  dphi[0] = {-(4 * l0 - 1), -(4 * l0 - 1)};
  dphi[1] = {4 * l1 - 1, 0.0};
  dphi[2] = {0.0, 4 * l2 - 1};
  dphi[3] = {4 * l2, 4 * l1};
  dphi[4] = {-4 * l2, 4 * (l0 - l2)};
  dphi[5] = {4 * (l0 - l1), -4 * l1};
}

/// P1 Lagrange basis on the reference triangle.
inline void p1_basis(double x, double y, std::array<double, 3>& psi,
                     std::array<std::array<double, 2>, 3>& dpsi) {
  psi = {1.0 - x - y, x, y};
  dpsi = {{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
}

/// P2 trace basis on an edge, parameterized by s in [0, 1] from the first
/// endpoint: node order (endpoint 0, endpoint 1, midpoint).
inline std::array<double, 3> p2_edge_basis(double s) {
  return {(1 - s) * (1 - 2 * s), s * (2 * s - 1), 4 * s * (1 - s)};
}

} // namespace stokesdarcy
