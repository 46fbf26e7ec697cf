#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokesdarcy {

using Vec2 = Eigen::Vector2d;

enum class Subdomain { fluid, porous };
enum class EdgeTag { interior, boundary, interface };

/// Sides of the rectangle, used to attach boundary data.
enum class Side : int { left = 0, right = 1, bottom = 2, top = 3, none = -1 };

struct Rect {
  double x0, y0, x1, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

struct Edge {
  int v0, v1;           // vertex indices, v0 < v1
  EdgeTag tag = EdgeTag::interior;
  Side side = Side::none;      // which rectangle side, for boundary/interface edges
  Vec2 normal = Vec2::Zero();  // outward unit normal (boundary/interface edges only)
};

/// Structured triangulation of an axis-aligned rectangle. Each cell is split
/// along the lower-left to upper-right diagonal; triangles are
/// counterclockwise. Immutable after construction.
struct Mesh {
  Rect domain{};
  Subdomain subdomain = Subdomain::fluid;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> tri_edges; // edge k is opposite local vertex k

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const {
    const Vec2& a = vertices[triangles[t][0]];
    const Vec2& b = vertices[triangles[t][1]];
    const Vec2& c = vertices[triangles[t][2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }
};

namespace detail {
constexpr double kGeomTol = 1e-12;
}

/// Build a structured nx-by-ny triangulation. Boundary edges are tagged by
/// side; edges lying on y = interface_y are tagged as interface edges.
inline Mesh build_rectangle_mesh(const Rect& domain, int nx, int ny, Subdomain sub,
                                 double interface_y = std::nan("")) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rectangle_mesh: cell counts must be positive");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw std::invalid_argument("build_rectangle_mesh: degenerate rectangle");

  Mesh mesh;
  mesh.domain = domain;
  mesh.subdomain = sub;

  const double hx = domain.width() / nx;
  const double hy = domain.height() / ny;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };

  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(domain.x0 + i * hx, domain.y0 + j * hy);
  // avoid drift on the far edges
  for (int j = 0; j <= ny; ++j) mesh.vertices[vid(nx, j)].x() = domain.x1;
  for (int i = 0; i <= nx; ++i) mesh.vertices[vid(i, ny)].y() = domain.y1;

  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }

  // unique edge enumeration
  std::map<std::pair<int, int>, int> edge_ids;
  mesh.tri_edges.resize(mesh.triangles.size());
  std::vector<int> edge_use(0);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.triangles[t][(k + 1) % 3];
      int b = mesh.triangles[t][(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_ids.try_emplace({a, b}, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        mesh.edges.push_back(Edge{a, b});
        edge_use.push_back(0);
      }
      mesh.tri_edges[t][k] = it->second;
      ++edge_use[it->second];
    }
  }

  const bool want_interface = !std::isnan(interface_y);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (edge_use[e] != 1) continue; // interior
    Edge& ed = mesh.edges[e];
    const Vec2& p0 = mesh.vertices[ed.v0];
    const Vec2& p1 = mesh.vertices[ed.v1];
    auto on = [&](double a, double b, double c) {
      return std::abs(a - c) <= detail::kGeomTol && std::abs(b - c) <= detail::kGeomTol;
    };
    if (on(p0.x(), p1.x(), domain.x0)) {
      ed.side = Side::left;
      ed.normal = {-1.0, 0.0};
    } else if (on(p0.x(), p1.x(), domain.x1)) {
      ed.side = Side::right;
      ed.normal = {1.0, 0.0};
    } else if (on(p0.y(), p1.y(), domain.y0)) {
      ed.side = Side::bottom;
      ed.normal = {0.0, -1.0};
    } else if (on(p0.y(), p1.y(), domain.y1)) {
      ed.side = Side::top;
      ed.normal = {0.0, 1.0};
    } else {
      throw std::logic_error("build_rectangle_mesh: boundary edge off the rectangle sides");
    }
    const bool on_iface =
        want_interface && on(p0.y(), p1.y(), interface_y) &&
        (ed.side == Side::bottom || ed.side == Side::top);
    ed.tag = on_iface ? EdgeTag::interface : EdgeTag::boundary;
  }
  return mesh;
}

/// Correspondence between the interface vertices of the two spatially
/// conforming meshes, ordered by arc length along Gamma.
struct InterfaceMap {
  std::vector<int> fluid_vertices;
  std::vector<int> porous_vertices;
  std::vector<double> arc_coords;

  int size() const { return static_cast<int>(fluid_vertices.size()); }
};

inline std::vector<int> interface_vertices_sorted(const Mesh& mesh) {
  std::vector<int> verts;
  std::vector<char> seen(mesh.n_vertices(), 0);
  for (const Edge& e : mesh.edges) {
    if (e.tag != EdgeTag::interface) continue;
    for (int v : {e.v0, e.v1})
      if (!seen[v]) {
        seen[v] = 1;
        verts.push_back(v);
      }
  }
  std::sort(verts.begin(), verts.end(), [&](int a, int b) {
    return mesh.vertices[a].x() < mesh.vertices[b].x();
  });
  return verts;
}

inline InterfaceMap build_interface_map(const Mesh& mesh_f, const Mesh& mesh_p) {
  InterfaceMap map;
  map.fluid_vertices = interface_vertices_sorted(mesh_f);
  map.porous_vertices = interface_vertices_sorted(mesh_p);
  if (map.fluid_vertices.empty())
    throw std::invalid_argument("build_interface_map: no interface edges tagged");
  if (map.fluid_vertices.size() != map.porous_vertices.size())
    throw std::invalid_argument(
        "build_interface_map: interface vertex counts differ (nonconforming meshes unsupported)");
  map.arc_coords.resize(map.fluid_vertices.size());
  for (std::size_t k = 0; k < map.fluid_vertices.size(); ++k) {
    const Vec2& a = mesh_f.vertices[map.fluid_vertices[k]];
    const Vec2& b = mesh_p.vertices[map.porous_vertices[k]];
    if ((a - b).lpNorm<Eigen::Infinity>() > detail::kGeomTol)
      throw std::invalid_argument(
          "build_interface_map: interface vertex coordinates mismatch (nonconforming meshes "
          "unsupported)");
    map.arc_coords[k] = a.x();
  }
  return map;
}

/// Legacy-VTK text dump of the triangulation, optionally with point data
/// fields (one scalar or 2-vector per vertex).
inline void write_vtk_mesh(const Mesh& mesh, const std::string& path,
                           const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk_mesh: cannot open " + path);
  out << "# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.n_vertices() << '\n';
    for (const auto& [name, values] : point_data) {
      if (values.size() == mesh.n_vertices()) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int i = 0; i < values.size(); ++i) out << values[i] << '\n';
      } else if (values.size() == 2 * mesh.n_vertices()) {
        out << "VECTORS " << name << " double\n";
        const int n = mesh.n_vertices();
        for (int i = 0; i < n; ++i) out << values[i] << ' ' << values[n + i] << " 0\n";
      }
    }
  }
}

} // namespace stokesdarcy
