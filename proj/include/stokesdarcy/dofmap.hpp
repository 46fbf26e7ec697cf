#pragma once

#include "stokesdarcy/mesh.hpp"

#include <algorithm>
#include <vector>

namespace stokesdarcy {

/// Taylor-Hood degree-of-freedom numbering on one mesh.
///
/// Scalar P2 nodes are the vertices followed by the edge midpoints. Global
/// layout of one subdomain system: [ux nodes | uy nodes | pressure vertices].
/// Multiplier dofs are the P2 trace space on the interface (vertices and edge
/// midpoints) ordered by arc length; the two subdomain meshes share that
/// ordering, so multiplier vectors are interchangeable across the interface.
struct DofMap {
  int n_scalar = 0;     // P2 scalar nodes
  int n_pressure = 0;   // P1 vertices
  int n_multiplier = 0; // interface P2 nodes

  std::vector<int> interface_nodes;         // P2 node ids on Gamma, sorted by x
  std::vector<int> multiplier_of_node;      // P2 node -> multiplier dof, -1 elsewhere
  std::vector<int> interface_edges;         // mesh edge ids on Gamma

  int n_velocity() const { return 2 * n_scalar; }
  int n_total() const { return n_velocity() + n_pressure; }

  int ux(int node) const { return node; }
  int uy(int node) const { return n_scalar + node; }
  int vel(int node, int comp) const { return comp * n_scalar + node; }
  int pressure(int vertex) const { return 2 * n_scalar + vertex; }
  int midpoint_node(int edge) const { return n_pressure + edge; }
};

/// Coordinates of a P2 node (vertex or edge midpoint).
inline Vec2 node_position(const Mesh& mesh, int node) {
  if (node < mesh.n_vertices()) return mesh.vertices[node];
  const Edge& ed = mesh.edges[node - mesh.n_vertices()];
  return 0.5 * (mesh.vertices[ed.v0] + mesh.vertices[ed.v1]);
}

inline DofMap build_dofmap(const Mesh& mesh) {
  DofMap d;
  d.n_pressure = mesh.n_vertices();
  d.n_scalar = mesh.n_vertices() + mesh.n_edges();
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (mesh.edges[e].tag == EdgeTag::interface) d.interface_edges.push_back(e);
  std::vector<char> seen(mesh.n_vertices(), 0);
  for (int e : d.interface_edges) {
    const Edge& ed = mesh.edges[e];
    for (int v : {ed.v0, ed.v1})
      if (!seen[v]) {
        seen[v] = 1;
        d.interface_nodes.push_back(v);
      }
    d.interface_nodes.push_back(d.midpoint_node(e));
  }
  std::sort(d.interface_nodes.begin(), d.interface_nodes.end(), [&](int a, int b) {
    return node_position(mesh, a).x() < node_position(mesh, b).x();
  });
  d.n_multiplier = static_cast<int>(d.interface_nodes.size());
  d.multiplier_of_node.assign(d.n_scalar, -1);
  for (int k = 0; k < d.n_multiplier; ++k) d.multiplier_of_node[d.interface_nodes[k]] = k;
  return d;
}

} // namespace stokesdarcy
