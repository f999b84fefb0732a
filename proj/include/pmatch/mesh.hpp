#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmatch/geometry.hpp"

namespace pmatch {

enum class ElementTag : uint8_t { vertex = 0, edge = 1, triangle = 2 };

const char* to_string(ElementTag tag);
ElementTag element_tag_from_string(const std::string& s);

struct DirectedEdge {
  int from = -1, to = -1;
  bool operator==(const DirectedEdge& o) const { return from == o.from && to == o.to; }
};

// Triangle mesh with derived directed-edge connectivity. Construction never
// fails on defective input; defects are surfaced by validate().
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_directed_edges() const { return static_cast<int>(edges_.size()); }
  int num_undirected_edges() const { return num_undirected_edges_; }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tri>& triangles() const { return triangles_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Tri& triangle(int f) const { return triangles_[f]; }

  DirectedEdge directed_edge(int e) const { return edges_[e]; }
  // -1 if (a, b) is not an edge of any triangle.
  int find_directed_edge(int a, int b) const;
  // Id of (to, from), -1 if absent.
  int reverse_edge(int e) const { return reverse_[e]; }
  bool edge_on_boundary(int e) const { return reverse_[e] < 0; }
  // First triangle containing directed edge e.
  int edge_triangle(int e) const { return edge_triangle_[e]; }

  const std::vector<int>& vertex_triangles(int v) const { return vertex_triangles_[v]; }
  const std::vector<int>& vertex_out_edges(int v) const { return vertex_out_edges_[v]; }

  bool has_boundary() const { return has_boundary_; }
  int euler_characteristic() const;
  double surface_area() const;
  // Per-vertex mixed Voronoi areas: obtuse triangles are split half/quarter,
  // non-obtuse ones by the circumcenter construction. Sums to surface_area().
  std::vector<double> mixed_voronoi_areas() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Tri> triangles_;
  std::vector<DirectedEdge> edges_;
  std::vector<int> reverse_;
  std::vector<int> edge_triangle_;
  std::vector<std::vector<int>> vertex_triangles_;
  std::vector<std::vector<int>> vertex_out_edges_;
  std::unordered_map<uint64_t, int> edge_index_;
  int num_undirected_edges_ = 0;
  bool has_boundary_ = false;
};

struct ValidationIssue {
  enum class Kind {
    non_manifold_edge,          // undirected edge in 3+ triangles
    inconsistent_orientation,   // directed edge repeated (same winding twice)
    non_manifold_vertex,        // triangle fan around vertex is not a single disk/half-disk
    isolated_vertex,            // vertex in no triangle
    degenerate_triangle,        // repeated vertex index within one triangle
  };
  Kind kind;
  std::vector<int> elements;  // offending vertex ids (edge issues: the two endpoints)
  std::string describe() const;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool clean() const { return issues.empty(); }
  int count(ValidationIssue::Kind kind) const;
};

ValidationReport validate(const Mesh& mesh);

// Ordered boundary loops (vertex ids, following directed boundary edges).
// Requires a validate()-clean mesh; throws GeometryError otherwise.
std::vector<std::vector<int>> boundary_loops(const Mesh& mesh);

// Extended elements: every vertex doubles as a degenerate self-edge and a
// degenerate triangle, every directed edge doubles as a degenerate triangle.
//
// Extended-edge ids:     [0, nv) vertices, [nv, nv+ne) directed edges.
// Extended-triangle ids: [0, nv) vertices, [nv, nv+ne) directed edges,
//                        [nv+ne, nv+ne+nf) triangles.
class ExtendedElements {
 public:
  explicit ExtendedElements(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int num_edges() const { return nv_ + ne_; }
  int num_triangles() const { return nv_ + ne_ + nf_; }

  ElementTag edge_tag(int ee) const { return ee < nv_ ? ElementTag::vertex : ElementTag::edge; }
  ElementTag triangle_tag(int et) const {
    if (et < nv_) return ElementTag::vertex;
    return et < nv_ + ne_ ? ElementTag::edge : ElementTag::triangle;
  }

  int edge_of_vertex(int v) const { return v; }
  int edge_of_directed_edge(int e) const { return nv_ + e; }
  int triangle_of_vertex(int v) const { return v; }
  int triangle_of_directed_edge(int e) const { return nv_ + e; }
  int triangle_of_face(int f) const { return nv_ + ne_ + f; }

  // Index of the underlying vertex / directed edge / triangle.
  int edge_local(int ee) const { return ee < nv_ ? ee : ee - nv_; }
  int triangle_local(int et) const {
    if (et < nv_) return et;
    return et < nv_ + ne_ ? et - nv_ : et - nv_ - ne_;
  }

  // Endpoints (from, to); a vertex self-edge is (v, v).
  DirectedEdge edge_endpoints(int ee) const;
  // Vertex triple up to cyclic rotation: vertex v -> (v,v,v); directed edge
  // (a,b) -> (a,a,b); triangle -> its corners in stored winding.
  Tri triangle_triple(int et) const;
  // Extended edge id for an ordered vertex pair, -1 if not an extended edge.
  int find_edge(int a, int b) const;
  // True if the extended edge is a mesh boundary edge (vertex self-edges and
  // interior edges are not).
  bool edge_on_boundary(int ee) const;

 private:
  const Mesh* mesh_;
  int nv_ = 0, ne_ = 0, nf_ = 0;
};

ExtendedElements extend(const Mesh& mesh);

// Signed incidence of an extended edge on the boundary of an extended
// triangle. Proper triangles: +1 if the edge matches the winding, -1 if it
// opposes it, 0 otherwise. An edge-as-triangle (a,b) has boundary
// +(a,b) +(a,a) -(b,b) -(b,a); a vertex-as-triangle has empty boundary.
int orientation_operator(const ExtendedElements& ext, int ext_edge, int ext_triangle);

double surface_area(const Mesh& mesh);

// FNV-1a over vertex coordinates and triangle indices; stable across runs.
uint64_t mesh_checksum(const Mesh& mesh);

}  // namespace pmatch
