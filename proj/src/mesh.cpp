#include "pmatch/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

uint64_t pair_key(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

uint64_t unordered_key(int a, int b) { return a < b ? pair_key(a, b) : pair_key(b, a); }

}  // namespace

const char* to_string(ElementTag tag) {
  switch (tag) {
    case ElementTag::vertex: return "vertex";
    case ElementTag::edge: return "edge";
    case ElementTag::triangle: return "triangle";
  }
  return "?";
}

ElementTag element_tag_from_string(const std::string& s) {
  if (s == "vertex") return ElementTag::vertex;
  if (s == "edge") return ElementTag::edge;
  if (s == "triangle") return ElementTag::triangle;
  throw InputError("unknown element tag '" + s + "'");
}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  vertex_triangles_.resize(vertices_.size());
  vertex_out_edges_.resize(vertices_.size());

  for (int f = 0; f < num_triangles(); ++f) {
    const Tri& t = triangles_[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a == b) continue;  // degenerate triangle; validate() reports it
      auto [it, inserted] = edge_index_.try_emplace(pair_key(a, b), num_directed_edges());
      if (inserted) {
        edges_.push_back({a, b});
        edge_triangle_.push_back(f);
        vertex_out_edges_[a].push_back(it->second);
      }
    }
    for (int k = 0; k < 3; ++k) {
      int v = t[k];
      auto& inc = vertex_triangles_[v];
      if (inc.empty() || inc.back() != f) inc.push_back(f);
    }
  }

  reverse_.assign(edges_.size(), -1);
  for (int e = 0; e < num_directed_edges(); ++e) {
    auto it = edge_index_.find(pair_key(edges_[e].to, edges_[e].from));
    reverse_[e] = it == edge_index_.end() ? -1 : it->second;
    if (reverse_[e] < 0) has_boundary_ = true;
  }

  for (int e = 0; e < num_directed_edges(); ++e)
    if (edges_[e].from < edges_[e].to || reverse_[e] < 0) ++num_undirected_edges_;
}

int Mesh::find_directed_edge(int a, int b) const {
  auto it = edge_index_.find(pair_key(a, b));
  return it == edge_index_.end() ? -1 : it->second;
}

int Mesh::euler_characteristic() const {
  return num_vertices() - num_undirected_edges_ + num_triangles();
}

double Mesh::surface_area() const {
  double total = 0.0;
  for (const Tri& t : triangles_)
    total += triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
  return total;
}

std::vector<double> Mesh::mixed_voronoi_areas() const {
  std::vector<double> area(vertices_.size(), 0.0);
  for (const Tri& t : triangles_) {
    const Vec3 &p0 = vertices_[t[0]], &p1 = vertices_[t[1]], &p2 = vertices_[t[2]];
    double full = triangle_area(p0, p1, p2);
    if (full <= 0.0) continue;
    double d0 = dot(p1 - p0, p2 - p0);
    double d1 = dot(p2 - p1, p0 - p1);
    double d2 = dot(p0 - p2, p1 - p2);
    if (d0 < 0.0 || d1 < 0.0 || d2 < 0.0) {
      // Obtuse: half at the obtuse corner, quarter at the others.
      for (int k = 0; k < 3; ++k) {
        double dk = k == 0 ? d0 : (k == 1 ? d1 : d2);
        area[t[k]] += dk < 0.0 ? full / 2.0 : full / 4.0;
      }
    } else {
      double c0 = cotangent(p0, p1, p2);
      double c1 = cotangent(p1, p2, p0);
      double c2 = cotangent(p2, p0, p1);
      area[t[0]] += (squared_norm(p1 - p0) * c2 + squared_norm(p2 - p0) * c1) / 8.0;
      area[t[1]] += (squared_norm(p2 - p1) * c0 + squared_norm(p0 - p1) * c2) / 8.0;
      area[t[2]] += (squared_norm(p0 - p2) * c1 + squared_norm(p1 - p2) * c0) / 8.0;
    }
  }
  return area;
}

std::string ValidationIssue::describe() const {
  std::string head;
  switch (kind) {
    case Kind::non_manifold_edge: head = "non-manifold edge"; break;
    case Kind::inconsistent_orientation: head = "inconsistent orientation at edge"; break;
    case Kind::non_manifold_vertex: head = "non-manifold vertex"; break;
    case Kind::isolated_vertex: head = "isolated vertex"; break;
    case Kind::degenerate_triangle: head = "degenerate triangle"; break;
  }
  for (int v : elements) head += " " + std::to_string(v);
  return head;
}

int ValidationReport::count(ValidationIssue::Kind kind) const {
  int n = 0;
  for (const auto& issue : issues)
    if (issue.kind == kind) ++n;
  return n;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

ValidationReport validate(const Mesh& mesh) {
  ValidationReport report;
  std::unordered_map<uint64_t, int> directed_count;
  std::unordered_map<uint64_t, std::vector<int>> undirected_tris;

  for (int f = 0; f < mesh.num_triangles(); ++f) {
    const Tri& t = mesh.triangle(f);
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
      report.issues.push_back({ValidationIssue::Kind::degenerate_triangle, {t[0], t[1], t[2]}});
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      ++directed_count[pair_key(a, b)];
      undirected_tris[unordered_key(a, b)].push_back(f);
    }
  }

  for (const auto& [key, tris] : undirected_tris) {
    int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    if (tris.size() > 2) {
      report.issues.push_back({ValidationIssue::Kind::non_manifold_edge, {a, b}});
    } else {
      auto it = directed_count.find(pair_key(a, b));
      int fwd = it == directed_count.end() ? 0 : it->second;
      if (fwd >= 2 || static_cast<int>(tris.size()) - fwd >= 2)
        report.issues.push_back({ValidationIssue::Kind::inconsistent_orientation, {a, b}});
    }
  }

  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& inc = mesh.vertex_triangles(v);
    if (inc.empty()) {
      report.issues.push_back({ValidationIssue::Kind::isolated_vertex, {v}});
      continue;
    }
    // Fan connectivity: triangles around v joined across shared edges at v.
    UnionFind uf(static_cast<int>(inc.size()));
    std::unordered_map<uint64_t, int> edge_owner;
    for (int i = 0; i < static_cast<int>(inc.size()); ++i) {
      const Tri& t = mesh.triangle(inc[i]);
      if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) continue;
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a != v && b != v) continue;
        auto [it, inserted] = edge_owner.try_emplace(unordered_key(a, b), i);
        if (!inserted) uf.unite(i, it->second);
      }
    }
    int root = uf.find(0);
    for (int i = 1; i < static_cast<int>(inc.size()); ++i)
      if (uf.find(i) != root) {
        report.issues.push_back({ValidationIssue::Kind::non_manifold_vertex, {v}});
        break;
      }
  }

  // Deterministic report order.
  std::sort(report.issues.begin(), report.issues.end(),
            [](const ValidationIssue& a, const ValidationIssue& b) {
              if (a.kind != b.kind) return a.kind < b.kind;
              return a.elements < b.elements;
            });
  return report;
}

std::vector<std::vector<int>> boundary_loops(const Mesh& mesh) {
  std::vector<int> out_boundary(mesh.num_vertices(), -1);
  std::vector<int> boundary_edges;
  for (int e = 0; e < mesh.num_directed_edges(); ++e) {
    if (!mesh.edge_on_boundary(e)) continue;
    int v = mesh.directed_edge(e).from;
    if (out_boundary[v] >= 0)
      throw GeometryError("ambiguous boundary at vertex " + std::to_string(v) +
                          "; mesh must pass validation first");
    out_boundary[v] = e;
    boundary_edges.push_back(e);
  }

  std::vector<std::vector<int>> loops;
  std::vector<bool> used(mesh.num_directed_edges(), false);
  for (int start : boundary_edges) {
    if (used[start]) continue;
    std::vector<int> loop;
    int e = start;
    do {
      used[e] = true;
      loop.push_back(mesh.directed_edge(e).from);
      e = out_boundary[mesh.directed_edge(e).to];
      if (e < 0) throw GeometryError("boundary walk left the surface; mesh is defective");
    } while (e != start);
    loops.push_back(std::move(loop));
  }
  return loops;
}

ExtendedElements::ExtendedElements(const Mesh& mesh)
    : mesh_(&mesh),
      nv_(mesh.num_vertices()),
      ne_(mesh.num_directed_edges()),
      nf_(mesh.num_triangles()) {}

DirectedEdge ExtendedElements::edge_endpoints(int ee) const {
  if (ee < nv_) return {ee, ee};
  return mesh_->directed_edge(ee - nv_);
}

Tri ExtendedElements::triangle_triple(int et) const {
  if (et < nv_) return {et, et, et};
  if (et < nv_ + ne_) {
    DirectedEdge e = mesh_->directed_edge(et - nv_);
    return {e.from, e.from, e.to};
  }
  return mesh_->triangle(et - nv_ - ne_);
}

int ExtendedElements::find_edge(int a, int b) const {
  if (a == b) return a < nv_ ? a : -1;
  int e = mesh_->find_directed_edge(a, b);
  return e < 0 ? -1 : nv_ + e;
}

bool ExtendedElements::edge_on_boundary(int ee) const {
  return ee >= nv_ && mesh_->edge_on_boundary(ee - nv_);
}

ExtendedElements extend(const Mesh& mesh) { return ExtendedElements(mesh); }

int orientation_operator(const ExtendedElements& ext, int ext_edge, int ext_triangle) {
  DirectedEdge e = ext.edge_endpoints(ext_edge);
  switch (ext.triangle_tag(ext_triangle)) {
    case ElementTag::vertex:
      return 0;
    case ElementTag::edge: {
      DirectedEdge t = ext.edge_endpoints(ext.triangle_local(ext_triangle) + ext.mesh().num_vertices());
      if (e.from == t.from && e.to == t.to) return 1;
      if (e.from == t.to && e.to == t.from) return -1;
      if (e.from == e.to && e.from == t.from) return 1;
      if (e.from == e.to && e.from == t.to) return -1;
      return 0;
    }
    case ElementTag::triangle: {
      if (e.from == e.to) return 0;
      Tri t = ext.triangle_triple(ext_triangle);
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (e.from == a && e.to == b) return 1;
        if (e.from == b && e.to == a) return -1;
      }
      return 0;
    }
  }
  return 0;
}

double surface_area(const Mesh& mesh) { return mesh.surface_area(); }

uint64_t mesh_checksum(const Mesh& mesh) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  uint32_t nv = mesh.num_vertices(), nf = mesh.num_triangles();
  mix(&nv, sizeof nv);
  mix(&nf, sizeof nf);
  for (const Vec3& v : mesh.vertices()) {
    mix(&v.x, sizeof v.x);
    mix(&v.y, sizeof v.y);
    mix(&v.z, sizeof v.z);
  }
  for (const Tri& t : mesh.triangles()) mix(t.data(), sizeof(int) * 3);
  return h;
}

}  // namespace pmatch
