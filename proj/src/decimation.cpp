#include "pmatch/decimation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "pmatch/errors.hpp"

namespace pmatch {

DecimationTrace DecimationTrace::identity(int num_vertices, int num_faces) {
  DecimationTrace t;
  t.fine_to_coarse.resize(num_vertices);
  t.coarse_to_fine.resize(num_vertices);
  for (int v = 0; v < num_vertices; ++v) t.fine_to_coarse[v] = t.coarse_to_fine[v] = v;
  t.fine_faces = t.coarse_faces = num_faces;
  return t;
}

DecimationTrace DecimationTrace::compose(const DecimationTrace& inner,
                                         const DecimationTrace& outer) {
  DecimationTrace t;
  t.fine_to_coarse.resize(inner.fine_to_coarse.size());
  for (size_t v = 0; v < inner.fine_to_coarse.size(); ++v)
    t.fine_to_coarse[v] = outer.fine_to_coarse[inner.fine_to_coarse[v]];
  t.coarse_to_fine.resize(outer.coarse_to_fine.size());
  for (size_t c = 0; c < outer.coarse_to_fine.size(); ++c)
    t.coarse_to_fine[c] = inner.coarse_to_fine[outer.coarse_to_fine[c]];
  t.fine_faces = inner.fine_faces;
  t.coarse_faces = outer.coarse_faces;
  return t;
}

namespace {

// Working state: positions never move (half collapse), faces are rewritten
// in place and flagged dead.
struct Collapser {
  const std::vector<Vec3>& pos;
  std::vector<Tri> faces;
  std::vector<char> face_alive;
  std::vector<std::vector<int>> incident;  // vertex -> alive face ids (lazily cleaned)
  std::vector<char> vertex_alive;
  std::vector<int> merged_into;  // dead vertex -> its collapse target
  int alive_faces;

  explicit Collapser(const Mesh& mesh)
      : pos(mesh.vertices()),
        faces(mesh.triangles()),
        face_alive(mesh.num_triangles(), 1),
        incident(mesh.num_vertices()),
        vertex_alive(mesh.num_vertices(), 1),
        merged_into(mesh.num_vertices(), -1),
        alive_faces(mesh.num_triangles()) {
    for (int f = 0; f < mesh.num_triangles(); ++f)
      for (int v : faces[f]) incident[v].push_back(f);
  }

  void clean_incident(int v) {
    auto& inc = incident[v];
    inc.erase(std::remove_if(inc.begin(), inc.end(),
                             [this, v](int f) {
                               return !face_alive[f] || (faces[f][0] != v && faces[f][1] != v &&
                                                         faces[f][2] != v);
                             }),
              inc.end());
    std::sort(inc.begin(), inc.end());
    inc.erase(std::unique(inc.begin(), inc.end()), inc.end());
  }

  // Alive neighbors of v, sorted.
  std::vector<int> link_vertices(int v) {
    clean_incident(v);
    std::set<int> out;
    for (int f : incident[v])
      for (int u : faces[f])
        if (u != v) out.insert(u);
    return {out.begin(), out.end()};
  }

  bool has_edge(int a, int b) {
    clean_incident(a);
    for (int f : incident[a]) {
      const Tri& t = faces[f];
      bool hasA = t[0] == a || t[1] == a || t[2] == a;
      bool hasB = t[0] == b || t[1] == b || t[2] == b;
      if (hasA && hasB) return true;
    }
    return false;
  }

  bool on_boundary(int v) {
    clean_incident(v);
    // Count undirected edges at v seen once only.
    std::vector<std::pair<int, int>> edges;
    for (int f : incident[v]) {
      const Tri& t = faces[f];
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a == v || b == v) edges.push_back(std::minmax(a, b));
      }
    }
    std::sort(edges.begin(), edges.end());
    for (size_t i = 0; i < edges.size();) {
      size_t j = i;
      while (j < edges.size() && edges[j] == edges[i]) ++j;
      if (j - i == 1) return true;
      i = j;
    }
    return false;
  }

  bool edge_on_boundary(int a, int b) {
    int count = 0;
    clean_incident(a);
    for (int f : incident[a]) {
      const Tri& t = faces[f];
      bool hasA = t[0] == a || t[1] == a || t[2] == a;
      bool hasB = t[0] == b || t[1] == b || t[2] == b;
      if (hasA && hasB) ++count;
    }
    return count == 1;
  }

  // Link condition plus boundary and geometry guards for collapsing src into dst.
  bool collapse_legal(int src, int dst) {
    if (!vertex_alive[src] || !vertex_alive[dst] || !has_edge(src, dst)) return false;

    bool src_boundary = on_boundary(src);
    bool edge_boundary = edge_on_boundary(src, dst);
    // A boundary vertex may only slide along the boundary.
    if (src_boundary && !edge_boundary) return false;

    // Shared link must be exactly the opposite vertices of the shared faces.
    std::vector<int> shared_faces, opposite;
    clean_incident(src);
    for (int f : incident[src]) {
      const Tri& t = faces[f];
      bool hasDst = t[0] == dst || t[1] == dst || t[2] == dst;
      if (!hasDst) continue;
      shared_faces.push_back(f);
      for (int u : t)
        if (u != src && u != dst) opposite.push_back(u);
    }
    if (shared_faces.size() > 2) return false;
    std::sort(opposite.begin(), opposite.end());
    std::vector<int> ls = link_vertices(src), ld = link_vertices(dst);
    std::vector<int> both;
    std::set_intersection(ls.begin(), ls.end(), ld.begin(), ld.end(), std::back_inserter(both));
    if (both != opposite) return false;

    // Collapsing the rim of a tetrahedron-like pocket would invert it.
    if (static_cast<int>(ls.size()) == 3 && !src_boundary) return false;

    // Rewritten faces must keep their normal direction.
    for (int f : incident[src]) {
      const Tri& t = faces[f];
      bool hasDst = t[0] == dst || t[1] == dst || t[2] == dst;
      if (hasDst) continue;  // face dies
      Tri moved = t;
      for (int& u : moved)
        if (u == src) u = dst;
      Vec3 n0 = cross(pos[t[1]] - pos[t[0]], pos[t[2]] - pos[t[0]]);
      Vec3 n1 = cross(pos[moved[1]] - pos[moved[0]], pos[moved[2]] - pos[moved[0]]);
      if (dot(n0, n1) <= 0.0) return false;
    }
    return true;
  }

  void collapse(int src, int dst) {
    clean_incident(src);
    std::vector<int> inc = incident[src];
    for (int f : inc) {
      Tri& t = faces[f];
      bool hasDst = t[0] == dst || t[1] == dst || t[2] == dst;
      if (hasDst) {
        face_alive[f] = 0;
        --alive_faces;
      } else {
        for (int& u : t)
          if (u == src) u = dst;
        incident[dst].push_back(f);
      }
    }
    incident[src].clear();
    vertex_alive[src] = 0;
    merged_into[src] = dst;
  }
};

}  // namespace

DecimationResult decimate(const Mesh& mesh, int target_faces) {
  ValidationReport report = validate(mesh);
  if (!report.clean())
    throw GeometryError("decimation requires a validation-clean mesh; found " +
                        std::to_string(report.issues.size()) + " issue(s)");

  DecimationResult out;
  if (target_faces >= mesh.num_triangles()) {
    out.mesh = mesh;
    out.trace = DecimationTrace::identity(mesh.num_vertices(), mesh.num_triangles());
    return out;
  }
  if (target_faces < 1) target_faces = 1;

  Collapser state(mesh);

  // (length, src, dst): src is removed. Ordered ascending, ties by ids.
  using Entry = std::tuple<double, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  auto push_edge = [&](int a, int b) {
    double len = norm(state.pos[a] - state.pos[b]);
    queue.emplace(len, a, b);
    queue.emplace(len, b, a);
  };
  for (int e = 0; e < mesh.num_directed_edges(); ++e) {
    DirectedEdge d = mesh.directed_edge(e);
    if (d.from < d.to) push_edge(d.from, d.to);
  }

  while (state.alive_faces > target_faces && !queue.empty()) {
    auto [len, src, dst] = queue.top();
    queue.pop();
    if (!state.collapse_legal(src, dst)) continue;
    std::vector<int> neighborhood = state.link_vertices(src);
    state.collapse(src, dst);
    // Rewritten edges around dst are new undirected edges.
    for (int u : neighborhood)
      if (u != dst && state.vertex_alive[u] && state.has_edge(dst, u)) push_edge(dst, u);
  }

  if (state.alive_faces > target_faces)
    out.note = "no legal collapse left at " + std::to_string(state.alive_faces) + " faces";

  // Compact surviving elements.
  std::vector<int> coarse_id(mesh.num_vertices(), -1);
  std::vector<Vec3> vertices;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (state.vertex_alive[v]) {
      coarse_id[v] = static_cast<int>(vertices.size());
      vertices.push_back(state.pos[v]);
      out.trace.coarse_to_fine.push_back(v);
    }
  std::vector<Tri> faces;
  for (int f = 0; f < mesh.num_triangles(); ++f)
    if (state.face_alive[f]) {
      Tri t = state.faces[f];
      for (int& v : t) v = coarse_id[v];
      faces.push_back(t);
    }

  out.trace.fine_to_coarse.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    int w = v;
    while (state.merged_into[w] >= 0) w = state.merged_into[w];
    out.trace.fine_to_coarse[v] = coarse_id[w];
  }
  out.trace.fine_faces = mesh.num_triangles();
  out.trace.coarse_faces = static_cast<int>(faces.size());
  out.mesh = Mesh(std::move(vertices), std::move(faces));
  return out;
}

int partial_face_budget(const Mesh& partial, const Mesh& full, int full_target) {
  double ratio = partial.surface_area() / full.surface_area();
  int budget = static_cast<int>(std::lround(2.0 * ratio * full_target));
  return std::clamp(budget, std::min(4, partial.num_triangles()), partial.num_triangles());
}

}  // namespace pmatch
