#include "pmatch/repair.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

uint64_t unordered_key(int a, int b) {
  uint32_t lo = static_cast<uint32_t>(std::min(a, b));
  uint32_t hi = static_cast<uint32_t>(std::max(a, b));
  return (static_cast<uint64_t>(hi) << 32) | lo;
}

Tri cyclic_canonical(const Tri& t) {
  Tri best = t;
  for (int k = 1; k < 3; ++k) {
    Tri rot = {t[k], t[(k + 1) % 3], t[(k + 2) % 3]};
    if (rot < best) best = rot;
  }
  return best;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Faces kept after removing repeated-index faces, exact cyclic duplicates,
// and excess faces at undirected edges with more than two incidences.
std::vector<Tri> drop_defective_faces(const std::vector<Tri>& input, RepairLog& log) {
  std::vector<Tri> faces;
  std::unordered_set<uint64_t> seen;
  for (const Tri& t : input) {
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
      ++log.dropped_degenerate;
      continue;
    }
    Tri c = cyclic_canonical(t);
    uint64_t key = (static_cast<uint64_t>(c[0]) << 42) ^ (static_cast<uint64_t>(c[1]) << 21) ^
                   static_cast<uint64_t>(c[2]);
    if (!seen.insert(key).second) {
      ++log.dropped_degenerate;
      continue;
    }
    faces.push_back(t);
  }

  for (;;) {
    std::map<uint64_t, std::vector<int>> edge_faces;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      for (int k = 0; k < 3; ++k)
        edge_faces[unordered_key(faces[f][k], faces[f][(k + 1) % 3])].push_back(f);

    std::vector<int> badness(faces.size(), 0);
    uint64_t worst_edge = 0;
    bool found = false;
    for (const auto& [key, fs] : edge_faces) {
      if (fs.size() <= 2) continue;
      for (int f : fs) ++badness[f];
      if (!found) {
        worst_edge = key;
        found = true;
      }
    }
    if (!found) break;

    const auto& fs = edge_faces[worst_edge];
    int victim = fs[0];
    for (int f : fs)
      if (badness[f] > badness[victim] || (badness[f] == badness[victim] && f > victim))
        victim = f;
    faces.erase(faces.begin() + victim);
    ++log.dropped_overfull_edge;
  }
  return faces;
}

// Winding flips that make every shared edge consistent; empty optional when
// some component is non-orientable.
std::vector<char> propagate_orientation(const std::vector<Tri>& faces, bool& orientable) {
  int nf = static_cast<int>(faces.size());
  std::unordered_map<uint64_t, std::vector<int>> edge_faces;
  for (int f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k)
      edge_faces[unordered_key(faces[f][k], faces[f][(k + 1) % 3])].push_back(f);

  auto has_directed = [&faces](int f, int a, int b) {
    for (int k = 0; k < 3; ++k)
      if (faces[f][k] == a && faces[f][(k + 1) % 3] == b) return true;
    return false;
  };

  std::vector<char> flip(nf, 0);
  std::vector<char> visited(nf, 0);
  orientable = true;
  for (int start = 0; start < nf; ++start) {
    if (visited[start]) continue;
    visited[start] = 1;
    std::queue<int> queue;
    queue.push(start);
    while (!queue.empty()) {
      int f = queue.front();
      queue.pop();
      for (int k = 0; k < 3; ++k) {
        int a = faces[f][k], b = faces[f][(k + 1) % 3];
        for (int g : edge_faces[unordered_key(a, b)]) {
          if (g == f) continue;
          // After flips exactly one of f, g may traverse (a, b). f traverses
          // it iff !flip[f], so g must traverse it iff flip[f].
          char needed = has_directed(g, a, b) ? static_cast<char>(1 - flip[f]) : flip[f];
          if (!visited[g]) {
            visited[g] = 1;
            flip[g] = needed;
            queue.push(g);
          } else if (flip[g] != needed) {
            orientable = false;
            return flip;
          }
        }
      }
    }
  }
  return flip;
}

double faces_signed_volume(const std::vector<Vec3>& v, const std::vector<Tri>& faces) {
  double vol = 0.0;
  for (const Tri& t : faces) vol += dot(v[t[0]], cross(v[t[1]], v[t[2]])) / 6.0;
  return vol;
}

// Flips per-component: outward volume for closed components, minimal flip
// count for open ones. `flip` holds the propagation result on entry.
void fix_component_handedness(const std::vector<Vec3>& vertices, std::vector<Tri>& faces,
                              std::vector<char>& flip, RepairLog& log) {
  int nf = static_cast<int>(faces.size());
  UnionFind uf(nf);
  std::unordered_map<uint64_t, int> edge_owner;
  for (int f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = edge_owner.try_emplace(unordered_key(faces[f][k], faces[f][(k + 1) % 3]), f);
      if (!inserted) uf.unite(f, it->second);
    }

  std::map<int, std::vector<int>> components;
  for (int f = 0; f < nf; ++f) components[uf.find(f)].push_back(f);

  for (auto& [root, members] : components) {
    // Apply tentative flips, then decide whether to flip the whole component.
    std::vector<Tri> oriented;
    for (int f : members) {
      Tri t = faces[f];
      if (flip[f]) std::swap(t[1], t[2]);
      oriented.push_back(t);
    }
    std::unordered_set<uint64_t> dir;
    bool closed = true;
    for (const Tri& t : oriented)
      for (int k = 0; k < 3; ++k)
        dir.insert((static_cast<uint64_t>(t[k]) << 32) | static_cast<uint32_t>(t[(k + 1) % 3]));
    for (const Tri& t : oriented)
      for (int k = 0; k < 3; ++k)
        if (!dir.count((static_cast<uint64_t>(t[(k + 1) % 3]) << 32) | static_cast<uint32_t>(t[k])))
          closed = false;

    bool flip_all;
    if (closed) {
      flip_all = faces_signed_volume(vertices, oriented) < 0.0;
    } else {
      int flipped = 0;
      for (int f : members) flipped += flip[f];
      flip_all = 2 * flipped > static_cast<int>(members.size());
    }
    if (flip_all)
      for (int f : members) flip[f] = !flip[f];
  }

  for (int f = 0; f < nf; ++f)
    if (flip[f]) {
      std::swap(faces[f][1], faces[f][2]);
      ++log.flipped_faces;
    }
}

// Splits vertices whose triangle fan has several edge-connected components.
void split_pinch_vertices(std::vector<Vec3>& vertices, std::vector<Tri>& faces,
                          std::vector<int>& vertex_origin, RepairLog& log) {
  int nv = static_cast<int>(vertices.size());
  std::vector<std::vector<int>> incident(nv);
  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    for (int v : faces[f]) incident[v].push_back(f);

  for (int v = 0; v < nv; ++v) {
    auto& inc = incident[v];
    if (inc.size() <= 1) continue;
    UnionFind uf(static_cast<int>(inc.size()));
    std::unordered_map<uint64_t, int> edge_owner;
    for (int i = 0; i < static_cast<int>(inc.size()); ++i) {
      const Tri& t = faces[inc[i]];
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a != v && b != v) continue;
        auto [it, inserted] = edge_owner.try_emplace(unordered_key(a, b), i);
        if (!inserted) uf.unite(i, it->second);
      }
    }
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(inc.size()); ++i) groups[uf.find(i)].push_back(i);
    if (groups.size() <= 1) continue;

    bool first = true;
    for (auto& [root, members] : groups) {
      if (first) {  // lowest face id keeps the original vertex
        first = false;
        continue;
      }
      int clone = static_cast<int>(vertices.size());
      vertices.push_back(vertices[v]);
      vertex_origin.push_back(vertex_origin[v]);
      ++log.duplicated_pinch_vertices;
      for (int i : members)
        for (int& corner : faces[inc[i]])
          if (corner == v) corner = clone;
    }
  }
}

}  // namespace

RepairResult make_manifold(const Mesh& input) {
  RepairResult out;
  RepairLog& log = out.log;
  std::vector<Vec3> vertices = input.vertices();
  log.vertex_origin.resize(vertices.size());
  std::iota(log.vertex_origin.begin(), log.vertex_origin.end(), 0);

  std::vector<Tri> faces = drop_defective_faces(input.triangles(), log);

  bool orientable = true;
  std::vector<char> flip = propagate_orientation(faces, orientable);
  if (!orientable)
    throw GeometryError("surface is non-orientable; cannot repair orientation");
  fix_component_handedness(vertices, faces, flip, log);

  split_pinch_vertices(vertices, faces, log.vertex_origin, log);

  // Keep the largest edge-connected component (ties: the one with the
  // lowest face id).
  if (!faces.empty()) {
    int nf = static_cast<int>(faces.size());
    UnionFind uf(nf);
    std::unordered_map<uint64_t, int> edge_owner;
    for (int f = 0; f < nf; ++f)
      for (int k = 0; k < 3; ++k) {
        auto [it, inserted] =
            edge_owner.try_emplace(unordered_key(faces[f][k], faces[f][(k + 1) % 3]), f);
        if (!inserted) uf.unite(f, it->second);
      }
    std::map<int, std::vector<int>> components;
    for (int f = 0; f < nf; ++f) components[uf.find(f)].push_back(f);
    int best = -1;
    size_t best_size = 0;
    for (const auto& [root, members] : components)
      if (members.size() > best_size ||
          (members.size() == best_size && (best < 0 || members[0] < components[best][0]))) {
        best = root;
        best_size = members.size();
      }
    if (components.size() > 1) {
      log.removed_components = static_cast<int>(components.size()) - 1;
      std::vector<Tri> kept;
      for (int f = 0; f < nf; ++f) {
        if (uf.find(f) == best)
          kept.push_back(faces[f]);
        else
          ++log.dropped_component_faces;
      }
      faces = std::move(kept);
    }
  }

  // Compact away unused vertices.
  std::vector<int> new_id(vertices.size(), -1);
  std::vector<Vec3> packed_vertices;
  std::vector<int> packed_origin;
  for (const Tri& t : faces)
    for (int v : t)
      if (new_id[v] < 0) {
        new_id[v] = -2;  // referenced
      }
  for (int v = 0; v < static_cast<int>(vertices.size()); ++v) {
    if (new_id[v] == -2) {
      new_id[v] = static_cast<int>(packed_vertices.size());
      packed_vertices.push_back(vertices[v]);
      packed_origin.push_back(log.vertex_origin[v]);
    } else {
      ++log.removed_isolated_vertices;
    }
  }
  for (Tri& t : faces)
    for (int& v : t) v = new_id[v];

  log.vertex_origin = std::move(packed_origin);
  out.mesh = Mesh(std::move(packed_vertices), std::move(faces));
  return out;
}

Mesh orient_consistently(const Mesh& mesh, RepairLog* log) {
  ValidationReport report = validate(mesh);
  if (report.count(ValidationIssue::Kind::non_manifold_edge) > 0)
    throw GeometryError("orientation repair requires an edge-manifold mesh");

  std::vector<Tri> faces = mesh.triangles();
  bool orientable = true;
  std::vector<char> flip = propagate_orientation(faces, orientable);
  if (!orientable) throw GeometryError("surface is non-orientable");

  RepairLog scratch;
  std::vector<Vec3> vertices = mesh.vertices();
  fix_component_handedness(vertices, faces, flip, log ? *log : scratch);
  return Mesh(std::move(vertices), std::move(faces));
}

CloseHolesResult close_holes(const Mesh& mesh, int max_rim) {
  ValidationReport report = validate(mesh);
  if (!report.clean())
    throw GeometryError("hole closing requires a validation-clean mesh; found " +
                        std::to_string(report.issues.size()) + " issue(s)");

  CloseHolesResult out;
  std::vector<Vec3> vertices = mesh.vertices();
  std::vector<Tri> faces = mesh.triangles();
  for (const std::vector<int>& loop : boundary_loops(mesh)) {
    if (max_rim > 0 && static_cast<int>(loop.size()) > max_rim) continue;
    Vec3 centroid;
    for (int v : loop) centroid += mesh.vertex(v);
    centroid = centroid / static_cast<double>(loop.size());
    int c = static_cast<int>(vertices.size());
    vertices.push_back(centroid);
    int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) faces.push_back({loop[(i + 1) % n], loop[i], c});
    out.fills.push_back({c, loop});
  }
  out.mesh = Mesh(std::move(vertices), std::move(faces));
  return out;
}

}  // namespace pmatch
