#include "test_support.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <map>
#include <stdexcept>

namespace pmatch::testing {

uint64_t Rng::next_u64() {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

int Rng::uniform_int(int a, int b) {
  return a + static_cast<int>(next_u64() % static_cast<uint64_t>(b - a + 1));
}

Mesh tetrahedron() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  std::vector<Tri> f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
  return Mesh(std::move(v), std::move(f));
}

Mesh single_triangle() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  std::vector<Tri> f = {{0, 1, 2}};
  return Mesh(std::move(v), std::move(f));
}

Mesh triangle_fan(int n) {
  std::vector<Vec3> v;
  v.push_back({0, 0, 0});
  for (int i = 0; i <= n; ++i) {
    double a = 0.45 * M_PI * i / std::max(n, 1);
    v.push_back({std::cos(a), std::sin(a), 0});
  }
  std::vector<Tri> f;
  for (int i = 1; i <= n; ++i) f.push_back({0, i, i + 1});
  return Mesh(std::move(v), std::move(f));
}

Mesh triangle_strip(int n) {
  std::vector<Vec3> v;
  for (int i = 0; i < n + 2; ++i)
    v.push_back({static_cast<double>(i / 2), static_cast<double>(i % 2), 0.1 * i});
  std::vector<Tri> f;
  for (int i = 0; i < n; ++i) {
    if (i % 2 == 0)
      f.push_back({i, i + 1, i + 2});
    else
      f.push_back({i + 1, i, i + 2});
  }
  return Mesh(std::move(v), std::move(f));
}

Mesh bipyramid(int k) {
  std::vector<Vec3> v;
  v.push_back({0, 0, 1});
  v.push_back({0, 0, -1});
  for (int i = 0; i < k; ++i) {
    double a = 2.0 * M_PI * i / k;
    v.push_back({std::cos(a), std::sin(a), 0});
  }
  std::vector<Tri> f;
  for (int i = 0; i < k; ++i) {
    int a = 2 + i, b = 2 + (i + 1) % k;
    f.push_back({0, a, b});
    f.push_back({1, b, a});
  }
  return Mesh(std::move(v), std::move(f));
}

Mesh icosahedron() {
  double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0},  {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t},  {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p = normalized(p);
  std::vector<Tri> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return Mesh(std::move(v), std::move(f));
}

Mesh icosphere(int subdiv) {
  Mesh mesh = icosahedron();
  for (int s = 0; s < subdiv; ++s) {
    std::vector<Vec3> v = mesh.vertices();
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int id = static_cast<int>(v.size());
      v.push_back(normalized((v[a] + v[b]) * 0.5));
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Tri> f;
    for (const Tri& t : mesh.triangles()) {
      int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      f.push_back({t[0], ab, ca});
      f.push_back({t[1], bc, ab});
      f.push_back({t[2], ca, bc});
      f.push_back({ab, bc, ca});
    }
    mesh = Mesh(std::move(v), std::move(f));
  }
  return mesh;
}

Mesh bowtie() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 1, 0}, {1, -1, 0}, {-1, 1, 0}, {-1, -1, 0}};
  std::vector<Tri> f = {{0, 2, 1}, {0, 3, 4}};
  return Mesh(std::move(v), std::move(f));
}

Mesh jitter(const Mesh& mesh, Rng& rng, double magnitude) {
  std::vector<Vec3> v = mesh.vertices();
  for (Vec3& p : v) {
    p.x += rng.uniform(-magnitude, magnitude);
    p.y += rng.uniform(-magnitude, magnitude);
    p.z += rng.uniform(-magnitude, magnitude);
  }
  std::vector<Tri> f = mesh.triangles();
  return Mesh(std::move(v), std::move(f));
}

Submesh submesh(const Mesh& mesh, const std::vector<int>& faces) {
  Submesh out;
  std::vector<int> new_id(mesh.num_vertices(), -1);
  std::vector<Vec3> v;
  std::vector<Tri> f;
  for (int face : faces) {
    Tri t = mesh.triangle(face);
    for (int& corner : t) {
      if (new_id[corner] < 0) {
        new_id[corner] = static_cast<int>(v.size());
        v.push_back(mesh.vertex(corner));
        out.vertex_map.push_back(corner);
      }
      corner = new_id[corner];
    }
    f.push_back(t);
  }
  out.mesh = Mesh(std::move(v), std::move(f));
  return out;
}

std::vector<int> grow_patch(const Mesh& mesh, int seed_face, int num_faces) {
  std::vector<bool> taken(mesh.num_triangles(), false);
  std::vector<int> patch, frontier = {seed_face};
  taken[seed_face] = true;
  while (!frontier.empty() && static_cast<int>(patch.size()) < num_faces) {
    int f = frontier.front();
    frontier.erase(frontier.begin());
    patch.push_back(f);
    const Tri& t = mesh.triangle(f);
    for (int k = 0; k < 3; ++k) {
      int e = mesh.find_directed_edge(t[k], t[(k + 1) % 3]);
      int rev = e < 0 ? -1 : mesh.reverse_edge(e);
      if (rev < 0) continue;
      int g = mesh.edge_triangle(rev);
      if (g >= 0 && !taken[g]) {
        taken[g] = true;
        frontier.push_back(g);
      }
    }
  }
  return patch;
}

Mesh corrupt_mesh(const Mesh& mesh, Rng& rng) {
  std::vector<Vec3> v = mesh.vertices();
  std::vector<Tri> f = mesh.triangles();
  int rounds = rng.uniform_int(1, 4);
  for (int r = 0; r < rounds; ++r) {
    switch (rng.uniform_int(0, 5)) {
      case 0: {  // flip some faces
        int count = rng.uniform_int(1, std::max(1, static_cast<int>(f.size()) / 4));
        for (int i = 0; i < count; ++i) {
          Tri& t = f[rng.uniform_int(0, static_cast<int>(f.size()) - 1)];
          std::swap(t[1], t[2]);
        }
        break;
      }
      case 1: {  // floater triangle far away
        int base = static_cast<int>(v.size());
        double off = rng.uniform(20.0, 30.0);
        v.push_back({off, 0, 0});
        v.push_back({off + 1, 0, 0});
        v.push_back({off, 1, 0});
        f.push_back({base, base + 1, base + 2});
        break;
      }
      case 2: {  // pinch: extra fan sharing one surface vertex
        int anchor = rng.uniform_int(0, mesh.num_vertices() - 1);
        int base = static_cast<int>(v.size());
        double off = rng.uniform(10.0, 15.0);
        v.push_back({0, off, 0});
        v.push_back({0, off, 1});
        f.push_back({anchor, base, base + 1});
        break;
      }
      case 3: {  // isolated vertices
        int count = rng.uniform_int(1, 3);
        for (int i = 0; i < count; ++i) v.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), 40});
        break;
      }
      case 4: {  // duplicate an existing face, same or reversed winding
        Tri t = f[rng.uniform_int(0, static_cast<int>(f.size()) - 1)];
        if (rng.uniform() < 0.5) std::swap(t[1], t[2]);
        f.push_back(t);
        break;
      }
      case 5: {  // parasite face on an existing edge
        const Tri& t = f[rng.uniform_int(0, std::min<int>(mesh.num_triangles(), f.size()) - 1)];
        int base = static_cast<int>(v.size());
        v.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3), 25});
        f.push_back({t[1], t[0], base});
        break;
      }
    }
  }
  return Mesh(std::move(v), std::move(f));
}

Mesh moebius_band(int columns) {
  std::vector<Vec3> v;
  for (int i = 0; i < columns; ++i) {
    double a = 2.0 * M_PI * i / columns;
    v.push_back({std::cos(a), std::sin(a), 0.2});
    v.push_back({std::cos(a), std::sin(a), -0.2});
  }
  std::vector<Tri> f;
  for (int i = 0; i < columns; ++i) {
    int a = 2 * i, b = 2 * i + 1;
    int c, d;
    if (i + 1 < columns) {
      c = 2 * (i + 1);
      d = 2 * (i + 1) + 1;
    } else {  // half twist: top glues to bottom
      c = 1;
      d = 0;
    }
    f.push_back({a, b, d});
    f.push_back({a, d, c});
  }
  return Mesh(std::move(v), std::move(f));
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  namespace fs = std::filesystem;
  root_ = (fs::temp_directory_path() /
           ("pmatch_" + tag + "_" + std::to_string(counter.fetch_add(1))))
              .string();
  fs::remove_all(root_);
  fs::create_directories(root_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(root_, ec);
}

std::string TempDir::path(const std::string& name) const {
  return (std::filesystem::path(root_) / name).string();
}

double signed_volume(const Mesh& mesh) {
  double vol = 0.0;
  for (const Tri& t : mesh.triangles())
    vol += dot(mesh.vertex(t[0]), cross(mesh.vertex(t[1]), mesh.vertex(t[2]))) / 6.0;
  return vol;
}

}  // namespace pmatch::testing
