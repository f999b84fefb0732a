#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "pmatch/errors.hpp"
#include "pmatch/metrics.hpp"
#include "pmatch/product_space.hpp"
#include "test_support.hpp"

namespace pmatch {
namespace {

using namespace pmatch::testing;

constexpr double kInf = std::numeric_limits<double>::infinity();

Mesh right_triangle_345() {
  return Mesh({{0, 0, 0}, {3, 0, 0}, {0, 4, 0}}, {{{0, 1, 2}}});
}

// Independent shortest-path oracle: Bellman-Ford over the directed edges.
std::vector<double> bellman_ford(const Mesh& mesh, int source) {
  std::vector<double> dist(static_cast<size_t>(mesh.num_vertices()), kInf);
  dist[static_cast<size_t>(source)] = 0.0;
  for (int pass = 0; pass < mesh.num_vertices() - 1; ++pass) {
    bool changed = false;
    for (int e = 0; e < mesh.num_directed_edges(); ++e) {
      const DirectedEdge de = mesh.directed_edge(e);
      const double w = norm(mesh.vertex(de.to) - mesh.vertex(de.from));
      for (const auto [a, b] : {std::pair{de.from, de.to}, {de.to, de.from}}) {
        if (dist[static_cast<size_t>(a)] == kInf) continue;
        const double nd = dist[static_cast<size_t>(a)] + w;
        if (nd < dist[static_cast<size_t>(b)]) {
          dist[static_cast<size_t>(b)] = nd;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  return dist;
}

Mesh rigidly_moved(const Mesh& mesh, double yaw, double pitch, const Vec3& shift) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  std::vector<Vec3> moved;
  moved.reserve(mesh.vertices().size());
  for (const Vec3& p : mesh.vertices()) {
    const Vec3 a{cy * p.x - sy * p.y, sy * p.x + cy * p.y, p.z};
    const Vec3 b{a.x, cp * a.y - sp * a.z, sp * a.y + cp * a.z};
    moved.push_back(b + shift);
  }
  return Mesh(moved, mesh.triangles());
}

CorrespondenceRecord tri_tri_record(int x_face, int y_face, int rotation) {
  CorrespondenceRecord rec;
  rec.x_element = x_face;
  rec.x_tag = ElementTag::triangle;
  rec.y_element = y_face;
  rec.y_tag = ElementTag::triangle;
  rec.rotation = rotation;
  return rec;
}

TEST_CASE("geodesic distances are edge-graph shortest paths") {
  const Mesh tri = right_triangle_345();
  CHECK(geodesic_distances(tri, 0) == std::vector<double>{0.0, 3.0, 4.0});
  CHECK(geodesic_distances(tri, 1) == std::vector<double>{3.0, 0.0, 5.0});
  CHECK(geodesic_distances(tri, 2) == std::vector<double>{4.0, 5.0, 0.0});

  Rng rng(0xa11ce);
  const Mesh sphere = jitter(icosphere(1), rng, 0.02);
  for (int source : {0, 7, 41}) {
    const std::vector<double> fast = geodesic_distances(sphere, source);
    const std::vector<double> slow = bellman_ford(sphere, source);
    REQUIRE(fast.size() == slow.size());
    for (size_t v = 0; v < fast.size(); ++v) {
      CHECK(fast[v] == doctest::Approx(slow[v]).epsilon(1e-12));
    }
  }
}

TEST_CASE("geodesic distances mark unreachable vertices as infinite") {
  const Mesh two_islands({{0, 0, 0},
                          {1, 0, 0},
                          {0, 1, 0},
                          {5, 0, 0},
                          {6, 0, 0},
                          {5, 1, 0}},
                         {{{0, 1, 2}}, {{3, 4, 5}}});
  const std::vector<double> dist = geodesic_distances(two_islands, 0);
  CHECK(dist[1] == 1.0);
  CHECK(dist[3] == kInf);
  CHECK(dist[4] == kInf);
  CHECK(dist[5] == kInf);

  CHECK_THROWS_AS(geodesic_distances(two_islands, -1), InputError);
  CHECK_THROWS_AS(geodesic_distances(two_islands, 6), InputError);
}

TEST_CASE("rigid motions leave geodesic distances unchanged") {
  const Mesh sphere = icosphere(1);
  const Mesh moved = rigidly_moved(sphere, 0.7, -0.3, Vec3{4.0, -1.0, 2.5});
  const std::vector<double> before = geodesic_distances(sphere, 5);
  const std::vector<double> after = geodesic_distances(moved, 5);
  REQUIRE(before.size() == after.size());
  for (size_t v = 0; v < before.size(); ++v) {
    CHECK(after[v] == doctest::Approx(before[v]).epsilon(1e-9));
  }
}

TEST_CASE("vertex maps pair aligned triple corners") {
  const Mesh x = tetrahedron();
  const Mesh y = single_triangle();
  const ExtendedElements ex(x), ey(y);
  const ProductSpace space(ex, ey);
  const int y_face_tri = ey.triangle_of_face(0);
  REQUIRE(y.triangle(0) == Tri{0, 1, 2});

  SUBCASE("a proper face pairing matches corner to corner, honoring rotation") {
    const Tri xt = x.triangle(2);
    for (int rot = 0; rot < 3; ++rot) {
      CorrespondenceRecord rec;
      rec.variable = space.find_variable(ex.triangle_of_face(2), y_face_tri, rot);
      REQUIRE(rec.variable >= 0);
      const VertexMap map = derive_vertex_map({rec}, space);
      REQUIRE(map.size() == 3);
      // Y triple (0,1,2) rotated by rot pairs Y vertex (rot + t) % 3 with X
      // corner t.
      for (int t = 0; t < 3; ++t) {
        CHECK(map[static_cast<size_t>((rot + t) % 3)] == std::vector<int>{xt[t]});
      }
    }
  }

  SUBCASE("an edge standing in for a full-shape triangle yields repeated images") {
    const int e = x.find_directed_edge(x.triangle(0)[0], x.triangle(0)[1]);
    REQUIRE(e >= 0);
    const DirectedEdge de = x.directed_edge(e);
    CorrespondenceRecord rec;
    rec.variable = space.find_variable(ex.triangle_of_directed_edge(e), y_face_tri, 0);
    REQUIRE(rec.variable >= 0);
    const VertexMap map = derive_vertex_map({rec}, space);
    // The edge's triple is (from, from, to).
    CHECK(map[0] == std::vector<int>{de.from});
    CHECK(map[1] == std::vector<int>{de.from});
    CHECK(map[2] == std::vector<int>{de.to});
  }

  SUBCASE("images are deduplicated and sorted") {
    CorrespondenceRecord a, b;
    a.variable = space.find_variable(ex.triangle_of_face(0), y_face_tri, 0);
    b.variable = space.find_variable(ex.triangle_of_face(1), y_face_tri, 1);
    REQUIRE(a.variable >= 0);
    REQUIRE(b.variable >= 0);
    const VertexMap once = derive_vertex_map({a, b}, space);
    const VertexMap twice = derive_vertex_map({a, b, a, b}, space);
    CHECK(once == twice);
    for (const auto& images : once) {
      CHECK(std::is_sorted(images.begin(), images.end()));
      CHECK(std::adjacent_find(images.begin(), images.end()) == images.end());
    }
    // Every record corner lands in the map exactly where variable_triples
    // says it should.
    for (const CorrespondenceRecord& rec : {a, b}) {
      const auto [xt, yt] = space.variable_triples(rec.variable);
      for (int t = 0; t < 3; ++t) {
        const auto& images = once[static_cast<size_t>(yt[t])];
        CHECK(std::find(images.begin(), images.end(), xt[t]) != images.end());
      }
    }
  }

  SUBCASE("an empty matching is rejected") {
    CHECK_THROWS_AS(derive_vertex_map({}, space), InputError);
    CorrespondenceRecord bad;
    bad.variable = space.num_variables();
    CHECK_THROWS_AS(derive_vertex_map({bad}, space), InputError);
  }
}

TEST_CASE("geodesic errors follow the benchmark protocol") {
  const Mesh tri = right_triangle_345();  // area 6, distances 3-4-5
  const double scale = std::sqrt(6.0);

  SUBCASE("a perfect identity map scores zero everywhere") {
    const Mesh sphere = icosphere(0);
    VertexMap identity(static_cast<size_t>(sphere.num_vertices()));
    std::vector<int> gt(identity.size());
    for (size_t v = 0; v < identity.size(); ++v) {
      identity[v] = {static_cast<int>(v)};
      gt[v] = static_cast<int>(v);
    }
    const GeodesicErrorReport report = geodesic_error(identity, gt, sphere);
    REQUIRE(report.evaluated.size() == identity.size());
    for (double e : report.per_vertex) CHECK(e == 0.0);
    CHECK(report.mean == 0.0);
    CHECK(report.median == 0.0);
    const auto curve = cumulative_curve(report.per_vertex, {0.0, 0.1});
    CHECK(curve[0].fraction == 1.0);
    CHECK(curve[1].fraction == 1.0);
  }

  SUBCASE("multi-image vertices average their images' distances") {
    const VertexMap vmap{{1, 2}, {0}};
    const std::vector<int> gt{1, -1};
    const GeodesicErrorReport report = geodesic_error(vmap, gt, tri);
    REQUIRE(report.evaluated == std::vector<int>{0});
    // Images 1 (the ground truth, distance 0) and 2 (distance 5).
    CHECK(report.per_vertex[0] == doctest::Approx(2.5 / scale).epsilon(1e-15));
    CHECK(report.mean == report.per_vertex[0]);
    CHECK(report.median == report.per_vertex[0]);
  }

  SUBCASE("the ground-truth list bounds which vertices are evaluated") {
    const VertexMap vmap{{1}, {2}, {0}};
    const GeodesicErrorReport report = geodesic_error(vmap, {0, 0}, tri);
    CHECK(report.evaluated == std::vector<int>{0, 1});
    CHECK(report.per_vertex[0] == doctest::Approx(3.0 / scale).epsilon(1e-15));
    CHECK(report.per_vertex[1] == doctest::Approx(4.0 / scale).epsilon(1e-15));
    CHECK(report.mean == doctest::Approx(3.5 / scale).epsilon(1e-15));
    CHECK(report.median == doctest::Approx(3.5 / scale).epsilon(1e-15));
  }

  SUBCASE("the median splits an odd count at the middle value") {
    const VertexMap vmap{{1}, {2}, {0}};
    const GeodesicErrorReport report = geodesic_error(vmap, {0, 0, 0}, tri);
    REQUIRE(report.per_vertex.size() == 3);
    CHECK(report.mean == doctest::Approx(7.0 / 3.0 / scale).epsilon(1e-15));
    CHECK(report.median == doctest::Approx(3.0 / scale).epsilon(1e-15));
  }

  SUBCASE("unmatched and unannotated vertices are skipped") {
    const VertexMap vmap{{}, {2}, {0}};
    const GeodesicErrorReport report = geodesic_error(vmap, {0, -1, 0}, tri);
    CHECK(report.evaluated == std::vector<int>{2});
    CHECK(report.per_vertex[0] == 0.0);
  }

  SUBCASE("inputs with nothing to evaluate are rejected") {
    CHECK_THROWS_AS(geodesic_error({{}, {1}}, {0, -1}, tri), InputError);
    CHECK_THROWS_AS(geodesic_error({{0}, {1}}, {-1, -1}, tri), InputError);
    CHECK_THROWS_AS(geodesic_error({{0}}, {3}, tri), InputError);   // gt id range
    CHECK_THROWS_AS(geodesic_error({{0}}, {0, 0}, tri), InputError);  // gt too long
  }
}

TEST_CASE("cumulative curves count the fraction of errors within threshold") {
  const std::vector<double> errors{0.0, 0.0, 1.0};
  const auto curve = cumulative_curve(errors, {0.0, 0.5, 1.0, 2.0});
  REQUIRE(curve.size() == 4);
  CHECK(curve[0].threshold == 0.0);
  CHECK(curve[0].fraction == doctest::Approx(2.0 / 3.0));
  CHECK(curve[1].fraction == doctest::Approx(2.0 / 3.0));
  CHECK(curve[2].fraction == 1.0);
  CHECK(curve[3].fraction == 1.0);

  // A threshold equal to an error counts that error as within it.
  CHECK(cumulative_curve({0.5}, {0.5})[0].fraction == 1.0);
  CHECK(cumulative_curve({0.5}, {0.49})[0].fraction == 0.0);

  CHECK(cumulative_curve(errors, {}).empty());
  CHECK_THROWS_AS(cumulative_curve({}, {0.0}), InputError);

  const std::vector<double> defaults = default_curve_thresholds();
  REQUIRE(defaults.size() == 101);
  CHECK(defaults.front() == 0.0);
  CHECK(defaults.back() == 0.25);
  CHECK(std::is_sorted(defaults.begin(), defaults.end()));
  CHECK(std::adjacent_find(defaults.begin(), defaults.end()) == defaults.end());
}

TEST_CASE("congruent triangles have conformal distortion exactly two") {
  // A deliberately scalene triangle, shared bit-for-bit by both meshes.
  const std::vector<Vec3> corners{{0.1, 0.2, 0.3}, {1.7, -0.4, 0.9}, {-0.6, 1.3, 2.2}};
  const Mesh x(corners, {{{0, 1, 2}}});

  SUBCASE("identical winding, rotation zero") {
    const Mesh y(corners, {{{0, 1, 2}}});
    const auto report = conformal_distortion({tri_tri_record(0, 0, 0)}, x, y);
    REQUIRE(report.values.size() == 1);
    CHECK(report.values[0] == 2.0);  // exact: the affine map is the identity
    CHECK(report.is_degenerate[0] == 0);
  }

  SUBCASE("cyclically shifted winding, compensating rotation") {
    const Mesh y(corners, {{{1, 2, 0}}});
    // Rotating (1,2,0) by 2 restores (0,1,2).
    const auto aligned = conformal_distortion({tri_tri_record(0, 0, 2)}, x, y);
    CHECK(aligned.values[0] == 2.0);
    // Without the compensating rotation the corners pair up scrambled, which
    // a scalene triangle punishes.
    const auto scrambled = conformal_distortion({tri_tri_record(0, 0, 0)}, x, y);
    CHECK(scrambled.values[0] > 2.0 + 1e-3);
  }

  SUBCASE("uniform scaling is conformal") {
    std::vector<Vec3> doubled = corners;
    for (Vec3& p : doubled) p = p * 2.0;
    const Mesh y2(doubled, {{{0, 1, 2}}});
    const auto by_two = conformal_distortion({tri_tri_record(0, 0, 0)}, x, y2);
    CHECK(by_two.values[0] == 2.0);  // powers of two scale the flattening exactly

    std::vector<Vec3> stretched = corners;
    for (Vec3& p : stretched) p = p * 1.7;
    const Mesh y17(stretched, {{{0, 1, 2}}});
    const auto by_17 = conformal_distortion({tri_tri_record(0, 0, 0)}, x, y17);
    CHECK(by_17.values[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("anisotropic stretch yields the textbook distortion value") {
  const Mesh x({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
  const Mesh y({{0, 0, 0}, {2, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});
  // The map between the flattenings is diag(2, 1): (4 + 1) / 2 = 2.5.
  const auto report = conformal_distortion({tri_tri_record(0, 0, 0)}, x, y);
  CHECK(report.values[0] == doctest::Approx(2.5).epsilon(1e-15));
  // Distortion is symmetric in the map direction.
  const auto reversed = conformal_distortion({tri_tri_record(0, 0, 0)}, y, x);
  CHECK(reversed.values[0] == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("conformal distortion is at least two and rigid-motion invariant") {
  Rng rng(0xd15707);
  const int trials = 1000;
  std::vector<Vec3> xv, yv;
  std::vector<Tri> xf, yf;
  auto push_random_triangle = [&](std::vector<Vec3>& verts, std::vector<Tri>& faces) {
    Vec3 a, b, c;
    do {
      a = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      b = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      c = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    } while (triangle_area(a, b, c) < 1e-3);
    const int base = static_cast<int>(verts.size());
    verts.push_back(a);
    verts.push_back(b);
    verts.push_back(c);
    faces.push_back({base, base + 1, base + 2});
  };
  std::vector<CorrespondenceRecord> records;
  for (int i = 0; i < trials; ++i) {
    push_random_triangle(xv, xf);
    push_random_triangle(yv, yf);
    records.push_back(tri_tri_record(i, i, i % 3));
  }
  const Mesh x(xv, xf), y(yv, yf);
  const auto report = conformal_distortion(records, x, y);
  REQUIRE(report.values.size() == static_cast<size_t>(trials));
  for (double v : report.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 2.0 - 1e-9);
  }

  const Mesh y_moved = rigidly_moved(y, -1.1, 0.6, Vec3{-3.0, 0.5, 8.0});
  const auto moved = conformal_distortion(records, x, y_moved);
  for (size_t i = 0; i < report.values.size(); ++i) {
    CHECK(moved.values[i] == doctest::Approx(report.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("degenerate pairings are capped and flagged") {
  const Mesh x = tetrahedron();
  const Mesh y = single_triangle();

  CorrespondenceRecord edge_rec;
  edge_rec.x_element = 0;
  edge_rec.x_tag = ElementTag::edge;
  edge_rec.y_element = 0;
  edge_rec.y_tag = ElementTag::triangle;
  CorrespondenceRecord vertex_rec;
  vertex_rec.x_element = 1;
  vertex_rec.x_tag = ElementTag::triangle;
  vertex_rec.y_element = 2;
  vertex_rec.y_tag = ElementTag::vertex;

  const auto report =
      conformal_distortion({edge_rec, vertex_rec, tri_tri_record(0, 0, 0)}, x, y, 7.5);
  CHECK(report.values[0] == 7.5);
  CHECK(report.is_degenerate[0] == 1);
  CHECK(report.values[1] == 7.5);
  CHECK(report.is_degenerate[1] == 1);
  CHECK(report.is_degenerate[2] == 0);
  CHECK(report.values[2] >= 2.0);
  CHECK(report.values[2] < 7.5);
}

TEST_CASE("geometrically degenerate proper triangles are rejected") {
  const Mesh good = right_triangle_345();
  const Mesh collinear({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{{0, 1, 2}}});
  const Mesh pinched({{0, 0, 0}, {0, 0, 0}, {0, 1, 0}}, {{{0, 1, 2}}});

  CHECK_THROWS_AS(conformal_distortion({tri_tri_record(0, 0, 0)}, good, collinear),
                  GeometryError);
  CHECK_THROWS_AS(conformal_distortion({tri_tri_record(0, 0, 0)}, pinched, good),
                  GeometryError);

  CorrespondenceRecord out_of_range = tri_tri_record(5, 0, 0);
  CHECK_THROWS_AS(conformal_distortion({out_of_range}, good, good), InputError);
}

}  // namespace
}  // namespace pmatch
