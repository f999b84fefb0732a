#include "pmatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <utility>

#include "pmatch/errors.hpp"
#include "pmatch/geometry.hpp"

namespace pmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2D isometric flattening of a triangle: first edge along +x, third vertex
// in the upper half plane. Returns the upper-triangular frame
//   [e11 c2]
//   [0   h ]
// whose columns are the flattened edge vectors p1-p0 and p2-p0.
struct Flattening {
  double e11 = 0.0, c2 = 0.0, h = 0.0;
};

Flattening flatten(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                   const char* side) {
  const Vec3 u1 = p1 - p0;
  const Vec3 u2 = p2 - p0;
  Flattening f;
  f.e11 = norm(u1);
  if (!(f.e11 > 0.0) || !std::isfinite(f.e11)) {
    throw GeometryError(std::string("degenerate ") + side +
                        " triangle: repeated corner positions");
  }
  f.c2 = dot(u1, u2) / f.e11;
  const double hsq = squared_norm(u2) - f.c2 * f.c2;
  if (!(hsq > 0.0) || !std::isfinite(hsq)) {
    throw GeometryError(std::string("degenerate ") + side +
                        " triangle: zero area");
  }
  f.h = std::sqrt(hsq);
  return f;
}

Tri rotated(const Tri& t, int r) {
  return {t[r % 3], t[(r + 1) % 3], t[(r + 2) % 3]};
}

double median_of_sorted(const std::vector<double>& sorted) {
  const size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace

std::vector<double> geodesic_distances(const Mesh& mesh, int source) {
  const int nv = mesh.num_vertices();
  if (source < 0 || source >= nv) {
    throw InputError("geodesic source vertex " + std::to_string(source) +
                     " is out of range");
  }
  // Symmetrize: boundary edges are stored with one winding only, but the
  // metric graph is undirected.
  std::vector<std::vector<std::pair<int, double>>> adjacency(
      static_cast<size_t>(nv));
  for (int e = 0; e < mesh.num_directed_edges(); ++e) {
    const DirectedEdge de = mesh.directed_edge(e);
    const double w = norm(mesh.vertex(de.to) - mesh.vertex(de.from));
    adjacency[static_cast<size_t>(de.from)].push_back({de.to, w});
    adjacency[static_cast<size_t>(de.to)].push_back({de.from, w});
  }

  std::vector<double> dist(static_cast<size_t>(nv), kInf);
  dist[static_cast<size_t>(source)] = 0.0;

  using Item = std::pair<double, int>;  // (distance, vertex)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[static_cast<size_t>(v)]) continue;  // stale entry
    for (const auto& [to, w] : adjacency[static_cast<size_t>(v)]) {
      const double nd = d + w;
      if (nd < dist[static_cast<size_t>(to)]) {
        dist[static_cast<size_t>(to)] = nd;
        queue.push({nd, to});
      }
    }
  }
  return dist;
}

VertexMap derive_vertex_map(const std::vector<CorrespondenceRecord>& records,
                            const ProductSpace& space) {
  if (records.empty()) {
    throw InputError("cannot derive a vertex map from an empty matching");
  }
  const int ny = space.ext_y().mesh().num_vertices();
  VertexMap map(static_cast<size_t>(ny));
  for (const CorrespondenceRecord& rec : records) {
    if (rec.variable < 0 || rec.variable >= space.num_variables()) {
      throw InputError("correspondence record references variable " +
                       std::to_string(rec.variable) +
                       ", which is outside the product space");
    }
    const auto [xt, yt] = space.variable_triples(rec.variable);
    for (int t = 0; t < 3; ++t) {
      map[static_cast<size_t>(yt[t])].push_back(xt[t]);
    }
  }
  for (auto& images : map) {
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());
  }
  return map;
}

GeodesicErrorReport geodesic_error(const VertexMap& vmap,
                                   const std::vector<int>& ground_truth,
                                   const Mesh& full_x) {
  if (ground_truth.size() > vmap.size()) {
    throw InputError("ground truth lists " +
                     std::to_string(ground_truth.size()) +
                     " vertices but the vertex map covers only " +
                     std::to_string(vmap.size()));
  }
  const int nx = full_x.num_vertices();
  const double area = surface_area(full_x);
  if (!(area > 0.0)) {
    throw GeometryError("full shape has zero surface area");
  }
  const double scale = std::sqrt(area);

  GeodesicErrorReport report;
  std::map<int, std::vector<double>> distance_cache;  // gt vertex -> dists
  for (size_t y = 0; y < ground_truth.size(); ++y) {
    const int gt = ground_truth[y];
    if (gt == -1) continue;  // no annotation for this vertex
    if (gt < 0 || gt >= nx) {
      throw InputError("ground-truth image " + std::to_string(gt) +
                       " of vertex " + std::to_string(y) +
                       " is not a full-shape vertex");
    }
    const std::vector<int>& images = vmap[y];
    if (images.empty()) continue;  // vertex never matched
    auto it = distance_cache.find(gt);
    if (it == distance_cache.end()) {
      it = distance_cache.emplace(gt, geodesic_distances(full_x, gt)).first;
    }
    const std::vector<double>& dist = it->second;
    double sum = 0.0;
    for (int img : images) sum += dist[static_cast<size_t>(img)];
    report.evaluated.push_back(static_cast<int>(y));
    report.per_vertex.push_back(sum / static_cast<double>(images.size()) / scale);
  }
  if (report.per_vertex.empty()) {
    throw InputError("no vertex has both a ground-truth image and a match");
  }
  double sum = 0.0;
  for (double e : report.per_vertex) sum += e;
  report.mean = sum / static_cast<double>(report.per_vertex.size());
  std::vector<double> sorted = report.per_vertex;
  std::sort(sorted.begin(), sorted.end());
  report.median = median_of_sorted(sorted);
  return report;
}

std::vector<CurveSample> cumulative_curve(const std::vector<double>& errors,
                                          const std::vector<double>& thresholds) {
  if (errors.empty()) {
    throw InputError("cannot build a cumulative curve: no data");
  }
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<CurveSample> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
    const double count = static_cast<double>(it - sorted.begin());
    curve.push_back({t, count / static_cast<double>(sorted.size())});
  }
  return curve;
}

std::vector<double> default_curve_thresholds() {
  std::vector<double> thresholds(101);
  for (int i = 0; i <= 100; ++i) {
    thresholds[static_cast<size_t>(i)] = 0.25 * static_cast<double>(i) / 100.0;
  }
  return thresholds;
}

ConformalDistortionReport conformal_distortion(
    const std::vector<CorrespondenceRecord>& records, const Mesh& full_x,
    const Mesh& partial_y, double degenerate_cap) {
  ConformalDistortionReport report;
  report.values.reserve(records.size());
  report.is_degenerate.reserve(records.size());
  for (const CorrespondenceRecord& rec : records) {
    if (rec.x_tag != ElementTag::triangle || rec.y_tag != ElementTag::triangle) {
      report.values.push_back(degenerate_cap);
      report.is_degenerate.push_back(1);
      continue;
    }
    if (rec.x_element < 0 || rec.x_element >= full_x.num_triangles() ||
        rec.y_element < 0 || rec.y_element >= partial_y.num_triangles()) {
      throw InputError("correspondence record references a triangle outside "
                       "its mesh");
    }
    const Tri xt = full_x.triangle(rec.x_element);
    const Tri yt = rotated(partial_y.triangle(rec.y_element), rec.rotation);
    const Flattening a = flatten(full_x.vertex(xt[0]), full_x.vertex(xt[1]),
                                 full_x.vertex(xt[2]), "full-shape");
    const Flattening b = flatten(partial_y.vertex(yt[0]), partial_y.vertex(yt[1]),
                                 partial_y.vertex(yt[2]), "partial-shape");
    // Affine map between the flattenings, M = B * A^{-1}; upper triangular,
    // so the identity is reproduced exactly when the frames coincide.
    const double m00 = b.e11 / a.e11;
    const double m11 = b.h / a.h;
    const double m01 = (b.c2 - m00 * a.c2) / a.h;
    const double frob_sq = m00 * m00 + m01 * m01 + m11 * m11;
    const double det = m00 * m11;  // positive: both frames are proper
    report.values.push_back(frob_sq / det);
    report.is_degenerate.push_back(0);
  }
  return report;
}

}  // namespace pmatch
