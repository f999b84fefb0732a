#pragma once

#include <cstdint>
#include <vector>

#include "pmatch/ilp.hpp"
#include "pmatch/mesh.hpp"
#include "pmatch/product_space.hpp"

namespace pmatch {

// For each vertex of the partial shape, the set of corresponding full-shape
// vertices (sorted, deduplicated; one-to-many is expected).
using VertexMap = std::vector<std::vector<int>>;

// Single-source shortest paths along the edge graph with Euclidean edge
// lengths. Unreachable vertices get +infinity.
std::vector<double> geodesic_distances(const Mesh& mesh, int source);

// Vertex pairs induced by the aligned corner triples of each record; every
// partial-shape vertex of a matched triangle receives at least one image.
// Throws InputError on an empty record list.
VertexMap derive_vertex_map(const std::vector<CorrespondenceRecord>& records,
                            const ProductSpace& space);

struct GeodesicErrorReport {
  std::vector<int> evaluated;        // partial-shape vertex ids measured
  std::vector<double> per_vertex;    // normalized error, aligned with `evaluated`
  double mean = 0.0;
  double median = 0.0;
};

// Princeton-protocol geodesic error: for each partial-shape vertex with a
// ground-truth image and at least one mapped image, the mean graph-geodesic
// distance (on the full shape) from its images to the ground truth, divided
// by sqrt(area(full shape)). `ground_truth` has one entry per evaluated
// vertex id (shorter than the vertex count when repair appended vertices —
// appended vertices are never evaluated); -1 entries are skipped.
GeodesicErrorReport geodesic_error(const VertexMap& vmap,
                                   const std::vector<int>& ground_truth,
                                   const Mesh& full_x);

struct CurveSample {
  double threshold = 0.0;
  double fraction = 0.0;
};

// Fraction of errors <= threshold, per threshold. Throws InputError on an
// empty error list.
std::vector<CurveSample> cumulative_curve(const std::vector<double>& errors,
                                          const std::vector<double>& thresholds);

// 101 uniform thresholds on [0, 0.25].
std::vector<double> default_curve_thresholds();

struct ConformalDistortionReport {
  std::vector<double> values;          // one per record
  std::vector<uint8_t> is_degenerate;  // record involved a degenerate element
};

// MIPS conformal distortion sigma1/sigma2 + sigma2/sigma1 of the affine map
// between matched triangle interiors, computed through 2D isometric
// flattenings of the aligned corner triples. Minimum 2, attained exactly by
// similarity maps. Records with a degenerate side (vertex or edge standing
// in for a triangle) receive `degenerate_cap` and are flagged. Throws
// GeometryError on zero-area proper triangles.
ConformalDistortionReport conformal_distortion(
    const std::vector<CorrespondenceRecord>& records, const Mesh& full_x,
    const Mesh& partial_y, double degenerate_cap = 10.0);

// Aggregated evaluation artifacts, assembled by the caller.
struct EvalReport {
  GeodesicErrorReport geodesic;
  std::vector<CurveSample> curve;
  ConformalDistortionReport distortion;
  bool solver_failed = false;
};

}  // namespace pmatch
