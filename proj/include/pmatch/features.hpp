#pragma once

#include <string>
#include <vector>

#include "pmatch/decimation.hpp"
#include "pmatch/mesh.hpp"
#include "pmatch/product_space.hpp"
#include "pmatch/repair.hpp"

namespace pmatch {

// Per-vertex descriptor matrix, row-major, one row per mesh vertex.
struct FeatureSet {
  int rows = 0;
  int dim = 0;
  std::vector<double> values;  // rows * dim, finite

  const double* row(int v) const { return values.data() + static_cast<size_t>(v) * dim; }
  double* row(int v) { return values.data() + static_cast<size_t>(v) * dim; }
  double at(int v, int j) const { return values[static_cast<size_t>(v) * dim + j]; }
};

enum class FeatureFormat { text, binary };

// Text: first line "rows cols", then one row per line. Binary: two
// little-endian uint32 counts, then row-major little-endian doubles.
// load_features sniffs the format and rejects row-count mismatches and
// non-finite entries. Text uses shortest round-trip formatting, so a
// save/load cycle reproduces the values exactly in either format.
FeatureSet load_features(const std::string& path, int expected_vertices);
void save_features(const std::string& path, const FeatureSet& features,
                   FeatureFormat format = FeatureFormat::text);

// Heat-kernel signature on the cotangent Laplace-Beltrami operator with
// lumped (mixed Voronoi) mass: d log-spaced diffusion times, each time
// sample normalized to unit mean over the vertices. Deterministic; invariant
// under rigid motion. `time_samples` must equal d when given (one descriptor
// entry per time sample); `eigenpairs` caps the spectrum (default
// min(|V|-1, 60)). The spectral cut never splits a near-degenerate
// eigenvalue cluster, which keeps the signature basis-independent.
FeatureSet fallback_descriptors(const Mesh& mesh, int d, int time_samples = 0,
                                int eigenpairs = 0);

// One descriptor per extended triangle: the mean of its distinct corner
// descriptors (3 for a proper triangle, 2 for an edge, 1 for a vertex).
struct TriangleFeatures {
  int count = 0;
  int dim = 0;
  std::vector<double> values;

  const double* row(int t) const { return values.data() + static_cast<size_t>(t) * dim; }
};

TriangleFeatures lift_to_triangles(const FeatureSet& features, const ExtendedElements& ext);

// Euclidean distance between the lifted descriptors of each variable's two
// extended triangles. Rotations of a pair share one cost.
using CostVector = std::vector<double>;
CostVector build_costs(const TriangleFeatures& ux, const TriangleFeatures& uy,
                       const ProductSpace& space);

// Extends a pre-closing feature set to the hole-closed mesh: each centroid
// vertex receives the mean descriptor of its rim, other rows are unchanged.
FeatureSet hole_feature_assignment(const FeatureSet& features, const CloseHolesResult& closed);

// Carries descriptors across a decimation: each coarse vertex averages the
// descriptors of the fine vertices that collapsed into it, weighted by their
// mixed Voronoi areas on the fine mesh. Linear in the features; preserves
// constant fields exactly.
FeatureSet transfer_features(const FeatureSet& fine_features, const Mesh& fine,
                             const DecimationTrace& trace, const Mesh& coarse);

}  // namespace pmatch
