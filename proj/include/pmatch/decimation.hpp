#pragma once

#include <string>
#include <vector>

#include "pmatch/mesh.hpp"

namespace pmatch {

// Vertex bookkeeping of a half-edge-collapse run. Coarse vertices keep the
// position of their surviving fine vertex.
struct DecimationTrace {
  std::vector<int> fine_to_coarse;  // fine vertex id -> coarse vertex id
  std::vector<int> coarse_to_fine;  // coarse vertex id -> surviving fine vertex id
  int fine_faces = 0;
  int coarse_faces = 0;

  static DecimationTrace identity(int num_vertices, int num_faces);
  // Trace of `outer` applied after `inner` (inner: fine -> mid, outer: mid -> coarse).
  static DecimationTrace compose(const DecimationTrace& inner, const DecimationTrace& outer);
};

struct DecimationResult {
  Mesh mesh;
  DecimationTrace trace;
  std::string note;  // non-empty when the target could not be reached
};

// Shortest-edge half-collapses down to `target_faces` (or until no legal
// collapse remains). Collapses preserve the link condition, keep boundary
// vertices on the boundary, and reject face flips, so a validation-clean
// input stays validation-clean. Deterministic.
DecimationResult decimate(const Mesh& mesh, int target_faces);

// Face target for the partial mesh at a level where the full mesh gets
// `full_target` faces: round(2 * area(partial) / area(full) * full_target),
// so the partial keeps twice the face density of the full mesh. Clamped to
// [4, partial face count].
int partial_face_budget(const Mesh& partial, const Mesh& full, int full_target);

}  // namespace pmatch
