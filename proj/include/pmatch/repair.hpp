#pragma once

#include <string>
#include <vector>

#include "pmatch/mesh.hpp"

namespace pmatch {

struct RepairLog {
  int dropped_degenerate = 0;      // repeated-index or exact-duplicate faces
  int dropped_overfull_edge = 0;   // excess faces at edges with 3+ incidences
  int dropped_component_faces = 0; // faces of non-largest components
  int removed_components = 0;
  int flipped_faces = 0;
  int duplicated_pinch_vertices = 0;
  int removed_isolated_vertices = 0;
  std::vector<std::string> notes;
  // Output vertex id -> source vertex id in the input mesh.
  std::vector<int> vertex_origin;

  int total_dropped_faces() const {
    return dropped_degenerate + dropped_overfull_edge + dropped_component_faces;
  }
};

struct RepairResult {
  Mesh mesh;
  RepairLog log;
};

// Produces a validation-clean mesh: drops degenerate/duplicate faces and
// excess faces at over-full edges, restores consistent orientation,
// duplicates pinch vertices, keeps the largest edge-connected component, and
// compacts unused vertices. Throws GeometryError if the surface is
// non-orientable. Idempotent: repairing the output changes nothing.
RepairResult make_manifold(const Mesh& mesh);

// Flips faces so every interior edge is wound consistently. Closed components
// are oriented outward (positive signed volume); open components keep the
// winding of the majority of their input faces. Requires an edge-manifold
// mesh; throws GeometryError on over-full edges or non-orientable surfaces.
Mesh orient_consistently(const Mesh& mesh, RepairLog* log = nullptr);

struct HoleFill {
  int new_vertex;        // centroid vertex id in the output mesh
  std::vector<int> rim;  // boundary loop it closes (input vertex ids, in walk order)
};

struct CloseHolesResult {
  Mesh mesh;
  std::vector<HoleFill> fills;
};

// Closes boundary loops with a centroid vertex and a triangle fan. A
// positive `max_rim` closes only loops of at most that many vertices, so
// genuine partial-scan boundaries can be kept open; 0 closes every loop.
// Requires a validation-clean input.
CloseHolesResult close_holes(const Mesh& mesh, int max_rim = 0);

}  // namespace pmatch
