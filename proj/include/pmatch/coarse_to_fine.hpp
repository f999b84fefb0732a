#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pmatch/decimation.hpp"
#include "pmatch/features.hpp"
#include "pmatch/ilp.hpp"
#include "pmatch/product_space.hpp"

namespace pmatch {

// Admissible (X vertex, Y vertex) pairs at one level. An empty `allowed`
// array places no restriction.
struct CandidateMask {
  int num_x_vertices = 0, num_y_vertices = 0;
  std::vector<uint8_t> allowed;  // row-major: x * num_y_vertices + y

  bool unrestricted() const { return allowed.empty(); }
  bool pair_allowed(int x, int y) const {
    return allowed.empty() ||
           allowed[static_cast<size_t>(x) * num_y_vertices + y] != 0;
  }
  int64_t allowed_count() const;
  // True if every pair this mask allows is allowed by `other` too.
  bool subset_of(const CandidateMask& other) const;
};

// Matched vertex pairs of a selection: every aligned triple corner of every
// chosen variable, deduplicated, sorted.
std::vector<std::pair<int, int>> matched_vertex_pairs(const ProductSpace& space,
                                                      const MatchingIndicator& selection);

// The same pairs recovered from correspondence records alone (no variable
// ids needed, so loaded record files work). Throws InputError on records
// that do not fit the meshes.
std::vector<std::pair<int, int>> record_vertex_pairs(
    const std::vector<CorrespondenceRecord>& records, const ExtendedElements& ext_x,
    const ExtendedElements& ext_y);

// Lifts a coarse matching to the next finer level: a fine pair (x, y) is
// admissible iff some matched coarse pair (cx, cy) has x within `radius`
// edge hops of the collapse preimage of cx and y within `radius` hops of the
// preimage of cy. Traces map the fine meshes to the coarse ones. Throws
// InputError on an empty coarse matching.
CandidateMask prolong(const Mesh& fine_x, const Mesh& fine_y,
                      const std::vector<std::pair<int, int>>& coarse_pairs,
                      const DecimationTrace& trace_x, const DecimationTrace& trace_y,
                      int radius);

// Multi-resolution driver plan: full-shape face targets per level (strictly
// increasing; the partial shape follows via partial_face_budget). When the
// coarsest solve exceeds its time share without proving optimality, it is
// retried once at `fallback_coarsest` faces (skipped unless smaller than the
// first target). A level whose pruned instance is infeasible is retried with
// the prolongation radius widened by one ring, up to `max_radius`.
struct LevelSchedule {
  std::vector<int> full_targets{200, 400, 600, 800, 1000};
  int fallback_coarsest = 100;
  int radius = 1;
  int max_radius = 3;
  // Total across levels: the coarsest level may spend one extra share on its
  // fallback retry, each later level gets an equal split of what remains.
  double time_budget_seconds = 7200.0;
};

struct LevelReport {
  int full_target = 0;    // requested full-shape face count
  int full_faces = 0;     // decimated face counts actually reached
  int partial_faces = 0;
  int radius_used = 0;    // 0: solved unpruned (coarsest level)
  double mask_fill = 1.0;  // fraction of vertex pairs the mask admits
  SolveResult solve;
  std::vector<CorrespondenceRecord> matching;  // ids on this level's meshes
};

struct PipelineResult {
  std::vector<LevelReport> levels;
  bool failed = false;  // no level produced a usable matching, or a later
                        // level could not extend the coarse one
  std::string note;
  int final_level = -1;  // level whose matching stands as the result
  Mesh final_x, final_y;
  DecimationTrace final_trace_x, final_trace_y;  // input meshes -> final level
};

// Runs the coarse-to-fine pipeline: solve the coarsest level unpruned, then
// prolong each solution to the next level's product space. Features are
// given at input resolution and transferred per level. When `run_dir` is
// non-empty, per-level statuses and matchings are serialized there; with
// `resume` set, completed levels found in `run_dir` (verified against the
// rebuilt level meshes) are loaded instead of re-solved.
PipelineResult run_pipeline(const Mesh& full_x, const Mesh& partial_y,
                            const FeatureSet& features_x, const FeatureSet& features_y,
                            const LevelSchedule& schedule, const std::string& run_dir = "",
                            bool resume = false);

}  // namespace pmatch
