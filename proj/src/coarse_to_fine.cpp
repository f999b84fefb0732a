#include "pmatch/coarse_to_fine.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <limits>
#include <queue>
#include <string>

#include "pmatch/errors.hpp"
#include "pmatch/run_io.hpp"

namespace pmatch {

int64_t CandidateMask::allowed_count() const {
  if (unrestricted()) return static_cast<int64_t>(num_x_vertices) * num_y_vertices;
  int64_t n = 0;
  for (uint8_t b : allowed) n += b != 0;
  return n;
}

bool CandidateMask::subset_of(const CandidateMask& other) const {
  for (int x = 0; x < num_x_vertices; ++x)
    for (int y = 0; y < num_y_vertices; ++y)
      if (pair_allowed(x, y) && !other.pair_allowed(x, y)) return false;
  return true;
}

std::vector<std::pair<int, int>> matched_vertex_pairs(const ProductSpace& space,
                                                      const MatchingIndicator& selection) {
  std::vector<std::pair<int, int>> pairs;
  for (int v = 0; v < space.num_variables(); ++v) {
    if (!selection[v]) continue;
    auto [xt, yt] = space.variable_triples(v);
    for (int t = 0; t < 3; ++t) pairs.emplace_back(xt[t], yt[t]);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<std::pair<int, int>> record_vertex_pairs(
    const std::vector<CorrespondenceRecord>& records, const ExtendedElements& ext_x,
    const ExtendedElements& ext_y) {
  std::vector<std::pair<int, int>> pairs;
  for (const CorrespondenceRecord& rec : records) {
    const int x_tri = extended_triangle_id(ext_x, rec.x_element, rec.x_tag);
    const int y_tri = extended_triangle_id(ext_y, rec.y_element, rec.y_tag);
    if (rec.rotation < 0 || rec.rotation > 2)
      throw InputError("record pairing index must be 0, 1, or 2");
    const Tri xt = ext_x.triangle_triple(x_tri);
    const Tri ys = ext_y.triangle_triple(y_tri);
    const int r = rec.rotation;
    const Tri yt = {ys[r % 3], ys[(r + 1) % 3], ys[(r + 2) % 3]};
    for (int t = 0; t < 3; ++t) pairs.emplace_back(xt[t], yt[t]);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

namespace {

// Coarse vertices whose collapse preimage lies within `radius` hops of each
// fine vertex: ball[v] is sorted.
std::vector<std::vector<int>> coarse_balls(const Mesh& fine, const DecimationTrace& trace,
                                           int radius) {
  int n = fine.num_vertices();
  std::vector<std::vector<int>> adjacency(n);
  for (int e = 0; e < fine.num_directed_edges(); ++e) {
    DirectedEdge d = fine.directed_edge(e);
    adjacency[d.from].push_back(d.to);
    adjacency[d.to].push_back(d.from);
  }

  std::vector<std::vector<int>> balls(n);
  std::vector<int> dist(n);
  for (int start = 0; start < n; ++start) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<int> queue;
    queue.push(start);
    dist[start] = 0;
    std::vector<int> reach = {start};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop();
      if (dist[v] == radius) continue;
      for (int u : adjacency[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          reach.push_back(u);
          queue.push(u);
        }
    }
    std::vector<int>& ball = balls[start];
    for (int v : reach) ball.push_back(trace.fine_to_coarse[v]);
    std::sort(ball.begin(), ball.end());
    ball.erase(std::unique(ball.begin(), ball.end()), ball.end());
  }
  return balls;
}

}  // namespace

CandidateMask prolong(const Mesh& fine_x, const Mesh& fine_y,
                      const std::vector<std::pair<int, int>>& coarse_pairs,
                      const DecimationTrace& trace_x, const DecimationTrace& trace_y,
                      int radius) {
  if (coarse_pairs.empty()) throw InputError("cannot prolong an empty coarse matching");
  if (radius < 1) throw InputError("prolongation radius must be at least 1");
  if (static_cast<int>(trace_x.fine_to_coarse.size()) != fine_x.num_vertices() ||
      static_cast<int>(trace_y.fine_to_coarse.size()) != fine_y.num_vertices())
    throw InputError("prolongation traces do not match the fine meshes");

  CandidateMask mask;
  mask.num_x_vertices = fine_x.num_vertices();
  mask.num_y_vertices = fine_y.num_vertices();
  mask.allowed.assign(static_cast<size_t>(mask.num_x_vertices) * mask.num_y_vertices, 0);

  std::vector<std::vector<int>> balls_x = coarse_balls(fine_x, trace_x, radius);
  std::vector<std::vector<int>> balls_y = coarse_balls(fine_y, trace_y, radius);

  int coarse_x = static_cast<int>(trace_x.coarse_to_fine.size());
  int coarse_y = static_cast<int>(trace_y.coarse_to_fine.size());
  std::vector<std::vector<int>> partners(coarse_x);
  for (auto [cx, cy] : coarse_pairs) {
    if (cx < 0 || cx >= coarse_x || cy < 0 || cy >= coarse_y)
      throw InputError("coarse pair outside the trace range");
    partners[cx].push_back(cy);
  }

  // Fine Y vertices near each coarse Y vertex.
  std::vector<std::vector<int>> near_cy(coarse_y);
  for (int y = 0; y < mask.num_y_vertices; ++y)
    for (int cy : balls_y[y]) near_cy[cy].push_back(y);

  for (int x = 0; x < mask.num_x_vertices; ++x) {
    uint8_t* row = mask.allowed.data() + static_cast<size_t>(x) * mask.num_y_vertices;
    for (int cx : balls_x[x])
      for (int cy : partners[cx])
        for (int y : near_cy[cy]) row[y] = 1;
  }
  return mask;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

double parse_double(const std::map<std::string, std::string>& status, const std::string& key,
                    double fallback) {
  const auto it = status.find(key);
  if (it == status.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    return fallback;
  }
}

int64_t parse_int(const std::map<std::string, std::string>& status, const std::string& key,
                  int64_t fallback) {
  const auto it = status.find(key);
  if (it == status.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    return fallback;
  }
}

std::string level_status_path(const std::string& run_dir, int level) {
  return (std::filesystem::path(run_dir) / ("level_" + std::to_string(level) + ".txt"))
      .string();
}

std::string level_matching_path(const std::string& run_dir, int level) {
  return (std::filesystem::path(run_dir) /
          ("level_" + std::to_string(level) + "_matching.txt"))
      .string();
}

// One solve at one resolution, pruned when `mask` is given. The original
// features ride along so each level lifts them through its own trace.
struct LevelOutcome {
  SolveResult solve;
  std::vector<CorrespondenceRecord> matching;
  double mask_fill = 1.0;
};

LevelOutcome solve_level(const Mesh& level_x, const Mesh& level_y,
                         const Mesh& input_x, const Mesh& input_y,
                         const DecimationTrace& trace_x, const DecimationTrace& trace_y,
                         const FeatureSet& features_x, const FeatureSet& features_y,
                         const CandidateMask* mask, double budget_seconds) {
  LevelOutcome outcome;
  const ExtendedElements ext_x(level_x), ext_y(level_y);
  const ProductSpace space(ext_x, ext_y, mask);

  if (mask != nullptr) {
    outcome.mask_fill =
        static_cast<double>(mask->allowed_count()) /
        (static_cast<double>(mask->num_x_vertices) * mask->num_y_vertices);
    // Widen-before-solving check: every partial-shape triangle needs at
    // least one admissible pairing or the instance cannot be feasible.
    std::vector<uint8_t> covered(static_cast<size_t>(ext_y.num_triangles()), 0);
    for (int p = 0; p < space.num_pairs(); ++p) {
      if (space.pair(p).num_variables > 0) covered[space.pair(p).y_tri] = 1;
    }
    for (int f = 0; f < level_y.num_triangles(); ++f) {
      if (!covered[ext_y.triangle_of_face(f)]) {
        outcome.solve.status = IlpStatus::infeasible;
        outcome.solve.lower_bound = std::numeric_limits<double>::infinity();
        outcome.solve.note = "partial-shape triangle " + std::to_string(f) +
                             " has no admissible pairing under the prolonged mask";
        return outcome;
      }
    }
  }

  const FeatureSet level_features_x = transfer_features(features_x, input_x, trace_x, level_x);
  const FeatureSet level_features_y = transfer_features(features_y, input_y, trace_y, level_y);
  const CostVector costs = build_costs(lift_to_triangles(level_features_x, ext_x),
                                       lift_to_triangles(level_features_y, ext_y), space);
  const IlpInstance instance = make_instance(space, costs, budget_seconds);
  outcome.solve = solve_ilp(instance);
  if (outcome.solve.incumbent) {
    outcome.matching = extract_matching(outcome.solve, space);
  }
  return outcome;
}

// optimal > timeout with incumbent > anything else.
int outcome_rank(const LevelOutcome& outcome) {
  if (outcome.solve.status == IlpStatus::optimal) return 2;
  if (outcome.solve.incumbent) return 1;
  return 0;
}

void write_level_files(const std::string& run_dir, int level, const LevelReport& report,
                       const Mesh& level_x, const Mesh& level_y) {
  if (run_dir.empty()) return;
  save_status(level_status_path(run_dir, level),
              {{"full_target", std::to_string(report.full_target)},
               {"full_faces", std::to_string(report.full_faces)},
               {"partial_faces", std::to_string(report.partial_faces)},
               {"radius", std::to_string(report.radius_used)},
               {"mask_fill", shortest(report.mask_fill)},
               {"solve_status", to_string(report.solve.status)},
               {"objective", shortest(report.solve.objective)},
               {"lower_bound", shortest(report.solve.lower_bound)},
               {"nodes", std::to_string(report.solve.nodes)},
               {"lp_iterations", std::to_string(report.solve.lp_iterations)},
               {"wall_seconds", shortest(report.solve.wall_seconds)},
               {"note", report.solve.note}});
  CorrespondenceHeader header;
  header.full_checksum = mesh_checksum(level_x);
  header.partial_checksum = mesh_checksum(level_y);
  header.level = level;
  header.status = to_string(report.solve.status);
  save_correspondences(level_matching_path(run_dir, level), header, report.matching);
}

}  // namespace

PipelineResult run_pipeline(const Mesh& full_x, const Mesh& partial_y,
                            const FeatureSet& features_x, const FeatureSet& features_y,
                            const LevelSchedule& schedule, const std::string& run_dir,
                            bool resume) {
  if (schedule.full_targets.empty()) throw InputError("the level schedule lists no levels");
  for (size_t i = 0; i + 1 < schedule.full_targets.size(); ++i) {
    if (schedule.full_targets[i] >= schedule.full_targets[i + 1])
      throw InputError("level face targets must be strictly increasing");
  }
  if (schedule.full_targets.front() < 1 || schedule.fallback_coarsest < 1)
    throw InputError("face targets must be positive");
  if (schedule.radius < 1) throw InputError("prolongation radius must be at least 1");
  if (schedule.max_radius < schedule.radius)
    throw InputError("the radius cap must be at least the starting radius");
  if (features_x.rows != full_x.num_vertices() ||
      features_y.rows != partial_y.num_vertices() || features_x.dim != features_y.dim ||
      features_x.dim < 1)
    throw InputError("feature sets do not match the input meshes");
  if (resume && run_dir.empty())
    throw InputError("resuming requires a run directory");

  if (!run_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(run_dir, ec);
    if (ec) throw InputError("cannot create run directory " + run_dir + ": " + ec.message());
  }

  const auto start = Clock::now();
  const int num_levels = static_cast<int>(schedule.full_targets.size());
  const double total_budget = schedule.time_budget_seconds;
  double consumed_before = 0.0;  // wall time charged from a resumed run
  const auto remaining = [&] {
    return total_budget - consumed_before - seconds_since(start);
  };

  PipelineResult result;

  // Resume: find the deepest completed level on disk, verify it against the
  // deterministically rebuilt level meshes, and restart after it.
  int resume_level = -1;
  DecimationResult resumed_full, resumed_partial;
  if (resume) {
    for (int i = num_levels - 1; i >= 0 && resume_level < 0; --i) {
      const std::string status_path = level_status_path(run_dir, i);
      const std::string matching_path = level_matching_path(run_dir, i);
      if (!std::filesystem::exists(status_path) || !std::filesystem::exists(matching_path))
        continue;
      const auto status = load_status(status_path);
      const auto status_it = status.find("solve_status");
      if (status_it == status.end()) continue;
      const IlpStatus solve_status = ilp_status_from_string(status_it->second);
      if (solve_status != IlpStatus::optimal &&
          solve_status != IlpStatus::timeout_with_incumbent)
        continue;
      CorrespondenceFile file = load_correspondences(matching_path);
      if (file.records.empty()) continue;
      const int target = static_cast<int>(parse_int(status, "full_target", -1));
      if (target < 1) continue;
      DecimationResult full_level = decimate(full_x, target);
      DecimationResult partial_level =
          decimate(partial_y, partial_face_budget(partial_y, full_x, target));
      if (file.header.full_checksum != mesh_checksum(full_level.mesh) ||
          file.header.partial_checksum != mesh_checksum(partial_level.mesh)) {
        throw InputError("run directory " + run_dir +
                         " was produced from different inputs (checksum mismatch at level " +
                         std::to_string(i) + ")");
      }
      resume_level = i;
      resumed_full = std::move(full_level);
      resumed_partial = std::move(partial_level);
    }
    // Reconstruct reports for everything up to the resumed level.
    for (int i = 0; i <= resume_level; ++i) {
      LevelReport report;
      report.full_target = schedule.full_targets[static_cast<size_t>(i)];
      const std::string status_path = level_status_path(run_dir, i);
      if (std::filesystem::exists(status_path)) {
        const auto status = load_status(status_path);
        report.full_target = static_cast<int>(parse_int(status, "full_target", report.full_target));
        report.full_faces = static_cast<int>(parse_int(status, "full_faces", 0));
        report.partial_faces = static_cast<int>(parse_int(status, "partial_faces", 0));
        report.radius_used = static_cast<int>(parse_int(status, "radius", 0));
        report.mask_fill = parse_double(status, "mask_fill", 1.0);
        const auto status_it = status.find("solve_status");
        if (status_it != status.end())
          report.solve.status = ilp_status_from_string(status_it->second);
        report.solve.objective = parse_double(status, "objective", report.solve.objective);
        report.solve.lower_bound = parse_double(status, "lower_bound", report.solve.lower_bound);
        report.solve.nodes = parse_int(status, "nodes", 0);
        report.solve.lp_iterations = parse_int(status, "lp_iterations", 0);
        report.solve.wall_seconds = parse_double(status, "wall_seconds", 0.0);
        const auto note_it = status.find("note");
        if (note_it != status.end()) report.solve.note = note_it->second;
        consumed_before += report.solve.wall_seconds;
      } else {
        report.solve.note = "resumed; level artifacts missing";
      }
      const std::string matching_path = level_matching_path(run_dir, i);
      if (std::filesystem::exists(matching_path))
        report.matching = load_correspondences(matching_path).records;
      result.levels.push_back(std::move(report));
    }
  }

  // State carried from the last level that produced a matching.
  std::vector<std::pair<int, int>> coarse_pairs;
  DecimationTrace carried_trace_x, carried_trace_y;
  DecimationResult final_full, final_partial;

  const auto adopt_level = [&](int level, const DecimationResult& full_level,
                               const DecimationResult& partial_level,
                               const std::vector<CorrespondenceRecord>& matching) {
    const ExtendedElements ext_x(full_level.mesh), ext_y(partial_level.mesh);
    coarse_pairs = record_vertex_pairs(matching, ext_x, ext_y);
    carried_trace_x = full_level.trace;
    carried_trace_y = partial_level.trace;
    final_full = full_level;
    final_partial = partial_level;
    result.final_level = level;
  };

  int first_level = 0;
  if (resume_level >= 0) {
    adopt_level(resume_level, resumed_full, resumed_partial,
                result.levels[static_cast<size_t>(resume_level)].matching);
    first_level = resume_level + 1;
  }

  for (int level = first_level; level < num_levels && !result.failed; ++level) {
    const int target = schedule.full_targets[static_cast<size_t>(level)];
    const double level_share =
        (level == 0) ? total_budget / num_levels : remaining() / (num_levels - level);
    const auto level_deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(std::max(level_share, 0.0)));
    const auto until_deadline = [&] {
      return std::chrono::duration<double>(level_deadline - Clock::now()).count();
    };

    LevelReport report;
    report.full_target = target;

    if (level == 0) {
      // Coarsest level: unpruned global solve, with one fallback to an even
      // coarser instance when the budget share is not enough to prove
      // optimality.
      DecimationResult full_level = decimate(full_x, target);
      DecimationResult partial_level =
          decimate(partial_y, partial_face_budget(partial_y, full_x, target));
      LevelOutcome outcome =
          solve_level(full_level.mesh, partial_level.mesh, full_x, partial_y,
                      full_level.trace, partial_level.trace, features_x, features_y,
                      nullptr, std::min(level_share, remaining()));
      if (outcome.solve.status != IlpStatus::optimal &&
          schedule.fallback_coarsest < target) {
        DecimationResult fallback_full = decimate(full_x, schedule.fallback_coarsest);
        DecimationResult fallback_partial = decimate(
            partial_y, partial_face_budget(partial_y, full_x, schedule.fallback_coarsest));
        LevelOutcome fallback = solve_level(
            fallback_full.mesh, fallback_partial.mesh, full_x, partial_y,
            fallback_full.trace, fallback_partial.trace, features_x, features_y, nullptr,
            std::min(total_budget / num_levels, remaining()));
        if (outcome_rank(fallback) >= outcome_rank(outcome)) {
          fallback.solve.note = "coarsest target " + std::to_string(target) +
                                " exceeded its time share; fell back to " +
                                std::to_string(schedule.fallback_coarsest) + " faces. " +
                                fallback.solve.note;
          outcome = std::move(fallback);
          full_level = std::move(fallback_full);
          partial_level = std::move(fallback_partial);
          report.full_target = schedule.fallback_coarsest;
        } else {
          outcome.solve.note = "fallback to " + std::to_string(schedule.fallback_coarsest) +
                               " faces did no better and was discarded. " +
                               outcome.solve.note;
        }
      }
      report.full_faces = full_level.mesh.num_triangles();
      report.partial_faces = partial_level.mesh.num_triangles();
      report.radius_used = 0;
      report.mask_fill = outcome.mask_fill;
      report.solve = std::move(outcome.solve);
      report.matching = std::move(outcome.matching);
      if (report.matching.empty()) {
        result.failed = true;
        result.note = "the coarsest level found no matching within its budget";
      } else {
        adopt_level(level, full_level, partial_level, report.matching);
      }
      write_level_files(run_dir, level, report, full_level.mesh, partial_level.mesh);
    } else {
      DecimationResult full_level = decimate(full_x, target);
      DecimationResult partial_level =
          decimate(partial_y, partial_face_budget(partial_y, full_x, target));

      // Cross-level traces (this level -> previous level), composed through
      // the shared input vertex ids.
      DecimationTrace cross_x, cross_y;
      cross_x.fine_to_coarse.resize(full_level.mesh.num_vertices());
      for (int v = 0; v < full_level.mesh.num_vertices(); ++v)
        cross_x.fine_to_coarse[v] =
            carried_trace_x.fine_to_coarse[full_level.trace.coarse_to_fine[v]];
      cross_x.coarse_to_fine.resize(carried_trace_x.coarse_to_fine.size());
      for (size_t c = 0; c < carried_trace_x.coarse_to_fine.size(); ++c)
        cross_x.coarse_to_fine[c] =
            full_level.trace.fine_to_coarse[carried_trace_x.coarse_to_fine[c]];
      cross_y.fine_to_coarse.resize(partial_level.mesh.num_vertices());
      for (int v = 0; v < partial_level.mesh.num_vertices(); ++v)
        cross_y.fine_to_coarse[v] =
            carried_trace_y.fine_to_coarse[partial_level.trace.coarse_to_fine[v]];
      cross_y.coarse_to_fine.resize(carried_trace_y.coarse_to_fine.size());
      for (size_t c = 0; c < carried_trace_y.coarse_to_fine.size(); ++c)
        cross_y.coarse_to_fine[c] =
            partial_level.trace.fine_to_coarse[carried_trace_y.coarse_to_fine[c]];

      int radius = schedule.radius;
      LevelOutcome outcome;
      while (true) {
        const CandidateMask mask = prolong(full_level.mesh, partial_level.mesh,
                                           coarse_pairs, cross_x, cross_y, radius);
        outcome = solve_level(full_level.mesh, partial_level.mesh, full_x, partial_y,
                              full_level.trace, partial_level.trace, features_x,
                              features_y, &mask, until_deadline());
        if (outcome.solve.status == IlpStatus::infeasible && radius < schedule.max_radius) {
          ++radius;  // over-pruned: widen the neighborhood and retry
          continue;
        }
        break;
      }
      report.full_faces = full_level.mesh.num_triangles();
      report.partial_faces = partial_level.mesh.num_triangles();
      report.radius_used = radius;
      report.mask_fill = outcome.mask_fill;
      report.solve = std::move(outcome.solve);
      report.matching = std::move(outcome.matching);
      if (report.matching.empty()) {
        result.failed = true;
        if (report.solve.status == IlpStatus::infeasible) {
          result.note = "level " + std::to_string(level) +
                        " stayed infeasible at the radius cap of " +
                        std::to_string(schedule.max_radius);
        } else {
          result.note = "level " + std::to_string(level) +
                        " exhausted its time share without a matching";
        }
      } else {
        adopt_level(level, full_level, partial_level, report.matching);
      }
      write_level_files(run_dir, level, report, full_level.mesh, partial_level.mesh);
    }
    result.levels.push_back(std::move(report));
  }

  if (result.final_level >= 0) {
    result.final_x = std::move(final_full.mesh);
    result.final_y = std::move(final_partial.mesh);
    result.final_trace_x = std::move(final_full.trace);
    result.final_trace_y = std::move(final_partial.trace);
  } else {
    result.failed = true;
  }

  if (!run_dir.empty()) {
    std::string overall = "failed";
    if (!result.failed) {
      overall = "optimal";
      for (const LevelReport& report : result.levels) {
        if (report.solve.status != IlpStatus::optimal) {
          overall = "timeout_with_incumbent";
          break;
        }
      }
    }
    save_status((std::filesystem::path(run_dir) / "status.txt").string(),
                {{"status", overall},
                 {"levels", std::to_string(result.levels.size())},
                 {"final_level", std::to_string(result.final_level)},
                 {"wall_seconds", shortest(consumed_before + seconds_since(start))},
                 {"note", result.note}});
  }
  return result;
}

}  // namespace pmatch
