// Command-line front end: repairs and decimates meshes, runs the
// coarse-to-fine matching pipeline on shape pairs, resumes interrupted runs,
// evaluates stored correspondences, and batches pairs from a manifest.
//
// Exit codes: 0 success, 2 usage or input problem, 3 geometry problem,
// 4 solve failure (no usable matching within budget).

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pmatch/coarse_to_fine.hpp"
#include "pmatch/decimation.hpp"
#include "pmatch/errors.hpp"
#include "pmatch/features.hpp"
#include "pmatch/ilp.hpp"
#include "pmatch/mesh.hpp"
#include "pmatch/mesh_io.hpp"
#include "pmatch/metrics.hpp"
#include "pmatch/product_space.hpp"
#include "pmatch/repair.hpp"
#include "pmatch/run_io.hpp"

namespace {

using namespace pmatch;

// ---------------------------------------------------------------------------
// Environment overrides (applied after the config file, before running).

std::optional<double> env_budget() {
  const char* text = std::getenv("PMATCH_BUDGET_SECONDS");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const double value = std::strtod(text, &end);
  if (end == text || *end != '\0' || !std::isfinite(value) || value < 0.0)
    throw InputError(std::string("PMATCH_BUDGET_SECONDS must be a finite number >= 0, got '") +
                     text + "'");
  return value;
}

std::optional<int> env_workers() {
  const char* text = std::getenv("PMATCH_WORKERS");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const long value = std::strtol(text, &end, 10);
  if (end == text || *end != '\0' || value < 1)
    throw InputError(std::string("PMATCH_WORKERS must be an integer >= 1, got '") + text + "'");
  return static_cast<int>(value);
}

void apply_env_overrides(RunConfig& config) {
  if (const auto budget = env_budget()) config.budget_seconds = *budget;
  if (const auto workers = env_workers()) config.workers = *workers;
}

RunConfig load_effective_config(const std::string& path) {
  RunConfig config = path.empty() ? RunConfig{} : load_run_config(path);
  apply_env_overrides(config);
  return config;
}

// ---------------------------------------------------------------------------
// Shared helpers.

Mesh load_clean_mesh(const std::string& path, const char* role) {
  const Mesh mesh = load_mesh(path);
  const ValidationReport report = validate(mesh);
  if (!report.clean()) {
    throw GeometryError(std::string(role) + " mesh " + path + " fails validation (" +
                        std::to_string(report.issues.size()) +
                        " issue(s)); run the repair subcommand first");
  }
  return mesh;
}

FeatureSet features_for(const Mesh& mesh, const std::string& path, int descriptor_dim,
                        const char* role) {
  if (path.empty()) {
    try {
      return fallback_descriptors(mesh, descriptor_dim);
    } catch (const InputError& e) {
      throw InputError(std::string("cannot compute fallback descriptors for the ") + role +
                       " mesh: " + e.what() + " (lower features.descriptor_dim)");
    }
  }
  try {
    return load_features(path, mesh.num_vertices());
  } catch (const InputError& e) {
    throw InputError(std::string(role) + " feature file " + path + ": " + e.what());
  }
}

LevelSchedule schedule_from(const RunConfig& config) {
  LevelSchedule schedule;
  schedule.full_targets = config.full_targets;
  schedule.fallback_coarsest = config.fallback_coarsest;
  schedule.radius = config.radius;
  schedule.max_radius = config.max_radius;
  schedule.time_budget_seconds = config.budget_seconds;
  return schedule;
}

std::string overall_status(const PipelineResult& result) {
  if (result.failed) return "failed";
  for (const LevelReport& level : result.levels)
    if (level.solve.status != IlpStatus::optimal) return "timeout_with_incumbent";
  return "optimal";
}

std::ofstream open_output(const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw InputError(std::string("cannot write ") + what + " file: " + path);
  return out;
}

// ---------------------------------------------------------------------------
// match / refine

PipelineResult execute_match(const RunConfig& config, bool resume, bool quiet) {
  if (config.full_mesh.empty() || config.partial_mesh.empty())
    throw InputError("the configuration must name paths.full_mesh and paths.partial_mesh");

  const Mesh full = load_clean_mesh(config.full_mesh, "full");
  const Mesh partial = load_clean_mesh(config.partial_mesh, "partial");
  const FeatureSet fx = features_for(full, config.features_full, config.descriptor_dim, "full");
  const FeatureSet fy =
      features_for(partial, config.features_partial, config.descriptor_dim, "partial");

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec)
    throw InputError("cannot create run directory " + config.output_dir + ": " + ec.message());
  save_run_config((std::filesystem::path(config.output_dir) / "config.txt").string(), config);

  const PipelineResult result =
      run_pipeline(full, partial, fx, fy, schedule_from(config), config.output_dir, resume);

  if (result.final_level >= 0) {
    const LevelReport& final = result.levels[static_cast<size_t>(result.final_level)];
    CorrespondenceHeader header;
    header.full_checksum = mesh_checksum(result.final_x);
    header.partial_checksum = mesh_checksum(result.final_y);
    header.level = result.final_level;
    header.status = to_string(final.solve.status);
    const std::filesystem::path dir(config.output_dir);
    save_correspondences((dir / "final_matching.txt").string(), header, final.matching);
    // The record ids refer to these decimated meshes; store them so eval can
    // run without re-deriving the decimation.
    save_mesh((dir / "final_full.off").string(), result.final_x);
    save_mesh((dir / "final_partial.off").string(), result.final_y);
  }

  if (!quiet) {
    for (size_t i = 0; i < result.levels.size(); ++i) {
      const LevelReport& level = result.levels[i];
      std::printf("level %zu: faces %dx%d (target %d), status %s, objective %.9g, "
                  "radius %d, fill %.3f, %.2fs\n",
                  i, level.full_faces, level.partial_faces, level.full_target,
                  to_string(level.solve.status), level.solve.objective, level.radius_used,
                  level.mask_fill, level.solve.wall_seconds);
      if (!level.solve.note.empty()) std::printf("  note: %s\n", level.solve.note.c_str());
    }
    std::printf("status: %s", overall_status(result).c_str());
    if (result.final_level >= 0) std::printf(", final level %d", result.final_level);
    if (!result.note.empty()) std::printf(" (%s)", result.note.c_str());
    std::printf("\nrun directory: %s\n", config.output_dir.c_str());
  }
  return result;
}

// ---------------------------------------------------------------------------
// eval

EvalReport evaluate_records(std::vector<CorrespondenceRecord> records, const Mesh& full,
                            const Mesh& partial, const std::vector<int>& ground_truth,
                            double distortion_cap) {
  const ExtendedElements ext_x(full), ext_y(partial);
  const ProductSpace space(ext_x, ext_y);
  assign_variables(records, space);
  EvalReport outcome;
  outcome.geodesic = geodesic_error(derive_vertex_map(records, space), ground_truth, full);
  outcome.curve = cumulative_curve(outcome.geodesic.per_vertex, default_curve_thresholds());
  outcome.distortion = conformal_distortion(records, full, partial, distortion_cap);
  return outcome;
}

int run_eval(const std::string& full_path, const std::string& partial_path,
             const std::string& corr_path, const std::string& gt_path,
             const std::string& out_dir, double distortion_cap) {
  const Mesh full = load_clean_mesh(full_path, "full");
  const Mesh partial = load_clean_mesh(partial_path, "partial");
  const CorrespondenceFile file = load_correspondences(corr_path);
  if (file.header.full_checksum != mesh_checksum(full) ||
      file.header.partial_checksum != mesh_checksum(partial)) {
    throw InputError("correspondence file " + corr_path +
                     " was computed on different meshes (checksum mismatch)");
  }
  const std::vector<int> ground_truth = load_ground_truth(gt_path);
  EvalReport outcome = evaluate_records(file.records, full, partial, ground_truth, distortion_cap);
  outcome.solver_failed = file.header.status == "failed";

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create output directory " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);

  {
    std::ofstream out = open_output((dir / "eval_report.txt").string(), "evaluation report");
    out << "# pmatch evaluation\n";
    out << "correspondences = " << corr_path << "\n";
    out << "status = " << file.header.status << "\n";
    out << "evaluated_vertices = " << outcome.geodesic.evaluated.size() << "\n";
    out << "mean_geodesic_error = " << outcome.geodesic.mean << "\n";
    out << "median_geodesic_error = " << outcome.geodesic.median << "\n";
    double distortion_sum = 0.0;
    int degenerate = 0;
    for (size_t i = 0; i < outcome.distortion.values.size(); ++i) {
      distortion_sum += outcome.distortion.values[i];
      degenerate += outcome.distortion.is_degenerate[i] != 0;
    }
    out << "mean_conformal_distortion = "
        << (outcome.distortion.values.empty()
                ? 0.0
                : distortion_sum / static_cast<double>(outcome.distortion.values.size()))
        << "\n";
    out << "degenerate_records = " << degenerate << "\n";
    out << "# per-vertex: partial_vertex geodesic_error\n";
    for (size_t i = 0; i < outcome.geodesic.evaluated.size(); ++i)
      out << outcome.geodesic.evaluated[i] << " " << outcome.geodesic.per_vertex[i] << "\n";
    out << "# per-record: x_id y_id x_tag y_tag pairing distortion degenerate\n";
    for (size_t i = 0; i < file.records.size(); ++i) {
      const CorrespondenceRecord& rec = file.records[i];
      out << rec.x_element << " " << rec.y_element << " " << to_string(rec.x_tag) << " "
          << to_string(rec.y_tag) << " " << rec.rotation << " " << outcome.distortion.values[i]
          << " " << static_cast<int>(outcome.distortion.is_degenerate[i]) << "\n";
    }
    out.flush();
    if (!out) throw InputError("failed while writing evaluation report");
  }
  {
    std::ofstream out = open_output((dir / "curve.txt").string(), "curve");
    out << "# threshold fraction\n";
    for (const CurveSample& sample : outcome.curve)
      out << sample.threshold << " " << sample.fraction << "\n";
    out.flush();
    if (!out) throw InputError("failed while writing curve file");
  }

  std::printf("evaluated %zu vertices: mean geodesic error %.6g, median %.6g\n",
              outcome.geodesic.evaluated.size(), outcome.geodesic.mean,
              outcome.geodesic.median);
  std::printf("reports in %s\n", out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// repair / decimate

int run_repair(const std::string& input, const std::string& output, int close_rim,
               const std::string& report_path) {
  const Mesh mesh = load_mesh(input);
  const RepairResult repaired = make_manifold(mesh);
  Mesh final_mesh = repaired.mesh;
  size_t holes_closed = 0;
  if (close_rim >= 0) {
    CloseHolesResult closed = close_holes(final_mesh, close_rim);
    holes_closed = closed.fills.size();
    final_mesh = std::move(closed.mesh);
  }
  save_mesh(output, final_mesh);

  std::ostringstream report;
  report << "# pmatch repair report\n";
  report << "input = " << input << "\n";
  report << "output = " << output << "\n";
  report << "dropped_degenerate_faces = " << repaired.log.dropped_degenerate << "\n";
  report << "dropped_overfull_edge_faces = " << repaired.log.dropped_overfull_edge << "\n";
  report << "dropped_component_faces = " << repaired.log.dropped_component_faces << "\n";
  report << "removed_components = " << repaired.log.removed_components << "\n";
  report << "flipped_faces = " << repaired.log.flipped_faces << "\n";
  report << "duplicated_pinch_vertices = " << repaired.log.duplicated_pinch_vertices << "\n";
  report << "removed_isolated_vertices = " << repaired.log.removed_isolated_vertices << "\n";
  report << "holes_closed = " << holes_closed << "\n";
  for (const std::string& note : repaired.log.notes) report << "note = " << note << "\n";
  if (report_path.empty()) {
    std::fputs(report.str().c_str(), stdout);
  } else {
    std::ofstream out = open_output(report_path, "repair report");
    out << report.str();
    out.flush();
    if (!out) throw InputError("failed while writing repair report");
    std::printf("repaired %s -> %s (report in %s)\n", input.c_str(), output.c_str(),
                report_path.c_str());
  }
  return 0;
}

int run_decimate(const std::string& input, const std::string& output, int target,
                 const std::string& trace_path) {
  const Mesh mesh = load_clean_mesh(input, "input");
  const DecimationResult result = decimate(mesh, target);
  save_mesh(output, result.mesh);
  if (!trace_path.empty()) {
    std::ofstream out = open_output(trace_path, "decimation trace");
    out << "# pmatch decimation trace\n";
    out << mesh.num_vertices() << " " << result.mesh.num_vertices() << " "
        << result.trace.fine_faces << " " << result.trace.coarse_faces << "\n";
    out << "# fine vertex -> coarse vertex\n";
    for (size_t v = 0; v < result.trace.fine_to_coarse.size(); ++v) {
      out << result.trace.fine_to_coarse[v] << (v + 1 < result.trace.fine_to_coarse.size() ? " " : "\n");
    }
    out << "# coarse vertex -> surviving fine vertex\n";
    for (size_t v = 0; v < result.trace.coarse_to_fine.size(); ++v) {
      out << result.trace.coarse_to_fine[v] << (v + 1 < result.trace.coarse_to_fine.size() ? " " : "\n");
    }
    out.flush();
    if (!out) throw InputError("failed while writing decimation trace");
  }
  std::printf("decimated %d -> %d faces", mesh.num_triangles(), result.mesh.num_triangles());
  if (!result.note.empty()) std::printf(" (%s)", result.note.c_str());
  std::printf("\n");
  return 0;
}

// ---------------------------------------------------------------------------
// pipeline (batch over a manifest)

struct PairSpec {
  std::string full, partial, features_full, features_partial, ground_truth;
};

std::vector<PairSpec> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest file: " + path);
  std::vector<PairSpec> pairs;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    std::string token;
    while (tokens >> token) fields.push_back(token == "-" ? "" : token);
    if (fields.empty()) continue;
    if (fields.size() < 2 || fields.size() > 5) {
      throw InputError("manifest line " + std::to_string(line_number) +
                       " must list 2-5 paths: full partial [features_full features_partial "
                       "[ground_truth]]");
    }
    PairSpec spec;
    spec.full = fields[0];
    spec.partial = fields[1];
    if (fields.size() >= 3) spec.features_full = fields[2];
    if (fields.size() >= 4) spec.features_partial = fields[3];
    if (fields.size() >= 5) spec.ground_truth = fields[4];
    pairs.push_back(std::move(spec));
  }
  if (pairs.empty()) throw InputError("manifest " + path + " lists no pairs");
  return pairs;
}

// Ground truth carried to the final level: a level vertex inherits the image
// of its surviving input vertex, mapped onto the level's full mesh.
std::vector<int> ground_truth_on_level(const PipelineResult& result,
                                       const std::vector<int>& gt_input, int full_input_vertices) {
  std::vector<int> gt_level(static_cast<size_t>(result.final_y.num_vertices()), -1);
  for (int v = 0; v < result.final_y.num_vertices(); ++v) {
    const int src = result.final_trace_y.coarse_to_fine[static_cast<size_t>(v)];
    if (src < 0 || src >= static_cast<int>(gt_input.size())) continue;
    const int image = gt_input[static_cast<size_t>(src)];
    if (image < 0) continue;
    if (image >= full_input_vertices)
      throw InputError("ground truth names vertex " + std::to_string(image) +
                       " beyond the full mesh");
    gt_level[static_cast<size_t>(v)] =
        result.final_trace_x.fine_to_coarse[static_cast<size_t>(image)];
  }
  return gt_level;
}

struct PairOutcome {
  std::string name;
  std::string status = "failed";
  double mean_error = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  std::string note;
};

PairOutcome run_pair(const PairSpec& spec, const RunConfig& base, const std::string& run_dir) {
  PairOutcome outcome;
  outcome.name = std::filesystem::path(spec.partial).stem().string();
  const auto start = std::chrono::steady_clock::now();
  try {
    RunConfig config = base;
    config.full_mesh = spec.full;
    config.partial_mesh = spec.partial;
    config.features_full = spec.features_full;
    config.features_partial = spec.features_partial;
    config.ground_truth = spec.ground_truth;
    config.output_dir = run_dir;
    const PipelineResult result = execute_match(config, false, true);
    outcome.status = overall_status(result);
    outcome.note = result.note;
    if (!result.failed && !spec.ground_truth.empty()) {
      const std::vector<int> gt_input = load_ground_truth(spec.ground_truth);
      const Mesh full_input = load_mesh(spec.full);
      const std::vector<int> gt_level =
          ground_truth_on_level(result, gt_input, full_input.num_vertices());
      const LevelReport& final = result.levels[static_cast<size_t>(result.final_level)];
      const EvalReport eval =
          evaluate_records(final.matching, result.final_x, result.final_y, gt_level, 10.0);
      outcome.mean_error = eval.geodesic.mean;
    }
  } catch (const std::exception& e) {
    outcome.status = "failed";
    outcome.note = e.what();
  }
  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

int run_batch(const std::string& manifest_path, const RunConfig& base,
              const std::string& output_root) {
  const std::vector<PairSpec> pairs = load_manifest(manifest_path);
  std::error_code ec;
  std::filesystem::create_directories(output_root, ec);
  if (ec)
    throw InputError("cannot create output directory " + output_root + ": " + ec.message());

  std::vector<PairOutcome> outcomes(pairs.size());
  std::atomic<size_t> next{0};
  const int workers = std::max(1, std::min<int>(base.workers, static_cast<int>(pairs.size())));
  auto work = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= pairs.size()) break;
      const std::string run_dir =
          (std::filesystem::path(output_root) / ("pair_" + std::to_string(i))).string();
      outcomes[i] = run_pair(pairs[i], base, run_dir);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }

  int failed = 0, optimal = 0, timed_out = 0, evaluated = 0;
  double error_sum = 0.0;
  std::ostringstream table;
  table << "# pair status mean_error_x100 wall_seconds note\n";
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const PairOutcome& o = outcomes[i];
    if (o.status == "failed") ++failed;
    if (o.status == "optimal") ++optimal;
    if (o.status == "timeout_with_incumbent") ++timed_out;
    table << "pair_" << i << "/" << o.name << " " << o.status << " ";
    if (std::isnan(o.mean_error)) {
      table << "-";
    } else {
      table << o.mean_error * 100.0;
      error_sum += o.mean_error * 100.0;
      ++evaluated;
    }
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.2f", o.wall_seconds);
    table << " " << wall << (o.note.empty() ? "" : " " + o.note) << "\n";
  }
  table << "pairs = " << pairs.size() << "\n";
  table << "optimal = " << optimal << "\n";
  table << "timeout_with_incumbent = " << timed_out << "\n";
  table << "failed = " << failed << "\n";
  if (evaluated > 0)
    table << "mean_error_x100 = " << error_sum / static_cast<double>(evaluated) << "\n";

  std::fputs(table.str().c_str(), stdout);
  std::ofstream out =
      open_output((std::filesystem::path(output_root) / "aggregate.txt").string(), "aggregate");
  out << table.str();
  out.flush();
  if (!out) throw InputError("failed while writing aggregate table");
  // Individual failures are counted, not fatal: the batch itself succeeded.
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-to-full shape matching: geometrically consistent triangle "
               "correspondences via an exact integer linear program"};
  app.require_subcommand(1);

  // repair
  std::string repair_in, repair_out, repair_report;
  int repair_close = -1;
  CLI::App* repair_cmd =
      app.add_subcommand("repair", "Repair a mesh to a validation-clean surface");
  repair_cmd->add_option("input", repair_in, "input mesh (OFF or PLY)")->required();
  repair_cmd->add_option("output", repair_out, "repaired mesh path")->required();
  repair_cmd->add_option("--close-holes", repair_close,
                         "also close boundary loops with at most N vertices (0: close all)");
  repair_cmd->add_option("--report", repair_report, "write the repair report to this file");

  // decimate
  std::string decimate_in, decimate_out, decimate_trace;
  int decimate_target = 0;
  CLI::App* decimate_cmd =
      app.add_subcommand("decimate", "Decimate a mesh toward a face target");
  decimate_cmd->add_option("input", decimate_in, "input mesh (OFF or PLY)")->required();
  decimate_cmd->add_option("output", decimate_out, "decimated mesh path")->required();
  decimate_cmd->add_option("--target", decimate_target, "face count to decimate toward")
      ->required();
  decimate_cmd->add_option("--trace", decimate_trace,
                           "write the vertex mapping between input and output here");

  // match / refine
  std::string match_config;
  bool match_print = false;
  CLI::App* match_cmd =
      app.add_subcommand("match", "Run the coarse-to-fine matching pipeline on one pair");
  match_cmd->add_option("--config", match_config, "run configuration file");
  match_cmd->add_flag("--print-config", match_print,
                      "print the effective configuration and exit");

  std::string refine_config;
  bool refine_print = false;
  CLI::App* refine_cmd = app.add_subcommand(
      "refine", "Resume a run directory, continuing after its completed levels");
  refine_cmd->add_option("--config", refine_config, "run configuration file");
  refine_cmd->add_flag("--print-config", refine_print,
                       "print the effective configuration and exit");

  // eval
  std::string eval_full, eval_partial, eval_corr, eval_gt, eval_out = "eval";
  double eval_cap = 10.0;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a correspondence file against ground truth");
  eval_cmd->add_option("--full", eval_full, "full mesh the records refer to")->required();
  eval_cmd->add_option("--partial", eval_partial, "partial mesh the records refer to")
      ->required();
  eval_cmd->add_option("--correspondences", eval_corr, "correspondence file")->required();
  eval_cmd->add_option("--ground-truth", eval_gt, "ground-truth vertex map file")->required();
  eval_cmd->add_option("--output", eval_out, "directory for report and curve files")
      ->capture_default_str();
  eval_cmd->add_option("--distortion-cap", eval_cap,
                       "distortion value recorded for degenerate pairings")
      ->capture_default_str();

  // pipeline
  std::string batch_manifest, batch_config, batch_out = "batch";
  int batch_workers = 0;
  bool batch_print = false;
  CLI::App* batch_cmd =
      app.add_subcommand("pipeline", "Run the pipeline over every pair in a manifest");
  batch_cmd->add_option("--manifest", batch_manifest,
                        "pair list: full partial [features_full features_partial "
                        "[ground_truth]] per line, '-' skips a field")
      ->required();
  batch_cmd->add_option("--config", batch_config, "base configuration for every pair");
  batch_cmd->add_option("--output", batch_out, "root directory for per-pair runs")
      ->capture_default_str();
  batch_cmd->add_option("--workers", batch_workers, "pairs to run concurrently");
  batch_cmd->add_flag("--print-config", batch_print,
                      "print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*repair_cmd) return run_repair(repair_in, repair_out, repair_close, repair_report);
    if (*decimate_cmd)
      return run_decimate(decimate_in, decimate_out, decimate_target, decimate_trace);
    if (*match_cmd || *refine_cmd) {
      const bool resume = static_cast<bool>(*refine_cmd);
      const std::string& config_path = resume ? refine_config : match_config;
      const bool print_only = resume ? refine_print : match_print;
      const RunConfig config = load_effective_config(config_path);
      if (print_only) {
        std::fputs(render_run_config(config).c_str(), stdout);
        return 0;
      }
      if (config_path.empty())
        throw InputError("--config is required (or use --print-config to see defaults)");
      const PipelineResult result = execute_match(config, resume, false);
      return result.failed ? 4 : 0;
    }
    if (*eval_cmd)
      return run_eval(eval_full, eval_partial, eval_corr, eval_gt, eval_out, eval_cap);
    if (*batch_cmd) {
      RunConfig config = load_effective_config(batch_config);
      if (batch_workers > 0) config.workers = batch_workers;
      if (batch_print) {
        std::fputs(render_run_config(config).c_str(), stdout);
        return 0;
      }
      return run_batch(batch_manifest, config, batch_out);
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "geometry error: %s\n", e.what());
    return 3;
  } catch (const SolveError& e) {
    std::fprintf(stderr, "solve error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
