#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pmatch/ilp.hpp"
#include "pmatch/mesh.hpp"

namespace pmatch {

// Correspondence files: '#'-prefixed header (checksums of the two meshes the
// ids refer to, pipeline level, solve status), then one record per line as
// "x_id y_id x_tag y_tag pairing". Variable ids are instance-specific and
// not stored; loaded records carry variable = -1.
struct CorrespondenceHeader {
  uint64_t full_checksum = 0;
  uint64_t partial_checksum = 0;
  int level = -1;  // -1 when the file is not part of a level stack
  std::string status;
};

struct CorrespondenceFile {
  CorrespondenceHeader header;
  std::vector<CorrespondenceRecord> records;
};

void save_correspondences(const std::string& path, const CorrespondenceHeader& header,
                          const std::vector<CorrespondenceRecord>& records);
CorrespondenceFile load_correspondences(const std::string& path);

// Ground truth: one full-shape vertex id per partial-shape vertex, -1 for
// unannotated vertices; whitespace-separated, '#' starts a comment.
std::vector<int> load_ground_truth(const std::string& path);
void save_ground_truth(const std::string& path, const std::vector<int>& images);

// Key = value status files, one entry per line, order preserved on save.
void save_status(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& entries);
std::map<std::string, std::string> load_status(const std::string& path);

// Batch-run configuration ("key = value" under [section] headers; unknown
// keys are rejected). All fields have workable defaults except the input
// paths.
struct RunConfig {
  // [paths]
  std::string full_mesh;
  std::string partial_mesh;
  std::string features_full;     // empty: compute spectral descriptors
  std::string features_partial;  // empty: compute spectral descriptors
  std::string ground_truth;      // empty: skip geodesic-error evaluation
  // [schedule]
  std::vector<int> full_targets{200, 400, 600, 800, 1000};
  int fallback_coarsest = 100;
  int radius = 1;
  int max_radius = 3;
  // [solver]
  double budget_seconds = 7200.0;
  std::string backend = "builtin";
  // [features]
  int descriptor_dim = 16;
  // [run]
  std::string output_dir = "run";
  bool deterministic = true;
  int workers = 1;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);
std::string render_run_config(const RunConfig& config);

}  // namespace pmatch
