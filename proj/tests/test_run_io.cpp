#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pmatch/errors.hpp"
#include "pmatch/run_io.hpp"
#include "test_support.hpp"

namespace pmatch {
namespace {

using namespace pmatch::testing;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

TEST_CASE("mesh checksums separate distinct meshes") {
  const Mesh a = icosahedron();
  const Mesh b = icosahedron();
  CHECK(mesh_checksum(a) == mesh_checksum(b));

  Rng rng(0xc45c);
  CHECK(mesh_checksum(jitter(a, rng, 1e-9)) != mesh_checksum(a));
  CHECK(mesh_checksum(tetrahedron()) != mesh_checksum(a));

  // Same geometry, different triangle order.
  std::vector<Tri> reordered = a.triangles();
  std::swap(reordered.front(), reordered.back());
  CHECK(mesh_checksum(Mesh(a.vertices(), reordered)) != mesh_checksum(a));
}

TEST_CASE("correspondence files round-trip records and header") {
  TempDir dir("correspondences");
  const std::string path = dir.path("matching.txt");

  CorrespondenceHeader header;
  header.full_checksum = 0xdeadbeefcafe1234ull;
  header.partial_checksum = 0x1122334455667788ull;
  header.level = 3;
  header.status = "optimal";

  std::vector<CorrespondenceRecord> records;
  CorrespondenceRecord a;
  a.x_element = 7;
  a.x_tag = ElementTag::triangle;
  a.y_element = 2;
  a.y_tag = ElementTag::triangle;
  a.rotation = 1;
  a.variable = 42;  // not serialized
  CorrespondenceRecord b;
  b.x_element = 0;
  b.x_tag = ElementTag::vertex;
  b.y_element = 5;
  b.y_tag = ElementTag::triangle;
  b.rotation = 0;
  CorrespondenceRecord c;
  c.x_element = 11;
  c.x_tag = ElementTag::edge;
  c.y_element = 1;
  c.y_tag = ElementTag::edge;
  c.rotation = 2;
  records = {a, b, c};

  save_correspondences(path, header, records);
  const CorrespondenceFile loaded = load_correspondences(path);

  CHECK(loaded.header.full_checksum == header.full_checksum);
  CHECK(loaded.header.partial_checksum == header.partial_checksum);
  CHECK(loaded.header.level == 3);
  CHECK(loaded.header.status == "optimal");
  REQUIRE(loaded.records.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded.records[i].x_element == records[i].x_element);
    CHECK(loaded.records[i].x_tag == records[i].x_tag);
    CHECK(loaded.records[i].y_element == records[i].y_element);
    CHECK(loaded.records[i].y_tag == records[i].y_tag);
    CHECK(loaded.records[i].rotation == records[i].rotation);
    CHECK(loaded.records[i].variable == -1);  // instance-specific, not stored
  }

  // Re-saving the loaded content reproduces the file byte for byte.
  const std::string copy = dir.path("copy.txt");
  save_correspondences(copy, loaded.header, loaded.records);
  std::ifstream first(path), second(copy);
  const std::string text_a((std::istreambuf_iterator<char>(first)),
                           std::istreambuf_iterator<char>());
  const std::string text_b((std::istreambuf_iterator<char>(second)),
                           std::istreambuf_iterator<char>());
  CHECK(text_a == text_b);
}

TEST_CASE("malformed correspondence files are rejected") {
  TempDir dir("bad-correspondences");

  CHECK_THROWS_AS(load_correspondences(dir.path("missing.txt")), InputError);

  const std::string no_header = dir.path("no_header.txt");
  write_text(no_header, "0 0 triangle triangle 0\n");
  CHECK_THROWS_AS(load_correspondences(no_header), InputError);

  const std::string wrong_kind = dir.path("wrong_kind.txt");
  write_text(wrong_kind, "# pmatch ground_truth\n0 0 triangle triangle 0\n");
  CHECK_THROWS_AS(load_correspondences(wrong_kind), InputError);

  const std::string short_row = dir.path("short_row.txt");
  write_text(short_row, "# pmatch correspondences\n0 0 triangle\n");
  CHECK_THROWS_AS(load_correspondences(short_row), InputError);

  const std::string trailing = dir.path("trailing.txt");
  write_text(trailing, "# pmatch correspondences\n0 0 triangle triangle 0 extra\n");
  CHECK_THROWS_AS(load_correspondences(trailing), InputError);

  const std::string bad_tag = dir.path("bad_tag.txt");
  write_text(bad_tag, "# pmatch correspondences\n0 0 square triangle 0\n");
  CHECK_THROWS_AS(load_correspondences(bad_tag), InputError);

  const std::string bad_rotation = dir.path("bad_rotation.txt");
  write_text(bad_rotation, "# pmatch correspondences\n0 0 triangle triangle 3\n");
  CHECK_THROWS_AS(load_correspondences(bad_rotation), InputError);

  CorrespondenceRecord negative;
  negative.x_element = -1;
  CHECK_THROWS_AS(
      save_correspondences(dir.path("refused.txt"), CorrespondenceHeader{}, {negative}),
      InputError);
}

TEST_CASE("ground-truth files hold one image per vertex") {
  TempDir dir("ground-truth");
  const std::string path = dir.path("gt.txt");

  const std::vector<int> images{4, -1, 0, 17, -1};
  save_ground_truth(path, images);
  CHECK(load_ground_truth(path) == images);

  const std::string commented = dir.path("commented.txt");
  write_text(commented, "# heading\n3 1  # trailing comment\n\n2\n");
  CHECK(load_ground_truth(commented) == std::vector<int>{3, 1, 2});

  const std::string word = dir.path("word.txt");
  write_text(word, "3\nfour\n");
  CHECK_THROWS_AS(load_ground_truth(word), InputError);

  const std::string negative = dir.path("negative.txt");
  write_text(negative, "3\n-2\n");
  CHECK_THROWS_AS(load_ground_truth(negative), InputError);

  const std::string empty = dir.path("empty.txt");
  write_text(empty, "# nothing here\n");
  CHECK_THROWS_AS(load_ground_truth(empty), InputError);

  CHECK_THROWS_AS(load_ground_truth(dir.path("missing.txt")), InputError);
  CHECK_THROWS_AS(save_ground_truth(dir.path("refused.txt"), {0, -2}), InputError);
}

TEST_CASE("status files keep key-value entries") {
  TempDir dir("status");
  const std::string path = dir.path("status.txt");

  save_status(path, {{"status", "optimal"},
                     {"levels", "5"},
                     {"note", "objective = 1.25 at the last level"}});
  const auto loaded = load_status(path);
  CHECK(loaded.at("status") == "optimal");
  CHECK(loaded.at("levels") == "5");
  // Values may contain '='; only the first one splits.
  CHECK(loaded.at("note") == "objective = 1.25 at the last level");

  const std::string bad = dir.path("bad.txt");
  write_text(bad, "just some text\n");
  CHECK_THROWS_AS(load_status(bad), InputError);
  CHECK_THROWS_AS(load_status(dir.path("missing.txt")), InputError);
}

TEST_CASE("run configuration round-trips through its text form") {
  TempDir dir("config");
  const std::string path = dir.path("config.ini");

  RunConfig config;
  config.full_mesh = "data/full.off";
  config.partial_mesh = "data/partial.off";
  config.features_full = "data/full.features";
  config.ground_truth = "data/gt.txt";
  config.full_targets = {30, 60, 90};
  config.fallback_coarsest = 15;
  config.radius = 2;
  config.max_radius = 3;
  config.budget_seconds = 123.5;
  config.descriptor_dim = 8;
  config.output_dir = "out/run1";
  config.deterministic = false;
  config.workers = 4;

  save_run_config(path, config);
  const RunConfig loaded = load_run_config(path);
  CHECK(loaded.full_mesh == config.full_mesh);
  CHECK(loaded.partial_mesh == config.partial_mesh);
  CHECK(loaded.features_full == config.features_full);
  CHECK(loaded.features_partial == "");
  CHECK(loaded.ground_truth == config.ground_truth);
  CHECK(loaded.full_targets == config.full_targets);
  CHECK(loaded.fallback_coarsest == config.fallback_coarsest);
  CHECK(loaded.radius == config.radius);
  CHECK(loaded.max_radius == config.max_radius);
  CHECK(loaded.budget_seconds == config.budget_seconds);
  CHECK(loaded.descriptor_dim == config.descriptor_dim);
  CHECK(loaded.output_dir == config.output_dir);
  CHECK(loaded.deterministic == config.deterministic);
  CHECK(loaded.workers == config.workers);

  // Defaults render to a loadable file that reproduces the defaults.
  const std::string defaults_path = dir.path("defaults.ini");
  save_run_config(defaults_path, RunConfig{});
  const RunConfig defaults = load_run_config(defaults_path);
  CHECK(defaults.full_targets == RunConfig{}.full_targets);
  CHECK(defaults.budget_seconds == RunConfig{}.budget_seconds);
  CHECK(defaults.backend == "builtin");
  CHECK(defaults.deterministic == true);
}

TEST_CASE("configuration files tolerate comments and reject unknown keys") {
  TempDir dir("config-errors");

  const std::string commented = dir.path("commented.ini");
  write_text(commented,
             "# run setup\n[paths]\nfull_mesh = a.off   # the full shape\n\n"
             "[solver]\nbudget_seconds = 10\n");
  const RunConfig parsed = load_run_config(commented);
  CHECK(parsed.full_mesh == "a.off");
  CHECK(parsed.budget_seconds == 10.0);

  const auto expect_rejected = [&](const char* name, const std::string& text) {
    const std::string path = dir.path(name);
    write_text(path, text);
    CHECK_THROWS_AS(load_run_config(path), InputError);
  };
  expect_rejected("unknown_key.ini", "[paths]\nfull_mash = a.off\n");
  expect_rejected("unknown_section.ini", "[pathz]\nfull_mesh = a.off\n");
  expect_rejected("keyless.ini", "[paths]\njust text\n");
  expect_rejected("bad_int.ini", "[schedule]\nradius = fast\n");
  expect_rejected("bad_bool.ini", "[run]\ndeterministic = yes\n");
  expect_rejected("bad_list.ini", "[schedule]\nfull_targets = \n");
  expect_rejected("unterminated.ini", "[paths\nfull_mesh = a.off\n");
  expect_rejected("zero_budget.ini", "[solver]\nbudget_seconds = 0\n");
  expect_rejected("no_workers.ini", "[run]\nworkers = 0\n");
  expect_rejected("bad_backend.ini", "[solver]\nbackend = cloud\n");
  CHECK_THROWS_AS(load_run_config(dir.path("missing.ini")), InputError);
}

}  // namespace
}  // namespace pmatch
