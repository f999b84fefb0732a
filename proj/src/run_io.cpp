#include "pmatch/run_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::ofstream open_out(const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw InputError(std::string("cannot write ") + what + " file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw InputError(std::string("cannot read ") + what + " file: " + path);
  return in;
}

void finish_out(std::ofstream& out, const std::string& path, const char* what) {
  out.flush();
  if (!out) throw InputError(std::string("failed while writing ") + what + " file: " + path);
}

}  // namespace

void save_correspondences(const std::string& path, const CorrespondenceHeader& header,
                          const std::vector<CorrespondenceRecord>& records) {
  std::ofstream out = open_out(path, "correspondence");
  out << "# pmatch correspondences\n";
  out << "# full_checksum " << std::hex << header.full_checksum << "\n";
  out << "# partial_checksum " << header.partial_checksum << std::dec << "\n";
  out << "# level " << header.level << "\n";
  out << "# status " << (header.status.empty() ? "unknown" : header.status) << "\n";
  for (const CorrespondenceRecord& rec : records) {
    if (rec.x_element < 0 || rec.y_element < 0 || rec.rotation < 0 || rec.rotation > 2) {
      throw InputError("refusing to write a malformed correspondence record");
    }
    out << rec.x_element << ' ' << rec.y_element << ' ' << to_string(rec.x_tag) << ' '
        << to_string(rec.y_tag) << ' ' << rec.rotation << "\n";
  }
  finish_out(out, path, "correspondence");
}

CorrespondenceFile load_correspondences(const std::string& path) {
  std::ifstream in = open_in(path, "correspondence");
  CorrespondenceFile file;
  std::string line;
  bool signature_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      std::istringstream header(text.substr(1));
      std::string key;
      header >> key;
      if (key == "pmatch") {
        std::string kind;
        header >> kind;
        if (kind != "correspondences") {
          throw InputError(path + " is a pmatch file of kind '" + kind +
                           "', not a correspondence file");
        }
        signature_seen = true;
      } else if (key == "full_checksum") {
        header >> std::hex >> file.header.full_checksum;
      } else if (key == "partial_checksum") {
        header >> std::hex >> file.header.partial_checksum;
      } else if (key == "level") {
        header >> file.header.level;
      } else if (key == "status") {
        header >> file.header.status;
      }
      if (header.fail()) {
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": malformed header line");
      }
      continue;
    }
    if (!signature_seen) {
      throw InputError(path + " does not start with a pmatch correspondence header");
    }
    std::istringstream row(text);
    CorrespondenceRecord rec;
    std::string x_tag, y_tag;
    row >> rec.x_element >> rec.y_element >> x_tag >> y_tag >> rec.rotation;
    if (row.fail()) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected 'x_id y_id x_tag y_tag pairing'");
    }
    std::string extra;
    if (row >> extra) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": trailing content after the record");
    }
    rec.x_tag = element_tag_from_string(x_tag);
    rec.y_tag = element_tag_from_string(y_tag);
    if (rec.x_element < 0 || rec.y_element < 0 || rec.rotation < 0 || rec.rotation > 2) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": record fields out of range");
    }
    rec.variable = -1;  // instance-specific, never stored
    file.records.push_back(rec);
  }
  if (!signature_seen) {
    throw InputError(path + " does not start with a pmatch correspondence header");
  }
  return file;
}

std::vector<int> load_ground_truth(const std::string& path) {
  std::ifstream in = open_in(path, "ground-truth");
  std::vector<int> images;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    std::istringstream row(line);
    int value = 0;
    while (row >> value) {
      if (value < -1) {
        throw InputError(path + ":" + std::to_string(line_no) +
                         ": ground-truth ids must be vertex ids or -1");
      }
      images.push_back(value);
    }
    if (!row.eof()) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": ground-truth entries must be integers");
    }
  }
  if (images.empty()) {
    throw InputError(path + " contains no ground-truth entries");
  }
  return images;
}

void save_ground_truth(const std::string& path, const std::vector<int>& images) {
  std::ofstream out = open_out(path, "ground-truth");
  out << "# pmatch ground_truth\n";
  for (int v : images) {
    if (v < -1) throw InputError("ground-truth ids must be vertex ids or -1");
    out << v << "\n";
  }
  finish_out(out, path, "ground-truth");
}

void save_status(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(path, "status");
  for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
  finish_out(out, path, "status");
}

std::map<std::string, std::string> load_status(const std::string& path) {
  std::ifstream in = open_in(path, "status");
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    entries[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
  }
  return entries;
}

namespace {

struct ConfigParser {
  const std::string& path;
  int line_no = 0;

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + message);
  }

  int to_int(const std::string& value) const {
    try {
      size_t used = 0;
      const int parsed = std::stoi(value, &used);
      if (used != value.size()) fail("'" + value + "' is not an integer");
      return parsed;
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      fail("'" + value + "' is not an integer");
    }
  }

  double to_double(const std::string& value) const {
    try {
      size_t used = 0;
      const double parsed = std::stod(value, &used);
      if (used != value.size()) fail("'" + value + "' is not a number");
      return parsed;
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      fail("'" + value + "' is not a number");
    }
  }

  bool to_bool(const std::string& value) const {
    if (value == "true") return true;
    if (value == "false") return false;
    fail("'" + value + "' is not 'true' or 'false'");
  }

  std::vector<int> to_int_list(const std::string& value) const {
    std::istringstream stream(value);
    std::vector<int> list;
    std::string item;
    while (stream >> item) list.push_back(to_int(item));
    if (list.empty()) fail("expected a space-separated list of integers");
    return list;
  }
};

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in = open_in(path, "config");
  RunConfig config;
  ConfigParser parser{path};
  std::string section;
  std::string line;
  while (std::getline(in, line)) {
    ++parser.line_no;
    std::string text = trim(line);
    const size_t comment = text.find('#');
    if (comment != std::string::npos) text = trim(text.substr(0, comment));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') parser.fail("unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "paths" && section != "schedule" && section != "solver" &&
          section != "features" && section != "run") {
        parser.fail("unknown section '" + section + "'");
      }
      continue;
    }
    const size_t eq = text.find('=');
    if (eq == std::string::npos) parser.fail("expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const std::string qualified = section + "." + key;
    if (qualified == "paths.full_mesh") {
      config.full_mesh = value;
    } else if (qualified == "paths.partial_mesh") {
      config.partial_mesh = value;
    } else if (qualified == "paths.features_full") {
      config.features_full = value;
    } else if (qualified == "paths.features_partial") {
      config.features_partial = value;
    } else if (qualified == "paths.ground_truth") {
      config.ground_truth = value;
    } else if (qualified == "schedule.full_targets") {
      config.full_targets = parser.to_int_list(value);
    } else if (qualified == "schedule.fallback_coarsest") {
      config.fallback_coarsest = parser.to_int(value);
    } else if (qualified == "schedule.radius") {
      config.radius = parser.to_int(value);
    } else if (qualified == "schedule.max_radius") {
      config.max_radius = parser.to_int(value);
    } else if (qualified == "solver.budget_seconds") {
      config.budget_seconds = parser.to_double(value);
    } else if (qualified == "solver.backend") {
      if (value != "builtin") parser.fail("unknown backend '" + value + "'");
      config.backend = value;
    } else if (qualified == "features.descriptor_dim") {
      config.descriptor_dim = parser.to_int(value);
    } else if (qualified == "run.output_dir") {
      config.output_dir = value;
    } else if (qualified == "run.deterministic") {
      config.deterministic = parser.to_bool(value);
    } else if (qualified == "run.workers") {
      config.workers = parser.to_int(value);
    } else {
      parser.fail("unknown configuration key '" + qualified + "'");
    }
  }
  if (config.budget_seconds <= 0.0) {
    throw InputError(path + ": solver.budget_seconds must be positive");
  }
  if (config.workers < 1) {
    throw InputError(path + ": run.workers must be at least 1");
  }
  if (config.descriptor_dim < 1) {
    throw InputError(path + ": features.descriptor_dim must be at least 1");
  }
  return config;
}

std::string render_run_config(const RunConfig& config) {
  std::ostringstream out;
  out << "[paths]\n";
  out << "full_mesh = " << config.full_mesh << "\n";
  out << "partial_mesh = " << config.partial_mesh << "\n";
  out << "features_full = " << config.features_full << "\n";
  out << "features_partial = " << config.features_partial << "\n";
  out << "ground_truth = " << config.ground_truth << "\n";
  out << "\n[schedule]\n";
  out << "full_targets =";
  for (int t : config.full_targets) out << ' ' << t;
  out << "\n";
  out << "fallback_coarsest = " << config.fallback_coarsest << "\n";
  out << "radius = " << config.radius << "\n";
  out << "max_radius = " << config.max_radius << "\n";
  out << "\n[solver]\n";
  out << "budget_seconds = " << shortest(config.budget_seconds) << "\n";
  out << "backend = " << config.backend << "\n";
  out << "\n[features]\n";
  out << "descriptor_dim = " << config.descriptor_dim << "\n";
  out << "\n[run]\n";
  out << "output_dir = " << config.output_dir << "\n";
  out << "deterministic = " << (config.deterministic ? "true" : "false") << "\n";
  out << "workers = " << config.workers << "\n";
  return out.str();
}

void save_run_config(const std::string& path, const RunConfig& config) {
  std::ofstream out = open_out(path, "config");
  out << render_run_config(config);
  finish_out(out, path, "config");
}

}  // namespace pmatch
