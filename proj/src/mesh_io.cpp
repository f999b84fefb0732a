#include "pmatch/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Whitespace-separated tokens; '#' starts a comment through end of line.
std::vector<std::string> tokenize(const std::string& text, bool hash_comments) {
  std::vector<std::string> tokens;
  size_t i = 0, n = text.size();
  while (i < n) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    } else if (hash_comments && text[i] == '#') {
      while (i < n && text[i] != '\n') ++i;
    } else {
      size_t j = i;
      while (j < n && !std::isspace(static_cast<unsigned char>(text[j])) &&
             !(hash_comments && text[j] == '#'))
        ++j;
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

class TokenCursor {
 public:
  TokenCursor(std::vector<std::string> tokens, std::string path)
      : tokens_(std::move(tokens)), path_(std::move(path)) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const std::string& next(const char* what) {
    if (done()) throw InputError(path_ + ": unexpected end of file while reading " + what);
    return tokens_[pos_++];
  }

  long next_int(const char* what) {
    const std::string& tok = next(what);
    long value = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      throw InputError(path_ + ": expected integer for " + what + ", got '" + tok + "'");
    return value;
  }

  double next_double(const char* what) {
    const std::string& tok = next(what);
    double value = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      throw InputError(path_ + ": expected number for " + what + ", got '" + tok + "'");
    return value;
  }

 private:
  std::vector<std::string> tokens_;
  std::string path_;
  size_t pos_ = 0;
};

Mesh finish_mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles,
                 const std::string& path) {
  int nv = static_cast<int>(vertices.size());
  for (const Tri& t : triangles)
    for (int v : t)
      if (v < 0 || v >= nv)
        throw GeometryError(path + ": face references vertex " + std::to_string(v) +
                            " outside [0, " + std::to_string(nv) + ")");
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh load_off(const std::string& text, const std::string& path) {
  TokenCursor cur(tokenize(text, true), path);
  std::string magic = cur.next("header");
  if (magic != "OFF") throw InputError(path + ": expected OFF header");
  long nv = cur.next_int("vertex count");
  long nf = cur.next_int("face count");
  cur.next_int("edge count");
  if (nv < 0 || nf < 0) throw InputError(path + ": negative element count");

  std::vector<Vec3> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    vertices[i].x = cur.next_double("vertex x");
    vertices[i].y = cur.next_double("vertex y");
    vertices[i].z = cur.next_double("vertex z");
  }
  std::vector<Tri> triangles(nf);
  for (long i = 0; i < nf; ++i) {
    long sides = cur.next_int("face size");
    if (sides != 3)
      throw InputError(path + ": face with " + std::to_string(sides) +
                       " sides; only triangles are supported");
    for (int k = 0; k < 3; ++k)
      triangles[i][k] = static_cast<int>(cur.next_int("face vertex"));
  }
  return finish_mesh(std::move(vertices), std::move(triangles), path);
}

Mesh load_ply(const std::string& text, const std::string& path) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // "ply"

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> scalar_props;  // names, in order
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ascii = false;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      Element el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) throw InputError(path + ": property before element");
      std::string type;
      ls >> type;
      if (type == "list") {
        elements.back().has_list = true;
      } else {
        std::string name;
        ls >> name;
        elements.back().scalar_props.push_back(name);
      }
    } else if (word == "end_header") {
      break;
    } else {
      throw InputError(path + ": unrecognized header line '" + line + "'");
    }
  }
  if (!ascii) throw InputError(path + ": only ascii 1.0 format is supported");

  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  TokenCursor cur(tokenize(body, false), path);

  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  for (const Element& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (int i = 0; i < static_cast<int>(el.scalar_props.size()); ++i) {
        if (el.scalar_props[i] == "x") ix = i;
        if (el.scalar_props[i] == "y") iy = i;
        if (el.scalar_props[i] == "z") iz = i;
      }
      if (ix < 0 || iy < 0 || iz < 0)
        throw InputError(path + ": vertex element lacks x/y/z properties");
      vertices.resize(el.count);
      std::vector<double> row(el.scalar_props.size());
      for (long i = 0; i < el.count; ++i) {
        for (double& value : row) value = cur.next_double("vertex property");
        vertices[i] = {row[ix], row[iy], row[iz]};
      }
    } else if (el.name == "face") {
      triangles.resize(el.count);
      for (long i = 0; i < el.count; ++i) {
        long sides = cur.next_int("face size");
        if (sides != 3)
          throw InputError(path + ": face with " + std::to_string(sides) +
                           " sides; only triangles are supported");
        for (int k = 0; k < 3; ++k)
          triangles[i][k] = static_cast<int>(cur.next_int("face vertex"));
      }
    } else {
      // Unknown element: consume its rows token by token.
      long per_row = static_cast<long>(el.scalar_props.size());
      for (long i = 0; i < el.count; ++i) {
        if (el.has_list) {
          long len = cur.next_int("list size");
          for (long k = 0; k < len; ++k) cur.next("list entry");
        }
        for (long k = 0; k < per_row; ++k) cur.next("property");
      }
    }
  }
  return finish_mesh(std::move(vertices), std::move(triangles), path);
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string lowercase_extension(const std::string& path) {
  size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  std::string text = read_file(path);
  size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (text.compare(i, 3, "OFF") == 0) return load_off(text, path);
  if (text.compare(i, 3, "ply") == 0) return load_ply(text, path);
  throw InputError(path + ": unrecognized mesh format (expected ASCII OFF or PLY)");
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  std::string ext = lowercase_extension(path);
  std::ostringstream out;
  if (ext == "off") {
    out << "OFF\n" << mesh.num_vertices() << " " << mesh.num_triangles() << " 0\n";
    for (const Vec3& v : mesh.vertices())
      out << format_double(v.x) << " " << format_double(v.y) << " " << format_double(v.z)
          << "\n";
    for (const Tri& t : mesh.triangles())
      out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  } else if (ext == "ply") {
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.num_vertices() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.num_triangles() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (const Vec3& v : mesh.vertices())
      out << format_double(v.x) << " " << format_double(v.y) << " " << format_double(v.z)
          << "\n";
    for (const Tri& t : mesh.triangles())
      out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  } else {
    throw InputError(path + ": unsupported mesh extension '" + ext + "' (use .off or .ply)");
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << out.str();
}

}  // namespace pmatch
