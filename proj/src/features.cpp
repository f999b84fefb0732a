#include "pmatch/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

struct NumberCursor {
  const char* p;
  const char* end;
  const std::string& path;

  void skip_space() {
    while (p != end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == '\n')) ++p;
  }
  bool done() {
    skip_space();
    return p == end;
  }
  template <typename T>
  T next(const char* what) {
    skip_space();
    T value{};
    auto [next_p, ec] = std::from_chars(p, end, value);
    if (ec != std::errc{}) throw InputError(path + ": malformed " + what);
    p = next_p;
    return value;
  }
};

void append_double(std::string& out, double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, p);
}

FeatureSet parse_text_features(const std::string& data, const std::string& path) {
  NumberCursor cur{data.data(), data.data() + data.size(), path};
  int64_t rows = cur.next<int64_t>("row count");
  int64_t cols = cur.next<int64_t>("column count");
  if (rows <= 0 || cols <= 0 || rows * cols > (int64_t(1) << 30))
    throw InputError(path + ": implausible feature matrix shape");
  FeatureSet fs;
  fs.rows = static_cast<int>(rows);
  fs.dim = static_cast<int>(cols);
  fs.values.resize(static_cast<size_t>(rows * cols));
  for (double& v : fs.values) v = cur.next<double>("feature value");
  if (!cur.done()) throw InputError(path + ": trailing content after feature matrix");
  return fs;
}

FeatureSet parse_binary_features(const std::string& data, const std::string& path) {
  if (data.size() < 8) throw InputError(path + ": truncated feature header");
  auto u32 = [&](size_t off) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data[off + i]);
    return v;
  };
  int64_t rows = u32(0), cols = u32(4);
  if (rows <= 0 || cols <= 0 || rows * cols > (int64_t(1) << 30))
    throw InputError(path + ": implausible feature matrix shape");
  if (data.size() != 8 + static_cast<size_t>(rows * cols) * 8)
    throw InputError(path + ": feature payload size does not match the header");
  FeatureSet fs;
  fs.rows = static_cast<int>(rows);
  fs.dim = static_cast<int>(cols);
  fs.values.resize(static_cast<size_t>(rows * cols));
  for (size_t i = 0; i < fs.values.size(); ++i) {
    uint64_t bits = 0;
    for (int b = 7; b >= 0; --b)
      bits = (bits << 8) | static_cast<unsigned char>(data[8 + i * 8 + b]);
    fs.values[i] = std::bit_cast<double>(bits);
  }
  return fs;
}

}  // namespace

FeatureSet load_features(const std::string& path, int expected_vertices) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feature file: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.empty()) throw InputError(path + ": empty feature file");

  // A binary header of two modest counts always contains NUL bytes; text
  // never does.
  bool binary = data.size() >= 8 && std::memchr(data.data(), 0, 8) != nullptr;
  FeatureSet fs = binary ? parse_binary_features(data, path) : parse_text_features(data, path);

  if (expected_vertices >= 0 && fs.rows != expected_vertices)
    throw InputError(path + ": feature rows (" + std::to_string(fs.rows) +
                     ") do not match the mesh vertex count (" +
                     std::to_string(expected_vertices) + ")");
  for (double v : fs.values)
    if (!std::isfinite(v)) throw InputError(path + ": non-finite feature value");
  return fs;
}

void save_features(const std::string& path, const FeatureSet& features, FeatureFormat format) {
  if (features.rows <= 0 || features.dim <= 0 ||
      features.values.size() != static_cast<size_t>(features.rows) * features.dim)
    throw InputError("feature set shape is inconsistent");

  std::string out;
  if (format == FeatureFormat::text) {
    out = std::to_string(features.rows) + " " + std::to_string(features.dim) + "\n";
    for (int v = 0; v < features.rows; ++v) {
      for (int j = 0; j < features.dim; ++j) {
        if (j) out += ' ';
        append_double(out, features.at(v, j));
      }
      out += '\n';
    }
  } else {
    auto put_u32 = [&](uint32_t v) {
      for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
    };
    put_u32(static_cast<uint32_t>(features.rows));
    put_u32(static_cast<uint32_t>(features.dim));
    for (double v : features.values) {
      uint64_t bits = std::bit_cast<uint64_t>(v);
      for (int i = 0; i < 8; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xff);
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write feature file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("write failed: " + path);
}

FeatureSet fallback_descriptors(const Mesh& mesh, int d, int time_samples, int eigenpairs) {
  if (d <= 0) throw InputError("descriptor dimension must be positive");
  if (time_samples == 0) time_samples = d;
  if (time_samples != d)
    throw InputError("heat-kernel descriptors use one entry per time sample; "
                     "time_samples must equal the descriptor dimension");
  const int n = mesh.num_vertices();
  if (n < d + 1)
    throw InputError("mesh has too few vertices for the requested descriptor dimension");

  std::vector<double> mass = mesh.mixed_voronoi_areas();
  for (int v = 0; v < n; ++v)
    if (!(mass[v] > 0.0))
      throw GeometryError("vertex " + std::to_string(v) +
                          " has no positive Voronoi area; cannot build the Laplacian");

  // Stiffness matrix, then the mass-symmetrized operator M^{-1/2} L M^{-1/2}.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (const Tri& t : mesh.triangles()) {
    for (int c = 0; c < 3; ++c) {
      int o = t[c], i = t[(c + 1) % 3], j = t[(c + 2) % 3];
      double w = 0.5 * cotangent(mesh.vertex(o), mesh.vertex(i), mesh.vertex(j));
      B(i, j) -= w;
      B(j, i) -= w;
      B(i, i) += w;
      B(j, j) += w;
    }
  }
  std::vector<double> inv_sqrt_mass(n);
  for (int v = 0; v < n; ++v) inv_sqrt_mass[v] = 1.0 / std::sqrt(mass[v]);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) *= inv_sqrt_mass[i] * inv_sqrt_mass[j];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success)
    throw GeometryError("eigen decomposition of the Laplace-Beltrami operator failed");
  const Eigen::VectorXd& lam = es.eigenvalues();

  int k = eigenpairs > 0 ? std::min(eigenpairs, n) : std::min(n - 1, 60);
  // Never cut inside a near-degenerate cluster: partial sums over a split
  // eigenspace would depend on the solver's basis choice.
  while (k < n && lam[k] - lam[k - 1] <= 1e-8 * std::max(1.0, std::abs(lam[k - 1]))) ++k;

  double lam_max = lam[k - 1];
  double lam_min = 0.0;
  for (int j = 0; j < k; ++j)
    if (lam[j] > 1e-8 * std::max(1.0, lam_max)) {
      lam_min = lam[j];
      break;
    }
  if (!(lam_min > 0.0) || !(lam_max > 0.0))
    throw GeometryError("Laplacian spectrum is degenerate; cannot place diffusion times");

  double t_min = 4.0 * std::log(10.0) / lam_max;
  double t_max = 4.0 * std::log(10.0) / lam_min;
  if (!(t_max > t_min)) t_max = t_min * 10.0;
  std::vector<double> times(d);
  for (int i = 0; i < d; ++i) {
    double s = d == 1 ? 0.5 : static_cast<double>(i) / (d - 1);
    times[i] = std::exp(std::log(t_min) + s * (std::log(t_max) - std::log(t_min)));
  }

  FeatureSet fs;
  fs.rows = n;
  fs.dim = d;
  fs.values.assign(static_cast<size_t>(n) * d, 0.0);
  for (int j = 0; j < k; ++j) {
    for (int v = 0; v < n; ++v) {
      double phi = es.eigenvectors()(v, j) * inv_sqrt_mass[v];
      double phi2 = phi * phi;
      for (int i = 0; i < d; ++i) fs.values[static_cast<size_t>(v) * d + i] +=
          std::exp(-lam[j] * times[i]) * phi2;
    }
  }
  for (int i = 0; i < d; ++i) {
    double mean = 0.0;
    for (int v = 0; v < n; ++v) mean += fs.at(v, i);
    mean /= n;
    for (int v = 0; v < n; ++v) fs.values[static_cast<size_t>(v) * d + i] /= mean;
  }
  return fs;
}

TriangleFeatures lift_to_triangles(const FeatureSet& features, const ExtendedElements& ext) {
  if (features.rows != ext.mesh().num_vertices())
    throw InputError("feature rows do not match the mesh vertex count");
  TriangleFeatures out;
  out.count = ext.num_triangles();
  out.dim = features.dim;
  out.values.resize(static_cast<size_t>(out.count) * out.dim);
  for (int t = 0; t < out.count; ++t) {
    Tri triple = ext.triangle_triple(t);
    double* u = out.values.data() + static_cast<size_t>(t) * out.dim;
    switch (ext.triangle_tag(t)) {
      case ElementTag::vertex:
        std::copy_n(features.row(triple[0]), features.dim, u);
        break;
      case ElementTag::edge: {  // triple is (a, a, b)
        const double* a = features.row(triple[0]);
        const double* b = features.row(triple[2]);
        for (int j = 0; j < features.dim; ++j) u[j] = 0.5 * (a[j] + b[j]);
        break;
      }
      case ElementTag::triangle: {
        const double* a = features.row(triple[0]);
        const double* b = features.row(triple[1]);
        const double* c = features.row(triple[2]);
        for (int j = 0; j < features.dim; ++j) u[j] = (a[j] + b[j] + c[j]) / 3.0;
        break;
      }
    }
  }
  return out;
}

CostVector build_costs(const TriangleFeatures& ux, const TriangleFeatures& uy,
                       const ProductSpace& space) {
  if (ux.dim != uy.dim) throw InputError("feature dimensions of the two shapes differ");
  if (ux.count != space.ext_x().num_triangles() || uy.count != space.ext_y().num_triangles())
    throw InputError("lifted features do not cover the extended triangles");
  CostVector costs(space.num_variables());
  for (int v = 0; v < space.num_variables(); ++v) {
    const ProductVariable& var = space.variable(v);
    const double* a = ux.row(var.x_tri);
    const double* b = uy.row(var.y_tri);
    double s = 0.0;
    for (int j = 0; j < ux.dim; ++j) {
      double diff = a[j] - b[j];
      s += diff * diff;
    }
    costs[v] = std::sqrt(s);
  }
  return costs;
}

FeatureSet hole_feature_assignment(const FeatureSet& features, const CloseHolesResult& closed) {
  const int total = closed.mesh.num_vertices();
  const int original = total - static_cast<int>(closed.fills.size());
  if (features.rows != original)
    throw InputError("feature rows must match the pre-closing vertex count");

  FeatureSet out;
  out.rows = total;
  out.dim = features.dim;
  out.values.assign(static_cast<size_t>(total) * features.dim, 0.0);
  std::copy(features.values.begin(), features.values.end(), out.values.begin());

  for (const HoleFill& fill : closed.fills) {
    if (fill.new_vertex < original || fill.new_vertex >= total)
      throw InputError("hole centroid vertex " + std::to_string(fill.new_vertex) +
                       " is not an appended vertex");
    double* row = out.row(fill.new_vertex);
    for (int r : fill.rim) {
      if (r < 0 || r >= original) throw InputError("hole rim references an unknown vertex");
      const double* src = features.row(r);
      for (int j = 0; j < features.dim; ++j) row[j] += src[j];
    }
    for (int j = 0; j < features.dim; ++j) row[j] /= static_cast<double>(fill.rim.size());
  }
  return out;
}

FeatureSet transfer_features(const FeatureSet& fine_features, const Mesh& fine,
                             const DecimationTrace& trace, const Mesh& coarse) {
  if (fine_features.rows != fine.num_vertices() ||
      static_cast<int>(trace.fine_to_coarse.size()) != fine.num_vertices() ||
      static_cast<int>(trace.coarse_to_fine.size()) != coarse.num_vertices())
    throw InputError("decimation trace does not bind the features to the meshes");

  std::vector<double> area = fine.mixed_voronoi_areas();
  FeatureSet out;
  out.rows = coarse.num_vertices();
  out.dim = fine_features.dim;
  out.values.assign(static_cast<size_t>(out.rows) * out.dim, 0.0);
  std::vector<double> weight(out.rows, 0.0);
  for (int v = 0; v < fine.num_vertices(); ++v) weight[trace.fine_to_coarse[v]] += area[v];
  for (int c = 0; c < out.rows; ++c)
    if (!(weight[c] > 0.0))
      throw GeometryError("coarse vertex " + std::to_string(c) + " has no feature mass");
  // Normalized weights keep single-member groups exact: area/area == 1.
  for (int v = 0; v < fine.num_vertices(); ++v) {
    int c = trace.fine_to_coarse[v];
    double w = area[v] / weight[c];
    const double* src = fine_features.row(v);
    double* dst = out.row(c);
    for (int j = 0; j < out.dim; ++j) dst[j] += w * src[j];
  }
  return out;
}

}  // namespace pmatch
