#include "pmatch/product_space.hpp"

#include <cassert>

#include "pmatch/coarse_to_fine.hpp"
#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

uint64_t pair_key(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

Tri rotated(const Tri& t, int r) { return {t[r % 3], t[(r + 1) % 3], t[(r + 2) % 3]}; }

}  // namespace

ProductSpace::ProductSpace(const ExtendedElements& x, const ExtendedElements& y,
                           const CandidateMask* mask)
    : x_(x), y_(y), masked_(mask != nullptr && !mask->unrestricted()) {
  int nvx = x.mesh().num_vertices(), nvy = y.mesh().num_vertices();
  int nex = x.mesh().num_directed_edges(), ney = y.mesh().num_directed_edges();
  num_edges_ = static_cast<int>(expected_product_edges(x, y));

  if (masked_ && (mask->num_x_vertices != nvx || mask->num_y_vertices != nvy))
    throw InputError("candidate mask size does not match the meshes");

  int degenerate_x = nvx + nex, degenerate_y = nvy + ney;
  for (int tx = 0; tx < x.num_triangles(); ++tx) {
    Tri xt = x.triangle_triple(tx);
    bool x_degenerate = tx < degenerate_x;
    for (int ty = 0; ty < y.num_triangles(); ++ty) {
      if (x_degenerate && ty < degenerate_y) continue;
      int rotations =
          (x.triangle_tag(tx) == ElementTag::vertex || y.triangle_tag(ty) == ElementTag::vertex)
              ? 1
              : 3;
      Tri yt = y.triangle_triple(ty);
      ProductPair pair{tx, ty, static_cast<int>(variables_.size()), 0};
      for (int r = 0; r < rotations; ++r) {
        if (masked_) {
          Tri yr = rotated(yt, r);
          bool ok = true;
          for (int t = 0; t < 3 && ok; ++t) ok = mask->pair_allowed(xt[t], yr[t]);
          if (!ok) continue;
        }
        variables_.push_back({tx, ty, r, static_cast<int>(pairs_.size())});
        ++pair.num_variables;
      }
      if (pair.num_variables > 0) {
        pair_lookup_.emplace(pair_key(tx, ty), static_cast<int>(pairs_.size()));
        pairs_.push_back(pair);
      }
    }
  }
}

int ProductSpace::find_pair(int x_tri, int y_tri) const {
  auto it = pair_lookup_.find(pair_key(x_tri, y_tri));
  return it == pair_lookup_.end() ? -1 : it->second;
}

int ProductSpace::find_variable(int x_tri, int y_tri, int rotation) const {
  int p = find_pair(x_tri, y_tri);
  if (p < 0) return -1;
  const ProductPair& pair = pairs_[p];
  for (int v = pair.first_variable; v < pair.first_variable + pair.num_variables; ++v)
    if (variables_[v].rotation == rotation) return v;
  return -1;
}

std::pair<Tri, Tri> ProductSpace::variable_triples(int v) const {
  const ProductVariable& var = variables_[v];
  return {x_.triangle_triple(var.x_tri), rotated(y_.triangle_triple(var.y_tri), var.rotation)};
}

ProductEdge ProductSpace::product_edge(int id) const {
  int nvx = x_.mesh().num_vertices(), nvy = y_.mesh().num_vertices();
  int ney = y_.mesh().num_directed_edges();
  int vertex_block = nvx * ney;
  if (id < vertex_block) return {id / ney, nvy + id % ney};
  int t = id - vertex_block;
  int stride = nvy + ney;
  return {nvx + t / stride, t % stride};
}

int ProductSpace::product_edge_id(int x_edge, int y_edge) const {
  int nvx = x_.mesh().num_vertices(), nvy = y_.mesh().num_vertices();
  int ney = y_.mesh().num_directed_edges();
  if (x_edge < nvx) {
    if (y_edge < nvy) return -1;  // vertex with vertex is not a product edge
    return x_edge * ney + (y_edge - nvy);
  }
  return nvx * ney + (x_edge - nvx) * (nvy + ney) + y_edge;
}

int ProductSpace::reverse_product_edge(int id) const {
  ProductEdge e = product_edge(id);
  int nvx = x_.mesh().num_vertices(), nvy = y_.mesh().num_vertices();
  int rx = e.x_edge, ry = e.y_edge;
  if (rx >= nvx) {
    int r = x_.mesh().reverse_edge(rx - nvx);
    if (r < 0) return -1;
    rx = nvx + r;
  }
  if (ry >= nvy) {
    int r = y_.mesh().reverse_edge(ry - nvy);
    if (r < 0) return -1;
    ry = nvy + r;
  }
  return product_edge_id(rx, ry);
}

bool ProductSpace::product_edge_interior(int id) const {
  ProductEdge e = product_edge(id);
  if (x_.edge_on_boundary(e.x_edge)) return false;
  if (y_.edge_on_boundary(e.y_edge)) return false;
  return true;
}

int64_t ProductSpace::expected_pairs(const ExtendedElements& x, const ExtendedElements& y) {
  int64_t ex = x.num_edges(), ey = y.num_edges();  // degenerate triangle counts
  return static_cast<int64_t>(x.num_triangles()) * y.num_triangles() - ex * ey;
}

int64_t ProductSpace::expected_product_edges(const ExtendedElements& x,
                                             const ExtendedElements& y) {
  return static_cast<int64_t>(x.num_edges()) * y.num_edges() -
         static_cast<int64_t>(x.mesh().num_vertices()) * y.mesh().num_vertices();
}

SparseMatrix build_boundary_operator(const ProductSpace& space, std::vector<int>* boundary_rows) {
  std::vector<int> row_of_edge(space.num_product_edges(), -1);
  std::vector<int> rows;
  for (int e = 0; e < space.num_product_edges(); ++e)
    if (space.product_edge_interior(e)) {
      row_of_edge[e] = static_cast<int>(rows.size());
      rows.push_back(e);
    }

  const ExtendedElements& X = space.ext_x();
  const ExtendedElements& Y = space.ext_y();
  std::vector<Triplet> triplets;
  for (int v = 0; v < space.num_variables(); ++v) {
    auto [xt, yt] = space.variable_triples(v);
    for (int t = 0; t < 3; ++t) {
      int xa = xt[t], xb = xt[(t + 1) % 3];
      int ya = yt[t], yb = yt[(t + 1) % 3];
      int ex = X.find_edge(xa, xb), ey = Y.find_edge(ya, yb);
      if (ex >= 0 && ey >= 0) {
        int pe = space.product_edge_id(ex, ey);
        if (pe >= 0 && row_of_edge[pe] >= 0)
          triplets.push_back({row_of_edge[pe], v, 1.0});
      }
      int rx = X.find_edge(xb, xa), ry = Y.find_edge(yb, ya);
      if (rx >= 0 && ry >= 0) {
        int pe = space.product_edge_id(rx, ry);
        if (pe >= 0 && row_of_edge[pe] >= 0)
          triplets.push_back({row_of_edge[pe], v, -1.0});
      }
    }
  }
  if (boundary_rows) *boundary_rows = rows;
  return SparseMatrix::from_triplets(static_cast<int>(rows.size()), space.num_variables(),
                                     std::move(triplets));
}

std::pair<SparseMatrix, SparseMatrix> build_projections(const ProductSpace& space) {
  const ExtendedElements& X = space.ext_x();
  const ExtendedElements& Y = space.ext_y();
  std::vector<Triplet> tx, ty;
  for (int v = 0; v < space.num_variables(); ++v) {
    const ProductVariable& var = space.variable(v);
    if (X.triangle_tag(var.x_tri) == ElementTag::triangle)
      tx.push_back({X.triangle_local(var.x_tri), v, 1.0});
    if (Y.triangle_tag(var.y_tri) == ElementTag::triangle)
      ty.push_back({Y.triangle_local(var.y_tri), v, 1.0});
  }
  return {SparseMatrix::from_triplets(X.mesh().num_triangles(), space.num_variables(),
                                      std::move(tx)),
          SparseMatrix::from_triplets(Y.mesh().num_triangles(), space.num_variables(),
                                      std::move(ty))};
}

ConstraintSystem build_constraints(const ProductSpace& space) {
  ConstraintSystem system;
  system.boundary = build_boundary_operator(space, &system.boundary_rows);
  auto [px, py] = build_projections(space);
  system.proj_x = std::move(px);
  system.proj_y = std::move(py);
  return system;
}

bool check_feasible(const ConstraintSystem& system, const MatchingIndicator& selection,
                    std::string* why) {
  auto fail = [why](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (static_cast<int>(selection.size()) != system.boundary.cols)
    return fail("selection size does not match the variable count");

  for (int r = 0; r < system.boundary.rows; ++r) {
    long sum = 0;
    system.boundary.for_row(r, [&](int c, double v) {
      if (selection[c]) sum += v > 0 ? 1 : -1;
    });
    if (sum != 0)
      return fail("cycle-consistency row " + std::to_string(r) + " sums to " +
                  std::to_string(sum));
  }
  for (int r = 0; r < system.proj_x.rows; ++r) {
    long sum = 0;
    system.proj_x.for_row(r, [&](int c, double) { sum += selection[c] ? 1 : 0; });
    if (sum > 1)
      return fail("X triangle " + std::to_string(r) + " is covered " + std::to_string(sum) +
                  " times");
  }
  for (int r = 0; r < system.proj_y.rows; ++r) {
    long sum = 0;
    system.proj_y.for_row(r, [&](int c, double) { sum += selection[c] ? 1 : 0; });
    if (sum != 1)
      return fail("Y triangle " + std::to_string(r) + " is covered " + std::to_string(sum) +
                  " times (needs exactly 1)");
  }
  return true;
}

uint64_t product_space_checksum(const ProductSpace& space) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](int64_t value) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<unsigned char>(value >> (8 * i));
      h *= 1099511628211ull;
    }
  };
  mix(space.num_pairs());
  mix(space.num_variables());
  mix(space.num_product_edges());
  for (int v = 0; v < space.num_variables(); ++v) {
    const ProductVariable& var = space.variable(v);
    mix(var.x_tri);
    mix(var.y_tri);
    mix(var.rotation);
  }
  return h;
}

}  // namespace pmatch
