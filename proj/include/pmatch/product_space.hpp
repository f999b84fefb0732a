#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pmatch/mesh.hpp"
#include "pmatch/sparse.hpp"

namespace pmatch {

struct CandidateMask;  // defined in coarse_to_fine.hpp

// Candidate correspondence between extended triangles of X (the full shape)
// and Y (the partial shape). A pair owns one variable per admissible cyclic
// alignment of the two vertex triples.
struct ProductPair {
  int x_tri = -1, y_tri = -1;  // extended triangle ids
  int first_variable = -1;
  int num_variables = 0;
};

struct ProductVariable {
  int x_tri = -1, y_tri = -1;
  int rotation = 0;  // Y triple rotated against the X triple
  int pair = -1;
};

struct ProductEdge {
  int x_edge = -1, y_edge = -1;  // extended edge ids
};

// All pairings of extended triangles except degenerate-with-degenerate,
// ordered by (x_tri, y_tri, rotation). Product edges pair extended edges
// except vertex-with-vertex, ordered by (x_edge, y_edge); they are
// enumerated in full even when a candidate mask prunes variables.
//
// Holds references to both meshes; they must outlive this object.
class ProductSpace {
 public:
  ProductSpace(const ExtendedElements& x, const ExtendedElements& y,
               const CandidateMask* mask = nullptr);

  const ExtendedElements& ext_x() const { return x_; }
  const ExtendedElements& ext_y() const { return y_; }

  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  int num_variables() const { return static_cast<int>(variables_.size()); }
  const ProductPair& pair(int p) const { return pairs_[p]; }
  const ProductVariable& variable(int v) const { return variables_[v]; }
  int find_pair(int x_tri, int y_tri) const;
  int find_variable(int x_tri, int y_tri, int rotation) const;
  bool masked() const { return masked_; }

  // Aligned vertex triples: (X triple, Y triple rotated by the variable's
  // rotation); position t matches X.first[t] with Y.second[t].
  std::pair<Tri, Tri> variable_triples(int v) const;

  int num_product_edges() const { return num_edges_; }
  ProductEdge product_edge(int id) const;
  int product_edge_id(int x_edge, int y_edge) const;
  // -1 when either component has no reverse (mesh boundary).
  int reverse_product_edge(int id) const;
  // Interior: neither component is a mesh boundary edge. Only interior
  // product edges carry cycle-consistency rows.
  bool product_edge_interior(int id) const;

  // Closed-form cardinalities, for cross-checking the enumeration.
  static int64_t expected_pairs(const ExtendedElements& x, const ExtendedElements& y);
  static int64_t expected_product_edges(const ExtendedElements& x, const ExtendedElements& y);

 private:
  ExtendedElements x_, y_;
  std::vector<ProductPair> pairs_;
  std::vector<ProductVariable> variables_;
  std::unordered_map<uint64_t, int> pair_lookup_;
  int num_edges_ = 0;
  bool masked_ = false;
};

// 0/1 selection of product variables.
using MatchingIndicator = std::vector<uint8_t>;

struct ConstraintSystem {
  // Cycle consistency: one row per interior directed product edge, entries
  // +1/-1; feasible selections satisfy boundary * x == 0.
  SparseMatrix boundary;
  std::vector<int> boundary_rows;  // row -> product edge id
  // Coverage: proj_x * x <= 1 (X may stay unmatched), proj_y * x == 1.
  SparseMatrix proj_x;  // one row per proper X triangle
  SparseMatrix proj_y;  // one row per proper Y triangle
};

SparseMatrix build_boundary_operator(const ProductSpace& space,
                                     std::vector<int>* boundary_rows = nullptr);
std::pair<SparseMatrix, SparseMatrix> build_projections(const ProductSpace& space);
ConstraintSystem build_constraints(const ProductSpace& space);

// Exact integer check of all three constraint families. On failure, `why`
// (if given) names the first violated row.
bool check_feasible(const ConstraintSystem& system, const MatchingIndicator& selection,
                    std::string* why = nullptr);

uint64_t product_space_checksum(const ProductSpace& space);

}  // namespace pmatch
