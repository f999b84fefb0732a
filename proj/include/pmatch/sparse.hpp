#pragma once

#include <vector>

namespace pmatch {

struct Triplet {
  int row = 0, col = 0;
  double value = 0.0;
};

// Immutable CSR matrix. Duplicate triplets are summed on construction.
struct SparseMatrix {
  int rows = 0, cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col_idx;
  std::vector<double> values;

  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  SparseMatrix transposed() const;

  int nonzeros() const { return static_cast<int>(col_idx.size()); }

  template <typename F>
  void for_row(int r, F&& f) const {
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) f(col_idx[k], values[k]);
  }
};

}  // namespace pmatch
