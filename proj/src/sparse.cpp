#include "pmatch/sparse.hpp"

#include <algorithm>

namespace pmatch {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  size_t i = 0;
  while (i < triplets.size()) {
    size_t j = i;
    double sum = 0.0;
    while (j < triplets.size() && triplets[j].row == triplets[i].row &&
           triplets[j].col == triplets[i].col)
      sum += triplets[j++].value;
    if (sum != 0.0) {
      m.col_idx.push_back(triplets[i].col);
      m.values.push_back(sum);
      ++m.row_ptr[triplets[i].row + 1];
    }
    i = j;
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (int c : col_idx) ++t.row_ptr[c + 1];
  for (int c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
  t.col_idx.resize(col_idx.size());
  t.values.resize(values.size());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      int pos = next[col_idx[k]]++;
      t.col_idx[pos] = r;
      t.values[pos] = values[k];
    }
  return t;
}

}  // namespace pmatch
