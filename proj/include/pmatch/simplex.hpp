#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pmatch/sparse.hpp"

namespace pmatch {

enum class LpStatus { optimal, primal_infeasible, iteration_limit, aborted };

const char* to_string(LpStatus status);

// min cost . x  over  A x + s = rhs, column bounds on the structural x and
// logical bounds on the row slacks s (equality row: s in [0,0]; a <= row:
// s in [0, +inf)). Bounds may be equal (fixed variable).
struct LpProblem {
  SparseMatrix rows;  // m x n structural coefficients
  std::vector<double> cost;                        // n
  std::vector<double> rhs;                         // m
  std::vector<double> lower, upper;                // n structural bounds
  std::vector<double> logical_lower, logical_upper;  // m slack bounds
};

// Bounded-variable revised dual simplex. The all-logical start basis is made
// dual feasible by resting each column on the bound matching its cost sign
// (negative-cost columns therefore need a finite upper bound), and bound
// changes re-snap nonbasic columns the same way, so one solver instance
// supports arbitrarily many warm re-solves under changing column bounds (the
// branch-and-bound access pattern). Basis factorization peels row/column singletons structurally and
// factors only the remaining kernel densely; iterations update the factor in
// product form. Every tie breaks toward the lowest variable id, and a
// stall-triggered Bland mode guards against cycling, so runs are
// deterministic.
class SimplexSolver {
 public:
  explicit SimplexSolver(LpProblem problem);
  ~SimplexSolver();
  SimplexSolver(const SimplexSolver&) = delete;
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  int num_rows() const;
  int num_cols() const;

  // Nonbasic columns snap to the nearest new bound; the basis is kept.
  void set_column_bounds(int j, double lo, double hi);
  double column_lower(int j) const;
  double column_upper(int j) const;

  // Re-solves from the current basis. `interrupt`, when given, is polled
  // every few hundred iterations; returning true aborts the solve.
  LpStatus solve(const std::function<bool()>& interrupt = {});

  // Valid after solve() returned optimal.
  double objective() const;
  double value(int j) const;          // structural value
  std::vector<double> solution() const;
  std::vector<double> row_duals() const;      // y with d = c - A^T y
  std::vector<double> reduced_costs() const;  // structural reduced costs

  int64_t iterations() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pmatch
