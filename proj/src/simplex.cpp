#include "pmatch/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "pmatch/errors.hpp"

namespace pmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorInterval = 100;
constexpr int kBlandTrigger = 4000;
constexpr int kKernelCap = 4096;

// Dense vector with touched-index bookkeeping so sparse passes never pay for
// a full clear.
struct WorkVec {
  std::vector<double> val;
  std::vector<uint8_t> mark;
  std::vector<int> touched;

  void init(int size) {
    val.assign(size, 0.0);
    mark.assign(size, 0);
    touched.clear();
  }
  void reset() {
    for (int i : touched) {
      val[i] = 0.0;
      mark[i] = 0;
    }
    touched.clear();
  }
  void touch(int i) {
    if (!mark[i]) {
      mark[i] = 1;
      touched.push_back(i);
    }
  }
  void add(int i, double v) {
    touch(i);
    val[i] += v;
  }
  void set(int i, double v) {
    touch(i);
    val[i] = v;
  }
};

// Dense LU with partial pivoting, LAPACK-style row swaps.
struct DenseLU {
  int n = 0;
  std::vector<double> a;  // row-major; unit-diagonal L below, U on and above
  std::vector<int> ipiv;

  void factor(std::vector<double> mat, int size) {
    n = size;
    a = std::move(mat);
    ipiv.assign(n, 0);
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(a[static_cast<size_t>(k) * n + k]);
      for (int i = k + 1; i < n; ++i) {
        double m = std::abs(a[static_cast<size_t>(i) * n + k]);
        if (m > best) {
          best = m;
          p = i;
        }
      }
      if (best < 1e-12) throw SolveError("basis kernel is numerically singular");
      ipiv[k] = p;
      if (p != k)
        for (int j = 0; j < n; ++j)
          std::swap(a[static_cast<size_t>(k) * n + j], a[static_cast<size_t>(p) * n + j]);
      double d = a[static_cast<size_t>(k) * n + k];
      for (int i = k + 1; i < n; ++i) {
        double f = a[static_cast<size_t>(i) * n + k] / d;
        a[static_cast<size_t>(i) * n + k] = f;
        if (f != 0.0)
          for (int j = k + 1; j < n; ++j)
            a[static_cast<size_t>(i) * n + j] -= f * a[static_cast<size_t>(k) * n + j];
      }
    }
  }

  void solve(double* x) const {  // A x = b, in place
    for (int k = 0; k < n; ++k)
      if (ipiv[k] != k) std::swap(x[k], x[ipiv[k]]);
    for (int i = 1; i < n; ++i) {
      double s = x[i];
      for (int j = 0; j < i; ++j) s -= a[static_cast<size_t>(i) * n + j] * x[j];
      x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j < n; ++j) s -= a[static_cast<size_t>(i) * n + j] * x[j];
      x[i] = s / a[static_cast<size_t>(i) * n + i];
    }
  }

  void solve_t(double* x) const {  // A^T x = b, in place (A = P^T L U)
    for (int i = 0; i < n; ++i) {
      double s = x[i];
      for (int j = 0; j < i; ++j) s -= a[static_cast<size_t>(j) * n + i] * x[j];
      x[i] = s / a[static_cast<size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x[i];
      for (int j = i + 1; j < n; ++j) s -= a[static_cast<size_t>(j) * n + i] * x[j];
      x[i] = s;
    }
    for (int k = n - 1; k >= 0; --k)
      if (ipiv[k] != k) std::swap(x[k], x[ipiv[k]]);
  }
};

struct PeelPivot {
  int row = -1;   // pivot row id
  int pos = -1;   // basis position (column of the basis matrix)
  double pivot = 0.0;
  std::vector<std::pair<int, double>> rest;  // remaining column entries (row, value)
};

struct Eta {  // basis column at `pos` replaced by w = B^{-1} a_entering
  int pos = -1;
  double pivot = 0.0;
  std::vector<std::pair<int, double>> rest;  // (position, value), pivot excluded
};

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::primal_infeasible: return "primal_infeasible";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::aborted: return "aborted";
  }
  return "unknown";
}

struct SimplexSolver::Impl {
  enum class VS : uint8_t { basic, at_lower, at_upper };

  LpProblem p;
  SparseMatrix cols;  // n x m: row j lists column j of the constraint matrix
  int m = 0, n = 0, total = 0;

  std::vector<VS> vstat;      // total
  std::vector<int> basis;     // m: variable at each position
  std::vector<int> pos_of;    // total: basis position or -1
  std::vector<double> x_basic;  // m
  std::vector<double> d;      // total: reduced costs

  // Factorization: structural singleton peel plus dense kernel, then a
  // product-form eta file for pivots since the last refactorization.
  std::vector<PeelPivot> fronts, backs;
  std::vector<int> kernel_rows, kernel_cols;
  std::vector<int> kernel_of_row;  // m, -1 outside kernel
  std::vector<std::vector<std::pair<int, double>>> kernel_spill;  // per kernel col
  DenseLU kernel_lu;
  bool factored = false;
  std::vector<Eta> etas;

  bool primal_dirty = true;
  bool duals_dirty = true;
  int64_t iters = 0;
  bool bland = false;
  int degen_streak = 0;

  WorkVec row_work, pos_work, pos_work2, alpha;
  std::vector<double> kwork;

  double vlower(int var) const { return var < n ? p.lower[var] : p.logical_lower[var - n]; }
  double vupper(int var) const { return var < n ? p.upper[var] : p.logical_upper[var - n]; }
  double vcost(int var) const { return var < n ? p.cost[var] : 0.0; }
  double nonbasic_value(int var) const {
    return vstat[var] == VS::at_upper ? vupper(var) : vlower(var);
  }

  template <typename F>
  void for_column(int var, F&& f) const {  // entries (row, value) of variable's column
    if (var < n) {
      for (int k = cols.row_ptr[var]; k < cols.row_ptr[var + 1]; ++k)
        f(cols.col_idx[k], cols.values[k]);
    } else {
      f(var - n, 1.0);
    }
  }

  void factorize();
  void factor_solve(WorkVec& in_rows, WorkVec& out_pos);
  void factor_solve_t(WorkVec& in_pos, WorkVec& out_rows);
  void ftran(WorkVec& in_rows, WorkVec& out_pos);
  void btran(WorkVec& in_pos, WorkVec& out_rows);
  void recompute_primal();
  void recompute_duals();
  LpStatus run(const std::function<bool()>& interrupt);
};

void SimplexSolver::Impl::factorize() {
  // Assemble basis columns and rows of the active matrix.
  std::vector<std::vector<std::pair<int, double>>> bcol(m);  // pos -> (row, val)
  std::vector<std::vector<std::pair<int, double>>> brow(m);  // row -> (pos, val)
  for (int pos = 0; pos < m; ++pos) {
    for_column(basis[pos], [&](int r, double v) {
      if (v == 0.0) return;
      bcol[pos].push_back({r, v});
      brow[r].push_back({pos, v});
    });
  }

  fronts.clear();
  backs.clear();
  kernel_rows.clear();
  kernel_cols.clear();
  kernel_spill.clear();
  etas.clear();

  std::vector<int> row_count(m), col_count(m);
  std::vector<uint8_t> row_active(m, 1), col_active(m, 1);
  for (int r = 0; r < m; ++r) row_count[r] = static_cast<int>(brow[r].size());
  for (int c = 0; c < m; ++c) col_count[c] = static_cast<int>(bcol[c].size());

  std::vector<int> row_q, col_q;
  for (int r = 0; r < m; ++r)
    if (row_count[r] == 1) row_q.push_back(r);
  for (int c = 0; c < m; ++c)
    if (col_count[c] == 1) col_q.push_back(c);

  size_t rq = 0, cq = 0;
  auto active_row_entry = [&](int c) -> std::pair<int, double> {
    for (auto& [r, v] : bcol[c])
      if (row_active[r]) return {r, v};
    return {-1, 0.0};
  };
  auto active_col_entry = [&](int r) -> std::pair<int, double> {
    for (auto& [c, v] : brow[r])
      if (col_active[c]) return {c, v};
    return {-1, 0.0};
  };

  while (true) {
    if (rq < row_q.size()) {
      int r = row_q[rq++];
      if (!row_active[r] || row_count[r] != 1) continue;
      auto [c, v] = active_col_entry(r);
      if (c < 0) throw SolveError("basis is structurally singular");
      if (std::abs(v) < 1e-12) throw SolveError("basis pivot vanished during factorization");
      PeelPivot piv;
      piv.row = r;
      piv.pos = c;
      piv.pivot = v;
      for (auto& [r2, v2] : bcol[c])
        if (r2 != r) piv.rest.push_back({r2, v2});
      fronts.push_back(std::move(piv));
      row_active[r] = 0;
      col_active[c] = 0;
      for (auto& [r2, v2] : bcol[c])
        if (row_active[r2] && --row_count[r2] == 1) row_q.push_back(r2);
      continue;
    }
    if (cq < col_q.size()) {
      int c = col_q[cq++];
      if (!col_active[c] || col_count[c] != 1) continue;
      auto [r, v] = active_row_entry(c);
      if (r < 0) throw SolveError("basis is structurally singular");
      if (std::abs(v) < 1e-12) throw SolveError("basis pivot vanished during factorization");
      PeelPivot piv;
      piv.row = r;
      piv.pos = c;
      piv.pivot = v;
      for (auto& [r2, v2] : bcol[c])
        if (r2 != r) piv.rest.push_back({r2, v2});
      backs.push_back(std::move(piv));
      row_active[r] = 0;
      col_active[c] = 0;
      for (auto& [c2, v2] : brow[r])
        if (col_active[c2] && --col_count[c2] == 1) col_q.push_back(c2);
      continue;
    }
    break;
  }

  kernel_of_row.assign(m, -1);
  for (int r = 0; r < m; ++r)
    if (row_active[r]) {
      kernel_of_row[r] = static_cast<int>(kernel_rows.size());
      kernel_rows.push_back(r);
    }
  for (int c = 0; c < m; ++c)
    if (col_active[c]) kernel_cols.push_back(c);
  int k = static_cast<int>(kernel_rows.size());
  if (k != static_cast<int>(kernel_cols.size()))
    throw SolveError("basis is structurally singular");
  if (k > kKernelCap)
    throw SolveError("basis kernel exceeds the supported size (" + std::to_string(k) + ")");

  std::vector<double> kmat(static_cast<size_t>(k) * k, 0.0);
  kernel_spill.resize(k);
  for (int kc = 0; kc < k; ++kc) {
    int c = kernel_cols[kc];
    for (auto& [r, v] : bcol[c]) {
      int kr = kernel_of_row[r];
      if (kr >= 0)
        kmat[static_cast<size_t>(kr) * k + kc] += v;
      else
        kernel_spill[kc].push_back({r, v});  // provably a back-pivot row
    }
  }
  kernel_lu.factor(std::move(kmat), k);
  kwork.assign(k, 0.0);
  factored = true;
}

void SimplexSolver::Impl::factor_solve(WorkVec& in_rows, WorkVec& out_pos) {
  out_pos.reset();
  for (const PeelPivot& f : fronts) {
    double xc = in_rows.val[f.row] / f.pivot;
    if (xc == 0.0) continue;
    out_pos.set(f.pos, xc);
    for (auto& [r, v] : f.rest) in_rows.add(r, -v * xc);
  }
  int k = static_cast<int>(kernel_rows.size());
  if (k > 0) {
    double* kw = kwork.data();
    for (int i = 0; i < k; ++i) kw[i] = in_rows.val[kernel_rows[i]];
    kernel_lu.solve(kw);
    for (int i = 0; i < k; ++i) {
      double xc = kw[i];
      if (xc == 0.0) continue;
      out_pos.set(kernel_cols[i], xc);
      for (auto& [r, v] : kernel_spill[i]) in_rows.add(r, -v * xc);
    }
  }
  for (auto it = backs.rbegin(); it != backs.rend(); ++it) {
    double xc = in_rows.val[it->row] / it->pivot;
    if (xc == 0.0) continue;
    out_pos.set(it->pos, xc);
    for (auto& [r, v] : it->rest) in_rows.add(r, -v * xc);
  }
}

void SimplexSolver::Impl::factor_solve_t(WorkVec& in_pos, WorkVec& out_rows) {
  out_rows.reset();
  for (const PeelPivot& b : backs) {
    double s = in_pos.val[b.pos];
    for (auto& [r, v] : b.rest) s -= v * out_rows.val[r];
    double xr = s / b.pivot;
    if (xr != 0.0) out_rows.set(b.row, xr);
  }
  int k = static_cast<int>(kernel_rows.size());
  if (k > 0) {
    double* kw = kwork.data();
    for (int i = 0; i < k; ++i) {
      double s = in_pos.val[kernel_cols[i]];
      for (auto& [r, v] : kernel_spill[i]) s -= v * out_rows.val[r];
      kw[i] = s;
    }
    kernel_lu.solve_t(kw);
    for (int i = 0; i < k; ++i)
      if (kw[i] != 0.0) out_rows.set(kernel_rows[i], kw[i]);
  }
  for (auto it = fronts.rbegin(); it != fronts.rend(); ++it) {
    double s = in_pos.val[it->pos];
    for (auto& [r, v] : it->rest) s -= v * out_rows.val[r];
    double xr = s / it->pivot;
    if (xr != 0.0) out_rows.set(it->row, xr);
  }
}

void SimplexSolver::Impl::ftran(WorkVec& in_rows, WorkVec& out_pos) {
  factor_solve(in_rows, out_pos);
  for (const Eta& e : etas) {
    double xp = out_pos.val[e.pos] / e.pivot;
    if (xp == 0.0 && out_pos.val[e.pos] == 0.0) continue;
    for (auto& [i, v] : e.rest) out_pos.add(i, -v * xp);
    out_pos.set(e.pos, xp);
  }
}

void SimplexSolver::Impl::btran(WorkVec& in_pos, WorkVec& out_rows) {
  for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
    double s = in_pos.val[it->pos];
    for (auto& [i, v] : it->rest) s -= v * in_pos.val[i];
    in_pos.set(it->pos, s / it->pivot);
  }
  factor_solve_t(in_pos, out_rows);
}

void SimplexSolver::Impl::recompute_primal() {
  row_work.reset();
  for (int i = 0; i < m; ++i)
    if (p.rhs[i] != 0.0) row_work.set(i, p.rhs[i]);
  for (int var = 0; var < total; ++var) {
    if (pos_of[var] >= 0) continue;
    double xv = nonbasic_value(var);
    if (xv == 0.0) continue;
    for_column(var, [&](int r, double v) { row_work.add(r, -v * xv); });
  }
  ftran(row_work, pos_work);
  for (int pos = 0; pos < m; ++pos) x_basic[pos] = pos_work.val[pos];
  row_work.reset();
  primal_dirty = false;
}

void SimplexSolver::Impl::recompute_duals() {
  pos_work.reset();
  for (int pos = 0; pos < m; ++pos) {
    double c = vcost(basis[pos]);
    if (c != 0.0) pos_work.set(pos, c);
  }
  btran(pos_work, row_work);  // row_work now holds y
  for (int j = 0; j < n; ++j) {
    double s = p.cost[j];
    for (int kk = cols.row_ptr[j]; kk < cols.row_ptr[j + 1]; ++kk)
      s -= row_work.val[cols.col_idx[kk]] * cols.values[kk];
    d[j] = s;
  }
  for (int i = 0; i < m; ++i) d[n + i] = -row_work.val[i];
  for (int pos = 0; pos < m; ++pos) d[basis[pos]] = 0.0;
  row_work.reset();
  pos_work.reset();
  duals_dirty = false;
}

LpStatus SimplexSolver::Impl::run(const std::function<bool()>& interrupt) {
  if (!factored) factorize();
  if (primal_dirty) recompute_primal();
  if (duals_dirty) recompute_duals();

  const int64_t iter_cap = 10'000'000 + 1000LL * m;
  int consistency_retries = 0;
  int64_t local_iters = 0;

  while (true) {
    if (interrupt && (local_iters & 255) == 255 && interrupt()) return LpStatus::aborted;
    if (local_iters++ > iter_cap) return LpStatus::iteration_limit;

    // Leaving variable: the worst primal bound violation, ties broken toward
    // the lowest variable id.  In Bland mode the magnitude is ignored and the
    // lowest violated variable id wins outright.
    int leave_pos = -1;
    bool below = false;
    double worst = kPrimalTol;
    for (int pos = 0; pos < m; ++pos) {
      int var = basis[pos];
      double lo = vlower(var), up = vupper(var), x = x_basic[pos];
      double viol = lo - x;
      bool now_below = true;
      if (x - up > viol) {
        viol = x - up;
        now_below = false;
      }
      if (viol <= kPrimalTol) continue;
      bool better;
      if (bland)
        better = leave_pos < 0 || var < basis[leave_pos];
      else
        better = viol > worst || (viol == worst && leave_pos >= 0 && var < basis[leave_pos]);
      if (better) {
        worst = bland ? kPrimalTol : viol;
        leave_pos = pos;
        below = now_below;
      }
    }
    if (leave_pos < 0) return LpStatus::optimal;

    // Pivot row: rho = B^{-T} e_leave, alpha_j = rho . a_j.
    pos_work2.reset();
    pos_work2.set(leave_pos, 1.0);
    btran(pos_work2, row_work);
    alpha.reset();
    for (int r : row_work.touched) {
      double rv = row_work.val[r];
      if (rv == 0.0) continue;
      for (int kk = p.rows.row_ptr[r]; kk < p.rows.row_ptr[r + 1]; ++kk)
        alpha.add(p.rows.col_idx[kk], rv * p.rows.values[kk]);
      alpha.add(n + r, rv);
    }
    row_work.reset();

    // Entering variable: dual ratio test.
    std::sort(alpha.touched.begin(), alpha.touched.end());
    double dir = below ? -1.0 : 1.0;
    int enter = -1;
    double best_ratio = kInf, best_mag = 0.0, enter_alpha = 0.0;
    for (int j : alpha.touched) {
      if (pos_of[j] >= 0) continue;
      double lo = vlower(j), up = vupper(j);
      if (lo == up) continue;
      double a = alpha.val[j];
      double da = dir * a;
      bool eligible = vstat[j] == VS::at_lower ? da > kPivotTol : da < -kPivotTol;
      if (!eligible) continue;
      double ratio = std::abs(d[j]) / std::abs(a);
      bool better;
      if (bland)
        better = ratio < best_ratio - 1e-12;  // first (lowest id) wins ties
      else
        better = ratio < best_ratio - 1e-12 ||
                 (ratio < best_ratio + 1e-12 && std::abs(a) > best_mag);
      if (better) {
        best_ratio = ratio;
        best_mag = std::abs(a);
        enter = j;
        enter_alpha = a;
      }
    }
    if (enter < 0) return LpStatus::primal_infeasible;

    // Entering column through the basis.
    row_work.reset();
    for_column(enter, [&](int r, double v) { row_work.add(r, v); });
    ftran(row_work, pos_work);
    row_work.reset();
    double wr = pos_work.val[leave_pos];
    if (std::abs(wr - enter_alpha) > 1e-7 * (1.0 + std::abs(enter_alpha)) ||
        std::abs(wr) <= kPivotTol) {
      if (++consistency_retries > 3)
        throw SolveError("simplex basis updates are numerically inconsistent");
      factorize();
      recompute_primal();
      recompute_duals();
      continue;
    }
    consistency_retries = 0;

    int leave_var = basis[leave_pos];
    double target = below ? vlower(leave_var) : vupper(leave_var);
    double tau = (x_basic[leave_pos] - target) / wr;
    double theta = d[enter] / enter_alpha;

    for (int pos : pos_work.touched) {
      if (pos == leave_pos) continue;
      double w = pos_work.val[pos];
      if (w != 0.0) x_basic[pos] -= tau * w;
    }
    double enter_from = nonbasic_value(enter);

    vstat[leave_var] = below ? VS::at_lower : VS::at_upper;
    pos_of[leave_var] = -1;
    basis[leave_pos] = enter;
    pos_of[enter] = leave_pos;
    vstat[enter] = VS::basic;
    x_basic[leave_pos] = enter_from + tau;

    for (int j : alpha.touched) {
      if (pos_of[j] >= 0) continue;
      d[j] -= theta * alpha.val[j];
    }
    d[enter] = 0.0;
    d[leave_var] = -theta;

    Eta eta;
    eta.pos = leave_pos;
    eta.pivot = wr;
    for (int pos : pos_work.touched) {
      double w = pos_work.val[pos];
      if (pos != leave_pos && w != 0.0) eta.rest.push_back({pos, w});
    }
    std::sort(eta.rest.begin(), eta.rest.end());
    etas.push_back(std::move(eta));
    pos_work.reset();
    alpha.reset();

    ++iters;
    if (std::abs(tau) <= 1e-12 && std::abs(theta) <= 1e-12) {
      if (++degen_streak >= kBlandTrigger) bland = true;
    } else {
      degen_streak = 0;
    }

    if (static_cast<int>(etas.size()) >= kRefactorInterval) {
      factorize();
      recompute_primal();
      recompute_duals();
    }
  }
}

SimplexSolver::SimplexSolver(LpProblem problem) : impl_(new Impl) {
  Impl& s = *impl_;
  s.p = std::move(problem);
  s.m = s.p.rows.rows;
  s.n = s.p.rows.cols;
  s.total = s.n + s.m;
  if (static_cast<int>(s.p.cost.size()) != s.n || static_cast<int>(s.p.rhs.size()) != s.m ||
      static_cast<int>(s.p.lower.size()) != s.n || static_cast<int>(s.p.upper.size()) != s.n ||
      static_cast<int>(s.p.logical_lower.size()) != s.m ||
      static_cast<int>(s.p.logical_upper.size()) != s.m)
    throw SolveError("linear program arrays have inconsistent sizes");
  for (int j = 0; j < s.n; ++j)
    if (s.p.lower[j] > s.p.upper[j]) throw SolveError("column has crossing bounds");

  s.cols = s.p.rows.transposed();
  s.vstat.assign(s.total, Impl::VS::at_lower);
  s.basis.resize(s.m);
  s.pos_of.assign(s.total, -1);
  s.x_basic.assign(s.m, 0.0);
  s.d.assign(s.total, 0.0);
  for (int i = 0; i < s.m; ++i) {
    s.basis[i] = s.n + i;
    s.pos_of[s.n + i] = i;
    s.vstat[s.n + i] = Impl::VS::basic;
  }
  for (int j = 0; j < s.n; ++j) {
    s.d[j] = s.p.cost[j];
    if (s.p.cost[j] < 0.0 && s.p.lower[j] != s.p.upper[j]) {
      if (s.p.upper[j] == kInf)
        throw SolveError("negative cost on a column without upper bound");
      s.vstat[j] = Impl::VS::at_upper;  // keep the start basis dual feasible
    }
  }

  s.row_work.init(s.m);
  s.pos_work.init(s.m);
  s.pos_work2.init(s.m);
  s.alpha.init(s.total);
}

SimplexSolver::~SimplexSolver() = default;

int SimplexSolver::num_rows() const { return impl_->m; }
int SimplexSolver::num_cols() const { return impl_->n; }

void SimplexSolver::set_column_bounds(int j, double lo, double hi) {
  Impl& s = *impl_;
  if (j < 0 || j >= s.n) throw SolveError("column index out of range");
  if (lo > hi) throw SolveError("column bounds cross");
  s.p.lower[j] = lo;
  s.p.upper[j] = hi;
  if (s.pos_of[j] < 0) {
    // Re-snap to a side that keeps the basis dual feasible for the reduced
    // cost this column currently carries.
    if (lo == hi || s.d[j] > 0.0) {
      s.vstat[j] = Impl::VS::at_lower;
    } else if (s.d[j] < 0.0) {
      if (hi == kInf)
        throw SolveError("negative reduced cost on a column without upper bound");
      s.vstat[j] = Impl::VS::at_upper;
    } else if (s.vstat[j] == Impl::VS::at_upper && hi == kInf) {
      s.vstat[j] = Impl::VS::at_lower;
    }
    s.primal_dirty = true;
  }
}

double SimplexSolver::column_lower(int j) const { return impl_->p.lower[j]; }
double SimplexSolver::column_upper(int j) const { return impl_->p.upper[j]; }

LpStatus SimplexSolver::solve(const std::function<bool()>& interrupt) {
  return impl_->run(interrupt);
}

double SimplexSolver::value(int j) const {
  const Impl& s = *impl_;
  return s.pos_of[j] >= 0 ? s.x_basic[s.pos_of[j]] : s.nonbasic_value(j);
}

double SimplexSolver::objective() const {
  const Impl& s = *impl_;
  double obj = 0.0;
  for (int j = 0; j < s.n; ++j)
    if (s.p.cost[j] != 0.0) obj += s.p.cost[j] * value(j);
  return obj;
}

std::vector<double> SimplexSolver::solution() const {
  std::vector<double> x(impl_->n);
  for (int j = 0; j < impl_->n; ++j) x[j] = value(j);
  return x;
}

std::vector<double> SimplexSolver::row_duals() const {
  Impl& s = *impl_;
  s.pos_work.reset();
  for (int pos = 0; pos < s.m; ++pos) {
    double c = s.vcost(s.basis[pos]);
    if (c != 0.0) s.pos_work.set(pos, c);
  }
  s.btran(s.pos_work, s.row_work);
  std::vector<double> y(s.m);
  for (int i = 0; i < s.m; ++i) y[i] = s.row_work.val[i];
  s.row_work.reset();
  s.pos_work.reset();
  return y;
}

std::vector<double> SimplexSolver::reduced_costs() const {
  Impl& s = *impl_;
  std::vector<double> y = row_duals();
  std::vector<double> rc(s.n);
  for (int j = 0; j < s.n; ++j) {
    double v = s.p.cost[j];
    for (int kk = s.cols.row_ptr[j]; kk < s.cols.row_ptr[j + 1]; ++kk)
      v -= y[s.cols.col_idx[kk]] * s.cols.values[kk];
    rc[j] = v;
  }
  return rc;
}

int64_t SimplexSolver::iterations() const { return impl_->iters; }

}  // namespace pmatch
