#include "pmatch/ilp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pmatch/errors.hpp"
#include "pmatch/simplex.hpp"

namespace pmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntegralityTol = 1e-6;

// Row kinds of the assembled relaxation.
enum class RowKind : char { cycle = 'C', cover_x = 'X', cover_y = 'Y' };

// The constraint system with redundant cycle rows removed: every interior
// product edge and its reverse carry negated copies of the same row, and
// pruning can empty rows entirely. Rows are sign-normalized (first nonzero
// positive) and deduplicated; empty <=/== 0 rows are dropped. An empty
// exactly-one row is recorded instead of kept — it makes the whole program
// infeasible.
struct AssembledRows {
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  std::vector<double> slack_lo, slack_hi;
  std::vector<RowKind> kind;
  int num_rows = 0;
  int empty_cover_y_row = -1;  // proper Y triangle with no candidates, or -1

  void push_row(const std::vector<std::pair<int, double>>& entries, double r, double lo,
                double hi, RowKind k) {
    for (const auto& [c, v] : entries) triplets.push_back(Triplet{num_rows, c, v});
    rhs.push_back(r);
    slack_lo.push_back(lo);
    slack_hi.push_back(hi);
    kind.push_back(k);
    ++num_rows;
  }
};

uint64_t hash_row(const std::vector<std::pair<int, double>>& entries) {
  uint64_t h = 0x9e3779b97f4a7c15ull;
  for (const auto& [c, v] : entries) {
    uint64_t bits;
    static_assert(sizeof(double) == sizeof(uint64_t));
    std::memcpy(&bits, &v, sizeof bits);
    h ^= (static_cast<uint64_t>(static_cast<uint32_t>(c)) * 0x2545f4914f6cdd1dull) ^ bits;
    h *= 0x100000001b3ull;
  }
  return h;
}

AssembledRows assemble_rows(const IlpInstance& instance) {
  const ConstraintSystem& sys = instance.system;
  AssembledRows out;

  // Cycle-consistency rows: normalize sign, drop empties, deduplicate.
  std::unordered_map<uint64_t, std::vector<int>> seen;  // hash -> first-row index
  std::vector<std::vector<std::pair<int, double>>> kept;
  std::vector<std::pair<int, double>> row;
  for (int r = 0; r < sys.boundary.rows; ++r) {
    row.clear();
    sys.boundary.for_row(r, [&](int c, double v) {
      if (v != 0.0) row.push_back({c, v});
    });
    if (row.empty()) continue;
    if (row.front().second < 0.0)
      for (auto& [c, v] : row) v = -v;
    uint64_t h = hash_row(row);
    auto& bucket = seen[h];
    bool dup = false;
    for (int idx : bucket)
      if (kept[idx] == row) {
        dup = true;
        break;
      }
    if (dup) continue;
    bucket.push_back(static_cast<int>(kept.size()));
    kept.push_back(row);
    out.push_row(row, 0.0, 0.0, 0.0, RowKind::cycle);
  }

  for (int r = 0; r < sys.proj_x.rows; ++r) {
    row.clear();
    sys.proj_x.for_row(r, [&](int c, double v) {
      if (v != 0.0) row.push_back({c, v});
    });
    if (row.empty()) continue;  // uncovered X triangle: <= 1 holds trivially
    out.push_row(row, 1.0, 0.0, kInf, RowKind::cover_x);
  }

  for (int r = 0; r < sys.proj_y.rows; ++r) {
    row.clear();
    sys.proj_y.for_row(r, [&](int c, double v) {
      if (v != 0.0) row.push_back({c, v});
    });
    if (row.empty()) {
      if (out.empty_cover_y_row < 0) out.empty_cover_y_row = r;
      continue;
    }
    out.push_row(row, 1.0, 0.0, 0.0, RowKind::cover_y);
  }
  return out;
}

void validate_instance(const IlpInstance& instance) {
  int n = instance.variable_count;
  if (static_cast<int>(instance.costs.size()) != n)
    throw InputError("cost vector length does not match the variable count");
  if (instance.system.boundary.cols != n || instance.system.proj_x.cols != n ||
      instance.system.proj_y.cols != n)
    throw InputError("constraint system width does not match the variable count");
  for (double c : instance.costs)
    if (!std::isfinite(c)) throw InputError("costs must be finite");
  if (instance.warm_start &&
      static_cast<int>(instance.warm_start->size()) != n)
    throw InputError("warm start length does not match the variable count");
}

LpProblem build_relaxation(const IlpInstance& instance, const AssembledRows& rows) {
  LpProblem lp;
  lp.rows = SparseMatrix::from_triplets(rows.num_rows, instance.variable_count,
                                        rows.triplets);
  lp.cost = instance.costs;
  lp.rhs = rows.rhs;
  lp.lower.assign(instance.variable_count, 0.0);
  lp.upper.assign(instance.variable_count, 1.0);
  lp.logical_lower = rows.slack_lo;
  lp.logical_upper = rows.slack_hi;
  return lp;
}

double exact_objective(const CostVector& costs, const MatchingIndicator& x) {
  double obj = 0.0;
  for (size_t j = 0; j < x.size(); ++j)
    if (x[j]) obj += costs[j];
  return obj;
}

bool is_integral(const std::vector<double>& x) {
  for (double v : x)
    if (std::abs(v - std::round(v)) > kIntegralityTol) return false;
  return true;
}

MatchingIndicator round_solution(const std::vector<double>& x) {
  MatchingIndicator m(x.size(), 0);
  for (size_t j = 0; j < x.size(); ++j) m[j] = std::round(x[j]) >= 1.0 ? 1 : 0;
  return m;
}

std::string masked_hint(const IlpInstance& instance) {
  return instance.masked
             ? " (instance was built from a pruned candidate set; the mask may "
               "over-prune — widen the neighborhood)"
             : "";
}

struct Node {
  double bound = -kInf;
  int64_t id = 0;
  std::vector<Fixing> path;
};

struct NodeOrder {  // priority_queue: top() = smallest bound, then smallest id
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

// Moves the solver's column bounds from `applied` to `target` touching only
// the differing suffix.
void apply_fixings(SimplexSolver& solver, std::vector<Fixing>& applied,
                   const std::vector<Fixing>& target) {
  size_t common = 0;
  while (common < applied.size() && common < target.size() &&
         applied[common].variable == target[common].variable &&
         applied[common].value == target[common].value)
    ++common;
  for (size_t i = applied.size(); i > common; --i)
    solver.set_column_bounds(applied[i - 1].variable, 0.0, 1.0);
  applied.resize(common);
  for (size_t i = common; i < target.size(); ++i) {
    double v = target[i].value ? 1.0 : 0.0;
    solver.set_column_bounds(target[i].variable, v, v);
    applied.push_back(target[i]);
  }
}

}  // namespace

const char* to_string(IlpStatus status) {
  switch (status) {
    case IlpStatus::optimal: return "optimal";
    case IlpStatus::infeasible: return "infeasible";
    case IlpStatus::timeout_with_incumbent: return "timeout_with_incumbent";
    case IlpStatus::timeout_no_incumbent: return "timeout_no_incumbent";
  }
  return "unknown";
}

IlpStatus ilp_status_from_string(const std::string& name) {
  for (IlpStatus status : {IlpStatus::optimal, IlpStatus::infeasible,
                           IlpStatus::timeout_with_incumbent, IlpStatus::timeout_no_incumbent}) {
    if (name == to_string(status)) return status;
  }
  throw InputError("'" + name + "' is not a solve status");
}

IlpInstance make_instance(const ProductSpace& space, CostVector costs,
                          double time_budget_seconds) {
  IlpInstance inst;
  inst.variable_count = space.num_variables();
  if (static_cast<int>(costs.size()) != inst.variable_count)
    throw InputError("cost vector length does not match the product space");
  inst.costs = std::move(costs);
  inst.system = build_constraints(space);
  inst.time_budget_seconds = time_budget_seconds;
  inst.masked = space.masked();
  return inst;
}

RelaxResult lp_relax(const IlpInstance& instance, const std::vector<Fixing>& fixed) {
  validate_instance(instance);
  std::vector<int> state(instance.variable_count, -1);
  for (const Fixing& f : fixed) {
    if (f.variable < 0 || f.variable >= instance.variable_count)
      throw InputError("fixing references a variable out of range");
    if (f.value != 0 && f.value != 1) throw InputError("fixing value must be 0 or 1");
    if (state[f.variable] >= 0 && state[f.variable] != f.value)
      throw InputError("variable fixed to both 0 and 1");
    state[f.variable] = f.value;
  }

  AssembledRows rows = assemble_rows(instance);
  RelaxResult out;
  if (rows.empty_cover_y_row >= 0) return out;  // infeasible before solving

  SimplexSolver solver(build_relaxation(instance, rows));
  for (int j = 0; j < instance.variable_count; ++j)
    if (state[j] >= 0) solver.set_column_bounds(j, state[j], state[j]);
  LpStatus st = solver.solve();
  if (st == LpStatus::primal_infeasible) return out;
  if (st != LpStatus::optimal) throw SolveError("relaxation did not converge");
  out.status = RelaxStatus::optimal;
  out.bound = solver.objective();
  out.solution = solver.solution();
  return out;
}

int branch_select(const std::vector<double>& solution, const CostVector& costs,
                  double tol) {
  if (solution.size() != costs.size())
    throw InputError("solution and cost lengths differ");
  int best = -1;
  double best_dist = kInf, best_cost = -kInf;
  for (size_t j = 0; j < solution.size(); ++j) {
    double frac = solution[j] - std::round(solution[j]);
    if (std::abs(frac) <= tol) continue;
    double dist = std::abs(solution[j] - 0.5);
    if (dist < best_dist || (dist == best_dist && costs[j] > best_cost)) {
      best = static_cast<int>(j);
      best_dist = dist;
      best_cost = costs[j];
    }
  }
  if (best < 0) throw InputError("branch selection requires a fractional coordinate");
  return best;
}

SolveResult solve_ilp(const IlpInstance& instance) {
  validate_instance(instance);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  SolveResult result;

  // Warm start: accepted only with an exact feasibility certificate.
  bool have_inc = false;
  double inc_obj = kInf;
  if (instance.warm_start) {
    std::string why;
    if (check_feasible(instance.system, *instance.warm_start, &why)) {
      result.incumbent = *instance.warm_start;
      inc_obj = exact_objective(instance.costs, *instance.warm_start);
      have_inc = true;
    } else {
      result.note = "warm start rejected: " + why + ". ";
    }
  }

  AssembledRows rows = assemble_rows(instance);
  if (rows.empty_cover_y_row >= 0) {
    result.status = IlpStatus::infeasible;
    result.lower_bound = kInf;
    result.note += "partial-shape triangle " + std::to_string(rows.empty_cover_y_row) +
                   " has no candidate pairings" + masked_hint(instance);
    result.wall_seconds = elapsed();
    return result;
  }

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(
                                        std::max(0.0, instance.time_budget_seconds)));
  auto out_of_time = [&]() { return Clock::now() >= deadline; };

  auto finish_timeout = [&](double open_min_bound) {
    result.status = have_inc ? IlpStatus::timeout_with_incumbent
                             : IlpStatus::timeout_no_incumbent;
    if (have_inc) {
      result.objective = inc_obj;
      result.lower_bound = std::min(open_min_bound, inc_obj);
    } else {
      result.lower_bound = open_min_bound;
    }
    result.note += "time budget exhausted after " + std::to_string(result.nodes) +
                   " nodes";
    result.wall_seconds = elapsed();
    return result;
  };

  if (instance.time_budget_seconds <= 0.0 || out_of_time())
    return finish_timeout(-kInf);

  SimplexSolver solver(build_relaxation(instance, rows));
  std::vector<Fixing> applied;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  int64_t next_id = 0;
  std::optional<Node> current = Node{-kInf, next_id++, {}};

  auto cutoff = [&]() { return inc_obj - 1e-9 * std::max(1.0, std::abs(inc_obj)); };
  auto open_min_bound = [&](const std::optional<Node>& cur) {
    double b = cur ? cur->bound : kInf;
    if (!open.empty()) b = std::min(b, open.top().bound);
    return b;
  };

  while (true) {
    if (!current) {
      if (open.empty()) break;
      if (have_inc && open.top().bound >= cutoff()) break;  // best bound already pruned
      current = open.top();
      open.pop();
      continue;
    }
    if (out_of_time()) return finish_timeout(open_min_bound(current));
    if (have_inc && current->bound >= cutoff()) {
      current.reset();
      continue;
    }

    Node node = std::move(*current);
    current.reset();
    apply_fixings(solver, applied, node.path);
    LpStatus st = solver.solve(out_of_time);
    ++result.nodes;
    result.lp_iterations = solver.iterations();
    if (st == LpStatus::aborted) return finish_timeout(open_min_bound(Node{node}));
    if (st == LpStatus::iteration_limit)
      throw SolveError("relaxation hit its iteration cap");
    if (st == LpStatus::primal_infeasible) {
      if (node.path.empty() && have_inc)
        throw SolveError("inconsistent state: feasible warm start but infeasible root");
      continue;
    }

    double bound = std::max(node.bound, solver.objective());
    if (have_inc && bound >= cutoff()) continue;
    std::vector<double> x = solver.solution();

    int branch_var = -1;
    if (is_integral(x)) {
      MatchingIndicator candidate = round_solution(x);
      if (check_feasible(instance.system, candidate)) {
        double obj = exact_objective(instance.costs, candidate);
        if (!have_inc || obj < inc_obj) {
          inc_obj = obj;
          result.incumbent = std::move(candidate);
          have_inc = true;
        }
        continue;  // integral relaxation optimum closes the subtree
      }
      // The rounded point failed the exact check (tolerance artifact): fall
      // back to branching on the first unfixed variable.
      std::vector<uint8_t> fixed_mask(instance.variable_count, 0);
      for (const Fixing& f : node.path) fixed_mask[f.variable] = 1;
      for (int j = 0; j < instance.variable_count && branch_var < 0; ++j)
        if (!fixed_mask[j]) branch_var = j;
      if (branch_var < 0)
        throw SolveError(
            "relaxation looks integral but fails the exact feasibility check "
            "on a fully fixed node");
    } else {
      branch_var = branch_select(x, instance.costs);
    }

    int plunge_value = x[branch_var] >= 0.5 ? 1 : 0;
    Node near, far;
    near.bound = far.bound = bound;
    near.path = node.path;
    near.path.push_back({branch_var, plunge_value});
    far.path = node.path;
    far.path.push_back({branch_var, 1 - plunge_value});
    near.id = next_id++;
    far.id = next_id++;
    if (!have_inc) {
      current = std::move(near);  // depth-first plunge until a first incumbent
      open.push(std::move(far));
    } else {
      open.push(std::move(near));
      open.push(std::move(far));
    }
  }

  result.lp_iterations = solver.iterations();
  result.wall_seconds = elapsed();
  if (have_inc) {
    result.status = IlpStatus::optimal;
    result.objective = inc_obj;
    result.lower_bound = inc_obj;
  } else {
    result.status = IlpStatus::infeasible;
    result.lower_bound = kInf;
    result.note += "search exhausted without an integer solution" + masked_hint(instance);
  }
  return result;
}

std::vector<CorrespondenceRecord> extract_matching(const SolveResult& result,
                                                   const ProductSpace& space) {
  if (!result.incumbent) throw SolveError("result carries no incumbent to extract");
  const MatchingIndicator& x = *result.incumbent;
  if (static_cast<int>(x.size()) != space.num_variables())
    throw InputError("incumbent length does not match the product space");
  std::vector<CorrespondenceRecord> records;
  for (int v = 0; v < space.num_variables(); ++v) {
    if (!x[v]) continue;
    const ProductVariable& pv = space.variable(v);
    CorrespondenceRecord rec;
    rec.x_element = space.ext_x().triangle_local(pv.x_tri);
    rec.x_tag = space.ext_x().triangle_tag(pv.x_tri);
    rec.y_element = space.ext_y().triangle_local(pv.y_tri);
    rec.y_tag = space.ext_y().triangle_tag(pv.y_tri);
    rec.rotation = pv.rotation;
    rec.variable = v;
    records.push_back(rec);
  }
  return records;
}

int extended_triangle_id(const ExtendedElements& ext, int element, ElementTag tag) {
  const Mesh& mesh = ext.mesh();
  switch (tag) {
    case ElementTag::vertex:
      if (element < 0 || element >= mesh.num_vertices())
        throw InputError("record vertex id " + std::to_string(element) + " is out of range");
      return ext.triangle_of_vertex(element);
    case ElementTag::edge:
      if (element < 0 || element >= mesh.num_directed_edges())
        throw InputError("record edge id " + std::to_string(element) + " is out of range");
      return ext.triangle_of_directed_edge(element);
    case ElementTag::triangle:
      if (element < 0 || element >= mesh.num_triangles())
        throw InputError("record triangle id " + std::to_string(element) + " is out of range");
      return ext.triangle_of_face(element);
  }
  throw InputError("record carries an unknown element tag");
}

namespace {

int record_variable(const ProductSpace& space, const CorrespondenceRecord& rec) {
  const int x_tri = extended_triangle_id(space.ext_x(), rec.x_element, rec.x_tag);
  const int y_tri = extended_triangle_id(space.ext_y(), rec.y_element, rec.y_tag);
  if (rec.rotation < 0 || rec.rotation > 2)
    throw InputError("record pairing index must be 0, 1, or 2");
  const int v = space.find_variable(x_tri, y_tri, rec.rotation);
  if (v < 0) {
    throw InputError("record pairs " + std::string(to_string(rec.x_tag)) + " " +
                     std::to_string(rec.x_element) + " with " + to_string(rec.y_tag) +
                     " " + std::to_string(rec.y_element) + " (pairing " +
                     std::to_string(rec.rotation) +
                     "), which this product space does not contain");
  }
  return v;
}

}  // namespace

void assign_variables(std::vector<CorrespondenceRecord>& records, const ProductSpace& space) {
  for (CorrespondenceRecord& rec : records) rec.variable = record_variable(space, rec);
}

MatchingIndicator selection_from_records(const std::vector<CorrespondenceRecord>& records,
                                         const ProductSpace& space) {
  MatchingIndicator selection(static_cast<size_t>(space.num_variables()), 0);
  for (const CorrespondenceRecord& rec : records) {
    const int v = record_variable(space, rec);
    if (selection[v]) throw InputError("record list names one pairing twice");
    selection[v] = 1;
  }
  return selection;
}

SolveResult solve_with_backend(const IlpInstance& instance, IlpBackend& backend) {
  validate_instance(instance);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  SolveResult result;
  AssembledRows rows = assemble_rows(instance);
  if (rows.empty_cover_y_row >= 0) {
    result.status = IlpStatus::infeasible;
    result.lower_bound = kInf;
    result.note = "partial-shape triangle " + std::to_string(rows.empty_cover_y_row) +
                  " has no candidate pairings" + masked_hint(instance);
    return result;
  }

  BackendModel model;
  model.num_variables = instance.variable_count;
  model.triplets = rows.triplets;
  model.objective = instance.costs;
  model.time_budget_seconds = instance.time_budget_seconds;
  model.row_lower.resize(rows.num_rows);
  model.row_upper.resize(rows.num_rows);
  for (int r = 0; r < rows.num_rows; ++r) {
    // Row activity = rhs - slack; slack in [lo, hi].
    model.row_lower[r] = rows.slack_hi[r] == kInf ? -kInf : rows.rhs[r] - rows.slack_hi[r];
    model.row_upper[r] = rows.rhs[r] - rows.slack_lo[r];
  }

  BackendResult br = backend.solve(model);
  result.status = br.status;
  result.lower_bound = br.lower_bound;
  result.note = "backend: " + backend.name();
  if (br.status == IlpStatus::optimal || br.status == IlpStatus::timeout_with_incumbent) {
    if (static_cast<int>(br.solution.size()) != instance.variable_count)
      throw SolveError("backend returned a solution of the wrong length");
    MatchingIndicator candidate = round_solution(br.solution);
    std::string why;
    if (check_feasible(instance.system, candidate, &why)) {
      result.incumbent = std::move(candidate);
      result.objective = exact_objective(instance.costs, *result.incumbent);
      if (br.status == IlpStatus::optimal) result.lower_bound = result.objective;
    } else {
      result.status = IlpStatus::timeout_no_incumbent;
      result.note += "; backend solution failed exact verification: " + why;
    }
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

void export_ilp(const std::string& path, const IlpInstance& instance) {
  validate_instance(instance);
  AssembledRows rows = assemble_rows(instance);

  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  char buf[64];
  auto num = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
  };
  auto rowname = [&](int r) {
    return std::string(1, static_cast<char>(rows.kind[r])) + std::to_string(r);
  };

  out << "NAME MATCHING_ILP\n";
  out << "ROWS\n N OBJ\n";
  for (int r = 0; r < rows.num_rows; ++r) {
    // Equality when the slack is pinned to zero, <= otherwise.
    char sense = rows.slack_hi[r] == 0.0 ? 'E' : 'L';
    out << ' ' << sense << ' ' << rowname(r) << '\n';
  }

  // Column-major coefficient listing with binary markers.
  std::vector<std::vector<std::pair<int, double>>> by_col(instance.variable_count);
  for (const Triplet& t : rows.triplets) by_col[t.col].push_back({t.row, t.value});
  out << "COLUMNS\n";
  out << " M1 'MARKER' 'INTORG'\n";
  for (int j = 0; j < instance.variable_count; ++j) {
    std::string col = "V" + std::to_string(j);
    out << ' ' << col << " OBJ " << num(instance.costs[j]) << '\n';
    for (const auto& [r, v] : by_col[j])
      out << ' ' << col << ' ' << rowname(r) << ' ' << num(v) << '\n';
  }
  out << " M2 'MARKER' 'INTEND'\n";

  out << "RHS\n";
  for (int r = 0; r < rows.num_rows; ++r)
    if (rows.rhs[r] != 0.0) out << " RHS " << rowname(r) << ' ' << num(rows.rhs[r]) << '\n';

  out << "BOUNDS\n";
  for (int j = 0; j < instance.variable_count; ++j)
    out << " BV BND V" << std::to_string(j) << '\n';
  out << "ENDATA\n";
  if (!out.good()) throw InputError("failed while writing '" + path + "'");
}

}  // namespace pmatch
