#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pmatch/features.hpp"
#include "pmatch/product_space.hpp"
#include "pmatch/sparse.hpp"

namespace pmatch {

enum class IlpStatus { optimal, infeasible, timeout_with_incumbent, timeout_no_incumbent };

const char* to_string(IlpStatus status);
IlpStatus ilp_status_from_string(const std::string& name);

// One matching problem: minimize costs . x over binary x subject to the
// cycle-consistency and coverage constraints of `system`.
struct IlpInstance {
  CostVector costs;
  ConstraintSystem system;
  int variable_count = 0;
  double time_budget_seconds = 7200.0;
  std::optional<MatchingIndicator> warm_start;
  bool masked = false;  // built from a pruned candidate set (affects notes)
};

IlpInstance make_instance(const ProductSpace& space, CostVector costs,
                          double time_budget_seconds = 7200.0);

struct SolveResult {
  IlpStatus status = IlpStatus::timeout_no_incumbent;
  std::optional<MatchingIndicator> incumbent;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  int64_t nodes = 0;
  int64_t lp_iterations = 0;
  double wall_seconds = 0.0;
  std::string note;
};

// Branch-and-bound on LP relaxations, solved to global optimality unless the
// wall-clock budget runs out first. Deterministic: best-bound node order with
// depth-first plunging until the first incumbent, all ties by node id.
// Returned incumbents always pass check_feasible exactly over integers.
SolveResult solve_ilp(const IlpInstance& instance);

// ---- Relaxation oracle (exposed for tests and diagnostics) ----

struct Fixing {
  int variable = -1;
  int value = 0;  // 0 or 1
};

enum class RelaxStatus { optimal, infeasible };

struct RelaxResult {
  RelaxStatus status = RelaxStatus::infeasible;
  double bound = std::numeric_limits<double>::infinity();
  std::vector<double> solution;  // empty when infeasible
};

// Optimum of the continuous relaxation 0 <= x <= 1 under the given fixings;
// a valid lower bound for every binary completion. Throws InputError on an
// inconsistent fixing list (same variable fixed both ways) or ids out of
// range.
RelaxResult lp_relax(const IlpInstance& instance, const std::vector<Fixing>& fixed = {});

// Most-fractional variable (|x - 0.5| minimal), ties by larger cost, then by
// lowest id. Throws InputError when every coordinate is within `tol` of an
// integer.
int branch_select(const std::vector<double>& solution, const CostVector& costs,
                  double tol = 1e-6);

// ---- Solution decoding ----

struct CorrespondenceRecord {
  int x_element = -1;  // vertex / directed-edge / face id, per tag
  ElementTag x_tag = ElementTag::triangle;
  int y_element = -1;
  ElementTag y_tag = ElementTag::triangle;
  int rotation = 0;
  int variable = -1;
};

// One record per selected product variable, ascending variable id. Throws
// SolveError when the result carries no incumbent.
std::vector<CorrespondenceRecord> extract_matching(const SolveResult& result,
                                                   const ProductSpace& space);

// Extended-triangle id of one record side; validates the element range.
int extended_triangle_id(const ExtendedElements& ext, int element, ElementTag tag);

// Inverse of extract_matching: the 0/1 selection whose set bits are the
// records' variables in `space`. Throws InputError when a record names a
// pairing the space does not contain (for example one pruned by its
// candidate mask) or appears twice.
MatchingIndicator selection_from_records(const std::vector<CorrespondenceRecord>& records,
                                         const ProductSpace& space);

// Fills each record's variable id with its position in `space`. Variable ids
// are instance-specific and never serialized, so loaded records carry -1
// until assigned. Throws InputError when a record names a pairing the space
// does not contain.
void assign_variables(std::vector<CorrespondenceRecord>& records, const ProductSpace& space);

// ---- External exact-solver adapter ----

// Row-bounded sparse model: row_lower[r] <= (A x)_r <= row_upper[r], binary
// columns, minimize objective.
struct BackendModel {
  int num_variables = 0;
  std::vector<Triplet> triplets;
  std::vector<double> row_lower, row_upper;
  CostVector objective;
  double time_budget_seconds = 7200.0;
};

struct BackendResult {
  IlpStatus status = IlpStatus::timeout_no_incumbent;
  std::vector<double> solution;
  double lower_bound = -std::numeric_limits<double>::infinity();
};

class IlpBackend {
 public:
  virtual ~IlpBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendResult solve(const BackendModel& model) = 0;
};

// Routes the instance through `backend`; claimed incumbents are re-verified
// exactly (check_feasible) and rejected with a note when they fail.
SolveResult solve_with_backend(const IlpInstance& instance, IlpBackend& backend);

// Writes the instance as a free-format MPS file (minimization, binary
// columns) so third-party exact solvers can cross-check optima.
void export_ilp(const std::string& path, const IlpInstance& instance);

}  // namespace pmatch
