#include "pmatch/ilp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pmatch/coarse_to_fine.hpp"
#include "pmatch/errors.hpp"
#include "test_support.hpp"

using namespace pmatch;
using namespace pmatch::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Owns the meshes a ProductSpace refers to.
struct SpaceFixture {
  Mesh x, y;
  std::optional<ProductSpace> space;

  SpaceFixture(Mesh xm, Mesh ym, const CandidateMask* mask = nullptr)
      : x(std::move(xm)), y(std::move(ym)) {
    space.emplace(ExtendedElements(x), ExtendedElements(y), mask);
  }
};

CostVector uniform_costs(int n) { return CostVector(n, 1.0); }

CostVector random_costs(int n, Rng& rng) {
  CostVector c(n);
  for (int j = 0; j < n; ++j) c[j] = rng.uniform(0.05, 1.0);
  return c;
}

// Exhaustive search over binary assignments with interval and cost pruning.
// Independent of the branch-and-bound solver: raw rows, no canonicalization,
// no LP. Sound on every instance small enough to finish under the node cap.
struct EnumerationOracle {
  struct Row {
    double lo = 0.0, hi = 0.0;
    std::vector<std::pair<int, double>> entries;
  };

  int n = 0;
  std::vector<Row> rows;
  std::vector<std::vector<std::pair<int, double>>> var_rows;
  const CostVector* costs = nullptr;
  const ConstraintSystem* system = nullptr;

  std::vector<double> act, lo_rest, hi_rest;
  MatchingIndicator cur;
  MatchingIndicator best;
  double best_obj = kInf;
  bool found = false;
  int64_t nodes = 0;
  int64_t node_cap = 0;
  bool bailed = false;

  EnumerationOracle(const IlpInstance& inst, int64_t cap = 50'000'000)
      : n(inst.variable_count), costs(&inst.costs), system(&inst.system), node_cap(cap) {
    auto add_matrix = [&](const SparseMatrix& m, double lo, double hi) {
      for (int r = 0; r < m.rows; ++r) {
        Row row;
        row.lo = lo;
        row.hi = hi;
        m.for_row(r, [&](int c, double v) {
          if (v != 0.0) row.entries.push_back({c, v});
        });
        if (!row.entries.empty() || lo > 0.0) rows.push_back(std::move(row));
      }
    };
    add_matrix(inst.system.boundary, 0.0, 0.0);
    add_matrix(inst.system.proj_x, -1e18, 1.0);
    add_matrix(inst.system.proj_y, 1.0, 1.0);

    var_rows.resize(n);
    act.assign(rows.size(), 0.0);
    lo_rest.assign(rows.size(), 0.0);
    hi_rest.assign(rows.size(), 0.0);
    for (size_t r = 0; r < rows.size(); ++r)
      for (const auto& [c, v] : rows[r].entries) {
        var_rows[c].push_back({static_cast<int>(r), v});
        if (v > 0.0)
          hi_rest[r] += v;
        else
          lo_rest[r] += v;
      }
    cur.assign(n, 0);
  }

  void run() { dfs(0, 0.0); }

  void dfs(int k, double cost_so_far) {
    if (bailed) return;
    if (++nodes > node_cap) {
      bailed = true;
      return;
    }
    if (found && cost_so_far >= best_obj - 1e-12) return;
    if (k == n) {
      for (size_t r = 0; r < rows.size(); ++r)
        if (act[r] < rows[r].lo - 1e-9 || act[r] > rows[r].hi + 1e-9) return;
      REQUIRE(check_feasible(*system, cur));  // oracle and checker must agree
      best_obj = cost_so_far;
      best = cur;
      found = true;
      return;
    }
    for (int value = 0; value <= 1; ++value) {
      cur[k] = static_cast<uint8_t>(value);
      bool prune = false;
      for (const auto& [r, v] : var_rows[k]) {
        if (value)
          act[r] += v;
        if (v > 0.0)
          hi_rest[r] -= v;
        else
          lo_rest[r] -= v;
        if (act[r] + lo_rest[r] > rows[r].hi + 1e-9 ||
            act[r] + hi_rest[r] < rows[r].lo - 1e-9)
          prune = true;
      }
      if (!prune) dfs(k + 1, cost_so_far + (value ? (*costs)[k] : 0.0));
      for (const auto& [r, v] : var_rows[k]) {
        if (value)
          act[r] -= v;
        if (v > 0.0)
          hi_rest[r] += v;
        else
          lo_rest[r] += v;
      }
      cur[k] = 0;
    }
  }
};

// Backend adapter driven by the oracle — an implementation whose only shared
// code with the branch-and-bound path is the instance itself.
struct EnumerationBackend : IlpBackend {
  const IlpInstance* instance;
  explicit EnumerationBackend(const IlpInstance& inst) : instance(&inst) {}
  std::string name() const override { return "enumeration"; }
  BackendResult solve(const BackendModel& model) override {
    REQUIRE(model.num_variables == instance->variable_count);
    REQUIRE(model.row_lower.size() == model.row_upper.size());
    EnumerationOracle oracle(*instance);
    oracle.run();
    REQUIRE(!oracle.bailed);
    BackendResult res;
    if (!oracle.found) {
      res.status = IlpStatus::infeasible;
      res.lower_bound = kInf;
      return res;
    }
    res.status = IlpStatus::optimal;
    res.lower_bound = oracle.best_obj;
    res.solution.assign(oracle.best.begin(), oracle.best.end());
    return res;
  }
};

}  // namespace

TEST_CASE("branch and bound matches exhaustive enumeration") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  const ProductSpace& space = *fx.space;

  SUBCASE("uniform costs") {
    IlpInstance inst = make_instance(space, uniform_costs(space.num_variables()));
    EnumerationOracle oracle(inst);
    oracle.run();
    REQUIRE(!oracle.bailed);
    REQUIRE(oracle.found);

    SolveResult res = solve_ilp(inst);
    REQUIRE(res.status == IlpStatus::optimal);
    REQUIRE(res.incumbent.has_value());
    CHECK(check_feasible(inst.system, *res.incumbent));
    CHECK(res.objective == doctest::Approx(oracle.best_obj).epsilon(1e-12));
    CHECK(res.lower_bound == doctest::Approx(res.objective).epsilon(1e-12));
    // A single full-triangle pairing covers the lone partial-shape triangle.
    CHECK(res.objective == doctest::Approx(1.0));
  }

  SUBCASE("ten random cost draws") {
    Rng rng(0x0c057a11);
    for (int seed = 0; seed < 10; ++seed) {
      IlpInstance inst =
          make_instance(space, random_costs(space.num_variables(), rng));
      EnumerationOracle oracle(inst);
      oracle.run();
      REQUIRE(!oracle.bailed);
      REQUIRE(oracle.found);

      SolveResult res = solve_ilp(inst);
      REQUIRE(res.status == IlpStatus::optimal);
      CHECK(res.objective == doctest::Approx(oracle.best_obj).epsilon(1e-9));
      CHECK(check_feasible(inst.system, *res.incumbent));
    }
  }
}

TEST_CASE("a two-triangle strip needs a glued pair of full-shape triangles") {
  SpaceFixture fx(tetrahedron(), triangle_strip(2));
  IlpInstance inst = make_instance(*fx.space, uniform_costs(fx.space->num_variables()));

  EnumerationOracle oracle(inst);
  oracle.run();
  REQUIRE(!oracle.bailed);
  REQUIRE(oracle.found);

  SolveResult res = solve_ilp(inst);
  REQUIRE(res.status == IlpStatus::optimal);
  CHECK(res.objective == doctest::Approx(oracle.best_obj).epsilon(1e-12));
  // Both strip triangles must be covered and the shared interior edge forces
  // consistent gluing; with unit costs the optimum is exactly two pairings.
  CHECK(res.objective == doctest::Approx(2.0));
  CHECK(check_feasible(inst.system, *res.incumbent));
}

TEST_CASE("relaxation bounds never exceed the integer optimum") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  Rng rng(0xb0bb1e);
  for (int seed = 0; seed < 6; ++seed) {
    IlpInstance inst =
        make_instance(*fx.space, random_costs(fx.space->num_variables(), rng));
    EnumerationOracle oracle(inst);
    oracle.run();
    REQUIRE(!oracle.bailed);
    REQUIRE(oracle.found);

    RelaxResult relax = lp_relax(inst);
    REQUIRE(relax.status == RelaxStatus::optimal);
    CHECK(relax.bound <= oracle.best_obj + 1e-9);
  }
}

TEST_CASE("relaxation bounds are monotone along a fixing path") {
  SpaceFixture fx(tetrahedron(), triangle_strip(2));
  Rng rng(0x5eed);
  IlpInstance inst =
      make_instance(*fx.space, random_costs(fx.space->num_variables(), rng));

  std::vector<Fixing> path;
  double prev = -kInf;
  for (int step = 0; step < 8; ++step) {
    RelaxResult relax = lp_relax(inst, path);
    if (relax.status == RelaxStatus::infeasible) break;  // +inf: trivially monotone
    CHECK(relax.bound >= prev - 1e-9);
    prev = relax.bound;
    int var = static_cast<int>(rng.next_u64() % inst.variable_count);
    while (std::any_of(path.begin(), path.end(),
                       [&](const Fixing& f) { return f.variable == var; }))
      var = static_cast<int>(rng.next_u64() % inst.variable_count);
    path.push_back({var, static_cast<int>(rng.next_u64() & 1)});
  }
}

TEST_CASE("fixing every variable to a feasible selection prices it exactly") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  Rng rng(0xf1f1);
  IlpInstance inst =
      make_instance(*fx.space, random_costs(fx.space->num_variables(), rng));
  SolveResult res = solve_ilp(inst);
  REQUIRE(res.status == IlpStatus::optimal);

  std::vector<Fixing> all;
  for (int j = 0; j < inst.variable_count; ++j)
    all.push_back({j, (*res.incumbent)[j] ? 1 : 0});
  RelaxResult relax = lp_relax(inst, all);
  REQUIRE(relax.status == RelaxStatus::optimal);
  CHECK(relax.bound == doctest::Approx(res.objective).epsilon(1e-9));
  for (int j = 0; j < inst.variable_count; ++j)
    CHECK(relax.solution[j] == doctest::Approx((*res.incumbent)[j] ? 1.0 : 0.0));
}

TEST_CASE("an over-pruned candidate mask is reported as such") {
  Mesh x = tetrahedron();
  Mesh y = single_triangle();
  CandidateMask mask;
  mask.num_x_vertices = x.num_vertices();
  mask.num_y_vertices = y.num_vertices();
  mask.allowed.assign(static_cast<size_t>(mask.num_x_vertices) * mask.num_y_vertices, 1);
  for (int xv = 0; xv < mask.num_x_vertices; ++xv)
    mask.allowed[static_cast<size_t>(xv) * mask.num_y_vertices + 0] = 0;  // forbid Y vertex 0

  SpaceFixture fx(std::move(x), std::move(y), nullptr);
  ProductSpace masked(ExtendedElements(fx.x), ExtendedElements(fx.y), &mask);
  REQUIRE(masked.masked());
  IlpInstance inst = make_instance(masked, uniform_costs(masked.num_variables()));
  SolveResult res = solve_ilp(inst);
  CHECK(res.status == IlpStatus::infeasible);
  CHECK(res.note.find("no candidate pairings") != std::string::npos);
  CHECK(res.note.find("widen") != std::string::npos);  // pruning hint present
  CHECK(!res.incumbent.has_value());
}

TEST_CASE("a zero budget times out immediately") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  IlpInstance inst = make_instance(*fx.space, uniform_costs(fx.space->num_variables()), 0.0);

  SUBCASE("without a warm start") {
    SolveResult res = solve_ilp(inst);
    CHECK(res.status == IlpStatus::timeout_no_incumbent);
    CHECK(!res.incumbent.has_value());
  }

  SUBCASE("with a feasible warm start") {
    IlpInstance probe = inst;
    probe.time_budget_seconds = 60.0;
    SolveResult opt = solve_ilp(probe);
    REQUIRE(opt.status == IlpStatus::optimal);

    inst.warm_start = opt.incumbent;
    SolveResult res = solve_ilp(inst);
    CHECK(res.status == IlpStatus::timeout_with_incumbent);
    REQUIRE(res.incumbent.has_value());
    CHECK(res.objective == doctest::Approx(opt.objective));
    CHECK(res.lower_bound <= res.objective);
  }

  SUBCASE("with an infeasible warm start") {
    inst.warm_start = MatchingIndicator(inst.variable_count, 0);  // covers nothing
    SolveResult res = solve_ilp(inst);
    CHECK(res.status == IlpStatus::timeout_no_incumbent);
    CHECK(res.note.find("warm start rejected") != std::string::npos);
  }
}

TEST_CASE("feasible warm starts are kept and still solved to optimality") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  Rng rng(0x377a);
  IlpInstance inst =
      make_instance(*fx.space, random_costs(fx.space->num_variables(), rng));
  SolveResult first = solve_ilp(inst);
  REQUIRE(first.status == IlpStatus::optimal);

  // Hand the optimum back in: the solve must confirm optimality, not regress.
  inst.warm_start = first.incumbent;
  SolveResult warm = solve_ilp(inst);
  REQUIRE(warm.status == IlpStatus::optimal);
  CHECK(warm.objective == doctest::Approx(first.objective).epsilon(1e-12));
  CHECK(warm.note.find("rejected") == std::string::npos);
}

TEST_CASE("branch selection picks the most fractional variable") {
  CHECK(branch_select({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}) == 1);
  // Equal distance from one half: the larger cost wins.
  CHECK(branch_select({0.4, 0.6}, {1.0, 2.0}) == 1);
  CHECK(branch_select({0.4, 0.6}, {2.0, 1.0}) == 0);
  // Full tie: lowest id.
  CHECK(branch_select({0.3, 0.3}, {1.0, 1.0}) == 0);
  CHECK_THROWS_AS(branch_select({0.0, 1.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(branch_select({1.0 - 1e-9, 0.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(branch_select({0.5}, {1.0, 1.0}), InputError);  // length mismatch
}

TEST_CASE("matchings decode into tagged correspondence records") {
  SpaceFixture fx(tetrahedron(), triangle_strip(2));
  const ProductSpace& space = *fx.space;
  IlpInstance inst = make_instance(space, uniform_costs(space.num_variables()));
  SolveResult res = solve_ilp(inst);
  REQUIRE(res.status == IlpStatus::optimal);

  std::vector<CorrespondenceRecord> records = extract_matching(res, space);
  int set_bits = 0;
  for (uint8_t b : *res.incumbent) set_bits += b;
  CHECK(static_cast<int>(records.size()) == set_bits);

  // Every proper partial-shape triangle appears exactly once.
  std::vector<int> y_cover(fx.y.num_triangles(), 0);
  for (const CorrespondenceRecord& rec : records) {
    const ProductVariable& pv = space.variable(rec.variable);
    CHECK(space.ext_x().triangle_local(pv.x_tri) == rec.x_element);
    CHECK(space.ext_x().triangle_tag(pv.x_tri) == rec.x_tag);
    CHECK(space.ext_y().triangle_local(pv.y_tri) == rec.y_element);
    CHECK(space.ext_y().triangle_tag(pv.y_tri) == rec.y_tag);
    CHECK(rec.rotation == pv.rotation);
    if (rec.y_tag == ElementTag::triangle) {
      REQUIRE(rec.y_element >= 0);
      REQUIRE(rec.y_element < fx.y.num_triangles());
      ++y_cover[rec.y_element];
    }
  }
  for (int f = 0; f < fx.y.num_triangles(); ++f) CHECK(y_cover[f] == 1);

  SolveResult empty;
  CHECK_THROWS_AS(extract_matching(empty, space), SolveError);
}

TEST_CASE("solves are deterministic") {
  SpaceFixture fx(tetrahedron(), triangle_strip(2));
  Rng rng(0xd373);
  CostVector costs = random_costs(fx.space->num_variables(), rng);
  IlpInstance inst = make_instance(*fx.space, costs);

  SolveResult a = solve_ilp(inst);
  SolveResult b = solve_ilp(inst);
  REQUIRE(a.status == IlpStatus::optimal);
  REQUIRE(b.status == IlpStatus::optimal);
  CHECK(a.objective == b.objective);  // bit-identical
  CHECK(a.nodes == b.nodes);
  CHECK(a.lp_iterations == b.lp_iterations);
  REQUIRE(a.incumbent.has_value());
  REQUIRE(b.incumbent.has_value());
  CHECK(*a.incumbent == *b.incumbent);
}

TEST_CASE("external backend and built-in search agree") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  Rng rng(0xbac);
  for (int trial = 0; trial < 3; ++trial) {
    IlpInstance inst =
        make_instance(*fx.space, random_costs(fx.space->num_variables(), rng));
    SolveResult own = solve_ilp(inst);
    REQUIRE(own.status == IlpStatus::optimal);

    EnumerationBackend backend(inst);
    SolveResult ext = solve_with_backend(inst, backend);
    REQUIRE(ext.status == IlpStatus::optimal);
    CHECK(std::abs(ext.objective - own.objective) <=
          1e-9 * std::max(1.0, std::abs(own.objective)));
    CHECK(ext.note.find("enumeration") != std::string::npos);
  }
}

TEST_CASE("backend claims failing exact verification are rejected") {
  struct LyingBackend : IlpBackend {
    std::string name() const override { return "liar"; }
    BackendResult solve(const BackendModel& model) override {
      BackendResult res;
      res.status = IlpStatus::optimal;
      res.solution.assign(model.num_variables, 0.0);  // covers nothing
      res.lower_bound = 0.0;
      return res;
    }
  };
  SpaceFixture fx(tetrahedron(), single_triangle());
  IlpInstance inst = make_instance(*fx.space, uniform_costs(fx.space->num_variables()));
  LyingBackend liar;
  SolveResult res = solve_with_backend(inst, liar);
  CHECK(res.status == IlpStatus::timeout_no_incumbent);
  CHECK(!res.incumbent.has_value());
  CHECK(res.note.find("failed exact verification") != std::string::npos);
}

TEST_CASE("instances export as MPS text") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  IlpInstance inst = make_instance(*fx.space, uniform_costs(fx.space->num_variables()));
  TempDir dir("mps");
  std::string path = dir.path("instance.mps");
  export_ilp(path, inst);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  for (const char* section :
       {"NAME", "ROWS", " N OBJ", "COLUMNS", "'INTORG'", "'INTEND'", "RHS", "BOUNDS",
        "ENDATA"})
    CHECK(text.find(section) != std::string::npos);

  // One binary marker per variable, one row entry per proper Y triangle.
  int bv = 0;
  size_t at = 0;
  while ((at = text.find("\n BV BND ", at)) != std::string::npos) {
    ++bv;
    ++at;
  }
  CHECK(bv == inst.variable_count);
  CHECK(text.find(" E Y") != std::string::npos);
  CHECK(text.find(" L X") != std::string::npos);
  CHECK(text.find(" E C") != std::string::npos);
}

TEST_CASE("malformed instances and fixings are rejected") {
  SpaceFixture fx(tetrahedron(), single_triangle());
  CHECK_THROWS_AS(make_instance(*fx.space, CostVector(3, 1.0)), InputError);

  IlpInstance inst = make_instance(*fx.space, uniform_costs(fx.space->num_variables()));
  CHECK_THROWS_AS(lp_relax(inst, {{0, 0}, {0, 1}}), InputError);   // contradictory
  CHECK_THROWS_AS(lp_relax(inst, {{-1, 0}}), InputError);          // out of range
  CHECK_THROWS_AS(lp_relax(inst, {{inst.variable_count, 0}}), InputError);
  CHECK_THROWS_AS(lp_relax(inst, {{0, 2}}), InputError);           // not binary

  IlpInstance bad = inst;
  bad.costs.pop_back();
  CHECK_THROWS_AS(solve_ilp(bad), InputError);
  bad = inst;
  bad.costs[0] = kInf;
  CHECK_THROWS_AS(solve_ilp(bad), InputError);
  bad = inst;
  bad.warm_start = MatchingIndicator(2, 0);
  CHECK_THROWS_AS(solve_ilp(bad), InputError);
}
