#include <doctest.h>

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "veq/errors.hpp"
#include "veq/fixtures.hpp"
#include "veq/solver.hpp"

using namespace veq;

namespace {

constexpr double kTol = 1e-9;

const PolyCone& rplus() {
  static const PolyCone c({{1.0}}, "R_+");
  return c;
}

std::string thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const VeqError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("primal solve matches a hand-rolled min scan") {
  const VExpr F = parse_vexpr("y1 - x1");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  const SolutionSet s = solve_primal(F, g, rplus(), kTol);
  CHECK(s.problem == ProblemKind::Primal);
  REQUIRE(s.solutions.size() == 1);
  CHECK(s.solutions[0] == Vec{0.0});
  REQUIRE(s.refutations.size() == 4);
  for (const auto& r : s.refutations) {
    CHECK(r.witness == Vec{0.0});  // first y in scan order already violates
    CHECK(r.value[0] == -r.x[0]);
    CHECK(member(r.value, rplus(), Region::InNegIntC, kTol));
  }
  CHECK(s.contains(Vec{0.0}));
  CHECK_FALSE(s.contains(Vec{0.5}));
  REQUIRE(s.refutation_for(Vec{0.5}) != nullptr);
  CHECK(s.refutation_for(Vec{0.0}) == nullptr);
}

TEST_CASE("solution and refutation lists partition the grid in order") {
  const VExpr F = parse_vexpr("(y1 - x1) * (y1 - x1) - 0.1");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  const SolutionSet s = solve_primal(F, g, rplus(), kTol);
  CHECK(s.solutions.size() + s.refutations.size() == g.size());
  REQUIRE(s.solution_idx.size() == s.solutions.size());
  for (std::size_t i = 0; i < s.solution_idx.size(); ++i) {
    CHECK(s.solutions[i] == g.points[s.solution_idx[i]]);
    if (i > 0) CHECK(s.solution_idx[i - 1] < s.solution_idx[i]);
  }
}

TEST_CASE("the zero map solves everywhere") {
  const VExpr F = parse_vexpr("0");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  CHECK(solve_primal(F, g, rplus(), kTol).solutions.size() == g.size());
  const SolutionSet d = solve_dual(F, g, rplus(), kTol);
  CHECK(d.solutions.size() == g.size());
  CHECK(d.problem == ProblemKind::Dual);
}

TEST_CASE("eval failures surface with the offending point attached") {
  // positive until y reaches 0.5, so the scan hits the pole before any
  // refutation short-circuits the row
  const VExpr F = parse_vexpr("1 / (0.5 - y1)");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  try {
    solve_primal(F, g, rplus(), kTol);
    FAIL("expected an eval error");
  } catch (const VeqError& e) {
    CHECK(e.code() == "DivisionByZero");
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("tent-product keeps the dual-only solution on a coarser grid") {
  const VExpr F = fixture(FixtureId::Ex31F);
  const PolyCone c = PolyCone::orthant(2);
  const GridDomain g = make_grid({-1.0}, {1.0}, 0.01);
  const CompareReport r = compare_primal_dual(F, g, c, kTol, false);
  CHECK(r.panel.empty());
  CHECK(r.relation == SetRelation::PrimalSubsetDual);
  CHECK(r.dual.contains(Vec{-0.5}));
  CHECK_FALSE(r.primal.contains(Vec{-0.5}));
  CHECK(r.primal.contains(Vec{0.5}));  // the second factor vanishes there
  CHECK(r.dual.contains(Vec{0.5}));
  const Refutation* ref = r.primal.refutation_for(Vec{-0.5});
  REQUIRE(ref != nullptr);
  // first y past the sign change of the first factor
  CHECK(ref->witness == Vec{0.51});
  CHECK(member(ref->value, c, Region::InNegIntC, kTol));
}

TEST_CASE("panel attaches the four licensing checks") {
  const VExpr F = parse_vexpr("(2*z1 + 1) * (y1 - x1)");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.125);
  const CompareReport r = compare_primal_dual(F, g, rplus(), kTol, true);
  CHECK(r.relation == SetRelation::Equal);
  REQUIRE(r.panel.size() == 4);
  CHECK(r.panel[0].checker == "pseudomonotone");
  CHECK(r.panel[0].status == Status::Pass);
  CHECK(r.panel[1].checker == "explicit_quasiconvex");
  CHECK(r.panel[2].checker == "hemicontinuity");
  CHECK(r.panel[2].status == Status::ConsistentAtResolution);
  CHECK(r.panel[3].checker == "offdiag_neg_c");
  CHECK(r.panel[3].status == Status::Pass);
}

TEST_CASE("refining the universally quantified side can only shrink solutions") {
  // quartic with a dip that only finer y-steps can see
  const VExpr F =
      parse_vexpr("((y1 - x1) * (y1 - x1)) * ((y1 - x1) * (y1 - x1) - 0.2)");
  const GridDomain xs = make_grid({0.0}, {1.0}, 0.5);
  const SolutionSet coarse = solve_primal(F, xs, rplus(), kTol);
  CHECK(coarse.solutions.size() == 3);  // |y - x| in {0, 0.5, 1} never dips

  const GridDomain fine_y = make_grid({0.0}, {1.0}, 0.25);
  const SolutionSet fine = solve_primal(F, xs, rplus(), kTol, &fine_y);
  for (const auto& x : fine.solutions) CHECK(coarse.contains(x));
  CHECK(fine.solutions.empty());  // |y - x| = 0.25 dips below zero everywhere

  // passing the x-grid itself as the y-grid changes nothing
  const SolutionSet same = solve_primal(F, xs, rplus(), kTol, &xs);
  CHECK(same.solutions == coarse.solutions);
}

TEST_CASE("results are identical across thread counts") {
  const VExpr F = fixture(FixtureId::Ex31F);
  const PolyCone c = PolyCone::orthant(2);
  const GridDomain g = make_grid({-1.0}, {1.0}, 0.05);
  setenv("VEQ_THREADS", "1", 1);
  const SolutionSet a = solve_primal(F, g, c, kTol);
  setenv("VEQ_THREADS", "3", 1);
  const SolutionSet b = solve_primal(F, g, c, kTol);
  unsetenv("VEQ_THREADS");
  REQUIRE(a.solutions.size() == b.solutions.size());
  CHECK(a.solutions == b.solutions);
  REQUIRE(a.refutations.size() == b.refutations.size());
  for (std::size_t i = 0; i < a.refutations.size(); ++i) {
    CHECK(a.refutations[i].x == b.refutations[i].x);
    CHECK(a.refutations[i].witness == b.refutations[i].witness);
    CHECK(a.refutations[i].value == b.refutations[i].value);
  }
}

TEST_CASE("truncated solve extends sub-grid solutions to the full grid") {
  const VExpr F = parse_vexpr("y1 - x1");
  const GridDomain g = make_grid({0.0}, {10.0}, 0.1);
  const CoercivityResult coer =
      find_coercivity(F, g, CoercivityVariant::BallLe, rplus(), kTol);
  REQUIRE(coer.certificate.has_value());
  const TruncatedResult t = solve_truncated(F, g, *coer.certificate, rplus(), kTol);
  REQUIRE(t.on_k0.solutions.size() == 1);
  CHECK(t.on_k0.solutions[0] == Vec{0.0});
  CHECK(t.extension.all_extended);
  REQUIRE(t.extension.extended.size() == 1);
  CHECK(t.extension.extended[0] == Vec{0.0});
  CHECK(t.extension.failures.empty());
  CHECK(t.on_k0.notes.find("sub-grid") != std::string::npos);
}

TEST_CASE("truncated solve reports solutions that fail on the full grid") {
  // attractive within the ball, repulsive beyond it
  const VExpr F =
      parse_vexpr("piecewise{ if y1 <= 1 : y1 - x1 ; else : x1 - y1 }");
  const GridDomain g = make_grid({0.0}, {10.0}, 0.5);
  CoercivityCertificate cert;
  cert.variant = CoercivityVariant::BallLe;
  cert.r = 1.0;
  cert.k0 = {{0.0}, {0.5}, {1.0}};
  const TruncatedResult t = solve_truncated(F, g, cert, rplus(), kTol);
  REQUIRE(t.on_k0.solutions.size() == 1);
  CHECK(t.on_k0.solutions[0] == Vec{0.0});
  CHECK_FALSE(t.extension.all_extended);
  REQUIRE(t.extension.failures.size() == 1);
  CHECK(t.extension.failures[0].x == Vec{0.0});
  CHECK(t.extension.failures[0].value[0] < -kTol);
}

TEST_CASE("truncated solve refuses an empty certificate") {
  const VExpr F = parse_vexpr("y1 - x1");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.5);
  CoercivityCertificate empty;
  CHECK(thrown_code([&] { solve_truncated(F, g, empty, rplus(), kTol); }) ==
        "CertificateRequired");
}

TEST_CASE("combining split maps swaps the first argument into the third slot") {
  const VExpr f = parse_vexpr("x1 - y1");
  const VExpr g = parse_vexpr("2*x1");
  const VExpr F1 = combine_perturbed(f, g);
  // F1(x, y, z) = f(z, y) + g(x, y) = (z - y) + 2x
  const Vec out = eval(F1, Vec{1.0}, Vec{2.0}, Vec{3.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == 3.0);
  // the primal slice z = x recovers f(x,y) + g(x,y)
  const Vec slice = eval(F1, Vec{4.0}, Vec{2.0}, Vec{4.0});
  CHECK(slice[0] == (4.0 - 2.0) + 8.0);
}

TEST_CASE("perturbation strength separates full and boundary solution sets") {
  const VExpr f = parse_vexpr("x1 - y1");
  const GridDomain g = make_grid({0.0}, {10.0}, 0.1);

  const SolutionSet strong =
      solve_perturbed(f, parse_vexpr("norm(x1 - y1)"), g, rplus(), kTol);
  CHECK(strong.solutions.size() == 101);  // (x-y) + |x-y| >= 0 everywhere
  CHECK(strong.problem == ProblemKind::Perturbed);

  const SolutionSet weak =
      solve_perturbed(f, parse_vexpr("0.5 * norm(x1 - y1)"), g, rplus(), kTol);
  REQUIRE(weak.solutions.size() == 1);
  CHECK(weak.solutions[0] == Vec{10.0});
  CHECK(weak.notes.find("boundary artifacts") != std::string::npos);
}

TEST_CASE("epsilon interface delegates to the explicit perturbation") {
  const VExpr f = parse_vexpr("x1 - y1");
  const GridDomain g = make_grid({0.0}, {10.0}, 0.1);
  PerturbationSpec spec;
  spec.epsilon = 0.5;
  spec.direction = {1.0};
  const SolutionSet via_spec = epsilon_equilibrium(f, spec, g, rplus(), kTol);
  const SolutionSet direct =
      solve_perturbed(f, parse_vexpr("0.5 * norm(x1 - y1)"), g, rplus(), kTol);
  CHECK(via_spec.solutions == direct.solutions);
}

TEST_CASE("epsilon equilibria grow monotonically with the strength") {
  const VExpr f = parse_vexpr("x1 - y1");
  const GridDomain g = make_grid({0.0}, {10.0}, 0.5);
  std::vector<SolutionSet> sets;
  for (const double eps : {0.0, 0.5, 1.0, 2.0}) {
    PerturbationSpec spec;
    spec.epsilon = eps;
    spec.direction = {1.0};
    sets.push_back(epsilon_equilibrium(f, spec, g, rplus(), kTol));
  }
  for (std::size_t i = 1; i < sets.size(); ++i)
    for (const auto& x : sets[i - 1].solutions) CHECK(sets[i].contains(x));
}

TEST_CASE("perturbation spec validation") {
  const VExpr f = parse_vexpr("x1 - y1");
  const GridDomain g = make_grid({0.0}, {1.0}, 0.5);
  const auto run = [&](double eps, Vec dir) {
    PerturbationSpec spec;
    spec.epsilon = eps;
    spec.direction = std::move(dir);
    return thrown_code([&] { epsilon_equilibrium(f, spec, g, rplus(), kTol); });
  };
  CHECK(run(-1.0, {1.0}) == "InvalidPerturbation");
  CHECK(run(1.0, {}) == "InvalidPerturbation");
  CHECK(run(1.0, {0.0}) == "InvalidPerturbation");
  CHECK(run(1.0, {-1.0}) == "InvalidPerturbation");  // not a cone direction
  CHECK(run(1.0, {1.0, 1.0}) == "DimensionMismatch");
}

TEST_CASE("solution transfer succeeds on well-behaved split maps") {
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);

  // trivial first map
  const Verdict v1 = transfer_solution(parse_vexpr("0"), parse_vexpr("y1 - x1"),
                                       {0.0}, g, TSchedule{}, rplus(), kTol);
  CHECK(v1.status == Status::Pass);
  CHECK(v1.checker == "transfer");
  CHECK(v1.notes.find("x0 solves the combined problem") != std::string::npos);

  const Verdict v2 =
      transfer_solution(parse_vexpr("x1 - y1"), parse_vexpr("2*(y1 - x1)"),
                        {0.0}, g, TSchedule{}, rplus(), kTol);
  CHECK(v2.status == Status::Pass);
}

TEST_CASE("solution transfer needs x0 to solve the base problem first") {
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  CHECK(thrown_code([&] {
          transfer_solution(parse_vexpr("x1 - y1"), parse_vexpr("2*(y1 - x1)"),
                            {1.0}, g, TSchedule{}, rplus(), kTol);
        }) == "NotADualSolution");
}

TEST_CASE("segment gap violations are certified with the sampled point") {
  // f strongly negative off-diagonal flips the segment inequality
  const VExpr f = parse_vexpr("-10 * norm(x1 - y1)");
  const VExpr g = parse_vexpr("y1 - x1");
  const GridDomain grid = make_grid({0.0}, {1.0}, 0.25);
  const Verdict v =
      transfer_solution(f, g, {0.0}, grid, TSchedule{}, rplus(), kTol);
  REQUIRE(v.status == Status::Fail);
  CHECK(v.notes.find("segment gap") != std::string::npos);
  REQUIRE(v.counterexample.has_value());
  CHECK(v.counterexample->find("x0") != nullptr);
  CHECK(v.counterexample->find("y") != nullptr);
  CHECK(v.counterexample->find("t") != nullptr);
  CHECK(v.counterexample->find("segment_point") != nullptr);
  CHECK(v.counterexample->find("value") != nullptr);
}

TEST_CASE("a non-vanishing diagonal of the first map fails the transfer") {
  const VExpr f = parse_vexpr("x1");
  const VExpr g = parse_vexpr("y1 - x1");
  const GridDomain grid = make_grid({0.0}, {1.0}, 0.25);
  const Verdict v =
      transfer_solution(f, g, {0.0}, grid, TSchedule{}, rplus(), kTol);
  REQUIRE(v.status == Status::Fail);
  CHECK(v.notes.find("diagonal") != std::string::npos);
}

TEST_CASE("affine variational inequalities solve in both forms") {
  AffineOperator op;
  op.slope = {{1.0}};
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);

  const SolutionSet st = vvi(op, ProblemKind::VviStampacchia, g, rplus(), kTol);
  CHECK(st.problem == ProblemKind::VviStampacchia);
  REQUIRE(st.solutions.size() == 1);
  CHECK(st.solutions[0] == Vec{0.0});

  // Minty keeps 0.25 as well: no grid point falls strictly between 0 and
  // 0.25, so y*(y - 0.25) >= 0 holds at every grid y.  The two forms still
  // agree to within one grid step, which is the guarantee that matters.
  const SolutionSet mi = vvi(op, ProblemKind::VviMinty, g, rplus(), kTol);
  CHECK(mi.problem == ProblemKind::VviMinty);
  REQUIRE(mi.solutions.size() == 2);
  CHECK(mi.solutions[0] == Vec{0.0});
  CHECK(mi.solutions[1] == Vec{0.25});

  AffineOperator zero;
  zero.slope = {{0.0}};
  CHECK(vvi(zero, ProblemKind::VviStampacchia, g, rplus(), kTol).solutions.size() ==
        g.size());
}

TEST_CASE("vvi validates operator shape and kind") {
  AffineOperator op;
  op.slope = {{1.0}};
  const GridDomain g = make_grid({0.0}, {1.0}, 0.25);
  CHECK(thrown_code([&] { vvi(op, ProblemKind::Primal, g, rplus(), kTol); }) ==
        "InvalidArgument");

  AffineOperator bad;
  bad.slope = {{1.0, 2.0}};
  CHECK(thrown_code([&] {
          vvi(bad, ProblemKind::VviStampacchia, g, rplus(), kTol);
        }) == "DimensionMismatch");

  AffineOperator bad2;
  bad2.slope = {{1.0}};
  bad2.intercept = {1.0, 2.0};
  CHECK(thrown_code([&] {
          vvi(bad2, ProblemKind::VviMinty, g, rplus(), kTol);
        }) == "DimensionMismatch");
}
