#include "veq/repro.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "veq/conditions.hpp"
#include "veq/cone.hpp"
#include "veq/expr.hpp"
#include "veq/fixtures.hpp"
#include "veq/geometry.hpp"
#include "veq/solver.hpp"

namespace veq {

namespace {

bool claim(std::ostream& out, bool ok, const std::string& what) {
  out << (ok ? "  [ok]   " : "  [FAIL] ") << what << "\n";
  return ok;
}

bool near(const Vec& v, const Vec& want, double eps) {
  if (v.size() != want.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::fabs(v[i] - want[i]) > eps) return false;
  return true;
}

bool all_exactly_zero(const Vec& v) {
  for (double d : v)
    if (!(std::fabs(d) <= 0.0)) return false;
  return !v.empty();
}

}  // namespace

bool run_repro_ex31(std::ostream& out) {
  bool ok = true;
  const double tol = 1e-9;
  const PolyCone cone = PolyCone::orthant(2);
  const VExpr F = fixture(FixtureId::Ex31F);
  const GridDomain grid = make_grid(Vec{-1.0}, Vec{1.0}, 0.0025);
  const Vec x0{-0.5};

  out << "kink-product reproduction: grid [-1, 1], step 1/400, tol 1e-9\n";
  ok &= claim(out, grid.points.size() == 801, "grid has 801 points");
  bool on_grid = false;
  for (const auto& p : grid.points) on_grid |= exactly_equal(p, x0);
  ok &= claim(out, on_grid, "-1/2 lies exactly on the grid");

  const SolutionSet dual = solve_dual(F, grid, cone, tol);
  ok &= claim(out, dual.contains(x0),
              "-1/2 solves the dual problem: F(-1/2, y, y) stays out of "
              "-int C for every grid y");

  const SolutionSet primal = solve_primal(F, grid, cone, tol);
  ok &= claim(out, !primal.contains(x0) && primal.refutation_for(x0) != nullptr,
              "-1/2 does not solve the primal problem on the same grid");
  if (const Refutation* r = primal.refutation_for(x0))
    out << "         first scanned witness y = " << format_point(r->witness)
        << ", value " << format_point(r->value) << "\n";

  const Vec at_witness = eval(F, x0, Vec{0.75}, x0);
  ok &= claim(out, near(at_witness, Vec{-1.0 / 3.0, -1.0 / 3.0}, 1e-12),
              "witness y = 3/4 gives F(-1/2, 3/4, -1/2) = " +
                  format_point(at_witness) + ", components -1/3 within 1e-12");
  ok &= claim(out, member(at_witness, cone, Region::InNegIntC, tol),
              "that value lies strictly inside -int C, refuting -1/2");

  const GridDomain triple = make_point_list({Vec{-1.0}, Vec{-0.5}, Vec{0.5}});
  const Verdict quasi =
      check_explicit_quasiconvex(F, triple, TSchedule{}, cone, tol);
  ok &= claim(out, quasi.status == Status::Fail,
              "explicit quasiconvexity fails on the probe points "
              "{-1, -1/2, 1/2}");
  if (quasi.counterexample) {
    const Counterexample& ce = *quasi.counterexample;
    const Vec* cx = ce.find("x");
    const Vec* cy = ce.find("y");
    const Vec* cz = ce.find("z");
    const Vec* d1 = ce.find("diff_to_diagonal");
    const Vec* d2 = ce.find("diff_to_endpoint");
    ok &= claim(out,
                cx && cy && cz && exactly_equal(*cx, Vec{-1.0}) &&
                    exactly_equal(*cy, Vec{-0.5}) &&
                    exactly_equal(*cz, Vec{0.5}),
                "failing triple is exactly (x, y, z) = (-1, -1/2, 1/2)");
    ok &= claim(out, d1 && d2 && all_exactly_zero(*d1) && all_exactly_zero(*d2),
                "both defining differences are exactly (0, 0): neither drops "
                "into -int C");
  } else {
    ok &= claim(out, false, "quasiconvexity counterexample present");
  }

  const Verdict offdiag =
      check_diagonal(F, grid, DiagonalMode::OffdiagNegC, cone, tol);
  ok &= claim(out, offdiag.status == Status::Pass,
              "off-diagonal check passes: F(x, x, y) lies in -C for all grid "
              "pairs x != y");

  out << (ok ? "all claims reproduced\n" : "reproduction FAILED\n");
  return ok;
}

bool run_repro_ex32(std::ostream& out) {
  bool ok = true;
  const double tol = 1e-9;
  const PolyCone cone(std::vector<Vec>{Vec{1.0, 1.0}, Vec{-1.0, 1.0}}, "wedge");
  const VExpr F = fixture(FixtureId::Ex32F);

  out << "jump-map reproduction: wedge cone |z1| <= z2, tol 1e-9\n";
  out << "  normalized cone rows: " << format_point(cone.rows[0]) << ", "
      << format_point(cone.rows[1]) << "\n";

  const Vec x{0.5};
  const Vec c{-0.5, 1.0};
  const Vec probe{0.75};
  const Vec want_diff{-1.5, 1.5};

  for (const double yv : {0.0, 0.3, 1.0}) {
    const Vec y{yv};
    const Verdict usc =
        check_usc_violation(F, SliceForm::Primal, y, x, c, probe, cone, tol);
    bool here = usc.status == Status::Pass;
    const Vec* diff =
        usc.counterexample ? usc.counterexample->find("difference") : nullptr;
    here = here && diff && near(*diff, want_diff, 1e-12);
    ok &= claim(out, here,
                "y = " + format_number(yv) +
                    ": slice jump at x = 1/2 breaks upper semicontinuity, "
                    "c + M(1/2) - M(3/4) = " +
                    (diff ? format_point(*diff) : "missing") +
                    " = (-3/2, 3/2) within 1e-12, not interior");
  }

  for (const double yv : {0.0, 0.3, 1.0}) {
    const Vec y{yv};
    std::vector<Vec> xs;
    std::vector<Vec> witnesses;
    for (int k = 1; k <= 10; ++k) {
      const double offset = std::ldexp(1.0, -(k + 2));
      const double xk = 0.5 + (k % 2 == 1 ? -offset : offset);
      xs.push_back(Vec{xk});
      witnesses.push_back(Vec{xk + yv, xk});
    }
    const WitnessSequence seq(xs, Vec{0.5});
    const Vec limit{0.5 + yv, 0.5};
    const Verdict wit = verify_condition_c_witness(
        F, SliceForm::Primal, y, seq, witnesses, limit, cone, tol);
    ok &= claim(out, wit.status == Status::Pass,
                "y = " + format_number(yv) +
                    ": alternating sequence x_k -> 1/2 with witnesses "
                    "z_k = (x_k + y, x_k) passes the closedness check");
  }

  out << (ok ? "all claims reproduced\n" : "reproduction FAILED\n");
  return ok;
}

}  // namespace veq
