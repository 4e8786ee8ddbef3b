#include "veq/solver.hpp"

#include <algorithm>
#include <cstddef>
#include <utility>

#include "veq/errors.hpp"
#include "veq/fixtures.hpp"
#include "veq/parallel.hpp"

namespace veq {

namespace {

Vec slice_value(const VExpr& F, SliceForm form, const Vec& x, const Vec& y) {
  return form == SliceForm::Primal ? eval(F, x, y, x) : eval(F, x, y, y);
}

void check_shapes(const VExpr& F, const GridDomain& grid, const PolyCone& cone,
                  const GridDomain* y_grid) {
  if (F.out_dim() != cone.dim)
    fail("DimensionMismatch",
         "expression emits " + std::to_string(F.out_dim()) +
             " components but the cone lives in dimension " +
             std::to_string(cone.dim));
  const int need = F.min_input_dim();
  if (grid.dim() < need)
    fail("DimensionMismatch",
         "expression uses component " + std::to_string(need) +
             " but grid points have dimension " + std::to_string(grid.dim()));
  if (y_grid && y_grid->dim() < need)
    fail("DimensionMismatch",
         "expression uses component " + std::to_string(need) +
             " but the witness grid has dimension " +
             std::to_string(y_grid->dim()));
}

SolutionSet solve_sliced(const VExpr& F, SliceForm form, ProblemKind label,
                         const GridDomain& grid, const PolyCone& cone,
                         double tol, const GridDomain* y_grid) {
  check_shapes(F, grid, cone, y_grid);
  const auto& xs = grid.points;
  const auto& ys = y_grid ? y_grid->points : grid.points;

  // 0 = solution, 1 = refuted (witness_idx/value set), 2 = evaluation error
  struct Slot {
    int state = 0;
    std::size_t witness_idx = 0;
    Vec value;
    std::string err_code, err_msg;
  };
  std::vector<Slot> slots(xs.size());

  parallel_for(xs.size(), [&](std::size_t i) {
    Slot& s = slots[i];
    std::size_t j = 0;
    try {
      for (; j < ys.size(); ++j) {
        Vec v = slice_value(F, form, xs[i], ys[j]);
        if (member(v, cone, Region::InNegIntC, tol)) {
          s.state = 1;
          s.witness_idx = j;
          s.value = std::move(v);
          return;
        }
      }
      s.state = 0;
    } catch (const VeqError& e) {
      s.state = 2;
      s.err_code = e.code();
      s.err_msg = std::string(e.what()) + " while evaluating at x = " +
                  format_point(xs[i]) + ", y = " +
                  format_point(ys[std::min(j, ys.size() - 1)]);
    }
  });

  SolutionSet out;
  out.problem = label;
  out.tol = tol;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Slot& s = slots[i];
    if (s.state == 2) fail(s.err_code, s.err_msg);
    if (s.state == 1) {
      out.refutations.push_back({xs[i], ys[s.witness_idx], s.value});
    } else {
      out.solution_idx.push_back(i);
      out.solutions.push_back(xs[i]);
    }
  }
  return out;
}

SetRelation classify(const std::vector<std::size_t>& primal,
                     const std::vector<std::size_t>& dual) {
  if (primal == dual) return SetRelation::Equal;
  const bool p_in_d =
      std::includes(dual.begin(), dual.end(), primal.begin(), primal.end());
  const bool d_in_p =
      std::includes(primal.begin(), primal.end(), dual.begin(), dual.end());
  if (p_in_d) return SetRelation::PrimalSubsetDual;
  if (d_in_p) return SetRelation::DualSubsetPrimal;
  return SetRelation::Incomparable;
}

}  // namespace

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Primal: return "PRIMAL";
    case ProblemKind::Dual: return "DUAL";
    case ProblemKind::Perturbed: return "PERTURBED";
    case ProblemKind::VviStampacchia: return "VVI_STAMPACCHIA";
    case ProblemKind::VviMinty: return "VVI_MINTY";
  }
  return "?";
}

std::string to_string(SetRelation r) {
  switch (r) {
    case SetRelation::Equal: return "EQUAL";
    case SetRelation::PrimalSubsetDual: return "PRIMAL_SUBSET_DUAL";
    case SetRelation::DualSubsetPrimal: return "DUAL_SUBSET_PRIMAL";
    case SetRelation::Incomparable: return "INCOMPARABLE";
  }
  return "?";
}

bool SolutionSet::contains(const Vec& x) const {
  for (const auto& s : solutions)
    if (exactly_equal(s, x)) return true;
  return false;
}

const Refutation* SolutionSet::refutation_for(const Vec& x) const {
  for (const auto& r : refutations)
    if (exactly_equal(r.x, x)) return &r;
  return nullptr;
}

SolutionSet solve_primal(const VExpr& F, const GridDomain& grid,
                         const PolyCone& cone, double tol,
                         const GridDomain* y_grid) {
  return solve_sliced(F, SliceForm::Primal, ProblemKind::Primal, grid, cone, tol,
                      y_grid);
}

SolutionSet solve_dual(const VExpr& F, const GridDomain& grid,
                       const PolyCone& cone, double tol,
                       const GridDomain* y_grid) {
  return solve_sliced(F, SliceForm::Dual, ProblemKind::Dual, grid, cone, tol,
                      y_grid);
}

CompareReport compare_primal_dual(const VExpr& F, const GridDomain& grid,
                                  const PolyCone& cone, double tol,
                                  bool with_panel, const TSchedule& sched) {
  CompareReport report;
  report.primal = solve_primal(F, grid, cone, tol);
  report.dual = solve_dual(F, grid, cone, tol);
  report.relation = classify(report.primal.solution_idx, report.dual.solution_idx);
  if (with_panel) {
    report.panel.push_back(check_pseudomonotone(F, grid, cone, tol));
    report.panel.push_back(check_explicit_quasiconvex(F, grid, sched, cone, tol));

    // hemicontinuity needs explicit pairs; stride-sample both sides so the
    // t-sweep stays bounded on big grids
    report.panel.push_back(
        check_hemicontinuity(F, strided_pairs(grid, 64), sched, cone, tol));

    report.panel.push_back(
        check_diagonal(F, grid, DiagonalMode::OffdiagNegC, cone, tol));
  }
  return report;
}

TruncatedResult solve_truncated(const VExpr& F, const GridDomain& grid,
                                const CoercivityCertificate& certificate,
                                const PolyCone& cone, double tol) {
  if (certificate.k0.empty())
    fail("CertificateRequired",
         "truncated solving needs a coercivity certificate with a nonempty "
         "sub-grid");
  TruncatedResult result;
  const GridDomain sub = make_point_list(certificate.k0);
  result.on_k0 = solve_sliced(F, SliceForm::Primal, ProblemKind::Primal, sub,
                              cone, tol, nullptr);
  result.on_k0.notes = "solved on truncation sub-grid of " +
                       std::to_string(sub.points.size()) + " points (radius " +
                       format_number(certificate.r) + ")";

  for (const auto& x : result.on_k0.solutions) {
    bool extended = true;
    for (const auto& y : grid.points) {
      Vec v = slice_value(F, SliceForm::Primal, x, y);
      if (member(v, cone, Region::InNegIntC, tol)) {
        result.extension.failures.push_back({x, y, std::move(v)});
        result.extension.all_extended = false;
        extended = false;
        break;
      }
    }
    if (extended) result.extension.extended.push_back(x);
  }
  return result;
}

VExpr combine_perturbed(const VExpr& f, const VExpr& g) {
  // occurrences of x in f become z; y stays
  const VExpr shifted = rename_vars(f, {2, 1, 2});
  return sum(shifted, g);
}

SolutionSet solve_perturbed(const VExpr& f, const VExpr& g,
                            const GridDomain& grid, const PolyCone& cone,
                            double tol) {
  const VExpr combined = combine_perturbed(f, g);
  SolutionSet set = solve_sliced(combined, SliceForm::Primal,
                                 ProblemKind::Perturbed, grid, cone, tol, nullptr);
  const CoercivityResult coer =
      find_coercivity(combined, grid, CoercivityVariant::BallLt, cone, tol);
  if (coer.verdict.status == Status::Fail) {
    set.notes =
        "coercivity search (strict-ball variant) failed for this instance; "
        "solutions may be boundary artifacts of truncating an unbounded domain";
  }
  return set;
}

SolutionSet epsilon_equilibrium(const VExpr& f, const PerturbationSpec& spec,
                                const GridDomain& grid, const PolyCone& cone,
                                double tol) {
  if (spec.epsilon < 0.0)
    fail("InvalidPerturbation", "epsilon must be nonnegative, got " +
                                    format_number(spec.epsilon));
  if (spec.direction.empty() || norm2(spec.direction) == 0.0)
    fail("InvalidPerturbation", "direction must be a nonzero vector");
  if (static_cast<int>(spec.direction.size()) != cone.dim)
    fail("DimensionMismatch",
         "direction has " + std::to_string(spec.direction.size()) +
             " components but the cone lives in dimension " +
             std::to_string(cone.dim));
  if (!member(spec.direction, cone, Region::InC, tol))
    fail("InvalidPerturbation",
         "direction " + format_point(spec.direction) + " is not in the cone");

  FixtureParams params;
  params.scalars["n"] = static_cast<double>(grid.dim());
  params.scalars["epsilon"] = spec.epsilon;
  params.vectors["e"] = spec.direction;
  const VExpr g = fixture(FixtureId::PerturbEps, params);
  return solve_perturbed(f, g, grid, cone, tol);
}

Verdict transfer_solution(const VExpr& f, const VExpr& g, const Vec& x0,
                          const GridDomain& grid, const TSchedule& sched,
                          const PolyCone& cone, double tol) {
  Verdict v;
  v.checker = "transfer";
  v.tol = tol;

  // precondition: x0 must solve the g-problem on the grid
  for (const auto& y : grid.points) {
    const Vec gy = eval(g, x0, y, x0);
    if (member(gy, cone, Region::InNegIntC, tol))
      fail("NotADualSolution", "x0 = " + format_point(x0) +
                                   " does not solve the base problem: y = " +
                                   format_point(y) + " gives " +
                                   format_point(gy));
  }

  std::vector<double> open_ts, closed_ts;
  for (double t : sched.values()) {
    if (t > 0.0 && t < 1.0) open_ts.push_back(t);
    if (t > 0.0 && t <= 1.0) closed_ts.push_back(t);
  }

  auto push = [](Counterexample& ce, const std::string& name, Vec val) {
    ce.items.emplace_back(name, std::move(val));
  };

  // segment gap condition, quantified over y != x0 and interior t
  for (const auto& y : grid.points) {
    if (exactly_equal(y, x0)) continue;
    for (double t : open_ts) {
      const Vec mid = lerp(x0, y, t);
      Vec value = sub(sub(eval(g, x0, mid, x0), eval(f, mid, y, mid)),
                      eval(g, x0, y, x0));
      ++v.checked_count;
      if (!member(value, cone, Region::InNegIntC, tol)) {
        v.status = Status::Fail;
        Counterexample ce;
        push(ce, "x0", x0);
        push(ce, "y", y);
        push(ce, "t", Vec{t});
        push(ce, "segment_point", mid);
        push(ce, "value", std::move(value));
        v.counterexample = std::move(ce);
        v.notes = "segment gap left the strict negative cone interior";
        return v;
      }
    }
  }

  // sampled implication: combined value clean along the segment for every
  // scheduled t must persist at the y-endpoint of the segment parameter
  for (const auto& y : grid.points) {
    bool antecedent = true;
    for (double t : closed_ts) {
      const Vec mid = lerp(x0, y, t);
      const Vec value = add(eval(f, mid, y, mid), eval(g, x0, y, x0));
      ++v.checked_count;
      if (member(value, cone, Region::InNegIntC, tol)) {
        antecedent = false;
        break;
      }
    }
    if (!antecedent) continue;
    Vec at_limit = add(eval(f, x0, y, x0), eval(g, x0, y, x0));
    if (member(at_limit, cone, Region::InNegIntC, tol)) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "x0", x0);
      push(ce, "y", y);
      push(ce, "value", std::move(at_limit));
      v.counterexample = std::move(ce);
      v.notes = "combined value clean along the sampled segment but strictly "
                "negative at the limit";
      return v;
    }
  }

  // the f-diagonal must vanish
  for (const auto& x : grid.points) {
    Vec d = eval(f, x, x, x);
    ++v.checked_count;
    if (norm2(d) > tol) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "x", x);
      push(ce, "value", std::move(d));
      v.counterexample = std::move(ce);
      v.notes = "diagonal of the first map does not vanish";
      return v;
    }
  }

  // predicted conclusion, asserted by direct scan rather than assumed
  for (const auto& y : grid.points) {
    Vec value = add(eval(f, x0, y, x0), eval(g, x0, y, x0));
    ++v.checked_count;
    if (member(value, cone, Region::InNegIntC, tol)) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "x0", x0);
      push(ce, "y", y);
      push(ce, "value", std::move(value));
      v.counterexample = std::move(ce);
      v.notes = "hypothesis checks passed at this resolution, yet the "
                "transferred conclusion fails at this witness";
      return v;
    }
  }

  v.status = Status::Pass;
  v.notes = "x0 solves the combined problem on the grid; segment conditions "
            "hold at the sampled resolution";
  return v;
}

SolutionSet vvi(const AffineOperator& op, ProblemKind kind,
                const GridDomain& grid, const PolyCone& cone, double tol) {
  if (kind != ProblemKind::VviStampacchia && kind != ProblemKind::VviMinty)
    fail("InvalidArgument", "variational-inequality kind must be "
                            "VVI_STAMPACCHIA or VVI_MINTY");
  const int n = grid.dim();
  if (static_cast<int>(op.slope.size()) != n)
    fail("DimensionMismatch", "operator slope has " +
                                  std::to_string(op.slope.size()) +
                                  " rows for grid dimension " +
                                  std::to_string(n));
  for (const auto& row : op.slope)
    if (static_cast<int>(row.size()) != n)
      fail("DimensionMismatch", "operator slope rows must have " +
                                    std::to_string(n) + " entries");
  if (!op.intercept.empty() && static_cast<int>(op.intercept.size()) != n)
    fail("DimensionMismatch", "operator intercept must have " +
                                  std::to_string(n) + " entries");

  FixtureParams params;
  params.scalars["n"] = static_cast<double>(n);
  params.matrices["slope"] = op.slope;
  if (!op.intercept.empty()) params.vectors["intercept"] = op.intercept;
  const VExpr F = fixture(FixtureId::VviAffine, params);

  const SliceForm form =
      kind == ProblemKind::VviStampacchia ? SliceForm::Primal : SliceForm::Dual;
  return solve_sliced(F, form, kind, grid, cone, tol, nullptr);
}

}  // namespace veq
