#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veq/conditions.hpp"
#include "veq/cone.hpp"
#include "veq/expr.hpp"
#include "veq/geometry.hpp"

namespace veq {

enum class ProblemKind { Primal, Dual, Perturbed, VviStampacchia, VviMinty };

std::string to_string(ProblemKind k);

// First violating witness for a refuted candidate point.
struct Refutation {
  Vec x;
  Vec witness;  // the y that drives the value into -int C
  Vec value;
};

// Exhaustive grid verdict: every grid point is either a solution or carries a
// refutation; the two lists partition the grid and keep its order.
struct SolutionSet {
  ProblemKind problem = ProblemKind::Primal;
  std::vector<std::size_t> solution_idx;  // indices into the solved grid
  std::vector<Vec> solutions;
  std::vector<Refutation> refutations;
  double tol = 0.0;
  std::string notes;

  bool contains(const Vec& x) const;
  const Refutation* refutation_for(const Vec& x) const;
};

enum class SetRelation { Equal, PrimalSubsetDual, DualSubsetPrimal, Incomparable };

std::string to_string(SetRelation r);

// Both solution sets plus their inclusion relation; the optional panel holds
// the monotonicity/convexity/continuity verdicts that license each direction
// of the primal-dual equivalence.
struct CompareReport {
  SolutionSet primal;
  SolutionSet dual;
  SetRelation relation = SetRelation::Equal;
  std::vector<Verdict> panel;
};

// Perturbation g(x, y) = epsilon * ||x - y|| * e with e a nonzero cone vector.
struct PerturbationSpec {
  double epsilon = 0.0;
  Vec direction;
};

// Outcome of re-checking every truncated-grid solution against the full grid.
struct ExtensionReport {
  bool all_extended = true;
  std::vector<Vec> extended;
  std::vector<Refutation> failures;  // truncated solutions refuted on the full grid
};

struct TruncatedResult {
  SolutionSet on_k0;
  ExtensionReport extension;
};

// Dense affine operator A(x) = slope * x + intercept for variational
// inequalities F(x, y, z) = <A(z), y - x>.
struct AffineOperator {
  std::vector<Vec> slope;  // n rows of n entries
  Vec intercept;           // n entries (empty = zero)
};

// x is a solution iff no scanned y makes F(x, y, x) land in -int C at margin
// tol. Scan order is the grid order; the first violator is stored. A separate
// y grid may refine the universally quantified side.
SolutionSet solve_primal(const VExpr& F, const GridDomain& grid,
                         const PolyCone& cone, double tol,
                         const GridDomain* y_grid = nullptr);

// Same with the slice F(x, y, y).
SolutionSet solve_dual(const VExpr& F, const GridDomain& grid,
                       const PolyCone& cone, double tol,
                       const GridDomain* y_grid = nullptr);

// Solves both problems and classifies the inclusion. with_panel attaches the
// pseudomonotonicity, explicit quasiconvexity, hemicontinuity (grid-pair
// sampled), and off-diagonal cone checks.
CompareReport compare_primal_dual(const VExpr& F, const GridDomain& grid,
                                  const PolyCone& cone, double tol,
                                  bool with_panel,
                                  const TSchedule& sched = TSchedule{});

// Primal solve restricted to the certificate's truncation sub-grid, then each
// sub-grid solution is re-verified against the full grid. Requires a PASS
// certificate: refusing to truncate without one is the point.
TruncatedResult solve_truncated(const VExpr& F, const GridDomain& grid,
                                const CoercivityCertificate& certificate,
                                const PolyCone& cone, double tol);

// F1(x, y, z) = f(z, y) + g(x, y); its primal slice F1(x, y, x) is exactly
// f(x, y) + g(x, y), so the perturbed problem is a primal solve of F1.
VExpr combine_perturbed(const VExpr& f, const VExpr& g);

// x is a solution iff f(x, y) + g(x, y) stays out of -int C for all grid y.
// When the strict-ball coercivity search fails for the combined map, the
// result is annotated: solutions on a truncated unbounded domain may then be
// boundary artifacts.
SolutionSet solve_perturbed(const VExpr& f, const VExpr& g,
                            const GridDomain& grid, const PolyCone& cone,
                            double tol);

// solve_perturbed with g = epsilon * ||x - y|| * direction; validates
// epsilon >= 0 and direction in C with positive norm.
SolutionSet epsilon_equilibrium(const VExpr& f, const PerturbationSpec& spec,
                                const GridDomain& grid, const PolyCone& cone,
                                double tol);

// Transfers a solution x0 of the g-problem (g(x0, y) out of -int C for all y)
// to the combined problem: checks the segment gap condition
//   g(x0, (1-t)x0 + ty) - f((1-t)x0 + ty, y) - g(x0, y) in -int C,
// the sampled implication "f((1-t)x0+ty, y) + g(x0, y) out of -int C for all
// scheduled t in (0,1]" per pair, and the vanishing diagonal of f; on PASS the
// predicted conclusion f(x0, y) + g(x0, y) out of -int C is confirmed by a
// direct scan rather than assumed.
// Errors: NotADualSolution when x0 fails the precondition scan.
Verdict transfer_solution(const VExpr& f, const VExpr& g, const Vec& x0,
                          const GridDomain& grid, const TSchedule& sched,
                          const PolyCone& cone, double tol);

// Builds F(x, y, z) = <A(z), y - x> and dispatches to the primal
// (VviStampacchia) or dual (VviMinty) solver.
SolutionSet vvi(const AffineOperator& op, ProblemKind kind,
                const GridDomain& grid, const PolyCone& cone, double tol);

}  // namespace veq
