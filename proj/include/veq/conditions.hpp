#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "veq/cone.hpp"
#include "veq/expr.hpp"
#include "veq/geometry.hpp"

namespace veq {

enum class Status { Pass, Fail, ConsistentAtResolution };

std::string to_string(Status s);

// Named tuple of points/scalars pinning down a violation; every FAIL verdict
// carries one and replay_counterexample() re-evaluates it from scratch.
struct Counterexample {
  std::vector<std::pair<std::string, Vec>> items;

  const Vec* find(const std::string& name) const {
    for (const auto& [k, v] : items)
      if (k == name) return &v;
    return nullptr;
  }
};

struct Verdict {
  std::string checker;
  Status status = Status::Pass;
  std::optional<Counterexample> counterexample;
  long checked_count = 0;
  double tol = 0.0;
  std::string notes;
};

// Which slice of a trifunction a per-x map check runs on:
//   PrimalSlice  y -> F(x, y, x)
//   DualSlice    y -> F(x, y, y)
//   RawBifunction pair map (x, y) -> F(x, y, .) with z ignored
enum class MapKind { PrimalSlice, DualSlice, RawBifunction };

enum class SliceForm { Primal, Dual };

enum class DiagonalMode { NotNegInt, NegCNotNegInt, Zero, OffdiagNegC };

enum class KkmForm { Primal, Dual };

enum class CoercivityVariant { CompactSet, Core, BallLt, BallLe, Sphere };

std::string to_string(CoercivityVariant v);

struct CoercivityCertificate {
  CoercivityVariant variant = CoercivityVariant::BallLt;
  double r = 0.0;
  std::vector<Vec> k0;                          // the truncation sub-grid
  std::vector<std::pair<Vec, Vec>> assignments; // x outside/at the boundary -> y0
  Region cone_region_used = Region::InNegC;
};

struct CoercivityResult {
  Verdict verdict;
  std::optional<CoercivityCertificate> certificate;  // set iff verdict PASSes
};

// Subset/weight sampling plan shared by the KKM-style checkers; sizes beyond
// the exhaustive pair scan are drawn with the fixed seed, counts land in
// Verdict::notes.
struct SamplePlan {
  int weight_count = 8;
  int max_subsets_per_size = 200;
  std::uint64_t seed = 2024;
};

// For every ordered pair (x, y): F(x,y,x) not in -int C  =>  F(x,y,y) not in
// -int C. Counterexample: x, y, both values.
Verdict check_pseudomonotone(const VExpr& F, const GridDomain& grid,
                             const PolyCone& cone, double tol);

// t*M(y1) + (1-t)*M(y2) - M(t*y1 + (1-t)*y2) in C for the sliced map M and
// sampled two-point weights; the combined point is evaluated off-grid.
Verdict check_c_convex(const VExpr& F, MapKind kind, const GridDomain& grid,
                       const PolyCone& cone, const std::vector<Vec>& weights,
                       double tol);

// For all x != y, z, and t in (0,1): one of
//   F(x,(1-t)x+ty,z) - F(x,x,z)  or  F(x,(1-t)x+ty,z) - F(x,y,z)
// lies in -int C. The identically-zero map fails (0 is never interior).
Verdict check_explicit_quasiconvex(const VExpr& F, const GridDomain& grid,
                                   const TSchedule& sched, const PolyCone& cone,
                                   double tol);

// Sampled-implication form: if F(x,y,(1-t)x+ty) stays out of -int C for every
// scheduled t but F(x,y,x) is inside, the pair is a failure. A clean sweep is
// only CONSISTENT_AT_RESOLUTION: finitely many t cannot certify the
// "for all t" antecedent.
Verdict check_hemicontinuity(const VExpr& F,
                             const std::vector<std::pair<Vec, Vec>>& pairs,
                             const TSchedule& sched, const PolyCone& cone,
                             double tol);

// Closedness surrogate via user-provided witnesses: every M(x_k) - z_k must
// lie in -C, the witness gaps ||z_k - z|| must be nonincreasing and end
// commensurate with the sequence's own convergence, and M(limit) - z must lie
// in C.
Verdict verify_condition_c_witness(const VExpr& F, SliceForm slice, const Vec& y,
                                   const WitnessSequence& seq,
                                   const std::vector<Vec>& witnesses,
                                   const Vec& witness_limit, const PolyCone& cone,
                                   double tol);

// Upper-semicontinuity breakdown certificate: PASS confirms the violation,
// i.e. c is interior but c + M(x) - M(probe) is not.
Verdict check_usc_violation(const VExpr& F, SliceForm slice, const Vec& y,
                            const Vec& x, const Vec& c, const Vec& probe,
                            const PolyCone& cone, double tol);

// sum_i w_i * f(p, y_i) with p = sum_i w_i * y_i stays out of -int C over
// sampled subsets (exhaustive for sizes 1-2) and weights.
Verdict check_essential_quasimonotone(const VExpr& f, const GridDomain& grid,
                                      const PolyCone& cone, int subset_size,
                                      const SamplePlan& plan, double tol);

// KKM property of G(y) = {x : F(x,y,x) not in -int C} (primal) or the
// z=y variant (dual): each sampled convex combination p of {y_i} must lie in
// some G(y_i).
Verdict check_kkm(const VExpr& F, KkmForm form, const GridDomain& grid,
                  int subset_size, const SamplePlan& plan, const PolyCone& cone,
                  double tol);

// F(x,x,x) per mode: NOT_NEG_INT, NEG_C_NOT_NEG_INT, ZERO (diagonal norm at
// tol, for bifunctions), or OFFDIAG_NEG_C which instead scans F(x,x,y) over
// all pairs x != y.
Verdict check_diagonal(const VExpr& F, const GridDomain& grid, DiagonalMode mode,
                       const PolyCone& cone, double tol);

// Searches radii over the sorted distinct point norms, smallest first, and
// inside each radius scans witness candidates by ascending norm then grid
// order. COMPACT_SET requires one shared y0 driving F(x,y0,x) into -int C off
// K0; the other variants require per-x witnesses reaching -C. The slice picks
// F(x,y0,x) (primal) or F(x,y0,y0) (dual).
CoercivityResult find_coercivity(const VExpr& F, const GridDomain& grid,
                                 CoercivityVariant variant, const PolyCone& cone,
                                 double tol, SliceForm slice = SliceForm::Primal);

// Difference-quotient probe of the sliced map between consecutive grid points:
// a jump larger than lipschitz_bound * spacing (plus a small tol floor) is a
// FAIL pinning the offending pair, otherwise CONSISTENT_AT_RESOLUTION.
Verdict continuity_probe(const VExpr& F, SliceForm slice, const GridDomain& grid,
                         double lipschitz_bound, double tol);

// Re-evaluates a FAIL verdict's counterexample against the same expression,
// cone and tolerance. True = the violation reproduces. Coercivity failures are
// global statements, so they additionally need the grid they were found on.
bool replay_counterexample(const Verdict& v, const VExpr& F, const PolyCone& cone,
                           const GridDomain* grid = nullptr);

}  // namespace veq
