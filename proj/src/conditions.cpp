#include "veq/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "veq/errors.hpp"
#include "veq/rng.hpp"

namespace veq {

std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::ConsistentAtResolution: return "CONSISTENT_AT_RESOLUTION";
  }
  return "?";
}

std::string to_string(CoercivityVariant v) {
  switch (v) {
    case CoercivityVariant::CompactSet: return "COMPACT_SET";
    case CoercivityVariant::Core: return "CORE";
    case CoercivityVariant::BallLt: return "BALL_LT";
    case CoercivityVariant::BallLe: return "BALL_LE";
    case CoercivityVariant::Sphere: return "SPHERE";
  }
  return "?";
}

namespace {

Vec slice_eval(const VExpr& F, SliceForm slice, const Vec& x, const Vec& y) {
  return slice == SliceForm::Primal ? eval(F, x, y, x) : eval(F, x, y, y);
}

// Deterministic stride subsample: always includes the first and last index.
std::vector<std::size_t> strided_indices(std::size_t n, std::size_t target) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  if (target < 2) target = 2;
  const std::size_t stride = n <= target ? 1 : (n + target - 1) / target;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

void push(Counterexample& ce, const std::string& name, const Vec& v) {
  ce.items.emplace_back(name, v);
}

void push(Counterexample& ce, const std::string& name, double v) {
  ce.items.emplace_back(name, Vec{v});
}

}  // namespace

Verdict check_pseudomonotone(const VExpr& F, const GridDomain& grid,
                             const PolyCone& cone, double tol) {
  Verdict v;
  v.checker = "pseudomonotone";
  v.tol = tol;
  const auto& pts = grid.points;
  // x-major scan; first counterexample in scan order wins
  const std::size_t n = pts.size();
  std::size_t budget_side = n;
  if (n > 1 && n * n > 20'000'000ull) {
    budget_side = 4472;  // ~2e7 pairs
    v.notes = "pair scan subsampled by stride";
  }
  const auto xi = strided_indices(n, budget_side);
  const auto yi = strided_indices(n, budget_side);
  for (const auto i : xi) {
    for (const auto j : yi) {
      const Vec& x = pts[i];
      const Vec& y = pts[j];
      const Vec fxy_x = eval(F, x, y, x);
      ++v.checked_count;
      if (member(fxy_x, cone, Region::InNegIntC, tol)) continue;  // vacuous
      const Vec fxy_y = eval(F, x, y, y);
      if (member(fxy_y, cone, Region::InNegIntC, tol)) {
        v.status = Status::Fail;
        Counterexample ce;
        push(ce, "x", x);
        push(ce, "y", y);
        push(ce, "F(x,y,x)", fxy_x);
        push(ce, "F(x,y,y)", fxy_y);
        v.counterexample = std::move(ce);
        return v;
      }
    }
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_c_convex(const VExpr& F, MapKind kind, const GridDomain& grid,
                       const PolyCone& cone, const std::vector<Vec>& weights,
                       double tol) {
  Verdict v;
  v.checker = kind == MapKind::PrimalSlice  ? "c_convex_primal_slice"
              : kind == MapKind::DualSlice  ? "c_convex_dual_slice"
                                            : "c_convex_raw";
  v.tol = tol;
  for (const auto& w : weights)
    if (w.size() != 2) fail("DimensionMismatch", "c_convex weights must be pairs");

  const auto map = [&](const Vec& x, const Vec& u) {
    switch (kind) {
      case MapKind::PrimalSlice: return eval(F, x, u, x);
      case MapKind::DualSlice: return eval(F, x, u, u);
      case MapKind::RawBifunction: return eval(F, x, u, x);  // z never occurs
    }
    return Vec{};
  };

  const auto& pts = grid.points;
  const std::size_t n = pts.size();
  std::size_t budget_side = n;
  if (n > 1 && n * n * n / 2 > 20'000'000ull) {
    budget_side = 341;
    v.notes = "combination scan subsampled by stride";
  }
  const auto xi = strided_indices(n, budget_side);
  const auto pi = strided_indices(n, budget_side);
  for (const auto ix : xi) {
    const Vec& x = pts[ix];
    for (std::size_t a = 0; a < pi.size(); ++a) {
      for (std::size_t b = a + 1; b < pi.size(); ++b) {
        const Vec& y1 = pts[pi[a]];
        const Vec& y2 = pts[pi[b]];
        const Vec m1 = map(x, y1);
        const Vec m2 = map(x, y2);
        for (const auto& w : weights) {
          Vec combo(y1.size());
          for (std::size_t c = 0; c < combo.size(); ++c)
            combo[c] = w[0] * y1[c] + w[1] * y2[c];
          const Vec mc = map(x, combo);
          Vec value(m1.size());
          for (std::size_t c = 0; c < value.size(); ++c)
            value[c] = w[0] * m1[c] + w[1] * m2[c] - mc[c];
          ++v.checked_count;
          if (!member(value, cone, Region::InC, tol)) {
            v.status = Status::Fail;
            Counterexample ce;
            push(ce, "x", x);
            push(ce, "y1", y1);
            push(ce, "y2", y2);
            push(ce, "lambda", w);
            push(ce, "value", value);
            v.counterexample = std::move(ce);
            return v;
          }
        }
      }
    }
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_explicit_quasiconvex(const VExpr& F, const GridDomain& grid,
                                   const TSchedule& sched, const PolyCone& cone,
                                   double tol) {
  Verdict v;
  v.checker = "explicit_quasiconvex";
  v.tol = tol;
  std::vector<double> ts;
  for (double t : sched.values())
    if (t > 0.0 && t < 1.0) ts.push_back(t);  // definition needs t strictly inside

  const auto& pts = grid.points;
  const std::size_t n = pts.size();
  const std::size_t per_triple = std::max<std::size_t>(1, ts.size());
  std::size_t budget_side = n;
  if (n > 1 && n * n * n > 10'000'000ull / per_triple) {
    budget_side = static_cast<std::size_t>(
        std::cbrt(10'000'000.0 / static_cast<double>(per_triple)));
    budget_side = std::max<std::size_t>(budget_side, 2);
    v.notes = "triple scan subsampled by stride";
  }
  const auto xi = strided_indices(n, budget_side);
  for (const auto ix : xi) {
    for (const auto iy : xi) {
      if (ix == iy) continue;
      const Vec& x = pts[ix];
      const Vec& y = pts[iy];
      if (exactly_equal(x, y)) continue;
      for (const auto iz : xi) {
        const Vec& z = pts[iz];
        const Vec fxxz = eval(F, x, x, z);
        const Vec fxyz = eval(F, x, y, z);
        for (const double t : ts) {
          const Vec mid = lerp(x, y, t);
          const Vec fmid = eval(F, x, mid, z);
          const Vec d1 = sub(fmid, fxxz);
          const Vec d2 = sub(fmid, fxyz);
          ++v.checked_count;
          if (!member(d1, cone, Region::InNegIntC, tol) &&
              !member(d2, cone, Region::InNegIntC, tol)) {
            v.status = Status::Fail;
            Counterexample ce;
            push(ce, "x", x);
            push(ce, "y", y);
            push(ce, "z", z);
            push(ce, "t", t);
            push(ce, "diff_to_diagonal", d1);
            push(ce, "diff_to_endpoint", d2);
            v.counterexample = std::move(ce);
            return v;
          }
        }
      }
    }
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_hemicontinuity(const VExpr& F,
                             const std::vector<std::pair<Vec, Vec>>& pairs,
                             const TSchedule& sched, const PolyCone& cone,
                             double tol) {
  Verdict v;
  v.checker = "hemicontinuity";
  v.tol = tol;
  const auto ts = sched.values();
  for (const auto& [x, y] : pairs) {
    if (exactly_equal(x, y)) continue;
    bool antecedent = true;
    for (const double t : ts) {
      const Vec z = lerp(x, y, t);
      if (member(eval(F, x, y, z), cone, Region::InNegIntC, tol)) {
        antecedent = false;
        break;
      }
    }
    ++v.checked_count;
    if (!antecedent) continue;
    const Vec at_zero = eval(F, x, y, x);
    if (member(at_zero, cone, Region::InNegIntC, tol)) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "x", x);
      push(ce, "y", y);
      push(ce, "F(x,y,x)", at_zero);
      push(ce, "t_values", ts);
      v.counterexample = std::move(ce);
      v.notes = "limit point breaks the implication at the sampled schedule";
      return v;
    }
  }
  v.status = Status::ConsistentAtResolution;
  v.notes = "finite t-sample cannot certify the for-all-t antecedent";
  return v;
}

Verdict verify_condition_c_witness(const VExpr& F, SliceForm slice, const Vec& y,
                                   const WitnessSequence& seq,
                                   const std::vector<Vec>& witnesses,
                                   const Vec& witness_limit, const PolyCone& cone,
                                   double tol) {
  Verdict v;
  v.checker = slice == SliceForm::Primal ? "condition_c_witness_primal"
                                         : "condition_c_witness_dual";
  v.tol = tol;
  if (witnesses.size() != seq.points.size())
    fail("LengthMismatch", "need exactly one witness per sequence point");

  for (std::size_t k = 0; k < seq.points.size(); ++k) {
    const Vec value = slice_eval(F, slice, seq.points[k], y);
    const Vec diff = sub(value, witnesses[k]);
    ++v.checked_count;
    if (!member(diff, cone, Region::InNegC, tol)) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "clause", 1.0);
      push(ce, "k", static_cast<double>(k + 1));
      push(ce, "x_k", seq.points[k]);
      push(ce, "y", y);
      push(ce, "z_k", witnesses[k]);
      push(ce, "value", value);
      v.counterexample = std::move(ce);
      v.notes = "slice value minus witness left -C at index " + std::to_string(k + 1);
      return v;
    }
  }

  double prev_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < witnesses.size(); ++k) {
    const double gap = dist2(witnesses[k], witness_limit);
    if (gap > prev_gap + tol) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "clause", 2.0);
      push(ce, "z_prev", witnesses[k - 1]);
      push(ce, "z_curr", witnesses[k]);
      push(ce, "z_limit", witness_limit);
      v.counterexample = std::move(ce);
      v.notes = "witness gaps grew at index " + std::to_string(k + 1);
      return v;
    }
    prev_gap = gap;
  }
  // The witnesses must close in on the declared limit at least as fast as the
  // sequence itself closes in on its own limit (within a factor of 10).
  const double allowed = std::max(10.0 * tol, 10.0 * seq.final_gap());
  const double final_gap = dist2(witnesses.back(), witness_limit);
  if (final_gap > allowed) {
    v.status = Status::Fail;
    Counterexample ce;
    push(ce, "clause", 4.0);
    push(ce, "z_curr", witnesses.back());
    push(ce, "z_limit", witness_limit);
    push(ce, "allowed", allowed);
    v.counterexample = std::move(ce);
    v.notes = "final witness gap " + format_number(final_gap) +
              " exceeds allowance " + format_number(allowed);
    return v;
  }

  const Vec at_limit = slice_eval(F, slice, seq.limit, y);
  const Vec final_diff = sub(at_limit, witness_limit);
  if (!member(final_diff, cone, Region::InC, tol)) {
    v.status = Status::Fail;
    Counterexample ce;
    push(ce, "clause", 3.0);
    push(ce, "limit", seq.limit);
    push(ce, "y", y);
    push(ce, "z_limit", witness_limit);
    push(ce, "value", at_limit);
    v.counterexample = std::move(ce);
    v.notes = "slice value at the limit minus witness limit left C";
    return v;
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_usc_violation(const VExpr& F, SliceForm slice, const Vec& y,
                            const Vec& x, const Vec& c, const Vec& probe,
                            const PolyCone& cone, double tol) {
  Verdict v;
  v.checker = slice == SliceForm::Primal ? "usc_violation_primal"
                                         : "usc_violation_dual";
  v.tol = tol;
  v.checked_count = 1;
  if (!member(c, cone, Region::InIntC, tol)) {
    v.status = Status::Fail;
    Counterexample ce;
    push(ce, "clause", 1.0);
    push(ce, "c", c);
    v.counterexample = std::move(ce);
    v.notes = "certificate direction not interior";
    return v;
  }
  const Vec at_x = slice_eval(F, slice, x, y);
  const Vec at_probe = slice_eval(F, slice, probe, y);
  Vec shifted(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    shifted[i] = c[i] + at_x[i] - at_probe[i];
  if (member(shifted, cone, Region::InIntC, tol)) {
    v.status = Status::Fail;
    Counterexample ce;
    push(ce, "clause", 2.0);
    push(ce, "c", c);
    push(ce, "x", x);
    push(ce, "probe", probe);
    push(ce, "y", y);
    push(ce, "difference", shifted);
    v.counterexample = std::move(ce);
    v.notes = "no violation at this probe: c + M(x) - M(probe) stays interior";
    return v;
  }
  v.status = Status::Pass;
  Counterexample ce;
  push(ce, "c", c);
  push(ce, "x", x);
  push(ce, "probe", probe);
  push(ce, "y", y);
  push(ce, "difference", shifted);
  v.counterexample = std::move(ce);
  v.notes = "violation confirmed: interior shift escapes the interior";
  return v;
}

namespace {

// Subset enumeration shared by the KKM-style checkers: exhaustive singletons
// and pairs, seeded draws for sizes 3 and 4.
std::vector<std::vector<std::size_t>> enumerate_subsets(std::size_t n,
                                                        int max_size,
                                                        const SamplePlan& plan,
                                                        std::string& notes) {
  std::vector<std::vector<std::size_t>> subsets;
  long sampled = 0;
  if (max_size >= 1)
    for (std::size_t i = 0; i < n; ++i) subsets.push_back({i});
  if (max_size >= 2)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) subsets.push_back({i, j});
  Rng rng(plan.seed);
  std::set<std::vector<std::size_t>> seen;
  for (int size = 3; size <= max_size; ++size) {
    if (static_cast<std::size_t>(size) > n) break;
    for (int draw = 0; draw < plan.max_subsets_per_size; ++draw) {
      std::vector<std::size_t> s;
      while (s.size() < static_cast<std::size_t>(size)) {
        const std::size_t cand = rng.index(n);
        if (std::find(s.begin(), s.end(), cand) == s.end()) s.push_back(cand);
      }
      std::sort(s.begin(), s.end());
      if (seen.insert(s).second) {
        subsets.push_back(std::move(s));
        ++sampled;
      }
    }
  }
  notes = "subsets: exhaustive up to size 2, " + std::to_string(sampled) +
          " sampled for sizes 3.." + std::to_string(max_size);
  return subsets;
}

}  // namespace

Verdict check_essential_quasimonotone(const VExpr& f, const GridDomain& grid,
                                      const PolyCone& cone, int subset_size,
                                      const SamplePlan& plan, double tol) {
  if (subset_size < 1 || subset_size > 4)
    fail("BadBounds", "subset size must lie in 1..4");
  Verdict v;
  v.checker = "essential_quasimonotone";
  v.tol = tol;
  const auto& pts = grid.points;
  auto subsets = enumerate_subsets(pts.size(), subset_size, plan, v.notes);
  for (const auto& subset : subsets) {
    const int k = static_cast<int>(subset.size());
    const auto weights = simplex_weights(k, k == 1 ? 1 : plan.weight_count, plan.seed);
    for (const auto& w : weights) {
      Vec p(pts[subset[0]].size(), 0.0);
      for (int i = 0; i < k; ++i)
        for (std::size_t c = 0; c < p.size(); ++c) p[c] += w[i] * pts[subset[i]][c];
      Vec value;
      for (int i = 0; i < k; ++i) {
        const Vec fi = eval(f, p, pts[subset[i]], p);
        if (value.empty()) value.assign(fi.size(), 0.0);
        for (std::size_t c = 0; c < fi.size(); ++c) value[c] += w[i] * fi[c];
      }
      ++v.checked_count;
      if (member(value, cone, Region::InNegIntC, tol)) {
        v.status = Status::Fail;
        Counterexample ce;
        for (int i = 0; i < k; ++i)
          push(ce, "member_" + std::to_string(i + 1), pts[subset[i]]);
        push(ce, "lambda", w);
        push(ce, "p", p);
        push(ce, "value", value);
        v.counterexample = std::move(ce);
        return v;
      }
    }
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_kkm(const VExpr& F, KkmForm form, const GridDomain& grid,
                  int subset_size, const SamplePlan& plan, const PolyCone& cone,
                  double tol) {
  if (subset_size < 1 || subset_size > 4)
    fail("BadBounds", "subset size must lie in 1..4");
  Verdict v;
  v.checker = form == KkmForm::Primal ? "kkm_primal" : "kkm_dual";
  v.tol = tol;
  const auto& pts = grid.points;
  auto subsets = enumerate_subsets(pts.size(), subset_size, plan, v.notes);
  for (const auto& subset : subsets) {
    const int k = static_cast<int>(subset.size());
    const auto weights = simplex_weights(k, k == 1 ? 1 : plan.weight_count, plan.seed);
    for (const auto& w : weights) {
      Vec p(pts[subset[0]].size(), 0.0);
      for (int i = 0; i < k; ++i)
        for (std::size_t c = 0; c < p.size(); ++c) p[c] += w[i] * pts[subset[i]][c];
      bool covered = false;
      std::vector<Vec> values(k);
      for (int i = 0; i < k; ++i) {
        const Vec& yi = pts[subset[i]];
        values[i] = form == KkmForm::Primal ? eval(F, p, yi, p) : eval(F, p, yi, yi);
        if (!member(values[i], cone, Region::InNegIntC, tol)) {
          covered = true;
          break;
        }
      }
      ++v.checked_count;
      if (!covered) {
        v.status = Status::Fail;
        Counterexample ce;
        for (int i = 0; i < k; ++i)
          push(ce, "member_" + std::to_string(i + 1), pts[subset[i]]);
        push(ce, "lambda", w);
        push(ce, "p", p);
        for (int i = 0; i < k; ++i)
          push(ce, "value_" + std::to_string(i + 1), values[i]);
        v.counterexample = std::move(ce);
        v.notes = "combination point escapes every G(y_i)";
        return v;
      }
    }
  }
  v.status = Status::Pass;
  return v;
}

Verdict check_diagonal(const VExpr& F, const GridDomain& grid, DiagonalMode mode,
                       const PolyCone& cone, double tol) {
  Verdict v;
  v.tol = tol;
  v.checker = mode == DiagonalMode::NotNegInt      ? "diagonal_not_neg_int"
              : mode == DiagonalMode::NegCNotNegInt ? "diagonal_neg_c_not_neg_int"
              : mode == DiagonalMode::Zero          ? "diagonal_zero"
                                                    : "offdiag_neg_c";
  if (mode == DiagonalMode::OffdiagNegC) {
    const std::size_t n = grid.points.size();
    std::size_t budget_side = n;
    if (n > 1 && n * n > 20'000'000ull) {
      budget_side = 4472;
      v.notes = "pair scan subsampled by stride";
    }
    const auto xi = strided_indices(n, budget_side);
    for (const auto i : xi) {
      for (const auto j : xi) {
        if (i == j) continue;
        const Vec& x = grid.points[i];
        const Vec& y = grid.points[j];
        const Vec value = eval(F, x, x, y);
        ++v.checked_count;
        if (!member(value, cone, Region::InNegC, tol)) {
          v.status = Status::Fail;
          Counterexample ce;
          push(ce, "x", x);
          push(ce, "y", y);
          push(ce, "F(x,x,y)", value);
          v.counterexample = std::move(ce);
          return v;
        }
      }
    }
    v.status = Status::Pass;
    return v;
  }

  for (const auto& x : grid.points) {
    const Vec value = eval(F, x, x, x);
    ++v.checked_count;
    bool ok = true;
    switch (mode) {
      case DiagonalMode::NotNegInt:
        ok = !member(value, cone, Region::InNegIntC, tol);
        break;
      case DiagonalMode::NegCNotNegInt:
        ok = member(value, cone, Region::InNegC, tol) &&
             !member(value, cone, Region::InNegIntC, tol);
        break;
      case DiagonalMode::Zero:
        ok = norm2(value) <= tol;
        break;
      case DiagonalMode::OffdiagNegC: break;  // handled above
    }
    if (!ok) {
      v.status = Status::Fail;
      Counterexample ce;
      push(ce, "x", x);
      push(ce, "F(x,x,x)", value);
      v.counterexample = std::move(ce);
      return v;
    }
  }
  v.status = Status::Pass;
  return v;
}

namespace {

struct NormBuckets {
  std::vector<double> values;          // representative norm per bucket, ascending
  std::vector<std::size_t> bucket_of;  // per grid point
};

NormBuckets bucket_norms(const GridDomain& grid) {
  const std::size_t n = grid.points.size();
  std::vector<std::pair<double, std::size_t>> by_norm(n);
  for (std::size_t i = 0; i < n; ++i) by_norm[i] = {norm2(grid.points[i]), i};
  std::sort(by_norm.begin(), by_norm.end());
  NormBuckets b;
  b.bucket_of.resize(n);
  const double snap = 1e-12 * std::max(1.0, grid.norm_bound);
  for (const auto& [nv, idx] : by_norm) {
    if (b.values.empty() || nv > b.values.back() + snap) b.values.push_back(nv);
    b.bucket_of[idx] = b.values.size() - 1;
  }
  return b;
}

// Witness scan order: ascending norm, then lexicographic point order.
std::vector<std::size_t> witness_order(const GridDomain& grid,
                                       const NormBuckets& buckets) {
  std::vector<std::size_t> order(grid.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (buckets.bucket_of[a] != buckets.bucket_of[b])
      return buckets.bucket_of[a] < buckets.bucket_of[b];
    return std::lexicographical_compare(
        grid.points[a].begin(), grid.points[a].end(), grid.points[b].begin(),
        grid.points[b].end());
  });
  return order;
}

}  // namespace

CoercivityResult find_coercivity(const VExpr& F, const GridDomain& grid,
                                 CoercivityVariant variant, const PolyCone& cone,
                                 double tol, SliceForm slice) {
  CoercivityResult result;
  Verdict& v = result.verdict;
  v.checker = "coercivity_" + to_string(variant) +
              (slice == SliceForm::Dual ? "_dual" : "");
  v.tol = tol;

  const auto& pts = grid.points;
  const std::size_t n = pts.size();
  const auto buckets = bucket_norms(grid);
  const auto order = witness_order(grid, buckets);
  const std::size_t nb = buckets.values.size();

  const auto covers = [&](std::size_t x_idx, std::size_t y_idx, Region region) {
    const Vec value = slice_eval(F, slice, pts[x_idx], pts[y_idx]);
    ++v.checked_count;
    return member(value, cone, region, tol);
  };

  if (variant == CoercivityVariant::CompactSet) {
    // one shared y0 must push every point outside K0 strictly inside -C
    if (nb < 2) {
      v.status = Status::Fail;
      v.notes = "grid has a single norm shell; no nonvacuous truncation exists";
      return result;
    }
    // bad_buckets[y]: ascending norm buckets of the x not driven interior by y
    std::vector<std::vector<std::size_t>> bad_buckets(n);
    std::vector<std::size_t> first_bad(n, SIZE_MAX);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if (!covers(x, y, Region::InNegIntC)) {
          bad_buckets[y].push_back(buckets.bucket_of[x]);
          if (first_bad[y] == SIZE_MAX) first_bad[y] = x;
        }
      }
      std::sort(bad_buckets[y].begin(), bad_buckets[y].end());
    }
    long best_uncovered = -1;
    std::size_t best_bucket = 0, best_witness = SIZE_MAX;
    for (std::size_t b = 0; b + 1 < nb; ++b) {
      for (const auto y : order) {
        // uncovered = bad points left outside K0(b)
        const auto& bad = bad_buckets[y];
        const long uncovered = static_cast<long>(
            bad.end() - std::upper_bound(bad.begin(), bad.end(), b));
        if (uncovered == 0) {
          CoercivityCertificate cert;
          cert.variant = variant;
          cert.r = buckets.values[b];
          cert.cone_region_used = Region::InNegIntC;
          for (std::size_t x = 0; x < n; ++x) {
            if (buckets.bucket_of[x] <= b)
              cert.k0.push_back(pts[x]);
            else
              cert.assignments.emplace_back(pts[x], pts[y]);
          }
          result.certificate = std::move(cert);
          v.status = Status::Pass;
          v.notes = "K0 = norm ball of radius " + format_number(buckets.values[b]) +
                    ", shared witness " + format_point(pts[y]);
          return result;
        }
        if (best_uncovered < 0 || uncovered < best_uncovered) {
          best_uncovered = uncovered;
          best_bucket = b;
          best_witness = y;
        }
      }
    }
    v.status = Status::Fail;
    Counterexample ce;
    push(ce, "r", buckets.values[best_bucket]);
    if (best_witness != SIZE_MAX && first_bad[best_witness] != SIZE_MAX)
      push(ce, "x", pts[first_bad[best_witness]]);
    v.counterexample = std::move(ce);
    v.notes = "no (K0, y0) pair covers the tail";
    return result;
  }

  // Per-x variants: a witness must reach -C. BALL_LT/CORE/SPHERE draw
  // witnesses from norms strictly below the point's own; BALL_LE draws from
  // the ball of radius r, which may include the point itself, so its pool is
  // unrestricted here and filtered against r at candidate time.
  // cover_bucket[x]: lowest bucket of a covering witness, or SIZE_MAX.
  std::vector<std::size_t> cover_bucket(n, SIZE_MAX);
  std::vector<std::size_t> cover_witness(n, SIZE_MAX);
  const bool pool_below_x = variant != CoercivityVariant::BallLe;
  for (std::size_t x = 0; x < n; ++x) {
    for (const auto y : order) {
      if (pool_below_x && buckets.bucket_of[y] >= buckets.bucket_of[x]) break;
      if (covers(x, y, Region::InNegC)) {
        cover_bucket[x] = buckets.bucket_of[y];
        cover_witness[x] = y;
        break;
      }
    }
  }

  const auto obligated = [&](std::size_t x, std::size_t b) {
    switch (variant) {
      case CoercivityVariant::BallLt: return buckets.bucket_of[x] > b;
      case CoercivityVariant::BallLe: return buckets.bucket_of[x] <= b;
      case CoercivityVariant::Core:
      case CoercivityVariant::Sphere: return buckets.bucket_of[x] == b;
      case CoercivityVariant::CompactSet: return false;
    }
    return false;
  };
  const auto satisfied = [&](std::size_t x, std::size_t b) {
    if (cover_witness[x] == SIZE_MAX) return false;
    // BALL_LE draws witnesses from the ball of radius r, the others from
    // norms strictly below the point's own
    if (variant == CoercivityVariant::BallLe) return cover_bucket[x] < b;
    return true;
  };

  long best_uncovered = -1;
  std::size_t best_bucket = 0, best_first_uncovered = SIZE_MAX;
  for (std::size_t b = 0; b < nb; ++b) {
    if (buckets.values[b] <= 0.0) continue;  // r must be positive
    if (variant == CoercivityVariant::BallLt && b + 1 >= nb)
      continue;  // tail would be empty: a vacuous certificate is no certificate
    if (variant != CoercivityVariant::BallLt && b == 0)
      continue;  // witness pool below r would be empty
    long uncovered = 0;
    std::size_t first_uncovered = SIZE_MAX;
    long obligations = 0;
    for (std::size_t x = 0; x < n; ++x) {
      if (!obligated(x, b)) continue;
      ++obligations;
      if (!satisfied(x, b)) {
        ++uncovered;
        if (first_uncovered == SIZE_MAX) first_uncovered = x;
      }
    }
    if (obligations == 0) continue;
    if (uncovered == 0) {
      CoercivityCertificate cert;
      cert.variant = variant;
      cert.r = buckets.values[b];
      cert.cone_region_used = Region::InNegC;
      for (std::size_t x = 0; x < n; ++x) {
        if (buckets.bucket_of[x] <= b) cert.k0.push_back(pts[x]);
        if (obligated(x, b))
          cert.assignments.emplace_back(pts[x], pts[cover_witness[x]]);
      }
      result.certificate = std::move(cert);
      v.status = Status::Pass;
      v.notes = "radius " + format_number(buckets.values[b]) + " with " +
                std::to_string(cert.assignments.size()) + " witness assignments";
      return result;
    }
    if (best_uncovered < 0 || uncovered < best_uncovered) {
      best_uncovered = uncovered;
      best_bucket = b;
      best_first_uncovered = first_uncovered;
    }
  }
  v.status = Status::Fail;
  if (best_uncovered >= 0) {
    Counterexample ce;
    push(ce, "r", buckets.values[best_bucket]);
    push(ce, "x", pts[best_first_uncovered]);
    v.counterexample = std::move(ce);
    v.notes = "best candidate r leaves " + std::to_string(best_uncovered) +
              " obligated point(s) without a witness";
  } else {
    v.notes = "no candidate radius yields a nonvacuous obligation set";
  }
  return result;
}

bool replay_counterexample(const Verdict& v, const VExpr& F, const PolyCone& cone,
                           const GridDomain* grid) {
  if (v.status != Status::Fail || !v.counterexample) return false;
  const Counterexample& ce = *v.counterexample;
  const double tol = v.tol;
  const auto get = [&](const char* name) -> const Vec& {
    const Vec* p = ce.find(name);
    if (!p) fail("LengthMismatch", std::string("counterexample lacks '") + name + "'");
    return *p;
  };
  const std::string& c = v.checker;

  if (c == "pseudomonotone") {
    const Vec& x = get("x");
    const Vec& y = get("y");
    return !member(eval(F, x, y, x), cone, Region::InNegIntC, tol) &&
           member(eval(F, x, y, y), cone, Region::InNegIntC, tol);
  }
  if (c.rfind("c_convex", 0) == 0) {
    const MapKind kind = c == "c_convex_primal_slice" ? MapKind::PrimalSlice
                         : c == "c_convex_dual_slice" ? MapKind::DualSlice
                                                      : MapKind::RawBifunction;
    const Vec& x = get("x");
    const Vec& y1 = get("y1");
    const Vec& y2 = get("y2");
    const Vec& w = get("lambda");
    const auto map = [&](const Vec& u) {
      return kind == MapKind::DualSlice ? eval(F, x, u, u) : eval(F, x, u, x);
    };
    Vec combo(y1.size());
    for (std::size_t i = 0; i < combo.size(); ++i)
      combo[i] = w[0] * y1[i] + w[1] * y2[i];
    const Vec m1 = map(y1), m2 = map(y2), mc = map(combo);
    Vec value(m1.size());
    for (std::size_t i = 0; i < value.size(); ++i)
      value[i] = w[0] * m1[i] + w[1] * m2[i] - mc[i];
    return !member(value, cone, Region::InC, tol);
  }
  if (c == "explicit_quasiconvex") {
    const Vec& x = get("x");
    const Vec& y = get("y");
    const Vec& z = get("z");
    const double t = get("t")[0];
    const Vec mid = lerp(x, y, t);
    const Vec d1 = sub(eval(F, x, mid, z), eval(F, x, x, z));
    const Vec d2 = sub(eval(F, x, mid, z), eval(F, x, y, z));
    return !member(d1, cone, Region::InNegIntC, tol) &&
           !member(d2, cone, Region::InNegIntC, tol);
  }
  if (c == "hemicontinuity") {
    const Vec& x = get("x");
    const Vec& y = get("y");
    const Vec& ts = get("t_values");
    for (const double t : ts)
      if (member(eval(F, x, y, lerp(x, y, t)), cone, Region::InNegIntC, tol))
        return false;
    return member(eval(F, x, y, x), cone, Region::InNegIntC, tol);
  }
  if (c.rfind("condition_c_witness", 0) == 0) {
    const SliceForm slice = c == "condition_c_witness_dual" ? SliceForm::Dual
                                                            : SliceForm::Primal;
    const int clause = static_cast<int>(get("clause")[0]);
    if (clause == 1) {
      const Vec value = slice_eval(F, slice, get("x_k"), get("y"));
      return !member(sub(value, get("z_k")), cone, Region::InNegC, tol);
    }
    if (clause == 2) {
      const double prev = dist2(get("z_prev"), get("z_limit"));
      const double cur = dist2(get("z_curr"), get("z_limit"));
      return cur > prev + tol;
    }
    if (clause == 4)
      return dist2(get("z_curr"), get("z_limit")) > get("allowed")[0];
    const Vec value = slice_eval(F, slice, get("limit"), get("y"));
    return !member(sub(value, get("z_limit")), cone, Region::InC, tol);
  }
  if (c.rfind("usc_violation", 0) == 0) {
    const SliceForm slice =
        c == "usc_violation_dual" ? SliceForm::Dual : SliceForm::Primal;
    const int clause = static_cast<int>(get("clause")[0]);
    if (clause == 1) return !member(get("c"), cone, Region::InIntC, tol);
    const Vec at_x = slice_eval(F, slice, get("x"), get("y"));
    const Vec at_probe = slice_eval(F, slice, get("probe"), get("y"));
    const Vec& cc = get("c");
    Vec shifted(cc.size());
    for (std::size_t i = 0; i < cc.size(); ++i)
      shifted[i] = cc[i] + at_x[i] - at_probe[i];
    return member(shifted, cone, Region::InIntC, tol);
  }
  if (c == "essential_quasimonotone" || c == "kkm_primal" || c == "kkm_dual") {
    std::vector<Vec> members;
    for (int i = 1;; ++i) {
      const Vec* m = ce.find("member_" + std::to_string(i));
      if (!m) break;
      members.push_back(*m);
    }
    const Vec& w = get("lambda");
    Vec p(members[0].size(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t d = 0; d < p.size(); ++d) p[d] += w[i] * members[i][d];
    if (c == "essential_quasimonotone") {
      Vec value;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const Vec fi = eval(F, p, members[i], p);
        if (value.empty()) value.assign(fi.size(), 0.0);
        for (std::size_t d = 0; d < fi.size(); ++d) value[d] += w[i] * fi[d];
      }
      return member(value, cone, Region::InNegIntC, tol);
    }
    for (const auto& yi : members) {
      const Vec value =
          c == "kkm_primal" ? eval(F, p, yi, p) : eval(F, p, yi, yi);
      if (!member(value, cone, Region::InNegIntC, tol)) return false;
    }
    return true;
  }
  if (c == "diagonal_not_neg_int")
    return member(eval(F, get("x"), get("x"), get("x")), cone, Region::InNegIntC,
                  tol);
  if (c == "diagonal_neg_c_not_neg_int") {
    const Vec value = eval(F, get("x"), get("x"), get("x"));
    return !(member(value, cone, Region::InNegC, tol) &&
             !member(value, cone, Region::InNegIntC, tol));
  }
  if (c == "diagonal_zero")
    return norm2(eval(F, get("x"), get("x"), get("x"))) > tol;
  if (c == "offdiag_neg_c")
    return !member(eval(F, get("x"), get("x"), get("y")), cone, Region::InNegC,
                   tol);
  if (c.rfind("coercivity_", 0) == 0) {
    if (!grid) return false;
    const bool dual = c.size() > 5 && c.rfind("_dual") == c.size() - 5;
    const SliceForm slice = dual ? SliceForm::Dual : SliceForm::Primal;
    std::string name = c.substr(std::string("coercivity_").size());
    if (dual) name = name.substr(0, name.size() - 5);
    CoercivityVariant variant = CoercivityVariant::BallLt;
    if (name == "COMPACT_SET") variant = CoercivityVariant::CompactSet;
    else if (name == "CORE") variant = CoercivityVariant::Core;
    else if (name == "BALL_LT") variant = CoercivityVariant::BallLt;
    else if (name == "BALL_LE") variant = CoercivityVariant::BallLe;
    else if (name == "SPHERE") variant = CoercivityVariant::Sphere;
    return find_coercivity(F, *grid, variant, cone, tol, slice).verdict.status ==
           Status::Fail;
  }
  if (c.rfind("continuity_probe", 0) == 0) {
    const SliceForm slice =
        c == "continuity_probe_dual" ? SliceForm::Dual : SliceForm::Primal;
    const Vec m1 = slice_eval(F, slice, get("x1"), get("y"));
    const Vec m2 = slice_eval(F, slice, get("x2"), get("y"));
    return max_abs_diff(m1, m2) > get("allowance")[0];
  }
  return false;
}

Verdict continuity_probe(const VExpr& F, SliceForm slice, const GridDomain& grid,
                         double lipschitz_bound, double tol) {
  Verdict v;
  v.checker = slice == SliceForm::Primal ? "continuity_probe_primal"
                                         : "continuity_probe_dual";
  v.tol = tol;
  const std::size_t n = grid.points.size();
  std::size_t budget_side = n;
  if (n > 1 && n * n > 20'000'000ull) {
    budget_side = 4472;
    v.notes = "probe subsampled by stride; ";
  }
  const auto yi = strided_indices(n, budget_side);
  double worst_quotient = 0.0;
  for (const auto j : yi) {
    const Vec& y = grid.points[j];
    Vec prev;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec cur = slice_eval(F, slice, grid.points[i], y);
      if (i > 0) {
        const double gap = dist2(grid.points[i], grid.points[i - 1]);
        if (gap > 0.0) {
          ++v.checked_count;
          const double jump = max_abs_diff(cur, prev);
          // allowance scales with neighbor spacing; the tol floor keeps
          // rounding noise from flagging flat slices
          const double allowance = lipschitz_bound * gap + 10.0 * tol;
          worst_quotient = std::max(worst_quotient, jump / gap);
          if (jump > allowance) {
            v.status = Status::Fail;
            Counterexample ce;
            push(ce, "x1", grid.points[i - 1]);
            push(ce, "x2", grid.points[i]);
            push(ce, "y", y);
            push(ce, "allowance", allowance);
            v.counterexample = std::move(ce);
            v.notes += "slice jumps by " + format_number(jump) +
                       " across a gap of " + format_number(gap);
            return v;
          }
        }
      }
      prev = cur;
    }
  }
  v.status = Status::ConsistentAtResolution;
  v.notes += "max difference quotient " + format_number(worst_quotient) +
             " within bound " + format_number(lipschitz_bound);
  return v;
}

}  // namespace veq
