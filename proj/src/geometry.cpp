#include "veq/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "veq/errors.hpp"
#include "veq/rng.hpp"

namespace veq {

namespace {

// Axis values lo, lo+step, ..., with hi forced in exactly. A lattice point
// landing within 1e-12 (relative) of hi is snapped to hi rather than emitting
// a near-duplicate endpoint.
Vec axis_values(double lo, double hi, double step) {
  const double span = hi - lo;
  const double snap = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  Vec vals;
  const long long count = static_cast<long long>(std::floor(span / step + 1e-9));
  for (long long k = 0; k <= count; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + snap) break;
    vals.push_back(v);
  }
  if (std::abs(vals.back() - hi) <= snap)
    vals.back() = hi;
  else
    vals.push_back(hi);
  return vals;
}

}  // namespace

GridDomain make_grid(const Vec& lo, const Vec& hi, double step) {
  if (lo.empty() || lo.size() != hi.size())
    fail("BadBounds", "lo and hi must be nonempty and of equal dimension");
  if (!(step > 0.0)) fail("BadBounds", "step must be positive");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i]))
      fail("BadBounds", "need lo < hi in coordinate " + std::to_string(i + 1));

  std::vector<Vec> axes(lo.size());
  double total = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    axes[i] = axis_values(lo[i], hi[i], step);
    total *= static_cast<double>(axes[i].size());
    if (total > 1e7)
      fail("TooManyPoints", "grid would exceed 10^7 points");
  }

  GridDomain g;
  g.kind = GridDomain::Kind::BoxGrid;
  g.lo = lo;
  g.hi = hi;
  g.step = step;
  g.points.reserve(static_cast<std::size_t>(total));
  Vec current(lo.size());
  // lexicographic: first coordinate most significant
  std::vector<std::size_t> idx(lo.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < lo.size(); ++i) current[i] = axes[i][idx[i]];
    g.points.push_back(current);
    std::size_t pos = lo.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < axes[pos].size()) break;
      idx[pos] = 0;
      if (pos == 0) {
        for (const auto& p : g.points) g.norm_bound = std::max(g.norm_bound, norm2(p));
        return g;
      }
    }
  }
}

GridDomain make_point_list(std::vector<Vec> points) {
  if (points.empty()) fail("BadBounds", "point list must be nonempty");
  const std::size_t d = points.front().size();
  GridDomain g;
  g.kind = GridDomain::Kind::PointList;
  for (auto& p : points) {
    if (p.size() != d)
      fail("DimensionMismatch", "point list entries have mixed dimensions");
    bool dup = false;
    for (const auto& q : g.points)
      if (exactly_equal(p, q)) {
        dup = true;
        break;
      }
    if (!dup) g.points.push_back(std::move(p));
  }
  for (const auto& p : g.points) g.norm_bound = std::max(g.norm_bound, norm2(p));
  return g;
}

TSchedule::TSchedule(double t0_in, double rho_in, int count_in)
    : t0(t0_in), rho(rho_in), count(count_in) {
  if (!(t0 > 0.0) || t0 > 1.0) fail("BadBounds", "t0 must lie in (0, 1]");
  if (!(rho > 0.0) || rho >= 1.0) fail("BadBounds", "rho must lie in (0, 1)");
  if (count < 3) fail("BadBounds", "schedule needs at least 3 values");
}

std::vector<double> TSchedule::values() const {
  std::vector<double> v(count);
  double t = t0;
  for (int k = 0; k < count; ++k) {
    v[k] = t;
    t *= rho;
  }
  return v;
}

std::vector<std::pair<double, Vec>> segment_points(const Vec& x, const Vec& y,
                                                   const TSchedule& sched) {
  if (x.size() != y.size())
    fail("DimensionMismatch", "segment endpoints differ in dimension");
  if (exactly_equal(x, y)) fail("DegenerateSegment", "segment endpoints coincide");
  std::vector<std::pair<double, Vec>> out;
  for (double t : sched.values()) out.emplace_back(t, lerp(x, y, t));
  return out;
}

std::vector<Vec> simplex_weights(int k, int count, std::uint64_t seed) {
  if (k < 1) fail("BadBounds", "simplex needs at least one vertex");
  if (count < 0) fail("BadBounds", "weight count must be nonnegative");
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < k && static_cast<int>(out.size()) < count; ++i) {
    Vec w(k, 0.0);
    w[i] = 1.0;
    out.push_back(std::move(w));
  }
  if (static_cast<int>(out.size()) < count)
    out.push_back(Vec(k, 1.0 / static_cast<double>(k)));
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    // Dirichlet(1,...,1) via normalized exponentials
    Vec w(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      w[i] = -std::log(u);
      total += w[i];
    }
    double acc = 0.0;
    for (int i = 0; i + 1 < k; ++i) {
      w[i] /= total;
      acc += w[i];
    }
    w[k - 1] = 1.0 - acc;  // forces the exact-sum invariant
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::pair<Vec, Vec>> strided_pairs(const GridDomain& grid,
                                               std::size_t side_cap) {
  std::vector<std::pair<Vec, Vec>> pairs;
  const std::size_t n = grid.points.size();
  if (n == 0 || side_cap == 0) return pairs;
  const std::size_t stride = std::max<std::size_t>(1, (n + side_cap - 1) / side_cap);
  for (std::size_t i = 0; i < n; i += stride)
    for (std::size_t j = 0; j < n; j += stride)
      if (i != j && !exactly_equal(grid.points[i], grid.points[j]))
        pairs.emplace_back(grid.points[i], grid.points[j]);
  return pairs;
}

WitnessSequence::WitnessSequence(std::vector<Vec> pts, Vec lim)
    : points(std::move(pts)), limit(std::move(lim)) {
  if (points.size() < 5)
    fail("BadBounds", "witness sequence needs at least 5 points");
  double prev = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != limit.size())
      fail("DimensionMismatch", "witness point dimension differs from limit");
    const double gap = dist2(points[i], limit);
    if (prev >= 0.0 && gap > prev + 1e-15)
      fail("BadBounds", "witness gaps must be nonincreasing (index " +
                            std::to_string(i + 1) + ")");
    prev = gap;
  }
}

}  // namespace veq
