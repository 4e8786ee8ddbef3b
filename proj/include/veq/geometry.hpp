#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "veq/vecmath.hpp"

namespace veq {

// Finite stand-in for the feasible set K. Box grids enumerate the lattice
// lo + k*step in lexicographic order (first coordinate most significant) and
// always include both endpoints of every axis.
struct GridDomain {
  enum class Kind { BoxGrid, PointList };
  Kind kind = Kind::PointList;
  Vec lo, hi;
  double step = 0.0;
  std::vector<Vec> points;
  double norm_bound = 0.0;  // max Euclidean norm over the points

  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  std::size_t size() const { return points.size(); }
};

// Errors: BadBounds (lo >= hi somewhere, or step <= 0), TooManyPoints (> 1e7).
GridDomain make_grid(const Vec& lo, const Vec& hi, double step);

// Deduplicates exact repeats, keeps first occurrence order.
GridDomain make_point_list(std::vector<Vec> points);

// Geometric scan of the segment parameter t in (0, 1], largest first.
// values[k] = t0 * rho^k, strictly decreasing, count >= 3.
struct TSchedule {
  double t0 = 1.0;
  double rho = 0.5;
  int count = 20;

  TSchedule() = default;
  TSchedule(double t0, double rho, int count);
  std::vector<double> values() const;
};

// ((1-t)x + ty, together with t) for each scheduled t.
// Error: DegenerateSegment when x == y exactly.
std::vector<std::pair<double, Vec>> segment_points(const Vec& x, const Vec& y,
                                                   const TSchedule& sched);

// Convex weights over k vertices: the k unit-weight corners first, then the
// barycenter, then seeded Dirichlet(1) samples; every row sums to 1 within
// 1e-15.
std::vector<Vec> simplex_weights(int k, int count, std::uint64_t seed);

// All ordered pairs of distinct grid points, both sides stride-subsampled to
// at most side_cap indices so the pair count stays near side_cap^2.
std::vector<std::pair<Vec, Vec>> strided_pairs(const GridDomain& grid,
                                               std::size_t side_cap);

// Finite certificate for "x_k -> limit": gaps nonincreasing, at least 5 terms.
struct WitnessSequence {
  std::vector<Vec> points;
  Vec limit;

  WitnessSequence(std::vector<Vec> points, Vec limit);
  double final_gap() const { return dist2(points.back(), limit); }
};

}  // namespace veq
