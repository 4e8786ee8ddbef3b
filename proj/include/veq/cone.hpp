#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "veq/vecmath.hpp"

namespace veq {

// Which side of the ordering cone a membership query asks about.
enum class Region { InC, InIntC, InNegC, InNegIntC };

std::string to_string(Region r);

// Closed convex polyhedral cone in H-representation:
//   C = { z : rows[i] . z >= 0 for all i }
// Rows are normalized to unit Euclidean norm at construction so that one
// absolute tolerance means the same thing for every facet.
struct PolyCone {
  std::vector<Vec> rows;
  int dim = 0;
  std::string label;

  PolyCone() = default;
  PolyCone(std::vector<Vec> raw_rows, std::string label = "");

  static PolyCone orthant(int dim);  // componentwise order, label "R^n_+"
};

struct ConeReport {
  bool pointed = false;
  bool interior_nonempty = false;
  std::optional<Vec> interior_witness;  // unit vector, set when interior found
  // Membership-tolerance amplification constant: any z passing both IN_C and
  // IN_NEG_C at tolerance tol satisfies ||z|| <= kappa*tol. Computed as
  // sqrt(num_rows)/sigma_min of the normalized row matrix; infinity when the
  // rows are rank-deficient (cone contains a line).
  double kappa = 0.0;
  int sphere_samples = 0;  // resolution of the unit-sphere search
};

// Geometry probe: pointedness via discretized unit-sphere search (a unit
// direction lying in C and -C simultaneously at tolerance refutes it),
// interior via the row-average direction plus local refinement.
ConeReport validate_cone(const PolyCone& cone, double tol);

// Tolerance semantics, with margin(z) = min_i rows[i].z :
//   InC        margin(z)  >= -tol   (boundary counts as inside)
//   InIntC     margin(z)  >  +tol   (boundary does NOT count as interior)
//   InNegC     margin(-z) >= -tol
//   InNegIntC  margin(-z) >  +tol
bool member(const Vec& z, const PolyCone& cone, Region region, double tol);

// min_i rows[i].z, the signed distance proxy used by member().
double cone_margin(const Vec& z, const PolyCone& cone);

// Deterministic rejection sampler: directions from seeded Gaussians (half of
// them biased along a feasible witness direction), norms uniform in [0.1, 10].
// Throws RegionEmpty if 10*count draws fail to produce count members.
std::vector<Vec> sample_cone(const PolyCone& cone, Region region, int count,
                             std::uint64_t seed);

}  // namespace veq
