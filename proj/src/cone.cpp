#include "veq/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "veq/errors.hpp"
#include "veq/rng.hpp"

namespace veq {

std::string to_string(Region r) {
  switch (r) {
    case Region::InC: return "IN_C";
    case Region::InIntC: return "IN_INT_C";
    case Region::InNegC: return "IN_NEG_C";
    case Region::InNegIntC: return "IN_NEG_INT_C";
  }
  return "?";
}

PolyCone::PolyCone(std::vector<Vec> raw_rows, std::string label_in)
    : label(std::move(label_in)) {
  if (raw_rows.empty()) fail("EmptyRows", "cone needs at least one constraint row");
  dim = static_cast<int>(raw_rows.front().size());
  if (dim == 0) fail("EmptyRows", "cone rows must have at least one component");
  for (auto& row : raw_rows) {
    if (static_cast<int>(row.size()) != dim)
      fail("DimensionMismatch", "cone rows have inconsistent lengths");
    const double n = norm2(row);
    if (n == 0.0) fail("EmptyRows", "zero row does not define a halfspace");
    for (auto& c : row) c /= n;
  }
  rows = std::move(raw_rows);
}

PolyCone PolyCone::orthant(int dim) {
  std::vector<Vec> rows(dim, Vec(dim, 0.0));
  for (int i = 0; i < dim; ++i) rows[i][i] = 1.0;
  return PolyCone(std::move(rows), "R^" + std::to_string(dim) + "_+");
}

double cone_margin(const Vec& z, const PolyCone& cone) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : cone.rows) m = std::min(m, dot(row, z));
  return m;
}

bool member(const Vec& z, const PolyCone& cone, Region region, double tol) {
  if (static_cast<int>(z.size()) != cone.dim)
    fail("DimensionMismatch", "vector has dimension " + std::to_string(z.size()) +
                                  ", cone expects " + std::to_string(cone.dim));
  switch (region) {
    case Region::InC: return cone_margin(z, cone) >= -tol;
    case Region::InIntC: return cone_margin(z, cone) > tol;
    case Region::InNegC: return cone_margin(neg(z), cone) >= -tol;
    case Region::InNegIntC: return cone_margin(neg(z), cone) > tol;
  }
  return false;
}

namespace {

// Symmetric eigenvalues by cyclic Jacobi; m stays tiny (cone dimension).
std::vector<double> symmetric_eigenvalues(std::vector<Vec> a) {
  const std::size_t m = a.size();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(m);
  for (std::size_t i = 0; i < m; ++i) eig[i] = a[i][i];
  return eig;
}

Vec normalized_or(const Vec& v, const Vec& fallback) {
  const double n = norm2(v);
  if (n < 1e-300) return fallback;
  return scale(1.0 / n, v);
}

// Deterministic shrinking-cap search minimizing score over the unit sphere.
// Used both for "is there a direction inside C and -C" (pointedness) and for
// "maximize the interior margin" (negated score).
template <typename Score>
std::pair<Vec, double> sphere_minimize(const Score& score, Vec start,
                                       int samples_per_round, Rng& rng) {
  Vec best = std::move(start);
  double best_score = score(best);
  double cap = 1.0;
  for (int round = 0; round < 60; ++round) {
    for (int s = 0; s < samples_per_round; ++s) {
      Vec cand(best.size());
      const Vec g = rng.normal_vec(best.size());
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = best[i] + cap * g[i];
      cand = normalized_or(cand, best);
      const double sc = score(cand);
      if (sc < best_score) {
        best_score = sc;
        best = cand;
      }
    }
    cap *= 0.6;
  }
  return {best, best_score};
}

}  // namespace

ConeReport validate_cone(const PolyCone& cone, double tol) {
  ConeReport report;
  const int m = cone.dim;
  const std::size_t k = cone.rows.size();

  // kappa from the Gram spectrum of the row matrix
  std::vector<Vec> gram(m, Vec(m, 0.0));
  for (const auto& row : cone.rows)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) gram[i][j] += row[i] * row[j];
  auto eig = symmetric_eigenvalues(gram);
  const double lam_min = *std::min_element(eig.begin(), eig.end());
  report.kappa = lam_min <= 0.0 ? std::numeric_limits<double>::infinity()
                                : std::sqrt(static_cast<double>(k) / lam_min);

  // score for pointedness: worst constraint violation of "u in C and u in -C";
  // a unit direction scoring <= tol refutes pointedness
  const auto line_score = [&](const Vec& u) {
    double worst = 0.0;
    for (const auto& row : cone.rows) worst = std::max(worst, std::abs(dot(row, u)));
    return worst;
  };

  Rng rng(0x9e3779b97f4a7c15ull);
  double best_line = std::numeric_limits<double>::infinity();
  int samples = 0;
  Vec axis(m, 0.0);
  for (int i = 0; i < m && best_line > tol; ++i) {
    axis.assign(m, 0.0);
    axis[i] = 1.0;
    auto [dir, sc] = sphere_minimize(line_score, axis, 48, rng);
    (void)dir;
    best_line = std::min(best_line, sc);
    samples += 48 * 60;
  }
  // random restarts to escape axis-aligned starts
  for (int r = 0; r < 4 && best_line > tol; ++r) {
    Vec start = normalized_or(rng.normal_vec(m), Vec(m, 1.0 / std::sqrt(double(m))));
    auto [dir, sc] = sphere_minimize(line_score, start, 48, rng);
    (void)dir;
    best_line = std::min(best_line, sc);
    samples += 48 * 60;
  }
  report.pointed = best_line > tol;
  report.sphere_samples = samples;

  // interior: start from the row-average direction, refine by maximizing the
  // margin (minimize its negation)
  Vec avg(m, 0.0);
  for (const auto& row : cone.rows) avg = add(avg, row);
  Vec start = normalized_or(avg, Vec(m, 1.0 / std::sqrt(double(m))));
  const auto neg_margin = [&](const Vec& u) { return -cone_margin(u, cone); };
  if (cone_margin(start, cone) > tol) {
    report.interior_nonempty = true;
    report.interior_witness = start;
  } else {
    auto [dir, sc] = sphere_minimize(neg_margin, start, 48, rng);
    if (-sc > tol) {
      report.interior_nonempty = true;
      report.interior_witness = dir;
    }
  }
  return report;
}

std::vector<Vec> sample_cone(const PolyCone& cone, Region region, int count,
                             std::uint64_t seed) {
  if (count <= 0) return {};
  const double tol = 1e-9;
  Rng rng(seed);

  // bias direction: an interior-ish witness for the requested side
  Vec anchor(cone.dim, 0.0);
  for (const auto& row : cone.rows) anchor = add(anchor, row);
  anchor = normalized_or(anchor, Vec(cone.dim, 1.0));
  if (region == Region::InNegC || region == Region::InNegIntC) anchor = neg(anchor);

  std::vector<Vec> out;
  out.reserve(count);
  const long budget = 10L * count;
  static const double kBias[] = {0.0, 0.5, 1.0, 2.0, 4.0};
  for (long attempt = 0; attempt < budget && static_cast<int>(out.size()) < count;
       ++attempt) {
    const double bias = kBias[attempt % 5];
    Vec dir = rng.normal_vec(cone.dim);
    for (int i = 0; i < cone.dim; ++i) dir[i] += bias * anchor[i] * norm2(dir);
    const double n = norm2(dir);
    if (n < 1e-300) continue;
    const double radius = rng.uniform(0.1, 10.0);
    Vec z = scale(radius / n, dir);
    if (member(z, cone, region, tol)) out.push_back(std::move(z));
  }
  if (static_cast<int>(out.size()) < count)
    fail("RegionEmpty", "rejection sampling failed for region " + to_string(region) +
                            " of cone " + cone.label);
  return out;
}

}  // namespace veq
