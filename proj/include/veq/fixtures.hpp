#pragma once

#include <map>
#include <string>
#include <vector>

#include "veq/expr.hpp"

namespace veq {

// Built-in expressions used by the worked reproductions, the variational
// inequality bridge and the perturbation helper.
enum class FixtureId { Ex31F, Ex31f, Ex31g, Ex32F, VviAffine, PerturbEps };

FixtureId fixture_from_name(const std::string& name);  // UnknownFixture on miss
std::string fixture_name(FixtureId id);

struct FixtureParams {
  std::map<std::string, double> scalars;
  std::map<std::string, Vec> vectors;
  std::map<std::string, std::vector<Vec>> matrices;
};

// Fixtures are materialized as canonical expression text and parsed, so they
// exercise the same code path as user-supplied formulas.
//
//   EX31_F      scalar kink functions f, g combined as
//               ((f(y)-f(x))*g(z), (f(y)-f(x))*g(z)) on [-1,1]
//   EX31_f      f alone, as a function of x1
//   EX31_g      g alone, as a function of x1
//   EX32_F      two-branch piecewise trifunction on [0,1], discontinuous at 1/2
//   VVI_AFFINE  params n (default 1), slope (n x n), intercept (n):
//               scalar pairing (slope*z + intercept) . (y - x)
//   PERTURB_EPS params n (default 1), epsilon, e (m-vector):
//               bifunction epsilon * ||x - y|| * e
VExpr fixture(FixtureId id, const FixtureParams& params = {});

std::string fixture_source(FixtureId id, const FixtureParams& params = {});

}  // namespace veq
