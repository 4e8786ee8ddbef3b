#include "veq/fixtures.hpp"

#include "veq/errors.hpp"

namespace veq {

namespace {

// f: tent profile with kinks at -1/2 and 0; f(-1)=1, f(-1/2)=0, f(0)=1, f(1)=-1
std::string kink_f(const std::string& v) {
  return "piecewise{ if " + v + " <= -0.5 : -2*" + v + " - 1 ; if " + v +
         " <= 0 : 2*" + v + " + 1 ; else : -2*" + v + " + 1 }";
}

// g: decreasing profile with a kink at 1/2; g(-1)=1, g(1/2)=0, g(1)=-1
std::string kink_g(const std::string& v) {
  return "piecewise{ if " + v + " <= 0.5 : -2/3*" + v + " + 1/3 ; else : -2*" + v +
         " + 1 }";
}

double scalar_param(const FixtureParams& p, const std::string& key, FixtureId id,
                    double fallback, bool required) {
  auto it = p.scalars.find(key);
  if (it != p.scalars.end()) return it->second;
  if (required)
    fail("MissingParam", fixture_name(id) + " needs scalar parameter '" + key + "'");
  return fallback;
}

}  // namespace

FixtureId fixture_from_name(const std::string& name) {
  if (name == "EX31_F") return FixtureId::Ex31F;
  if (name == "EX31_f") return FixtureId::Ex31f;
  if (name == "EX31_g") return FixtureId::Ex31g;
  if (name == "EX32_F") return FixtureId::Ex32F;
  if (name == "VVI_AFFINE") return FixtureId::VviAffine;
  if (name == "PERTURB_EPS") return FixtureId::PerturbEps;
  fail("UnknownFixture", "no fixture named '" + name + "'");
}

std::string fixture_name(FixtureId id) {
  switch (id) {
    case FixtureId::Ex31F: return "EX31_F";
    case FixtureId::Ex31f: return "EX31_f";
    case FixtureId::Ex31g: return "EX31_g";
    case FixtureId::Ex32F: return "EX32_F";
    case FixtureId::VviAffine: return "VVI_AFFINE";
    case FixtureId::PerturbEps: return "PERTURB_EPS";
  }
  fail("UnknownFixture", "corrupt fixture id");
}

std::string fixture_source(FixtureId id, const FixtureParams& params) {
  switch (id) {
    case FixtureId::Ex31f: return kink_f("x1");
    case FixtureId::Ex31g: return kink_g("x1");
    case FixtureId::Ex31F: {
      const std::string comp =
          "(" + kink_f("y1") + " - " + kink_f("x1") + ") * " + kink_g("z1");
      return "(" + comp + ", " + comp + ")";
    }
    case FixtureId::Ex32F:
      return "(piecewise{ if x1 <= 0.5 : x1 + y1 ; else : 2*x1 + y1 }, "
             "piecewise{ if x1 <= 0.5 : 2*x1 - z1 ; else : z1 - x1 })";
    case FixtureId::VviAffine: {
      const int n = static_cast<int>(scalar_param(params, "n", id, 1.0, false));
      std::vector<Vec> slope;
      Vec intercept;
      if (auto it = params.matrices.find("slope"); it != params.matrices.end())
        slope = it->second;
      else
        fail("MissingParam", "VVI_AFFINE needs matrix parameter 'slope'");
      if (auto it = params.vectors.find("intercept"); it != params.vectors.end())
        intercept = it->second;
      else
        intercept = Vec(n, 0.0);
      if (static_cast<int>(slope.size()) != n ||
          static_cast<int>(intercept.size()) != n)
        fail("DimensionMismatch", "VVI_AFFINE slope/intercept must be n x n and n");
      // (slope*z + intercept) . (y - x), a scalar-valued pairing
      std::string body;
      for (int i = 0; i < n; ++i) {
        if (static_cast<int>(slope[i].size()) != n)
          fail("DimensionMismatch", "VVI_AFFINE slope row has wrong length");
        std::string a_i;
        for (int j = 0; j < n; ++j) {
          if (j) a_i += " + ";
          a_i += format_number(slope[i][j]) + "*z" + std::to_string(j + 1);
        }
        a_i += " + " + format_number(intercept[i]);
        if (i) body += " + ";
        body += "(" + a_i + ") * (y" + std::to_string(i + 1) + " - x" +
                std::to_string(i + 1) + ")";
      }
      return "(" + body + ")";
    }
    case FixtureId::PerturbEps: {
      const int n = static_cast<int>(scalar_param(params, "n", id, 1.0, false));
      const double eps = scalar_param(params, "epsilon", id, 0.0, true);
      if (eps < 0.0)
        fail("MissingParam", "PERTURB_EPS epsilon must be nonnegative");
      Vec e;
      if (auto it = params.vectors.find("e"); it != params.vectors.end())
        e = it->second;
      else
        fail("MissingParam", "PERTURB_EPS needs vector parameter 'e'");
      std::string dist = "norm(";
      for (int j = 0; j < n; ++j) {
        if (j) dist += ", ";
        dist += "x" + std::to_string(j + 1) + " - y" + std::to_string(j + 1);
      }
      dist += ")";
      std::string out = "(";
      for (std::size_t j = 0; j < e.size(); ++j) {
        if (j) out += ", ";
        out += format_number(e[j]) + " * " + format_number(eps) + " * " + dist;
      }
      out += ")";
      return out;
    }
  }
  fail("UnknownFixture", "corrupt fixture id");
}

VExpr fixture(FixtureId id, const FixtureParams& params) {
  return parse_vexpr(fixture_source(id, params));
}

}  // namespace veq
