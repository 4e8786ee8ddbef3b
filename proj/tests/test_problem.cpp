#include <doctest.h>

#include <cmath>
#include <string>

#include "veq/errors.hpp"
#include "veq/expr.hpp"
#include "veq/fixtures.hpp"
#include "veq/problem.hpp"

using namespace veq;

namespace {

ProblemSpec spec_of(const std::string& text) {
  return parse_problem_text(text, "test.veq");
}

template <typename F>
std::string thrown_code(F&& fn) {
  try {
    fn();
  } catch (const VeqError& e) {
    return e.code();
  }
  return "";
}

template <typename F>
std::string thrown_what(F&& fn) {
  try {
    fn();
  } catch (const VeqError& e) {
    return e.what();
  }
  return "";
}

const char* const kScalarHead =
    "space {\n"
    "  x_dim = 1\n"
    "  z_dim = 1\n"
    "}\n"
    "cone {\n"
    "  rows = [[1]]\n"
    "}\n"
    "domain {\n"
    "  box = [[0, 1]]\n"
    "  step = 0.25\n"
    "}\n";

std::string repo(const std::string& rel) {
  return std::string(VEQ_REPO_DIR) + "/" + rel;
}

}  // namespace

TEST_CASE("shipped kink-product problem file parses") {
  const ProblemSpec p = parse_problem_file(repo("problems/ex31.veq"));
  CHECK(p.x_dim == 1);
  CHECK(p.z_dim == 2);
  CHECK(p.cone.dim == 2);
  CHECK(p.cone.label == "R^2_+");
  CHECK(p.cone.rows.size() == 2);
  CHECK(p.domain.kind == GridDomain::Kind::BoxGrid);
  REQUIRE(p.domain.size() == 801);
  CHECK(p.domain.points.front() == Vec{-1.0});
  CHECK(p.domain.points.back() == Vec{1.0});
  CHECK(p.tol == 1e-9);
  CHECK_FALSE(p.has_split_maps());
  REQUIRE(p.fixture_id.has_value());
  CHECK(*p.fixture_id == FixtureId::Ex31F);
  CHECK(p.problem_expr().out_dim() == 2);
}

TEST_CASE("shipped jump-map problem file parses with the wedge cone") {
  const ProblemSpec p = parse_problem_file(repo("problems/ex32.veq"));
  CHECK(p.z_dim == 2);
  CHECK(p.cone.label == "wedge");
  // rows are unit-normalized at construction
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(p.cone.rows.size() == 2);
  CHECK(p.cone.rows[0][0] == doctest::Approx(s).epsilon(1e-15));
  CHECK(p.cone.rows[0][1] == doctest::Approx(s).epsilon(1e-15));
  CHECK(p.cone.rows[1][0] == doctest::Approx(-s).epsilon(1e-15));
  REQUIRE(p.fixture_id.has_value());
  CHECK(*p.fixture_id == FixtureId::Ex32F);
  CHECK(p.domain.size() == 401);
}

TEST_CASE("shipped split-map problem file wires f and g together") {
  const ProblemSpec p = parse_problem_file(repo("problems/eps05.veq"));
  REQUIRE(p.has_split_maps());
  REQUIRE(p.bifunction_g.has_value());
  // combined trifunction: f evaluated at (z, y) plus g at (x, y)
  const Vec v = eval(p.problem_expr(), {1.0}, {2.0}, {3.0});
  REQUIRE(v.size() == 1);
  CHECK(v[0] == doctest::Approx(1.5).epsilon(1e-15));  // (3-2) + 0.5*|1-2|
  const Vec f = eval(p.map_f(), {1.0}, {2.0}, {0.0});
  CHECK(f[0] == -1.0);
  CHECK(p.domain.size() == 101);
}

TEST_CASE("shipped monotone pairing problem file parses") {
  const ProblemSpec p = parse_problem_file(repo("problems/mono.veq"));
  REQUIRE(p.trifunction.has_value());
  CHECK(p.domain.size() == 9);
  const Vec v = eval(p.problem_expr(), {1.0}, {2.0}, {3.0});
  CHECK(v == Vec{7.0});  // (2*3 + 1) * (2 - 1)
}

TEST_CASE("affine pairing block builds the scalar product trifunction") {
  const ProblemSpec p = spec_of(std::string(kScalarHead) +
                                "vvi {\n"
                                "  slope = [[2]]\n"
                                "  intercept = [1]\n"
                                "}\n");
  REQUIRE(p.vvi_op.has_value());
  CHECK(p.vvi_op->slope == std::vector<Vec>{{2.0}});
  CHECK(p.vvi_op->intercept == Vec{1.0});
  // <A z + b, y - x> with A = [2], b = [1]
  const Vec v = eval(p.problem_expr(), {0.0}, {1.0}, {0.5});
  CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("point-list domains parse and deduplicate in order") {
  const ProblemSpec p = spec_of(
      "space {\n  x_dim = 1\n  z_dim = 1\n}\n"
      "cone {\n  rows = [[1]]\n}\n"
      "domain {\n  points = [[0.5], [0], [0.5], [1]]\n}\n"
      "trifunction = y1 - x1\n");
  CHECK(p.domain.kind == GridDomain::Kind::PointList);
  REQUIRE(p.domain.size() == 3);
  CHECK(p.domain.points[0] == Vec{0.5});
  CHECK(p.domain.points[1] == Vec{0.0});
  CHECK(p.domain.points[2] == Vec{1.0});
}

TEST_CASE("optional schedule, tolerance, seed and params blocks parse") {
  const ProblemSpec p = spec_of(std::string(kScalarHead) +
                                "trifunction = y1 - x1\n"
                                "tschedule {\n"
                                "  t0 = 0.5\n"
                                "  rho = 0.25\n"
                                "  count = 5\n"
                                "}\n"
                                "tol = 1e-6\n"
                                "seed = 42\n"
                                "params {\n"
                                "  a = 1.5\n"
                                "  v = [1, 2]\n"
                                "  m = [[1, 2], [3, 4]]\n"
                                "}\n");
  CHECK(p.sched.t0 == 0.5);
  CHECK(p.sched.rho == 0.25);
  CHECK(p.sched.count == 5);
  const std::vector<double> ts = p.sched.values();
  REQUIRE(ts.size() == 5);
  CHECK(ts.front() == 0.5);
  CHECK(ts.back() == doctest::Approx(0.5 * std::pow(0.25, 4)).epsilon(1e-15));
  CHECK(p.tol == 1e-6);
  CHECK(p.seed == 42);
  CHECK(p.fixture_params.scalars.at("a") == 1.5);
  CHECK(p.fixture_params.vectors.at("v") == Vec{1.0, 2.0});
  CHECK(p.fixture_params.matrices.at("m") == std::vector<Vec>{{1.0, 2.0}, {3.0, 4.0}});
}

TEST_CASE("defaults apply when optional pieces are absent") {
  const ProblemSpec p = spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n");
  CHECK(p.tol == 1e-9);
  CHECK(p.seed == 0);
  CHECK(p.sched.t0 == 1.0);
  CHECK(p.sched.rho == 0.5);
  CHECK(p.sched.count == 20);
  CHECK(p.source_label == "test.veq");
}

TEST_CASE("the second split map defaults to the zero map of value shape") {
  const ProblemSpec scalar =
      spec_of(std::string(kScalarHead) + "bifunction_f = x1 - y1\n");
  CHECK_FALSE(scalar.bifunction_g.has_value());
  CHECK(eval(scalar.map_g(), {1.0}, {2.0}, {0.0}) == Vec{0.0});

  const ProblemSpec planar = spec_of(
      "space {\n  x_dim = 1\n  z_dim = 2\n}\n"
      "cone {\n  rows = [[1, 0], [0, 1]]\n}\n"
      "domain {\n  box = [[0, 1]]\n  step = 0.5\n}\n"
      "bifunction_f = (x1 - y1, 0)\n");
  CHECK(planar.map_g().out_dim() == 2);
  CHECK(eval(planar.map_g(), {1.0}, {2.0}, {0.0}) == Vec{0.0, 0.0});
  // combined map feeds f the (z, y) pair
  CHECK(eval(planar.problem_expr(), {1.0}, {2.0}, {3.0}) ==
        Vec{1.0, 0.0});
}

TEST_CASE("asking for split maps on a trifunction problem fails") {
  const ProblemSpec p = spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n");
  CHECK(thrown_code([&] { p.map_f(); }) == "MissingBlock");
}

TEST_CASE("missing required blocks are reported by name") {
  // no space block
  CHECK(thrown_code([] {
          spec_of("cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // space block without z_dim
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // no cone
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // cone without rows
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  label = \"c\"\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // no domain
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // box without step
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "MissingBlock");
  // affine pairing block without slope
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "vvi {\n  intercept = [1]\n}\n");
        }) == "MissingBlock");
  // no problem source at all
  CHECK(thrown_code([] { spec_of(std::string(kScalarHead)); }) ==
        "MissingBlock");
}

TEST_CASE("conflicting problem sources are rejected") {
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "fixture = \"EX31_F\"\n");
        }) == "ConflictingBlocks");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "bifunction_f = x1 - y1\n" +
                  "vvi {\n  slope = [[1]]\n}\n");
        }) == "ConflictingBlocks");
  // the perturbation map cannot stand alone
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "bifunction_g = x1 - y1\n");
        }) == "ConflictingBlocks");
  // a domain cannot give both a box and an explicit point list
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n  points = [[0]]\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "ConflictingBlocks");
  // ... or neither
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "ConflictingBlocks");
}

TEST_CASE("duplicate blocks and keys are rejected") {
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "cone {\n  rows = [[1]]\n}\n" +
                  "trifunction = y1 - x1\n");
        }) == "DuplicateBlock");
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  x_dim = 2\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "DuplicateBlock");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "tol = 1e-9\ntol = 1e-8\n");
        }) == "DuplicateBlock");
}

TEST_CASE("malformed lines report the file label and line number") {
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "frobnicate = 1\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of("weird {\n}\n" + std::string(kScalarHead) +
                  "trifunction = y1 - x1\n");
        }) == "SyntaxError");
  // unknown key inside a block
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n  w_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] { spec_of("}\n"); }) == "SyntaxError");
  CHECK(thrown_code([] { spec_of("space {\n  x_dim = 1\n"); }) ==
        "SyntaxError");
  CHECK(thrown_code([] { spec_of("space {\ncone {\n"); }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "just some words\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "tol =\n");
        }) == "SyntaxError");
  // bad JSON in a structured value
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1,]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "SyntaxError");
  // wrong JSON types
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "tol = \"tiny\"\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1.5\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "seed = \"abc\"\n");
        }) == "SyntaxError");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "params {\n  name = \"x\"\n}\n");
        }) == "SyntaxError");

  // the message pinpoints the offending line
  const std::string what = thrown_what([] {
    spec_of("space {\n  x_dim = 1\n  z_dim = 1\n  w_dim = 1\n}\n");
  });
  CHECK(what.find("test.veq:4") != std::string::npos);
  CHECK(what.find("w_dim") != std::string::npos);
}

TEST_CASE("shape mismatches between blocks are rejected") {
  // cone wider than the value space
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1, 0]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "DimensionMismatch");
  // box with more axes than x_dim
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1], [0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "DimensionMismatch");
  // point dimension vs x_dim
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  points = [[0, 1]]\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "DimensionMismatch");
  // the affine pairing is scalar-valued
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 2\n}\n"
                  "cone {\n  rows = [[1, 0], [0, 1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "vvi {\n  slope = [[1]]\n}\n");
        }) == "DimensionMismatch");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "vvi {\n  slope = [[1, 2]]\n}\n");
        }) == "DimensionMismatch");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) +
                  "vvi {\n  slope = [[1]]\n  intercept = [1, 2]\n}\n");
        }) == "DimensionMismatch");
  // problem output vs z_dim
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = (y1 - x1, z1)\n");
        }) == "DimensionMismatch");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "bifunction_f = x1 - y1\n" +
                  "bifunction_g = (x1, y1)\n");
        }) == "DimensionMismatch");
}

TEST_CASE("expression errors are tagged with their role") {
  const std::string what = thrown_what([] {
    spec_of(std::string(kScalarHead) + "trifunction = y1 - x2\n");
  });
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x2\n");
        }) == "IndexOutOfRange");
  CHECK(what.find("in trifunction") != std::string::npos);
}

TEST_CASE("bad bounds carry their own error code") {
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 0\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "BadBounds");
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "tol = 0\n");
        }) == "BadBounds");
  // a box axis needs exactly [lo, hi]
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0]]\n  step = 0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "BadBounds");
  // grid construction rejects nonpositive steps
  CHECK(thrown_code([] {
          spec_of("space {\n  x_dim = 1\n  z_dim = 1\n}\n"
                  "cone {\n  rows = [[1]]\n}\n"
                  "domain {\n  box = [[0, 1]]\n  step = -0.25\n}\n"
                  "trifunction = y1 - x1\n");
        }) == "BadBounds");
  // schedule validation runs on the parsed values
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "trifunction = y1 - x1\n" +
                  "tschedule {\n  rho = 1.5\n}\n");
        }) == "BadBounds");
}

TEST_CASE("unknown fixture names and missing files have dedicated codes") {
  CHECK(thrown_code([] {
          spec_of(std::string(kScalarHead) + "fixture = \"NOPE\"\n");
        }) == "UnknownFixture");
  CHECK(thrown_code([] {
          parse_problem_file("/nonexistent/missing.veq");
        }) == "FileNotFound");
}

TEST_CASE("comments and quoted hashes are handled") {
  const ProblemSpec p = spec_of(
      "# leading comment\n"
      "\n"
      "space {  # trailing comment\n"
      "  x_dim = 1\n"
      "  z_dim = 1\n"
      "}\n"
      "cone {\n"
      "  rows = [[1]]\n"
      "  label = \"a#b\"  # hash inside quotes stays\n"
      "}\n"
      "domain {\n"
      "  box = [[0, 1]]\n"
      "  step = 0.25\n"
      "}\n"
      "trifunction = y1 - x1  # expressions end at the comment\n");
  CHECK(p.cone.label == "a#b");
  CHECK(eval(*p.trifunction, {1.0}, {3.0}, {0.0}) == Vec{2.0});
}
