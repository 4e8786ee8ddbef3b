#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "veq/cone.hpp"
#include "veq/expr.hpp"
#include "veq/fixtures.hpp"
#include "veq/geometry.hpp"
#include "veq/solver.hpp"

namespace veq {

// Parsed .veq problem file. Line-oriented: a block opens with "name {" on its
// own line, holds one "key = value" pair per line, and closes with "}".
// Top-level keys use the same pair syntax. '#' starts a comment.
//
//   space {                       cone {
//     x_dim = 1                     rows = [[1, 1], [-1, 1]]
//     z_dim = 2                     label = "wedge"
//   }                             }
//   domain {                      tschedule {
//     box = [[-1, 1]]               t0 = 1
//     step = 0.0025                 rho = 0.5
//   }                               count = 20
//                                 }
//   vvi    { slope, intercept }   params { fixture parameters }
//   trifunction  = (y1 - x1) * z1
//   bifunction_f = x1 - y1
//   bifunction_g = 0.5 * norm(x1 - y1)
//   fixture      = "EX31_F"
//   tol  = 1e-9
//   seed = 42
//
// Exactly one problem source among trifunction / bifunction_f (optionally with
// bifunction_g) / vvi / fixture. Scalar values, bracketed lists and quoted
// strings are JSON; expression values run to the end of the line.
struct ProblemSpec {
  int x_dim = 0;  // dimension of the ground set the grid lives in
  int z_dim = 0;  // dimension of the value space the cone orders
  PolyCone cone;
  GridDomain domain;
  TSchedule sched;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string source_label;

  std::optional<VExpr> trifunction;
  std::optional<VExpr> bifunction_f;
  std::optional<VExpr> bifunction_g;
  std::optional<AffineOperator> vvi_op;
  std::optional<FixtureId> fixture_id;
  FixtureParams fixture_params;

  bool has_split_maps() const { return bifunction_f.has_value(); }

  // Trifunction to solve/check: the trifunction itself, f(z,y) + g(x,y) for
  // split maps (primal slice = f + g), the affine pairing, or the fixture.
  VExpr problem_expr() const;

  // The two split maps, with g defaulting to the zero map of matching shape.
  VExpr map_f() const;
  VExpr map_g() const;
};

// Errors: SyntaxError (line-tagged), MissingBlock, DuplicateBlock,
// ConflictingBlocks, DimensionMismatch, UnknownFixture, BadBounds.
ProblemSpec parse_problem_text(const std::string& text,
                               const std::string& label);

// Reads the file and delegates to parse_problem_text. Errors: FileNotFound.
ProblemSpec parse_problem_file(const std::string& path);

}  // namespace veq
