#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "veq/vecmath.hpp"

namespace veq {

// Vector-valued expression over the three point arguments x, y, z of a
// trifunction (bifunctions simply never mention z). Components are scalar
// expressions over variables x1..xn, y1..yn, z1..zn.
//
// Grammar (first-match piecewise, guards are AND-ed affine comparisons):
//   vexpr  := "(" expr {"," expr} ")" | expr
//   expr   := term {("+"|"-") term}
//   term   := factor {("*"|"/") factor}
//   factor := NUMBER | VAR | "(" expr ")" | FUNC "(" expr {"," expr} ")"
//           | "piecewise" "{" branch {";" branch} "}" | "-" factor
//   branch := "if" cond ":" expr | "else" ":" expr
//   cond   := expr REL expr {"and" expr REL expr}
//   REL    := "<=" | "<" | ">=" | ">"
//   VAR    := ("x"|"y"|"z") DIGITS        (1-based component index)
//   FUNC   := abs | sqrt | min | max | norm

enum class NodeKind {
  Number, Var, Neg, Add, Sub, Mul, Div, Abs, Sqrt, Min, Max, Norm, Piecewise
};

enum class RelOp { Le, Lt, Ge, Gt };

struct Comparison {
  int lhs = -1;
  RelOp rel = RelOp::Le;
  int rhs = -1;
};

struct Branch {
  bool is_else = false;
  std::vector<Comparison> guard;  // conjunction; empty only for else
  int body = -1;
};

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  int var = 0;    // 0=x, 1=y, 2=z
  int index = 0;  // 1-based component
  std::vector<int> kids;
  std::vector<Branch> branches;  // Piecewise only
};

struct VExpr {
  std::vector<Node> nodes;       // shared arena for all components
  std::vector<int> roots;        // one per output component
  std::array<bool, 3> uses{};    // which of x, y, z occur
  std::array<int, 3> max_index{};  // largest component index per variable

  int out_dim() const { return static_cast<int>(roots.size()); }
  // smallest input dimension the expression can be evaluated against
  int min_input_dim() const {
    return std::max(max_index[0], std::max(max_index[1], max_index[2]));
  }
};

// Optional per-variable component bounds enforced at parse time (0 = none).
struct VarLimits {
  int x = 0, y = 0, z = 0;
};

// Errors: SyntaxError (with line:col), UnknownIdentifier, IndexOutOfRange.
VExpr parse_vexpr(const std::string& text, const VarLimits& limits = {});

// Canonical fully parenthesized form; parse(to_string(e)) evaluates
// identically to e.
std::string to_string(const VExpr& e);

// Errors: IndexOutOfRange (argument shorter than a used component),
// CoverageGap, DivisionByZero, NegativeSqrt.
Vec eval(const VExpr& e, const Vec& x, const Vec& y, const Vec& z);

// Componentwise sum; output dimensions must agree.
VExpr sum(const VExpr& a, const VExpr& b);

// Rewrites variable occurrences, e.g. {x -> z} turns f(x,y) into f(z,y).
VExpr rename_vars(const VExpr& e, const std::array<int, 3>& mapping);

}  // namespace veq
