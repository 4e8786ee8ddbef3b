#include "veq/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstring>

#include "veq/errors.hpp"

namespace veq {

namespace {

struct Token {
  enum Kind { Number, Ident, Punct, End } kind = End;
  double number = 0.0;
  std::string text;  // identifier spelling or punctuation
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

  struct State {
    std::size_t pos;
    int line, col;
    Token cur;
  };
  State save() const { return {pos_, line_, col_, cur_}; }
  void restore(const State& s) {
    pos_ = s.pos;
    line_ = s.line;
    col_ = s.col;
    cur_ = s.cur;
  }

  [[noreturn]] void error(const std::string& msg, const Token& at) const {
    fail("SyntaxError", msg + " at " + std::to_string(at.line) + ":" +
                            std::to_string(at.col));
  }

private:
  void advance() {
    skip_space();
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Token::End;
      cur_.text = "<end>";
      return;
    }
    const char c = src_[pos_];
    // U+2212 (minus sign) is accepted as "-" so formulas pasted from
    // typeset sources keep working
    if (static_cast<unsigned char>(c) == 0xE2 && pos_ + 2 < src_.size() &&
        static_cast<unsigned char>(src_[pos_ + 1]) == 0x88 &&
        static_cast<unsigned char>(src_[pos_ + 2]) == 0x92) {
      consume(3);
      cur_.kind = Token::Punct;
      cur_.text = "-";
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        ident += src_[pos_];
        consume(1);
      }
      cur_.kind = Token::Ident;
      cur_.text = ident;
      return;
    }
    if (c == '<' || c == '>') {
      std::string op(1, c);
      consume(1);
      if (pos_ < src_.size() && src_[pos_] == '=') {
        op += '=';
        consume(1);
      }
      cur_.kind = Token::Punct;
      cur_.text = op;
      return;
    }
    if (std::strchr("()+-*/,;:{}", c)) {
      consume(1);
      cur_.kind = Token::Punct;
      cur_.text = std::string(1, c);
      return;
    }
    fail("SyntaxError", std::string("unexpected character '") + c + "' at " +
                            std::to_string(line_) + ":" + std::to_string(col_));
  }

  void lex_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
      consume(1);
    if (pos_ < src_.size() && src_[pos_] == '.') {
      consume(1);
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        consume(1);
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      consume(1);
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) consume(1);
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          consume(1);
      } else {
        // "e" belonged to something else; back out of the exponent
        while (pos_ > mark) {
          --pos_;
          --col_;
        }
      }
    }
    cur_.kind = Token::Number;
    cur_.number = std::strtod(src_.substr(start, pos_ - start).c_str(), nullptr);
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        consume(1);
      } else {
        break;
      }
    }
  }

  void consume(std::size_t n) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

class Parser {
public:
  Parser(const std::string& text, const VarLimits& limits)
      : lex_(text), limits_(limits) {}

  VExpr parse() {
    // vector form "(" expr {"," expr} ")" at top level only; if the leading
    // parenthesis turns out to wrap a plain subexpression (e.g. "(x1)*2"),
    // re-parse the whole text as a single scalar expression
    if (lex_.peek().kind == Token::Punct && lex_.peek().text == "(") {
      const auto mark = lex_.save();
      lex_.take();  // "("
      std::vector<int> roots;
      roots.push_back(parse_expr());
      if (lex_.peek().kind == Token::Punct && lex_.peek().text == ",") {
        while (lex_.peek().kind == Token::Punct && lex_.peek().text == ",") {
          lex_.take();
          roots.push_back(parse_expr());
        }
        expect_punct(")");
        expect_end();
        out_.roots = std::move(roots);
        return finish();
      }
      if (lex_.peek().kind == Token::Punct && lex_.peek().text == ")") {
        lex_.take();
        if (lex_.peek().kind == Token::End) {
          out_.roots = std::move(roots);
          return finish();
        }
      }
      lex_.restore(mark);
      out_.nodes.clear();
    }
    out_.roots.push_back(parse_expr());
    expect_end();
    return finish();
  }

private:
  VExpr finish() {
    for (const auto& n : out_.nodes) {
      if (n.kind == NodeKind::Var) {
        out_.uses[n.var] = true;
        out_.max_index[n.var] = std::max(out_.max_index[n.var], n.index);
      }
    }
    return std::move(out_);
  }

  int add_node(Node n) {
    out_.nodes.push_back(std::move(n));
    return static_cast<int>(out_.nodes.size()) - 1;
  }

  void expect_punct(const std::string& p) {
    if (lex_.peek().kind != Token::Punct || lex_.peek().text != p)
      lex_.error("expected '" + p + "'", lex_.peek());
    lex_.take();
  }

  void expect_end() {
    if (lex_.peek().kind != Token::End)
      lex_.error("unexpected trailing input", lex_.peek());
  }

  int parse_expr() {
    int left = parse_term();
    while (lex_.peek().kind == Token::Punct &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      const bool plus = lex_.take().text == "+";
      const int right = parse_term();
      Node n;
      n.kind = plus ? NodeKind::Add : NodeKind::Sub;
      n.kids = {left, right};
      left = add_node(std::move(n));
    }
    return left;
  }

  int parse_term() {
    int left = parse_factor();
    while (lex_.peek().kind == Token::Punct &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      const bool mul = lex_.take().text == "*";
      const int right = parse_factor();
      Node n;
      n.kind = mul ? NodeKind::Mul : NodeKind::Div;
      n.kids = {left, right};
      left = add_node(std::move(n));
    }
    return left;
  }

  int parse_factor() {
    const Token t = lex_.peek();
    if (t.kind == Token::Number) {
      lex_.take();
      Node n;
      n.kind = NodeKind::Number;
      n.number = t.number;
      return add_node(std::move(n));
    }
    if (t.kind == Token::Punct && t.text == "-") {
      lex_.take();
      Node n;
      n.kind = NodeKind::Neg;
      n.kids = {parse_factor()};
      return add_node(std::move(n));
    }
    if (t.kind == Token::Punct && t.text == "(") {
      lex_.take();
      const int inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Token::Ident) {
      if (t.text == "piecewise") return parse_piecewise();
      if (auto fn = function_kind(t.text)) return parse_call(*fn);
      return parse_var();
    }
    lex_.error("expected a number, variable, function call or '('", t);
  }

  static std::optional<NodeKind> function_kind(const std::string& name) {
    if (name == "abs") return NodeKind::Abs;
    if (name == "sqrt") return NodeKind::Sqrt;
    if (name == "min") return NodeKind::Min;
    if (name == "max") return NodeKind::Max;
    if (name == "norm") return NodeKind::Norm;
    return std::nullopt;
  }

  int parse_call(NodeKind kind) {
    const Token name = lex_.take();
    expect_punct("(");
    Node n;
    n.kind = kind;
    n.kids.push_back(parse_expr());
    while (lex_.peek().kind == Token::Punct && lex_.peek().text == ",") {
      lex_.take();
      n.kids.push_back(parse_expr());
    }
    expect_punct(")");
    const bool unary = kind == NodeKind::Abs || kind == NodeKind::Sqrt;
    if (unary && n.kids.size() != 1)
      lex_.error(name.text + " takes exactly one argument", name);
    if ((kind == NodeKind::Min || kind == NodeKind::Max) && n.kids.size() < 2)
      lex_.error(name.text + " takes at least two arguments", name);
    return add_node(std::move(n));
  }

  int parse_var() {
    const Token t = lex_.take();
    const std::string& s = t.text;
    const char head = s[0];
    const bool var_shaped = (head == 'x' || head == 'y' || head == 'z') &&
                            s.size() > 1 &&
                            std::all_of(s.begin() + 1, s.end(), [](char c) {
                              return std::isdigit(static_cast<unsigned char>(c));
                            });
    if (!var_shaped)
      fail("UnknownIdentifier", "'" + s + "' at " + std::to_string(t.line) + ":" +
                                    std::to_string(t.col));
    const int index = std::atoi(s.c_str() + 1);
    const int var = head == 'x' ? 0 : head == 'y' ? 1 : 2;
    if (index < 1)
      fail("IndexOutOfRange", "'" + s + "' uses component index " +
                                  std::to_string(index) + "; indices are 1-based");
    const int limit = var == 0 ? limits_.x : var == 1 ? limits_.y : limits_.z;
    if (limit > 0 && index > limit)
      fail("IndexOutOfRange", "'" + s + "' exceeds declared dimension " +
                                  std::to_string(limit));
    Node n;
    n.kind = NodeKind::Var;
    n.var = var;
    n.index = index;
    return add_node(std::move(n));
  }

  int parse_piecewise() {
    lex_.take();  // "piecewise"
    expect_punct("{");
    Node n;
    n.kind = NodeKind::Piecewise;
    bool saw_else = false;
    while (true) {
      const Token t = lex_.peek();
      if (t.kind != Token::Ident || (t.text != "if" && t.text != "else"))
        lex_.error("expected 'if' or 'else' branch", t);
      Branch br;
      if (t.text == "if") {
        lex_.take();
        br.guard = parse_guard();
      } else {
        lex_.take();
        br.is_else = true;
        saw_else = true;
      }
      expect_punct(":");
      br.body = parse_expr();
      n.branches.push_back(std::move(br));
      if (saw_else) break;
      if (lex_.peek().kind == Token::Punct && lex_.peek().text == ";") {
        lex_.take();
        continue;
      }
      break;
    }
    expect_punct("}");
    return add_node(std::move(n));
  }

  std::vector<Comparison> parse_guard() {
    std::vector<Comparison> guard;
    while (true) {
      Comparison c;
      c.lhs = parse_expr();
      const Token op = lex_.peek();
      if (op.kind != Token::Punct ||
          (op.text != "<=" && op.text != "<" && op.text != ">=" && op.text != ">"))
        lex_.error("expected a comparison operator", op);
      lex_.take();
      c.rel = op.text == "<=" ? RelOp::Le
              : op.text == "<"  ? RelOp::Lt
              : op.text == ">=" ? RelOp::Ge
                                : RelOp::Gt;
      c.rhs = parse_expr();
      if (!affine(c.lhs) || !affine(c.rhs))
        lex_.error("guard comparisons must be affine in the variables", op);
      guard.push_back(c);
      if (lex_.peek().kind == Token::Ident && lex_.peek().text == "and") {
        lex_.take();
        continue;
      }
      return guard;
    }
  }

  bool constant(int id) const {
    const Node& n = out_.nodes[id];
    switch (n.kind) {
      case NodeKind::Number: return true;
      case NodeKind::Var: return false;
      case NodeKind::Piecewise: return false;
      default:
        for (int k : n.kids)
          if (!constant(k)) return false;
        return true;
    }
  }

  bool affine(int id) const {
    const Node& n = out_.nodes[id];
    switch (n.kind) {
      case NodeKind::Number:
      case NodeKind::Var: return true;
      case NodeKind::Neg: return affine(n.kids[0]);
      case NodeKind::Add:
      case NodeKind::Sub: return affine(n.kids[0]) && affine(n.kids[1]);
      case NodeKind::Mul:
        return (constant(n.kids[0]) && affine(n.kids[1])) ||
               (affine(n.kids[0]) && constant(n.kids[1]));
      case NodeKind::Div: return affine(n.kids[0]) && constant(n.kids[1]);
      default: return constant(id);
    }
  }

  Lexer lex_;
  VarLimits limits_;
  VExpr out_;
};

}  // namespace

VExpr parse_vexpr(const std::string& text, const VarLimits& limits) {
  return Parser(text, limits).parse();
}

namespace {

class Evaluator {
public:
  Evaluator(const VExpr& e, const Vec& x, const Vec& y, const Vec& z)
      : e_(e), args_{&x, &y, &z} {}

  double run(int id) const {
    const Node& n = e_.nodes[id];
    switch (n.kind) {
      case NodeKind::Number: return n.number;
      case NodeKind::Var: {
        const Vec& v = *args_[n.var];
        if (n.index > static_cast<int>(v.size()))
          fail("IndexOutOfRange",
               std::string(1, "xyz"[n.var]) + std::to_string(n.index) +
                   " evaluated against a point of dimension " +
                   std::to_string(v.size()));
        return v[n.index - 1];
      }
      case NodeKind::Neg: return -run(n.kids[0]);
      case NodeKind::Add: return run(n.kids[0]) + run(n.kids[1]);
      case NodeKind::Sub: return run(n.kids[0]) - run(n.kids[1]);
      case NodeKind::Mul: return run(n.kids[0]) * run(n.kids[1]);
      case NodeKind::Div: {
        const double num = run(n.kids[0]);
        const double den = run(n.kids[1]);
        if (den == 0.0) fail("DivisionByZero", "division by zero");
        return num / den;
      }
      case NodeKind::Abs: return std::abs(run(n.kids[0]));
      case NodeKind::Sqrt: {
        const double v = run(n.kids[0]);
        if (v < 0.0)
          fail("NegativeSqrt", "sqrt of negative value " + format_number(v));
        return std::sqrt(v);
      }
      case NodeKind::Min: {
        double m = run(n.kids[0]);
        for (std::size_t i = 1; i < n.kids.size(); ++i)
          m = std::min(m, run(n.kids[i]));
        return m;
      }
      case NodeKind::Max: {
        double m = run(n.kids[0]);
        for (std::size_t i = 1; i < n.kids.size(); ++i)
          m = std::max(m, run(n.kids[i]));
        return m;
      }
      case NodeKind::Norm: {
        double s = 0.0;
        for (int k : n.kids) {
          const double v = run(k);
          s += v * v;
        }
        return std::sqrt(s);
      }
      case NodeKind::Piecewise: {
        for (const auto& br : n.branches) {
          if (br.is_else || holds(br.guard)) return run(br.body);
        }
        fail("CoverageGap", "piecewise has no matching branch and no else");
      }
    }
    fail("SyntaxError", "corrupt expression tree");
  }

private:
  bool holds(const std::vector<Comparison>& guard) const {
    for (const auto& c : guard) {
      const double l = run(c.lhs);
      const double r = run(c.rhs);
      const bool ok = c.rel == RelOp::Le   ? l <= r
                      : c.rel == RelOp::Lt ? l < r
                      : c.rel == RelOp::Ge ? l >= r
                                           : l > r;
      if (!ok) return false;
    }
    return true;
  }

  const VExpr& e_;
  std::array<const Vec*, 3> args_;
};

void print_node(const VExpr& e, int id, std::string& out) {
  const Node& n = e.nodes[id];
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      return;
    case NodeKind::Var:
      out += "xyz"[n.var];
      out += std::to_string(n.index);
      return;
    case NodeKind::Neg:
      out += "(-";
      print_node(e, n.kids[0], out);
      out += ")";
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char* op = n.kind == NodeKind::Add   ? " + "
                       : n.kind == NodeKind::Sub ? " - "
                       : n.kind == NodeKind::Mul ? " * "
                                                 : " / ";
      out += "(";
      print_node(e, n.kids[0], out);
      out += op;
      print_node(e, n.kids[1], out);
      out += ")";
      return;
    }
    case NodeKind::Abs:
    case NodeKind::Sqrt:
    case NodeKind::Min:
    case NodeKind::Max:
    case NodeKind::Norm: {
      const char* name = n.kind == NodeKind::Abs    ? "abs"
                         : n.kind == NodeKind::Sqrt ? "sqrt"
                         : n.kind == NodeKind::Min  ? "min"
                         : n.kind == NodeKind::Max  ? "max"
                                                    : "norm";
      out += name;
      out += "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += ", ";
        print_node(e, n.kids[i], out);
      }
      out += ")";
      return;
    }
    case NodeKind::Piecewise: {
      out += "piecewise{ ";
      for (std::size_t i = 0; i < n.branches.size(); ++i) {
        if (i) out += " ; ";
        const auto& br = n.branches[i];
        if (br.is_else) {
          out += "else : ";
        } else {
          out += "if ";
          for (std::size_t g = 0; g < br.guard.size(); ++g) {
            if (g) out += " and ";
            print_node(e, br.guard[g].lhs, out);
            out += br.guard[g].rel == RelOp::Le   ? " <= "
                   : br.guard[g].rel == RelOp::Lt ? " < "
                   : br.guard[g].rel == RelOp::Ge ? " >= "
                                                  : " > ";
            print_node(e, br.guard[g].rhs, out);
          }
          out += " : ";
        }
        print_node(e, br.body, out);
      }
      out += " }";
      return;
    }
  }
}

}  // namespace

Vec eval(const VExpr& e, const Vec& x, const Vec& y, const Vec& z) {
  Evaluator ev(e, x, y, z);
  Vec out(e.roots.size());
  for (std::size_t i = 0; i < e.roots.size(); ++i) out[i] = ev.run(e.roots[i]);
  return out;
}

std::string to_string(const VExpr& e) {
  std::string out;
  if (e.roots.size() == 1) {
    print_node(e, e.roots[0], out);
    return out;
  }
  out += "(";
  for (std::size_t i = 0; i < e.roots.size(); ++i) {
    if (i) out += ", ";
    print_node(e, e.roots[i], out);
  }
  out += ")";
  return out;
}

namespace {

// Appends all nodes of src into dst with shifted child ids; returns the offset.
int splice(VExpr& dst, const VExpr& src) {
  const int offset = static_cast<int>(dst.nodes.size());
  for (Node n : src.nodes) {
    for (int& k : n.kids) k += offset;
    for (auto& br : n.branches) {
      br.body += offset;
      for (auto& c : br.guard) {
        c.lhs += offset;
        c.rhs += offset;
      }
    }
    dst.nodes.push_back(std::move(n));
  }
  return offset;
}

}  // namespace

VExpr sum(const VExpr& a, const VExpr& b) {
  if (a.out_dim() != b.out_dim())
    fail("DimensionMismatch", "cannot add expressions of output dimensions " +
                                  std::to_string(a.out_dim()) + " and " +
                                  std::to_string(b.out_dim()));
  VExpr out;
  const int off_a = splice(out, a);
  const int off_b = splice(out, b);
  for (int i = 0; i < a.out_dim(); ++i) {
    Node n;
    n.kind = NodeKind::Add;
    n.kids = {a.roots[i] + off_a, b.roots[i] + off_b};
    out.nodes.push_back(std::move(n));
    out.roots.push_back(static_cast<int>(out.nodes.size()) - 1);
  }
  for (int v = 0; v < 3; ++v) {
    out.uses[v] = a.uses[v] || b.uses[v];
    out.max_index[v] = std::max(a.max_index[v], b.max_index[v]);
  }
  return out;
}

VExpr rename_vars(const VExpr& e, const std::array<int, 3>& mapping) {
  VExpr out = e;
  out.uses = {};
  out.max_index = {};
  for (auto& n : out.nodes) {
    if (n.kind == NodeKind::Var) {
      n.var = mapping[n.var];
      out.uses[n.var] = true;
      out.max_index[n.var] = std::max(out.max_index[n.var], n.index);
    }
  }
  return out;
}

}  // namespace veq
