#include "veq/problem.hpp"

#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veq/errors.hpp"

namespace veq {

namespace {

using nlohmann::json;

struct RawValue {
  int line = 0;
  std::string text;
};

struct RawFile {
  std::map<std::string, RawValue> top;                      // key -> value
  std::map<std::string, std::map<std::string, RawValue>> blocks;
};

const char* const kTopKeys[] = {"trifunction", "bifunction_f", "bifunction_g",
                                "fixture", "tol", "seed"};
const char* const kBlockNames[] = {"space", "cone", "domain", "tschedule",
                                   "vvi", "params"};

bool known_top_key(const std::string& k) {
  for (const char* s : kTopKeys)
    if (k == s) return true;
  return false;
}

bool known_block(const std::string& k) {
  for (const char* s : kBlockNames)
    if (k == s) return true;
  return false;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void syntax(const std::string& label, int line,
                         const std::string& msg) {
  fail("SyntaxError", label + ":" + std::to_string(line) + ": " + msg);
}

RawFile read_raw(const std::string& text, const std::string& label) {
  RawFile raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string open_block;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;

    if (body == "}") {
      if (open_block.empty()) syntax(label, lineno, "unmatched '}'");
      open_block.clear();
      continue;
    }

    const std::size_t eq = body.find('=');
    const bool opens = eq == std::string::npos && body.back() == '{';
    if (opens) {
      if (!open_block.empty())
        syntax(label, lineno, "blocks cannot nest");
      const std::string name = trim(body.substr(0, body.size() - 1));
      if (!known_block(name))
        syntax(label, lineno, "unknown block '" + name + "'");
      if (raw.blocks.count(name))
        fail("DuplicateBlock",
             label + ":" + std::to_string(lineno) + ": block '" + name +
                 "' appears twice");
      raw.blocks[name];  // create
      open_block = name;
      continue;
    }

    if (eq == std::string::npos)
      syntax(label, lineno, "expected 'key = value' or a block");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) syntax(label, lineno, "empty key");
    if (value.empty()) syntax(label, lineno, "empty value for '" + key + "'");

    if (open_block.empty()) {
      if (!known_top_key(key))
        syntax(label, lineno, "unknown key '" + key + "'");
      if (raw.top.count(key))
        fail("DuplicateBlock", label + ":" + std::to_string(lineno) +
                                   ": key '" + key + "' appears twice");
      raw.top[key] = {lineno, value};
    } else {
      auto& block = raw.blocks[open_block];
      if (block.count(key))
        fail("DuplicateBlock", label + ":" + std::to_string(lineno) +
                                   ": key '" + key + "' appears twice in '" +
                                   open_block + "'");
      block[key] = {lineno, value};
    }
  }
  if (!open_block.empty())
    syntax(label, lineno, "block '" + open_block + "' is never closed");
  return raw;
}

json parse_json_value(const RawValue& v, const std::string& label) {
  try {
    return json::parse(v.text);
  } catch (const json::exception& e) {
    syntax(label, v.line, std::string("bad value: ") + e.what());
  }
}

double as_number(const json& j, const RawValue& v, const std::string& label) {
  if (!j.is_number()) syntax(label, v.line, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const RawValue& v, const std::string& label) {
  if (!j.is_number_integer()) syntax(label, v.line, "expected an integer");
  return j.get<int>();
}

Vec as_vec(const json& j, const RawValue& v, const std::string& label) {
  if (!j.is_array()) syntax(label, v.line, "expected a list of numbers");
  Vec out;
  for (const auto& item : j) {
    if (!item.is_number()) syntax(label, v.line, "expected a list of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

std::vector<Vec> as_matrix(const json& j, const RawValue& v,
                           const std::string& label) {
  if (!j.is_array()) syntax(label, v.line, "expected a list of rows");
  std::vector<Vec> out;
  for (const auto& row : j) out.push_back(as_vec(row, v, label));
  return out;
}

std::string as_string(const json& j, const RawValue& v,
                      const std::string& label) {
  if (!j.is_string()) syntax(label, v.line, "expected a quoted string");
  return j.get<std::string>();
}

const RawValue* get(const std::map<std::string, RawValue>& m,
                    const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

void reject_unknown(const std::map<std::string, RawValue>& block,
                    const std::vector<std::string>& allowed,
                    const std::string& block_name, const std::string& label) {
  for (const auto& [key, v] : block) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (!ok)
      syntax(label, v.line,
             "unknown key '" + key + "' in block '" + block_name + "'");
  }
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text,
                               const std::string& label) {
  const RawFile raw = read_raw(text, label);
  ProblemSpec spec;
  spec.source_label = label;

  // space
  auto space_it = raw.blocks.find("space");
  if (space_it == raw.blocks.end())
    fail("MissingBlock", label + ": missing 'space' block");
  reject_unknown(space_it->second, {"x_dim", "z_dim"}, "space", label);
  const RawValue* xv = get(space_it->second, "x_dim");
  const RawValue* zv = get(space_it->second, "z_dim");
  if (!xv || !zv)
    fail("MissingBlock", label + ": space block needs x_dim and z_dim");
  spec.x_dim = as_int(parse_json_value(*xv, label), *xv, label);
  spec.z_dim = as_int(parse_json_value(*zv, label), *zv, label);
  if (spec.x_dim < 1 || spec.z_dim < 1)
    fail("BadBounds", label + ": dimensions must be positive");

  // cone
  auto cone_it = raw.blocks.find("cone");
  if (cone_it == raw.blocks.end())
    fail("MissingBlock", label + ": missing 'cone' block");
  reject_unknown(cone_it->second, {"rows", "label"}, "cone", label);
  const RawValue* rows_v = get(cone_it->second, "rows");
  if (!rows_v) fail("MissingBlock", label + ": cone block needs rows");
  std::string cone_label = "cone";
  if (const RawValue* lv = get(cone_it->second, "label"))
    cone_label = as_string(parse_json_value(*lv, label), *lv, label);
  spec.cone = PolyCone(as_matrix(parse_json_value(*rows_v, label), *rows_v, label),
                       cone_label);
  if (spec.cone.dim != spec.z_dim)
    fail("DimensionMismatch",
         label + ": cone rows have " + std::to_string(spec.cone.dim) +
             " entries but z_dim = " + std::to_string(spec.z_dim));

  // domain
  auto dom_it = raw.blocks.find("domain");
  if (dom_it == raw.blocks.end())
    fail("MissingBlock", label + ": missing 'domain' block");
  reject_unknown(dom_it->second, {"box", "step", "points"}, "domain", label);
  const RawValue* box_v = get(dom_it->second, "box");
  const RawValue* pts_v = get(dom_it->second, "points");
  if ((box_v != nullptr) == (pts_v != nullptr))
    fail("ConflictingBlocks",
         label + ": domain needs exactly one of 'box' or 'points'");
  if (box_v) {
    const RawValue* step_v = get(dom_it->second, "step");
    if (!step_v) fail("MissingBlock", label + ": box domain needs 'step'");
    const auto box = as_matrix(parse_json_value(*box_v, label), *box_v, label);
    if (static_cast<int>(box.size()) != spec.x_dim)
      fail("DimensionMismatch",
           label + ": box has " + std::to_string(box.size()) +
               " axes but x_dim = " + std::to_string(spec.x_dim));
    Vec lo, hi;
    for (const auto& axis : box) {
      if (axis.size() != 2)
        fail("BadBounds", label + ": each box axis needs [lo, hi]");
      lo.push_back(axis[0]);
      hi.push_back(axis[1]);
    }
    const double step =
        as_number(parse_json_value(*step_v, label), *step_v, label);
    spec.domain = make_grid(lo, hi, step);
  } else {
    const auto pts = as_matrix(parse_json_value(*pts_v, label), *pts_v, label);
    for (const auto& p : pts)
      if (static_cast<int>(p.size()) != spec.x_dim)
        fail("DimensionMismatch",
             label + ": point dimension does not match x_dim");
    spec.domain = make_point_list(pts);
  }

  // tschedule
  if (auto it = raw.blocks.find("tschedule"); it != raw.blocks.end()) {
    reject_unknown(it->second, {"t0", "rho", "count"}, "tschedule", label);
    TSchedule s;
    if (const RawValue* v = get(it->second, "t0"))
      s.t0 = as_number(parse_json_value(*v, label), *v, label);
    if (const RawValue* v = get(it->second, "rho"))
      s.rho = as_number(parse_json_value(*v, label), *v, label);
    if (const RawValue* v = get(it->second, "count"))
      s.count = as_int(parse_json_value(*v, label), *v, label);
    spec.sched = TSchedule(s.t0, s.rho, s.count);
  }

  // scalars
  if (const RawValue* v = get(raw.top, "tol")) {
    spec.tol = as_number(parse_json_value(*v, label), *v, label);
    if (!(spec.tol > 0.0)) fail("BadBounds", label + ": tol must be positive");
  }
  if (const RawValue* v = get(raw.top, "seed")) {
    const json j = parse_json_value(*v, label);
    if (!j.is_number_unsigned() && !j.is_number_integer())
      syntax(label, v->line, "seed must be a nonnegative integer");
    spec.seed = j.get<std::uint64_t>();
  }

  // fixture params
  if (auto it = raw.blocks.find("params"); it != raw.blocks.end()) {
    for (const auto& [key, v] : it->second) {
      const json j = parse_json_value(v, label);
      if (j.is_number()) {
        spec.fixture_params.scalars[key] = j.get<double>();
      } else if (j.is_array() && !j.empty() && j.front().is_array()) {
        spec.fixture_params.matrices[key] = as_matrix(j, v, label);
      } else if (j.is_array()) {
        spec.fixture_params.vectors[key] = as_vec(j, v, label);
      } else {
        syntax(label, v.line, "params values must be numbers or lists");
      }
    }
  }

  // problem source
  const VarLimits limits{spec.x_dim, spec.x_dim, spec.x_dim};
  auto parse_expr = [&](const RawValue& v, const char* what) {
    try {
      return parse_vexpr(v.text, limits);
    } catch (const VeqError& e) {
      fail(e.code(), label + ":" + std::to_string(v.line) + ": in " + what +
                         ": " + e.what());
    }
  };

  int sources = 0;
  if (const RawValue* v = get(raw.top, "trifunction")) {
    spec.trifunction = parse_expr(*v, "trifunction");
    ++sources;
  }
  if (const RawValue* v = get(raw.top, "bifunction_f")) {
    spec.bifunction_f = parse_expr(*v, "bifunction_f");
    ++sources;
  }
  if (const RawValue* v = get(raw.top, "bifunction_g")) {
    if (!spec.bifunction_f)
      fail("ConflictingBlocks", label + ": bifunction_g requires bifunction_f");
    spec.bifunction_g = parse_expr(*v, "bifunction_g");
  }
  if (auto it = raw.blocks.find("vvi"); it != raw.blocks.end()) {
    reject_unknown(it->second, {"slope", "intercept"}, "vvi", label);
    const RawValue* slope_v = get(it->second, "slope");
    if (!slope_v) fail("MissingBlock", label + ": vvi block needs 'slope'");
    AffineOperator op;
    op.slope = as_matrix(parse_json_value(*slope_v, label), *slope_v, label);
    if (const RawValue* v = get(it->second, "intercept"))
      op.intercept = as_vec(parse_json_value(*v, label), *v, label);
    spec.vvi_op = std::move(op);
    ++sources;
  }
  if (const RawValue* v = get(raw.top, "fixture")) {
    const std::string name = as_string(parse_json_value(*v, label), *v, label);
    spec.fixture_id = fixture_from_name(name);
    ++sources;
  }

  if (sources == 0)
    fail("MissingBlock",
         label + ": no problem source (trifunction, bifunction_f, vvi or "
                 "fixture)");
  if (sources > 1)
    fail("ConflictingBlocks",
         label + ": more than one problem source given");

  if (spec.vvi_op) {
    if (spec.z_dim != 1)
      fail("DimensionMismatch",
           label + ": the affine pairing is scalar, z_dim must be 1");
    if (static_cast<int>(spec.vvi_op->slope.size()) != spec.x_dim)
      fail("DimensionMismatch", label + ": vvi slope must have x_dim rows");
    for (const auto& row : spec.vvi_op->slope)
      if (static_cast<int>(row.size()) != spec.x_dim)
        fail("DimensionMismatch", label + ": vvi slope rows must have x_dim "
                                          "entries");
    if (!spec.vvi_op->intercept.empty() &&
        static_cast<int>(spec.vvi_op->intercept.size()) != spec.x_dim)
      fail("DimensionMismatch", label + ": vvi intercept must have x_dim "
                                        "entries");
  }

  // output dimension must match the cone
  const VExpr probe = spec.problem_expr();
  if (probe.out_dim() != spec.z_dim)
    fail("DimensionMismatch",
         label + ": problem emits " + std::to_string(probe.out_dim()) +
             " components but z_dim = " + std::to_string(spec.z_dim));
  if (spec.bifunction_g && spec.bifunction_g->out_dim() != spec.z_dim)
    fail("DimensionMismatch",
         label + ": bifunction_g emits " +
             std::to_string(spec.bifunction_g->out_dim()) +
             " components but z_dim = " + std::to_string(spec.z_dim));

  return spec;
}

ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("FileNotFound", "cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

VExpr ProblemSpec::problem_expr() const {
  if (trifunction) return *trifunction;
  if (bifunction_f) return combine_perturbed(map_f(), map_g());
  if (vvi_op) {
    FixtureParams p;
    p.scalars["n"] = static_cast<double>(x_dim);
    p.matrices["slope"] = vvi_op->slope;
    if (!vvi_op->intercept.empty()) p.vectors["intercept"] = vvi_op->intercept;
    return fixture(FixtureId::VviAffine, p);
  }
  return fixture(*fixture_id, fixture_params);
}

VExpr ProblemSpec::map_f() const {
  if (!bifunction_f)
    fail("MissingBlock",
         source_label + ": this problem has no split maps (bifunction_f)");
  return *bifunction_f;
}

VExpr ProblemSpec::map_g() const {
  if (bifunction_g) return *bifunction_g;
  std::string zeros = "(0";
  for (int i = 1; i < z_dim; ++i) zeros += ", 0";
  zeros += ")";
  return parse_vexpr(zeros);
}

}  // namespace veq
