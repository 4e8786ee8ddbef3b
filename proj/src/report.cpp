#include "veq/report.hpp"

namespace veq {

namespace {

using nlohmann::json;

// Counterexample items mix input points and computed vectors; the report
// splits them into "points" and "values" by name so readers see at a glance
// what was plugged in versus what came out.
bool is_computed(const std::string& name) {
  static const char* const computed[] = {
      "value",     "values",   "difference", "diff_to_diagonal",
      "diff_to_endpoint", "jump", "allowance",  "margin",
      "lambda",    "t",        "r",          "allowed"};
  for (const char* c : computed)
    if (name == c) return true;
  return false;
}

}  // namespace

json to_json(const Counterexample& ce) {
  json points = json::object();
  json values = json::object();
  json items = json::array();
  for (const auto& [name, vec] : ce.items) {
    items.push_back({{"name", name}, {"vector", vec}});
    (is_computed(name) ? values : points)[name] = vec;
  }
  return {{"points", points}, {"values", values}, {"items", items}};
}

json to_json(const Verdict& v) {
  json doc = {{"checker", v.checker},
              {"status", to_string(v.status)},
              {"tol", v.tol},
              {"checked_count", v.checked_count},
              {"notes", v.notes}};
  if (v.counterexample) doc["counterexample"] = to_json(*v.counterexample);
  return doc;
}

json to_json(const GridDomain& grid) {
  json doc = {{"dim", grid.dim()}, {"size", grid.points.size()}};
  if (grid.kind == GridDomain::Kind::BoxGrid) {
    doc["kind"] = "box";
    doc["lo"] = grid.lo;
    doc["hi"] = grid.hi;
    doc["step"] = grid.step;
  } else {
    doc["kind"] = "points";
  }
  return doc;
}

json to_json(const SolutionSet& set) {
  json solutions = json::array();
  for (const auto& s : set.solutions) solutions.push_back(s);
  json refutations = json::object();
  for (const auto& r : set.refutations)
    refutations[format_point(r.x)] = {{"y", r.witness}, {"value", r.value}};
  json doc = {{"problem", to_string(set.problem)},
              {"tol", set.tol},
              {"solutions", solutions},
              {"refutations", refutations}};
  if (!set.notes.empty()) doc["notes"] = set.notes;
  return doc;
}

json to_json(const CompareReport& report) {
  json doc = {{"primal", to_json(report.primal)},
              {"dual", to_json(report.dual)},
              {"relation", to_string(report.relation)}};
  if (!report.panel.empty()) {
    json panel = json::object();
    for (const auto& v : report.panel) panel[v.checker] = to_json(v);
    doc["panel"] = panel;
  }
  return doc;
}

json to_json(const CoercivityCertificate& cert) {
  json k0 = json::array();
  for (const auto& p : cert.k0) k0.push_back(p);
  json assignments = json::object();
  for (const auto& [x, y0] : cert.assignments)
    assignments[format_point(x)] = y0;
  return {{"variant", to_string(cert.variant)},
          {"r", cert.r},
          {"k0", k0},
          {"assignments", assignments},
          {"cone_region", to_string(cert.cone_region_used)}};
}

std::string dump_report(const nlohmann::json& doc) {
  return doc.dump(2) + "\n";
}

}  // namespace veq
