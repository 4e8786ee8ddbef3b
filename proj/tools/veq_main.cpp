#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "veq/conditions.hpp"
#include "veq/errors.hpp"
#include "veq/problem.hpp"
#include "veq/report.hpp"
#include "veq/repro.hpp"
#include "veq/solver.hpp"

namespace {

using nlohmann::json;
using namespace veq;

constexpr double kPanelLipschitzBound = 10.0;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto d = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double, std::milli>(d).count();
}

void emit(const json& doc, const std::string& out_path) {
  const std::string text = dump_report(doc);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) fail("FileNotFound", "cannot write to '" + out_path + "'");
    out << text;
  }
}

// Everything a checker runner needs, derived once from the problem file.
struct CheckContext {
  const ProblemSpec& spec;
  VExpr F;                 // the trifunction under test
  SamplePlan plan;
  std::vector<Vec> convexity_weights;
};

CheckContext make_context(const ProblemSpec& spec) {
  CheckContext ctx{spec, spec.problem_expr(), SamplePlan{}, {}};
  if (spec.seed != 0) ctx.plan.seed = spec.seed;
  ctx.convexity_weights = simplex_weights(2, ctx.plan.weight_count, ctx.plan.seed);
  return ctx;
}

// KKM-style checkers quantify over subset sizes; sizes 1-4 are merged into a
// single verdict (first failure wins, counts accumulate).
Verdict merged_over_sizes(const std::string& name,
                          const std::function<Verdict(int)>& run) {
  Verdict out;
  out.checker = name;
  long count = 0;
  std::string notes;
  for (int k = 1; k <= 4; ++k) {
    Verdict v = run(k);
    count += v.checked_count;
    if (!v.notes.empty())
      notes += (notes.empty() ? "" : "; ") + ("size " + std::to_string(k) +
                                              ": " + v.notes);
    out.tol = v.tol;
    if (v.status == Status::Fail) {
      v.checker = name;
      v.checked_count = count;
      v.notes = "subset size " + std::to_string(k) +
                (v.notes.empty() ? "" : "; " + v.notes);
      return v;
    }
  }
  out.status = Status::Pass;
  out.checked_count = count;
  out.notes = notes;
  return out;
}

using Runner = std::function<Verdict(const CheckContext&)>;

std::map<std::string, Runner> checker_registry() {
  std::map<std::string, Runner> reg;
  reg["pseudomonotone"] = [](const CheckContext& c) {
    return check_pseudomonotone(c.F, c.spec.domain, c.spec.cone, c.spec.tol);
  };
  reg["explicit_quasiconvex"] = [](const CheckContext& c) {
    return check_explicit_quasiconvex(c.F, c.spec.domain, c.spec.sched,
                                      c.spec.cone, c.spec.tol);
  };
  reg["hemicontinuity"] = [](const CheckContext& c) {
    return check_hemicontinuity(c.F, strided_pairs(c.spec.domain, 64),
                                c.spec.sched, c.spec.cone, c.spec.tol);
  };
  reg["c_convex_primal"] = [](const CheckContext& c) {
    return check_c_convex(c.F, MapKind::PrimalSlice, c.spec.domain, c.spec.cone,
                          c.convexity_weights, c.spec.tol);
  };
  reg["c_convex_dual"] = [](const CheckContext& c) {
    return check_c_convex(c.F, MapKind::DualSlice, c.spec.domain, c.spec.cone,
                          c.convexity_weights, c.spec.tol);
  };
  reg["c_convex_raw"] = [](const CheckContext& c) {
    return check_c_convex(c.F, MapKind::RawBifunction, c.spec.domain,
                          c.spec.cone, c.convexity_weights, c.spec.tol);
  };
  reg["diagonal_not_neg_int"] = [](const CheckContext& c) {
    return check_diagonal(c.F, c.spec.domain, DiagonalMode::NotNegInt,
                          c.spec.cone, c.spec.tol);
  };
  reg["diagonal_neg_c_not_neg_int"] = [](const CheckContext& c) {
    return check_diagonal(c.F, c.spec.domain, DiagonalMode::NegCNotNegInt,
                          c.spec.cone, c.spec.tol);
  };
  reg["diagonal_zero"] = [](const CheckContext& c) {
    return check_diagonal(c.F, c.spec.domain, DiagonalMode::Zero, c.spec.cone,
                          c.spec.tol);
  };
  reg["offdiag_neg_c"] = [](const CheckContext& c) {
    return check_diagonal(c.F, c.spec.domain, DiagonalMode::OffdiagNegC,
                          c.spec.cone, c.spec.tol);
  };
  reg["essential_quasimonotone"] = [](const CheckContext& c) {
    const VExpr f = c.spec.has_split_maps() ? c.spec.map_f() : c.F;
    return merged_over_sizes("essential_quasimonotone", [&](int k) {
      return check_essential_quasimonotone(f, c.spec.domain, c.spec.cone, k,
                                           c.plan, c.spec.tol);
    });
  };
  reg["kkm_primal"] = [](const CheckContext& c) {
    return merged_over_sizes("kkm_primal", [&](int k) {
      return check_kkm(c.F, KkmForm::Primal, c.spec.domain, k, c.plan,
                       c.spec.cone, c.spec.tol);
    });
  };
  reg["kkm_dual"] = [](const CheckContext& c) {
    return merged_over_sizes("kkm_dual", [&](int k) {
      return check_kkm(c.F, KkmForm::Dual, c.spec.domain, k, c.plan,
                       c.spec.cone, c.spec.tol);
    });
  };
  reg["continuity_probe_primal"] = [](const CheckContext& c) {
    return continuity_probe(c.F, SliceForm::Primal, c.spec.domain,
                            kPanelLipschitzBound, c.spec.tol);
  };
  reg["continuity_probe_dual"] = [](const CheckContext& c) {
    return continuity_probe(c.F, SliceForm::Dual, c.spec.domain,
                            kPanelLipschitzBound, c.spec.tol);
  };
  reg["coercivity_compact"] = [](const CheckContext& c) {
    return find_coercivity(c.F, c.spec.domain, CoercivityVariant::CompactSet,
                           c.spec.cone, c.spec.tol)
        .verdict;
  };
  reg["coercivity_core"] = [](const CheckContext& c) {
    return find_coercivity(c.F, c.spec.domain, CoercivityVariant::Core,
                           c.spec.cone, c.spec.tol)
        .verdict;
  };
  reg["coercivity_ball_lt"] = [](const CheckContext& c) {
    return find_coercivity(c.F, c.spec.domain, CoercivityVariant::BallLt,
                           c.spec.cone, c.spec.tol)
        .verdict;
  };
  reg["coercivity_ball_le"] = [](const CheckContext& c) {
    return find_coercivity(c.F, c.spec.domain, CoercivityVariant::BallLe,
                           c.spec.cone, c.spec.tol)
        .verdict;
  };
  reg["coercivity_sphere"] = [](const CheckContext& c) {
    return find_coercivity(c.F, c.spec.domain, CoercivityVariant::Sphere,
                           c.spec.cone, c.spec.tol)
        .verdict;
  };
  return reg;
}

Verdict renamed(Verdict v, const std::string& suffix) {
  v.checker += suffix;
  return v;
}

// Panels bundle the hypothesis checkers of one named existence/equivalence
// statement; the panel id is the user-facing handle for the bundle.
std::vector<Verdict> run_panel(const std::string& id, const CheckContext& ctx,
                               json* extra) {
  const ProblemSpec& spec = ctx.spec;
  const VExpr& F = ctx.F;
  const PolyCone& cone = spec.cone;
  const GridDomain& grid = spec.domain;
  const double tol = spec.tol;
  auto reg = checker_registry();
  std::vector<Verdict> panel;

  auto run = [&](const char* name) { panel.push_back(reg.at(name)(ctx)); };

  if (id == "t3.0") {
    CompareReport report =
        compare_primal_dual(F, grid, cone, tol, true, spec.sched);
    if (extra) {
      (*extra)["relation"] = to_string(report.relation);
      (*extra)["primal"] = to_json(report.primal);
      (*extra)["dual"] = to_json(report.dual);
    }
    return report.panel;
  }
  if (id == "t11") {
    run("continuity_probe_primal");
    run("c_convex_primal");
    run("diagonal_not_neg_int");
    run("coercivity_compact");
    return panel;
  }
  if (id == "t110") {
    run("continuity_probe_primal");
    run("c_convex_primal");
    run("diagonal_neg_c_not_neg_int");
    run("coercivity_core");
    return panel;
  }
  if (id == "t112") {
    run("continuity_probe_dual");
    run("c_convex_dual");
    run("diagonal_neg_c_not_neg_int");
    run("offdiag_neg_c");
    panel.push_back(find_coercivity(F, grid, CoercivityVariant::Core, cone, tol,
                                    SliceForm::Dual)
                        .verdict);
    run("explicit_quasiconvex");
    run("hemicontinuity");
    return panel;
  }
  if (id == "t12") {
    run("continuity_probe_primal");
    run("c_convex_primal");
    run("diagonal_neg_c_not_neg_int");
    run("coercivity_ball_lt");
    return panel;
  }
  if (id == "t13") {
    run("continuity_probe_primal");
    run("c_convex_primal");
    run("diagonal_not_neg_int");
    run("coercivity_ball_le");
    return panel;
  }
  if (id == "t134") {
    run("continuity_probe_primal");
    run("c_convex_primal");
    run("diagonal_neg_c_not_neg_int");
    run("coercivity_sphere");
    return panel;
  }

  // the remaining panels need the split maps f and g
  if (!spec.has_split_maps())
    fail("MissingBlock",
         "panel '" + id + "' needs bifunction_f (and optionally bifunction_g)");
  const VExpr f = spec.map_f();
  const VExpr g = spec.map_g();
  const VExpr h = combine_perturbed(f, g);

  auto convex_raw = [&](const VExpr& m, const GridDomain& on) {
    return check_c_convex(m, MapKind::RawBifunction, on, cone,
                          ctx.convexity_weights, tol);
  };
  auto diagonal_of = [&](const VExpr& m, DiagonalMode mode,
                         const GridDomain& on) {
    return check_diagonal(m, on, mode, cone, tol);
  };

  if (id == "t5.1") {
    panel.push_back(continuity_probe(h, SliceForm::Primal, grid,
                                     kPanelLipschitzBound, tol));
    panel.push_back(renamed(convex_raw(f, grid), "_f"));
    panel.push_back(renamed(convex_raw(g, grid), "_g"));
    panel.push_back(renamed(diagonal_of(f, DiagonalMode::Zero, grid), "_f"));
    panel.push_back(
        renamed(diagonal_of(g, DiagonalMode::NotNegInt, grid), "_g"));
    panel.push_back(
        find_coercivity(h, grid, CoercivityVariant::CompactSet, cone, tol)
            .verdict);
    return panel;
  }
  if (id == "t5.2") {
    // first grid point solving the base problem becomes x0
    const Vec* x0 = nullptr;
    for (const auto& x : grid.points) {
      bool solves = true;
      for (const auto& y : grid.points) {
        if (member(eval(g, x, y, x), cone, Region::InNegIntC, tol)) {
          solves = false;
          break;
        }
      }
      if (solves) {
        x0 = &x;
        break;
      }
    }
    if (!x0) {
      Verdict v;
      v.checker = "transfer";
      v.status = Status::Fail;
      v.tol = tol;
      v.notes = "no grid point solves the base problem, nothing to transfer";
      panel.push_back(v);
      return panel;
    }
    if (extra) (*extra)["x0"] = *x0;
    panel.push_back(transfer_solution(f, g, *x0, grid, spec.sched, cone, tol));
    return panel;
  }
  if (id == "t5.3") {
    const CoercivityResult coer =
        find_coercivity(h, grid, CoercivityVariant::Core, cone, tol);
    panel.push_back(coer.verdict);
    GridDomain k0 = grid;
    if (coer.certificate) {
      k0 = make_point_list(coer.certificate->k0);
      if (extra) (*extra)["k0_size"] = k0.points.size();
    } else if (extra) {
      (*extra)["k0_size"] = nullptr;
    }
    panel.push_back(
        continuity_probe(h, SliceForm::Primal, k0, kPanelLipschitzBound, tol));
    panel.push_back(merged_over_sizes("essential_quasimonotone", [&](int k) {
      return check_essential_quasimonotone(f, k0, cone, k, ctx.plan, tol);
    }));
    panel.push_back(renamed(convex_raw(f, k0), "_f"));
    panel.push_back(renamed(convex_raw(g, k0), "_g"));
    panel.push_back(
        renamed(diagonal_of(f, DiagonalMode::NegCNotNegInt, grid), "_f"));
    panel.push_back(renamed(diagonal_of(g, DiagonalMode::Zero, grid), "_g"));
    return panel;
  }
  fail("InvalidArgument",
       "unknown panel '" + id +
           "' (expected t3.0, t11, t110, t112, t12, t13, t134, t5.1, t5.2 or "
           "t5.3)");
}

int cmd_solve(const std::string& file, const std::string& mode,
              bool expect_nonempty, const std::string& out_path,
              bool deterministic) {
  ProblemSpec spec;
  try {
    spec = parse_problem_file(file);
  } catch (const VeqError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    json doc;
    bool empty = false;
    if (mode == "both") {
      const CompareReport report = compare_primal_dual(
          spec.problem_expr(), spec.domain, spec.cone, spec.tol, false,
          spec.sched);
      doc = to_json(report);
      empty = report.primal.solutions.empty() || report.dual.solutions.empty();
    } else {
      SolutionSet set;
      if (mode == "primal") {
        set = solve_primal(spec.problem_expr(), spec.domain, spec.cone, spec.tol);
      } else if (mode == "dual") {
        set = solve_dual(spec.problem_expr(), spec.domain, spec.cone, spec.tol);
      } else {
        if (!spec.has_split_maps()) {
          std::cerr << "error: MissingBlock: --perturbed needs bifunction_f "
                       "(and optionally bifunction_g) in "
                    << file << "\n";
          return 1;
        }
        set = solve_perturbed(spec.map_f(), spec.map_g(), spec.domain,
                              spec.cone, spec.tol);
      }
      doc = to_json(set);
      empty = set.solutions.empty();
    }
    doc["grid"] = to_json(spec.domain);
    if (!deterministic) doc["timing_ms"] = elapsed_ms(start);
    emit(doc, out_path);
    if (expect_nonempty && empty) return 3;
    return 0;
  } catch (const VeqError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_check(const std::string& file, const std::vector<std::string>& names,
              const std::string& panel_id, const std::string& out_path,
              bool deterministic) {
  ProblemSpec spec;
  try {
    spec = parse_problem_file(file);
  } catch (const VeqError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const CheckContext ctx = make_context(spec);
    std::vector<Verdict> verdicts;
    json doc;
    if (!panel_id.empty()) {
      json extra = json::object();
      verdicts = run_panel(panel_id, ctx, &extra);
      doc = extra;
      doc["panel"] = panel_id;
    } else {
      const auto reg = checker_registry();
      for (const auto& name : names) {
        auto it = reg.find(name);
        if (it == reg.end())
          fail("InvalidArgument", "unknown checker '" + name + "'");
        verdicts.push_back(it->second(ctx));
      }
    }
    json vd = json::object();
    bool any_fail = false;
    for (const auto& v : verdicts) {
      vd[v.checker] = to_json(v);
      any_fail = any_fail || v.status == Status::Fail;
    }
    doc["verdicts"] = vd;
    doc["grid"] = to_json(spec.domain);
    doc["tol"] = spec.tol;
    if (!deterministic) doc["timing_ms"] = elapsed_ms(start);
    emit(doc, out_path);
    return any_fail ? 4 : 0;
  } catch (const VeqError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_repro(const std::string& name) {
  if (name == "ex31") return run_repro_ex31(std::cout) ? 0 : 4;
  if (name == "ex32") return run_repro_ex32(std::cout) ? 0 : 4;
  std::cerr << "error: UnknownFixture: no reproduction named '" << name
            << "' (expected ex31 or ex32)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak vector equilibrium workbench"};
  app.require_subcommand(1);

  std::string solve_file, solve_out, check_file, check_out, panel_id, repro_name;
  std::vector<std::string> checker_names;
  bool flag_primal = false, flag_dual = false, flag_both = false,
       flag_perturbed = false, expect_nonempty = false, solve_det = false,
       check_det = false;

  CLI::App* solve =
      app.add_subcommand("solve", "solve a problem file on its grid");
  solve->add_option("file", solve_file, "problem file (.veq)")->required();
  auto* op = solve->add_flag("--primal", flag_primal, "solve the primal problem");
  auto* od = solve->add_flag("--dual", flag_dual, "solve the dual problem");
  auto* ob = solve->add_flag("--both", flag_both,
                             "solve both and classify the relation");
  auto* opp = solve->add_flag("--perturbed", flag_perturbed,
                              "solve the combined split-map problem");
  op->excludes(od)->excludes(ob)->excludes(opp);
  od->excludes(ob)->excludes(opp);
  ob->excludes(opp);
  solve->add_flag("--expect-nonempty", expect_nonempty,
                  "exit 3 when the solution set is empty");
  solve->add_option("--out", solve_out, "write the JSON report here");
  solve->add_flag("--deterministic", solve_det,
                  "omit timing so identical runs emit identical bytes");

  CLI::App* check =
      app.add_subcommand("check", "run hypothesis checkers on a problem file");
  check->add_option("file", check_file, "problem file (.veq)")->required();
  auto* oc = check->add_option("--checker", checker_names,
                               "checker name (repeatable)");
  auto* opan = check->add_option("--panel", panel_id,
                                 "hypothesis panel id (t3.0, t11, t110, t112, "
                                 "t12, t13, t134, t5.1, t5.2, t5.3)");
  oc->excludes(opan);
  check->add_option("--out", check_out, "write the JSON report here");
  check->add_flag("--deterministic", check_det,
                  "omit timing so identical runs emit identical bytes");

  CLI::App* repro = app.add_subcommand("repro", "run a scripted reproduction");
  repro->add_option("name", repro_name, "ex31 or ex32")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    std::string mode = "both";
    if (flag_primal) mode = "primal";
    if (flag_dual) mode = "dual";
    if (flag_perturbed) mode = "perturbed";
    return cmd_solve(solve_file, mode, expect_nonempty, solve_out, solve_det);
  }
  if (check->parsed()) {
    if (checker_names.empty() && panel_id.empty()) {
      std::cerr << "error: InvalidArgument: pass --checker or --panel\n";
      return 1;
    }
    return cmd_check(check_file, checker_names, panel_id, check_out, check_det);
  }
  return cmd_repro(repro_name);
}
