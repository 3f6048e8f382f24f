// Python bindings for the solver toolkit. The surface mirrors the CLI:
// parse/serialize/validate, solve, synth, verify, simulate, oracle, fuzz.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcsynth/errors.hpp"
#include "lcsynth/model.hpp"
#include "lcsynth/reach.hpp"
#include "lcsynth/safety.hpp"
#include "lcsynth/semantics.hpp"
#include "lcsynth/strategy.hpp"
#include "lcsynth/verify.hpp"

namespace py = pybind11;

namespace {

py::dict solve_dict(const lcs::LcsModel& m, int max_generations,
                    size_t max_nodes) {
  lcs::GameCtx ctx(m);
  py::dict d;
  if (m.objective.kind == lcs::ObjectiveKind::Safety) {
    auto res = lcs::solve_safety(ctx, max_generations);
    d["objective"] = "safety";
    d["winner"] = lcs::winner_name(res.winner);
    d["generations"] = res.generations;
    d["families_seen"] = res.families_seen;
    d["basis_size"] = res.basis.size();
  } else {
    auto res = lcs::solve_reach(ctx, max_nodes);
    d["objective"] = "reach";
    d["winner"] = lcs::winner_name(res.winner);
    d["nodes_built"] = res.nodes_built;
    d["roots"] = res.forest.roots.size();
    d["max_depth"] = res.forest.max_depth;
    d["max_sigma1_run"] = res.forest.max_sigma1_run;
  }
  return d;
}

py::object synth_json(const lcs::LcsModel& m, int max_generations,
                      size_t max_nodes) {
  lcs::GameCtx ctx(m);
  if (m.objective.kind == lcs::ObjectiveKind::Safety) {
    auto res = lcs::solve_safety(ctx, max_generations);
    if (res.winner != lcs::Winner::ExistsWins) return py::none();
    return py::str(
        lcs::strategy_to_json(m, lcs::extract_safety_strategy(ctx, res.basis)));
  }
  auto res = lcs::solve_reach(ctx, max_nodes);
  if (res.winner != lcs::Winner::ExistsWins) return py::none();
  return py::str(
      lcs::strategy_to_json(m, lcs::extract_reach_strategy(ctx, res.forest)));
}

py::dict verify_dict(const lcs::LcsModel& m, const std::string& strategy_json,
                     int depth, size_t max_nodes) {
  auto a = lcs::strategy_from_json(m, strategy_json);
  py::dict d;
  auto rep = lcs::check_wellformed(m, a);
  d["wellformed"] = rep.ok;
  if (!rep.ok) {
    d["violations"] = rep.violations;
    d["ok"] = false;
    return d;
  }
  if (m.objective.kind == lcs::ObjectiveKind::Safety) {
    lcs::LcsModel prod = lcs::product_lcs(m, a);
    auto cover = lcs::backward_coverability(prod, prod.objective.target);
    d["method"] = "product backward coverability";
    d["ok"] = !cover.reachable;
  } else {
    if (depth < 0) {
      lcs::GameCtx ctx(m);
      auto res = lcs::solve_reach(ctx, max_nodes);
      depth = res.forest.max_depth * (res.forest.max_sigma1_run + 1);
    }
    auto out = lcs::exhaustive_outcomes(m, a, depth);
    d["method"] = "exhaustive outcomes";
    d["depth"] = depth;
    d["ok"] = !out.violated && !out.frontier_open;
  }
  return d;
}

py::dict simulate_dict(const lcs::LcsModel& m,
                       const std::string& strategy_json, int depth) {
  auto a = lcs::strategy_from_json(m, strategy_json);
  auto rep = lcs::simulate(m, a, depth);
  py::dict d;
  d["truncated"] = rep.truncated;
  py::list plays;
  for (const auto& p : rep.plays) {
    py::dict pd;
    pd["steps"] = p.steps.size();
    pd["ended"] = p.ended;
    pd["visited_target"] = p.visited_target;
    plays.append(pd);
  }
  d["plays"] = plays;
  return d;
}

py::dict oracle_dict(const lcs::LcsModel& m, size_t max_states) {
  auto res = lcs::finite_oracle_solve(m, max_states);
  py::dict d;
  d["finite"] = res.finite;
  d["winner"] =
      res.finite ? py::object(py::str(lcs::winner_name(res.winner)))
                 : py::object(py::none());
  d["states"] = res.states;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() =
      "solver and synthesis toolkit for two-player games on partially "
      "specified lossy channel systems";

  py::register_exception<lcs::ParseError>(mod, "ParseError");
  py::register_exception<lcs::UnsupportedObjectiveError>(
      mod, "UnsupportedObjectiveError");
  py::register_exception<lcs::BudgetExceededError>(mod, "BudgetExceededError");
  py::register_exception<lcs::ExtractionIncompleteError>(
      mod, "ExtractionIncompleteError");

  py::class_<lcs::LcsModel>(mod, "Model")
      .def_property_readonly("objective",
                             [](const lcs::LcsModel& m) {
                               return m.objective.kind ==
                                              lcs::ObjectiveKind::Safety
                                          ? "safety"
                                          : "reach";
                             })
      .def("serialize",
           [](const lcs::LcsModel& m) { return lcs::serialize_model(m); })
      .def("validate", [](const lcs::LcsModel& m) {
        py::list out;
        for (const auto& i : lcs::validate_model(m))
          out.append(py::make_tuple(i.error, i.message));
        return out;
      });

  mod.def(
      "parse", [](const std::string& text) { return lcs::parse_model(text); },
      py::arg("text"), "Parse a model from its text form.");
  mod.def("solve", &solve_dict, py::arg("model"),
          py::arg("max_generations") = 10000, py::arg("max_nodes") = 200000,
          "Decide the objective; returns winner and solver statistics.");
  mod.def("synth", &synth_json, py::arg("model"),
          py::arg("max_generations") = 10000, py::arg("max_nodes") = 200000,
          "Extract a strategy as JSON text, or None when the objective is "
          "lost.");
  mod.def("verify", &verify_dict, py::arg("model"), py::arg("strategy_json"),
          py::arg("depth") = -1, py::arg("max_nodes") = 200000,
          "Check wellformedness plus the objective-specific soundness "
          "argument.");
  mod.def("simulate", &simulate_dict, py::arg("model"),
          py::arg("strategy_json"), py::arg("depth"),
          "Enumerate bounded plays under the strategy.");
  mod.def("oracle", &oracle_dict, py::arg("model"),
          py::arg("max_states") = 500000,
          "Explicit-state reference solver for finite weak state spaces.");
  mod.def(
      "fuzz",
      [](uint64_t seed, bool reach) {
        lcs::FuzzParams p;
        p.reach = reach;
        return lcs::fuzz_model(seed, p);
      },
      py::arg("seed"), py::arg("reach") = false,
      "Deterministic random model generator.");
}
