// lcsynth: solve, synthesize, verify, simulate, and export strategies for
// two-player games on partially specified lossy channel systems.
//
// Exit codes: 0 command completed (verdicts live in the JSON payload),
// 1 parse or validation failure, 2 resource budget exceeded, 3 unsupported
// objective kind.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "lcsynth/errors.hpp"
#include "lcsynth/model.hpp"
#include "lcsynth/reach.hpp"
#include "lcsynth/safety.hpp"
#include "lcsynth/semantics.hpp"
#include "lcsynth/strategy.hpp"
#include "lcsynth/verify.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << text;
}

lcs::LcsModel load_model(const std::string& path) {
  lcs::LcsModel m = lcs::parse_model(read_file(path));
  auto issues = lcs::validate_model(m);
  bool bad = false;
  for (const auto& i : issues) {
    std::cerr << (i.error ? "error: " : "warning: ") << i.message << "\n";
    bad = bad || i.error;
  }
  if (bad) throw std::runtime_error("model validation failed");
  return m;
}

const char* objective_name(const lcs::LcsModel& m) {
  return m.objective.kind == lcs::ObjectiveKind::Safety ? "safety" : "reach";
}

json state_json(const lcs::LcsModel& m, const lcs::GameState& s) {
  json j;
  j["p"] = s.p;
  j["q0"] = m.proc[0].loc_names[s.q0];
  j["q1"] = m.proc[1].loc_names[s.q1];
  json chans = json::object();
  for (int c = 0; c < m.chan_count(); ++c) {
    json w = json::array();
    for (char ch : s.w[c]) w.push_back(m.messages[(size_t)ch]);
    chans[m.channels[c]] = std::move(w);
  }
  j["chans"] = std::move(chans);
  return j;
}

json play_json(const lcs::LcsModel& m, const lcs::SimPlay& play) {
  json j;
  j["steps"] = json::array();
  for (const auto& st : play.steps) {
    json s;
    s["state"] = state_json(m, st.state);
    s["choice"] =
        st.choice ? json(lcs::format_eact(m, *st.choice)) : json(nullptr);
    s["action"] = m.label_names[st.action];
    j["steps"].push_back(std::move(s));
  }
  j["final"] = state_json(m, play.final_state);
  j["ended"] = play.ended;
  j["visited_target"] = play.visited_target;
  return j;
}

std::string forest_to_dot(const lcs::LcsModel& m, const lcs::ReachForest& f) {
  std::ostringstream out;
  out << "digraph forest {\n  rankdir=TB;\n  node [shape=box];\n";
  for (const auto& n : f.nodes) {
    out << "  n" << n.id << " [label=\"n" << n.id << " "
        << lcs::format_obs(m, n.knowledge.obs)
        << "\\n|K|=" << n.knowledge.maxima.size() << " "
        << lcs::node_status_name(n.status) << " "
        << (n.win ? "win" : "lose") << "\"];\n";
  }
  for (const auto& n : f.nodes)
    for (const auto& [pick, adv, kids] : n.children)
      for (int k : kids)
        out << "  n" << n.id << " -> n" << k << " [label=\""
            << lcs::format_eact(m, pick) << " / " << m.label_names[adv]
            << "\"];\n";
  out << "}\n";
  return out.str();
}

// moves file: one op per line. `start 0|1` (first line only), `lose CHAN IDX`,
// `step LABEL NEXTP`. `#` starts a comment.
std::pair<std::vector<lcs::ScriptOp>, int> parse_moves(
    const lcs::LcsModel& m, const std::string& text) {
  std::vector<lcs::ScriptOp> ops;
  int start_p = 0;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    auto bad = [&](const std::string& why) -> std::runtime_error {
      return std::runtime_error("moves:" + std::to_string(lineno) + ": " +
                                why);
    };
    if (kw == "start") {
      if (!first) throw bad("start must be the first op");
      if (!(ls >> start_p) || (start_p != 0 && start_p != 1))
        throw bad("start needs a flag 0 or 1");
    } else if (kw == "lose") {
      std::string chan;
      int idx;
      if (!(ls >> chan >> idx)) throw bad("lose needs CHAN INDEX");
      auto c = m.chan_id(chan);
      if (!c) throw bad("unknown channel " + chan);
      lcs::ScriptOp op;
      op.kind = lcs::ScriptOp::Lose;
      op.chan = *c;
      op.index = idx;
      ops.push_back(op);
    } else if (kw == "step") {
      std::string label;
      int np;
      if (!(ls >> label >> np)) throw bad("step needs LABEL NEXTP");
      auto lb = m.label_id(label);
      if (!lb) throw bad("unknown label " + label);
      lcs::ScriptOp op;
      op.kind = lcs::ScriptOp::Step;
      op.label = *lb;
      op.next_p = np;
      ops.push_back(op);
    } else {
      throw bad("unknown op " + kw);
    }
    first = false;
  }
  return {ops, start_p};
}

struct Cfg {
  std::string model_path;
  std::string strategy_path;
  std::string moves_path;
  std::string format = "json";
  std::string out_path;
  int max_generations = 10000;
  int max_nodes = 200000;
  int depth = -1;
  uint64_t seed = 0;  // reserved; every command is deterministic
};

json solve_payload(const lcs::LcsModel& m, const Cfg& cfg,
                   lcs::SafetySolveResult* safety_out = nullptr,
                   lcs::ReachSolveResult* reach_out = nullptr) {
  lcs::GameCtx ctx(m);
  json j;
  j["objective"] = objective_name(m);
  if (m.objective.kind == lcs::ObjectiveKind::Safety) {
    auto res = lcs::solve_safety(ctx, cfg.max_generations);
    j["winner"] = lcs::winner_name(res.winner);
    j["stats"] = {{"generations", res.generations},
                  {"families_seen", res.families_seen},
                  {"basis_size", res.basis.size()}};
    if (safety_out) *safety_out = std::move(res);
  } else {
    auto res = lcs::solve_reach(ctx, (size_t)cfg.max_nodes);
    j["winner"] = lcs::winner_name(res.winner);
    j["stats"] = {{"nodes_built", res.nodes_built},
                  {"roots", res.forest.roots.size()},
                  {"max_depth", res.forest.max_depth},
                  {"max_sigma1_run", res.forest.max_sigma1_run}};
    if (reach_out) *reach_out = std::move(res);
  }
  return j;
}

int cmd_solve(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  json j = solve_payload(m, cfg);
  write_output(cfg.out_path, j.dump(2) + "\n");
  return 0;
}

int cmd_synth(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  lcs::GameCtx ctx(m);
  lcs::SafetySolveResult sres;
  lcs::ReachSolveResult rres;
  json j = solve_payload(m, cfg, &sres, &rres);
  if (j["winner"] != "exists") {
    j["strategy"] = nullptr;
    std::cout << j.dump(2) + "\n";
    return 0;
  }
  lcs::StrategyAutomaton a =
      m.objective.kind == lcs::ObjectiveKind::Safety
          ? lcs::extract_safety_strategy(ctx, sres.basis)
          : lcs::extract_reach_strategy(ctx, rres.forest);
  std::string text = cfg.format == "dot" ? lcs::strategy_to_dot(m, a)
                                         : lcs::strategy_to_json(m, a);
  if (cfg.out_path.empty()) {
    std::cout << text;
    return 0;
  }
  write_output(cfg.out_path, text);
  j["strategy"] = {{"states", a.num_states},
                   {"edges", a.edges.size()},
                   {"path", cfg.out_path}};
  std::cout << j.dump(2) + "\n";
  return 0;
}

int cmd_verify(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  lcs::StrategyAutomaton a =
      lcs::strategy_from_json(m, read_file(cfg.strategy_path));
  json j;
  lcs::WellformedReport rep = lcs::check_wellformed(m, a);
  j["wellformed"] = rep.ok;
  if (!rep.ok) {
    j["violations"] = rep.violations;
    j["ok"] = false;
    write_output(cfg.out_path, j.dump(2) + "\n");
    return 0;
  }
  if (m.objective.kind == lcs::ObjectiveKind::Safety) {
    lcs::LcsModel prod = lcs::product_lcs(m, a);
    auto cover = lcs::backward_coverability(prod, prod.objective.target);
    j["method"] = "product backward coverability";
    j["ok"] = !cover.reachable;
    j["verdict"] = cover.reachable ? "Err coverable" : "Err unreachable";
    j["stats"] = {{"basis_size", cover.basis_size},
                  {"iterations", cover.iterations}};
  } else {
    lcs::GameCtx ctx(m);
    int depth = cfg.depth;
    if (depth < 0) {
      auto res = lcs::solve_reach(ctx, (size_t)cfg.max_nodes);
      depth = res.forest.max_depth * (res.forest.max_sigma1_run + 1);
    }
    auto rep2 = lcs::exhaustive_outcomes(m, a, depth);
    j["method"] = "exhaustive outcomes";
    j["depth"] = depth;
    j["ok"] = !rep2.violated && !rep2.frontier_open;
    j["verdict"] = rep2.violated      ? "a play misses Goal"
                   : rep2.frontier_open ? "inconclusive at this depth"
                                        : "every play reaches Goal";
    j["stats"] = {{"plays_explored", rep2.plays_explored}};
  }
  write_output(cfg.out_path, j.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  lcs::StrategyAutomaton a =
      lcs::strategy_from_json(m, read_file(cfg.strategy_path));
  json j;
  if (!cfg.moves_path.empty()) {
    auto [ops, start_p] = parse_moves(m, read_file(cfg.moves_path));
    lcs::ScriptResult res = lcs::run_script(m, a, ops, start_p);
    j["play"] = play_json(m, res.play);
    j["error"] = res.error.empty() ? json(nullptr) : json(res.error);
  } else {
    int depth = cfg.depth < 0 ? 6 : cfg.depth;
    lcs::SimReport rep = lcs::simulate(m, a, depth);
    j["depth"] = depth;
    j["truncated"] = rep.truncated;
    j["plays"] = json::array();
    for (const auto& p : rep.plays) j["plays"].push_back(play_json(m, p));
  }
  write_output(cfg.out_path, j.dump(2) + "\n");
  return 0;
}

int cmd_export(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  if (!cfg.strategy_path.empty()) {
    lcs::StrategyAutomaton a =
        lcs::strategy_from_json(m, read_file(cfg.strategy_path));
    write_output(cfg.out_path, cfg.format == "json"
                                   ? lcs::strategy_to_json(m, a)
                                   : lcs::strategy_to_dot(m, a));
    return 0;
  }
  lcs::GameCtx ctx(m);
  if (m.objective.kind == lcs::ObjectiveKind::Reach) {
    auto res = lcs::solve_reach(ctx, (size_t)cfg.max_nodes);
    write_output(cfg.out_path, forest_to_dot(m, res.forest));
    return 0;
  }
  auto res = lcs::solve_safety(ctx, cfg.max_generations);
  if (res.winner != lcs::Winner::ExistsWins)
    throw std::runtime_error(
        "no strategy to export: the safety objective is lost");
  lcs::StrategyAutomaton a = lcs::extract_safety_strategy(ctx, res.basis);
  write_output(cfg.out_path, cfg.format == "json"
                                 ? lcs::strategy_to_json(m, a)
                                 : lcs::strategy_to_dot(m, a));
  return 0;
}

int cmd_oracle(const Cfg& cfg) {
  lcs::LcsModel m = load_model(cfg.model_path);
  lcs::OracleResult res = lcs::finite_oracle_solve(m, (size_t)cfg.max_nodes);
  json j;
  j["finite"] = res.finite;
  j["winner"] = res.finite ? json(lcs::winner_name(res.winner)) : json(nullptr);
  j["states"] = res.states;
  write_output(cfg.out_path, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Cfg cfg;
  CLI::App app{
      "solver and synthesis toolkit for two-player games on partially "
      "specified lossy channel systems"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "dot"}));
    sub->add_option("--out", cfg.out_path, "write output to PATH");
    sub->add_option("--max-generations", cfg.max_generations,
                    "safety fixpoint generation cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-nodes", cfg.max_nodes,
                    "forest/oracle node cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--depth", cfg.depth, "simulation/verification depth");
    sub->add_option("--seed", cfg.seed, "rng seed (reserved)");
  };

  auto* c_solve = app.add_subcommand("solve", "decide the objective");
  c_solve->add_option("model", cfg.model_path, "model file")->required();
  add_common(c_solve);

  auto* c_synth =
      app.add_subcommand("synth", "decide and extract a finite-state strategy");
  c_synth->add_option("model", cfg.model_path, "model file")->required();
  add_common(c_synth);

  auto* c_verify =
      app.add_subcommand("verify", "check a strategy against the model");
  c_verify->add_option("model", cfg.model_path, "model file")->required();
  c_verify->add_option("strategy", cfg.strategy_path, "strategy JSON")
      ->required();
  add_common(c_verify);

  auto* c_sim = app.add_subcommand("simulate", "replay a strategy");
  c_sim->add_option("model", cfg.model_path, "model file")->required();
  c_sim->add_option("strategy", cfg.strategy_path, "strategy JSON")
      ->required();
  c_sim->add_option("moves", cfg.moves_path, "scripted moves file");
  add_common(c_sim);

  auto* c_export =
      app.add_subcommand("export", "emit strategy or knowledge forest");
  c_export->add_option("model", cfg.model_path, "model file")->required();
  c_export->add_option("strategy", cfg.strategy_path, "strategy JSON");
  add_common(c_export);

  auto* c_oracle = app.add_subcommand(
      "oracle", "explicit-state reference solver (small models)");
  c_oracle->add_option("model", cfg.model_path, "model file")->required();
  add_common(c_oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 1;
  }

  try {
    if (c_solve->parsed()) return cmd_solve(cfg);
    if (c_synth->parsed()) return cmd_synth(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_sim->parsed()) return cmd_simulate(cfg);
    if (c_export->parsed()) return cmd_export(cfg);
    if (c_oracle->parsed()) return cmd_oracle(cfg);
  } catch (const lcs::UnsupportedObjectiveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const lcs::BudgetExceededError& e) {
    std::cerr << "error: budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const lcs::ExtractionIncompleteError& e) {
    std::cerr << "error: extraction incomplete: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
