#ifndef PROBLY_ENGINE_HPP
#define PROBLY_ENGINE_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "probly/rules.hpp"
#include "probly/sample.hpp"

namespace probly {

// One proof-script line: `rule-name @path key=value ...`.
struct Invocation {
  std::string rule;
  Path path;
  bool has_path = false;
  std::map<std::string, std::string> params;
  size_t line_no = 0;
};

inline std::vector<Invocation> parse_script(const std::string& text) {
  std::vector<Invocation> out;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tok;
    Invocation inv;
    inv.line_no = line_no;
    while (ls >> tok) {
      if (inv.rule.empty()) {
        inv.rule = tok;
      } else if (tok[0] == '@') {
        inv.path = parse_path(tok, line_no);
        inv.has_path = true;
      } else {
        auto eq = tok.find('=');
        if (eq == std::string::npos)
          throw BadPath("malformed script token '" + tok + "' at line " + std::to_string(line_no));
        inv.params[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
    }
    if (!inv.rule.empty()) out.push_back(inv);
  }
  return out;
}

// Named distributions available to goal rules (event-weakening's D').
struct ScriptEnv {
  const Ctx* ctx = nullptr;
  std::map<std::string, DistPtr> dists;
  size_t enum_limit = kDefaultEnumLimit;
};

namespace detail {

inline bool is_term_rule(const std::string& name) {
  return name == "function-propagation" || name == "omit-unused" || name == "permutation" ||
         name == "congruence" || name == "normal-sum" || name == "voting-abstraction";
}

inline std::string get_param(const Invocation& inv, const std::string& key,
                             const std::string& fallback) {
  auto it = inv.params.find(key);
  return it == inv.params.end() ? fallback : it->second;
}

inline CompPtr apply_term_rule(const std::string& rule, const CompPtr& c, const Path& path,
                               const Invocation& inv) {
  if (rule == "function-propagation") return rule_function_propagation(c, path);
  if (rule == "omit-unused") return rule_omit_unused(c, path);
  if (rule == "permutation") return rule_permutation(c, path);
  if (rule == "normal-sum") return rule_normal_sum(c, path);
  if (rule == "voting-abstraction") return rule_voting_abstraction(c, path);
  if (rule == "congruence") {
    std::string inner_rule = get_param(inv, "rule", "");
    std::string inner_path = get_param(inv, "inner", "");
    if (inner_rule.empty() || inner_path.empty())
      throw PreconditionFailed("congruence needs rule=<name> and inner=<path> parameters");
    Path ip = parse_path(inner_path, inv.line_no);
    return rule_congruence(c, path, [&](const CompPtr& body) {
      return apply_term_rule(inner_rule, body, ip, inv);
    });
  }
  throw UnknownRule("unknown term rule: " + rule);
}

}  // namespace detail

// Close parents whose sub-goals are all closed.
inline void resolve_parent_goals(ProofState& ps) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& g : ps.goals) {
      if (g.status != GoalStatus::Open || g.children.empty()) continue;
      bool all = true;
      for (size_t c : g.children)
        if (ps.goals[c].status != GoalStatus::Closed) all = false;
      if (all) {
        g.status = GoalStatus::Closed;
        if (g.justification.empty()) g.justification = "all sub-goals closed";
        changed = true;
      }
    }
  }
}

inline void apply_invocation(ProofState& ps, const Invocation& inv, const ScriptEnv& env) {
  const Ctx& ctx = *env.ctx;
  TraceEntry te;
  te.rule = inv.rule;
  te.path = inv.path;
  te.params = inv.params;

  auto goal_index = [&](const char* key = "goal") -> size_t {
    size_t g = static_cast<size_t>(std::stoul(detail::get_param(inv, key, "0")));
    if (g >= ps.goals.size())
      throw BadPath("no goal with index " + std::to_string(g));
    return g;
  };

  if (detail::is_term_rule(inv.rule)) {
    if (!inv.has_path) throw BadPath(inv.rule + " needs a @path");
    te.before_hash = comp_hash(ps.subject);
    ps.subject = detail::apply_term_rule(inv.rule, ps.subject, inv.path, inv);
    te.after_hash = comp_hash(ps.subject);
    ps.trace.push_back(std::move(te));
    return;
  }

  if (inv.rule == "discrete-prob") {
    size_t g = goal_index();
    GoalState& gs = ps.goals[g];
    te.goal = static_cast<int>(g);
    CompPtr comp = goal_comp(ps, gs);
    te.before_hash = te.after_hash = comp_hash(comp);
    Num value;
    try {
      value = rule_discrete_prob_computation(comp, gs.goal.event, ctx, env.enum_limit);
    } catch (const ContinuousDistributionPresent& e) {
      throw PreconditionFailed(std::string("discrete-prob: ") + e.what());
    }
    gs.exact_value = value;
    bool holds = gs.goal.rel == Relation::Lt   ? value < gs.goal.bound
                 : gs.goal.rel == Relation::Le ? value <= gs.goal.bound
                                               : value == gs.goal.bound;
    if (holds) {
      gs.status = GoalStatus::Closed;
      gs.justification = "discrete-prob: exact value " + value.str();
    } else {
      gs.justification = "discrete-prob: exact value " + value.str() + " does not satisfy the bound";
    }
    ps.trace.push_back(std::move(te));
    resolve_parent_goals(ps);
    return;
  }

  if (inv.rule == "event-approx-upper" || inv.rule == "event-approx-lower") {
    size_t g = goal_index();
    GoalState& gs = ps.goals[g];
    te.goal = static_cast<int>(g);
    CompPtr comp = goal_comp(ps, gs);
    te.before_hash = te.after_hash = comp_hash(comp);
    GridSpec grid;
    grid.half_width_sigmas = std::stod(detail::get_param(inv, "halfwidth", "8"));
    grid.pieces = static_cast<size_t>(std::stoul(detail::get_param(inv, "pieces", "320")));
    auto lead = detail::leading_normal(comp, ctx);
    ObligationRecord ob;
    if (inv.rule == "event-approx-upper") {
      PiecewiseDensity envd = build_upper_envelope(lead.params, grid);
      ob = rule_event_approx_upper(gs.goal, comp, envd, ctx);
    } else {
      PiecewiseDensity envd = build_lower_envelope(lead.params, grid);
      ob = rule_event_approx_lower(gs.goal, comp, envd, ctx);
    }
    gs.obligations.push_back(ObligationRecord{
        "envelope-premise", "piecewise envelope certified by construction", true});
    gs.obligations.push_back(ob);
    gs.status = GoalStatus::Closed;
    gs.justification = inv.rule + ": " + ob.description;
    ps.trace.push_back(std::move(te));
    resolve_parent_goals(ps);
    return;
  }

  if (inv.rule == "range-split") {
    size_t g = goal_index();
    GoalState& gs = ps.goals[g];
    te.goal = static_cast<int>(g);
    te.before_hash = te.after_hash = comp_hash(goal_comp(ps, gs));
    Num eps1, eps2;
    auto it1 = inv.params.find("eps1");
    auto it2 = inv.params.find("eps2");
    if (it1 != inv.params.end() && it2 != inv.params.end()) {
      eps1 = parse_number(it1->second);
      eps2 = parse_number(it2->second);
    } else {
      eps1 = gs.goal.bound / Num(2);
      eps2 = gs.goal.bound - eps1;
    }
    auto [g1, g2] = rule_range_split(gs.goal, eps1, eps2);
    size_t i1 = ps.goals.size();
    ps.goals.push_back(GoalState{g1});
    size_t i2 = ps.goals.size();
    ps.goals.push_back(GoalState{g2});
    ps.goals[g].children = {i1, i2};
    ps.goals[g].justification = "range-split into goals " + std::to_string(i1) + ", " +
                                std::to_string(i2);
    ps.trace.push_back(std::move(te));
    return;
  }

  if (inv.rule == "normal-monotone") {
    size_t g = goal_index();
    size_t p = goal_index("premise");
    if (p == g) throw PreconditionFailed("normal-monotone: premise must be a different goal");
    GoalState& gs = ps.goals[g];
    const GoalState& prem = ps.goals[p];
    te.goal = static_cast<int>(g);
    te.before_hash = te.after_hash = comp_hash(goal_comp(ps, gs));
    if (prem.status != GoalStatus::Closed)
      throw PreconditionFailed("normal-monotone: premise goal is not closed");
    rule_normal_prob_monotone(gs.goal, goal_comp(ps, gs), prem.goal, goal_comp(ps, prem), ctx);
    gs.status = GoalStatus::Closed;
    gs.justification = "normal-monotone from goal " + std::to_string(p);
    ps.trace.push_back(std::move(te));
    resolve_parent_goals(ps);
    return;
  }

  if (inv.rule == "event-weakening") {
    size_t g = goal_index();
    GoalState& gs = ps.goals[g];
    te.goal = static_cast<int>(g);
    te.before_hash = te.after_hash = comp_hash(goal_comp(ps, gs));
    std::string dname = detail::get_param(inv, "dist", "");
    auto it = env.dists.find(dname);
    if (it == env.dists.end())
      throw PreconditionFailed("event-weakening: unknown distribution '" + dname + "'");
    Goal premise = rule_event_weakening(gs.goal, goal_comp(ps, gs), it->second, ctx);
    size_t pi = ps.goals.size();
    ps.goals.push_back(GoalState{premise});  // may reallocate: gs is dead past here
    ps.goals[g].children = {pi};
    ps.goals[g].justification =
        "event-weakening to goal " + std::to_string(pi) + " over " + dname;
    ps.trace.push_back(std::move(te));
    return;
  }

  if (inv.rule == "assume") {
    size_t g = goal_index();
    GoalState& gs = ps.goals[g];
    te.goal = static_cast<int>(g);
    te.before_hash = te.after_hash = comp_hash(goal_comp(ps, gs));
    gs.obligations.push_back(ObligationRecord{
        "external-assumption", detail::get_param(inv, "note", "assumed externally"), true});
    gs.status = GoalStatus::Closed;
    gs.justification = "external assumption";
    ps.trace.push_back(std::move(te));
    resolve_parent_goals(ps);
    return;
  }

  throw UnknownRule("unknown rule: " + inv.rule);
}

// Runs the whole script; aborts at the first failing step, leaving the partial
// state in `ps` and reporting the step index.
inline void run_script(ProofState& ps, const std::vector<Invocation>& script,
                       const ScriptEnv& env) {
  for (size_t i = 0; i < script.size(); ++i) {
    try {
      apply_invocation(ps, script[i], env);
    } catch (const Error& e) {
      throw RuleError("script step " + std::to_string(i + 1) + " (" + script[i].rule +
                      "): " + e.what());
    }
  }
  resolve_parent_goals(ps);
}

inline nlohmann::json trace_to_json(const ProofState& ps) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& te : ps.trace) {
    nlohmann::json s;
    s["rule"] = te.rule;
    if (te.goal >= 0) s["goal"] = te.goal;
    if (!te.path.empty()) s["path"] = path_str(te.path);
    s["params"] = te.params;
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(te.before_hash));
    s["before"] = buf;
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(te.after_hash));
    s["after"] = buf;
    steps.push_back(s);
  }
  return steps;
}

inline nlohmann::json goals_to_json(const ProofState& ps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : ps.goals) {
    nlohmann::json j;
    j["event"] = expr_str(g.goal.event);
    j["relation"] = g.goal.rel == Relation::Lt ? "<" : g.goal.rel == Relation::Le ? "<=" : "=";
    j["bound"] = g.goal.bound.str();
    j["status"] = g.status == GoalStatus::Closed ? "closed" : "open";
    if (!g.justification.empty()) j["justification"] = g.justification;
    if (g.exact_value) j["exact_value"] = g.exact_value->str();
    if (!g.children.empty()) j["children"] = g.children;
    nlohmann::json obs = nlohmann::json::array();
    for (const auto& ob : g.obligations)
      obs.push_back({{"kind", ob.kind}, {"description", ob.description},
                     {"discharged", ob.discharged}});
    if (!obs.empty()) j["obligations"] = obs;
    out.push_back(j);
  }
  return out;
}

}  // namespace probly

#endif
