#ifndef PROBLY_COMMANDS_HPP
#define PROBLY_COMMANDS_HPP

#include <chrono>
#include <string>

#include "probly/engine.hpp"
#include "probly/exact.hpp"
#include "probly/parser.hpp"
#include "probly/sample.hpp"

namespace probly {

// Exit codes shared by all commands.
enum ExitCode : int {
  kExitEstablished = 0,
  kExitNotEstablished = 1,
  kExitUserError = 2,
  kExitInternalError = 3,
};

struct CommandResult {
  int exit_code = kExitEstablished;
  std::string text;      // human-readable report
  nlohmann::json json;   // machine-readable record
};

namespace detail {

inline std::string digest(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

inline ScriptEnv script_env(const SystemFile& sys) {
  ScriptEnv env;
  env.ctx = &sys.ctx;
  env.dists = sys.dists;
  return env;
}

}  // namespace detail

inline CommandResult cmd_eval(const SystemFile& sys, const std::string& event_text) {
  detail::Stopwatch sw;
  CommandResult res;
  res.json["command"] = "eval";
  res.json["event"] = event_text;
  try {
    ExprPtr event = parse_event(event_text, sys);
    JointTable j = eval_joint(sys.comp, sys.ctx);
    Num p = prob_event(j, event, sys.ctx);
    res.json["probability"] = p.to_double();
    res.json["probability_exact"] = p.str();
    res.json["total_mass"] = total_mass(j).to_double();
    res.text = "Pr(" + event_text + ") = " + p.str() + " (" + std::to_string(p.to_double()) + ")";
  } catch (const ContinuousDistributionPresent& e) {
    res.exit_code = kExitUserError;
    res.text = std::string("error: ") + e.what() +
               "\nhint: the system has continuous distributions; use `simulate` instead";
    res.json["error"] = e.what();
  } catch (const Error& e) {
    res.exit_code = kExitUserError;
    res.text = std::string("error: ") + e.what();
    res.json["error"] = e.what();
  }
  res.json["elapsed_ms"] = sw.ms();
  return res;
}

inline CommandResult cmd_simulate(const SystemFile& sys, const std::string& event_text,
                                  const SampleConfig& cfg) {
  detail::Stopwatch sw;
  CommandResult res;
  res.json["command"] = "simulate";
  res.json["event"] = event_text;
  try {
    ExprPtr event = parse_event(event_text, sys);
    Estimate est = estimate_prob(sys.comp, event, sys.ctx, cfg);
    res.json["estimate"] = estimate_to_json(est);
    std::ostringstream os;
    os << "Pr(" << event_text << ") ~= " << est.p_hat << "  (" << est.gamma * 100
       << "% CI [" << est.ci_low << ", " << est.ci_high << "], n=" << est.n
       << ", seed=" << est.seed << ")";
    res.text = os.str();
  } catch (const Error& e) {
    res.exit_code = kExitUserError;
    res.text = std::string("error: ") + e.what();
    res.json["error"] = e.what();
  }
  res.json["elapsed_ms"] = sw.ms();
  return res;
}

inline CommandResult cmd_rewrite(const SystemFile& sys, const std::string& script_text) {
  detail::Stopwatch sw;
  CommandResult res;
  res.json["command"] = "rewrite";
  res.json["script_digest"] = detail::digest(script_text);
  ProofState ps;
  ps.subject = sys.comp;
  try {
    auto script = parse_script(script_text);
    run_script(ps, script, detail::script_env(sys));
    res.json["trace"] = trace_to_json(ps);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(comp_hash(ps.subject)));
    res.json["final_hash"] = buf;
    res.text = comp_str(ps.subject);
  } catch (const Error& e) {
    res.exit_code = kExitUserError;
    res.text = std::string("error: ") + e.what();
    res.json["error"] = e.what();
    res.json["trace"] = trace_to_json(ps);
  }
  res.json["elapsed_ms"] = sw.ms();
  return res;
}

inline CommandResult cmd_check(const SystemFile& sys, const std::string& goal_text,
                               const std::string& script_text) {
  detail::Stopwatch sw;
  CommandResult res;
  res.json["command"] = "check";
  res.json["goal"] = goal_text;
  ProofState ps;
  ps.subject = sys.comp;
  try {
    Goal goal = parse_goal(goal_text, sys);
    ps.goals.push_back(GoalState{goal});
    auto script = parse_script(script_text);
    run_script(ps, script, detail::script_env(sys));
    bool established = ps.goals[0].status == GoalStatus::Closed;
    res.json["verdict"] = established ? "established" : "not-established";
    res.json["goals"] = goals_to_json(ps);
    res.json["trace"] = trace_to_json(ps);
    res.exit_code = established ? kExitEstablished : kExitNotEstablished;
    std::ostringstream os;
    os << (established ? "established" : "not-established") << ": " << goal_text;
    for (size_t i = 0; i < ps.goals.size(); ++i) {
      const auto& g = ps.goals[i];
      os << "\n  goal " << i << " [" << (g.status == GoalStatus::Closed ? "closed" : "open")
         << "] Pr(" << expr_str(g.goal.event) << ")";
      if (g.exact_value) os << " = " << g.exact_value->str();
      if (!g.justification.empty()) os << "  -- " << g.justification;
      for (const auto& ob : g.obligations)
        os << "\n    obligation (" << ob.kind << (ob.discharged ? ", discharged" : ", open")
           << "): " << ob.description;
    }
    res.text = os.str();
  } catch (const Error& e) {
    res.exit_code = kExitUserError;
    res.text = std::string("error: ") + e.what();
    res.json["error"] = e.what();
    res.json["goals"] = goals_to_json(ps);
    res.json["trace"] = trace_to_json(ps);
  }
  res.json["elapsed_ms"] = sw.ms();
  return res;
}

}  // namespace probly

#endif
