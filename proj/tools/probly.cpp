// Command-line front end: eval, simulate, rewrite, check.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "probly/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw probly::Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int finish(const probly::CommandResult& res, const std::string& json_path) {
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) {
      std::cerr << "error: cannot write " << json_path << "\n";
      return probly::kExitUserError;
    }
    out << res.json.dump(2) << "\n";
  }
  (res.exit_code == 0 || res.exit_code == 1 ? std::cout : std::cerr) << res.text << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic reasoning about probabilistic system reliability"};
  app.require_subcommand(1);

  std::string system_path, event_text, script_path, goal_text, json_path;
  std::uint64_t n = 100000, seed = 0;
  double gamma = 0.99;

  auto* eval = app.add_subcommand("eval", "exact event probability (finite-discrete systems)");
  eval->add_option("system", system_path, "system file")->required();
  eval->add_option("--event", event_text, "event predicate")->required();
  eval->add_option("--json", json_path, "write a JSON result record");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo event probability with a Wilson CI");
  sim->add_option("system", system_path, "system file")->required();
  sim->add_option("--event", event_text, "event predicate")->required();
  sim->add_option("--n", n, "sample count");
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--gamma", gamma, "confidence level");
  sim->add_option("--json", json_path, "write a JSON result record");

  auto* rew = app.add_subcommand("rewrite", "apply a proof script's rewrite rules to the system");
  rew->add_option("system", system_path, "system file")->required();
  rew->add_option("--script", script_path, "proof script")->required();
  rew->add_option("--json", json_path, "write a JSON result record");

  auto* chk = app.add_subcommand("check", "discharge a probability-bound goal");
  chk->add_option("system", system_path, "system file")->required();
  chk->add_option("--goal", goal_text, "goal, e.g. 'Pr(s = stack2) < 0.1'")->required();
  chk->add_option("--script", script_path, "proof script");
  chk->add_option("--json", json_path, "write a JSON result record");

  CLI11_PARSE(app, argc, argv);

  try {
    probly::SystemFile sys = probly::parse_system(read_file(system_path));
    if (*eval) return finish(probly::cmd_eval(sys, event_text), json_path);
    if (*sim) {
      probly::SampleConfig cfg;
      cfg.n = n;
      cfg.seed = seed;
      cfg.gamma = gamma;
      return finish(probly::cmd_simulate(sys, event_text, cfg), json_path);
    }
    if (*rew)
      return finish(probly::cmd_rewrite(sys, read_file(script_path)), json_path);
    if (*chk) {
      std::string script = script_path.empty() ? "" : read_file(script_path);
      return finish(probly::cmd_check(sys, goal_text, script), json_path);
    }
  } catch (const probly::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return probly::kExitUserError;
  } catch (const probly::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return probly::kExitUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return probly::kExitInternalError;
  }
  return probly::kExitInternalError;
}
