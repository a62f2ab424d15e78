#ifndef PROBLY_EXACT_HPP
#define PROBLY_EXACT_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "probly/comp.hpp"

namespace probly {

// Finite-support joint distribution over a sorted variable set. Keys are the
// valuations in variable order; masses may be improper (sum != 1).
struct JointTable {
  std::vector<std::string> vars;  // sorted
  std::map<std::vector<Literal>, Num, bool (*)(const std::vector<Literal>&, const std::vector<Literal>&)> entries;

  static bool key_lt(const std::vector<Literal>& a, const std::vector<Literal>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), literal_lt);
  }
  JointTable() : entries(&key_lt) {}
};

inline Num total_mass(const JointTable& j) {
  Num total(0);
  for (const auto& [k, m] : j.entries) total = total + m;
  return total;
}

constexpr size_t kDefaultEnumLimit = 10000000;

namespace detail {

// Weighted set of valuations; the workhorse representation during enumeration.
using WeightedVals = std::vector<std::pair<Valuation, Num>>;

inline void check_limit(size_t n, size_t limit) {
  if (n > limit)
    throw SizeLimitExceeded("enumeration exceeds valuation limit (" + std::to_string(limit) + ")");
}

inline WeightedVals apply_update_exact(const WeightedVals& in, const Update& u, const Ctx& ctx,
                                       size_t limit);

inline WeightedVals run_steps_exact(WeightedVals in, const std::vector<Step>& steps,
                                    const Ctx& ctx, size_t limit) {
  for (const auto& step : steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      in = apply_update_exact(in, *u, ctx, limit);
    } else {
      const auto& block = std::get<ParBlock>(step);
      std::string offending;
      if (!check_parallel_independence(block, &offending))
        throw IndependenceViolation("parallel block is not independent: variable " + offending);
      for (const auto& u : block.updates) in = apply_update_exact(in, u, ctx, limit);
    }
  }
  return in;
}

inline WeightedVals run_comp_exact(const WeightedVals& outer, const CompPtr& c, const Ctx& ctx,
                                   size_t limit) {
  WeightedVals cur = outer;
  for (const auto& [v, d] : c->env) {
    WeightedVals next;
    for (const auto& [val, mass] : cur) {
      for (const auto& [lit, w] : dist_support(d, val, ctx)) {
        Valuation nv = val;
        nv[v] = lit;
        next.emplace_back(std::move(nv), mass * w);
      }
    }
    check_limit(next.size(), limit);
    cur = std::move(next);
  }
  return run_steps_exact(std::move(cur), c->steps, ctx, limit);
}

inline WeightedVals apply_update_exact(const WeightedVals& in, const Update& u, const Ctx& ctx,
                                       size_t limit) {
  WeightedVals out;
  if (const auto* d = std::get_if<DistPtr>(&u.body)) {
    for (const auto& [val, mass] : in) {
      for (const auto& [lit, w] : dist_support(*d, val, ctx)) {
        Valuation nv = val;
        nv[u.target] = lit;
        out.emplace_back(std::move(nv), mass * w);
      }
    }
  } else {
    const auto& n = std::get<Nested>(u.body);
    for (const auto& [val, mass] : in) {
      // Run the scope on a copy of the valuation, export only the result.
      WeightedVals inner = run_comp_exact({{val, Num(1)}}, n.comp, ctx, limit);
      for (const auto& [ival, w] : inner) {
        auto it = ival.find(n.result);
        if (it == ival.end())
          throw EvalError("scope result variable never bound: " + n.result);
        Valuation nv = val;
        nv[u.target] = it->second;
        out.emplace_back(std::move(nv), mass * w);
      }
    }
  }
  check_limit(out.size(), limit);
  return out;
}

}  // namespace detail

// Exact joint distribution of a finite-discrete computation.
inline JointTable eval_joint(const CompPtr& c, const Ctx& ctx, size_t limit = kDefaultEnumLimit) {
  detail::WeightedVals finals =
      detail::run_comp_exact({{Valuation{}, Num(1)}}, c, ctx, limit);
  std::set<std::string> varset;
  for (const auto& [val, mass] : finals)
    for (const auto& [v, lit] : val) varset.insert(v);
  JointTable j;
  j.vars.assign(varset.begin(), varset.end());
  for (const auto& [val, mass] : finals) {
    std::vector<Literal> key;
    key.reserve(j.vars.size());
    for (const auto& v : j.vars) {
      auto it = val.find(v);
      if (it == val.end()) throw EvalError("valuation not total over variable set: " + v);
      key.push_back(it->second);
    }
    auto [it, inserted] = j.entries.emplace(std::move(key), mass);
    if (!inserted) it->second = it->second + mass;
  }
  return j;
}

// Per-variable view: sums mass over all other variables.
inline std::vector<std::pair<Literal, Num>> marginal(const JointTable& j, const std::string& v) {
  auto pos = std::find(j.vars.begin(), j.vars.end(), v);
  if (pos == j.vars.end()) throw UnknownVariable("variable not in joint: " + v);
  size_t idx = static_cast<size_t>(pos - j.vars.begin());
  std::map<Literal, Num, LiteralLess> acc;
  for (const auto& [key, mass] : j.entries) {
    auto [it, inserted] = acc.emplace(key[idx], mass);
    if (!inserted) it->second = it->second + mass;
  }
  return {acc.begin(), acc.end()};
}

// Probability of a boolean predicate over the joint.
inline Num prob_event(const JointTable& j, const ExprPtr& event, const Ctx& ctx) {
  for (const auto& v : free_vars(event))
    if (std::find(j.vars.begin(), j.vars.end(), v) == j.vars.end())
      throw UnknownVariable("event variable not in joint: " + v);
  Num total(0);
  for (const auto& [key, mass] : j.entries) {
    Valuation val;
    for (size_t i = 0; i < j.vars.size(); ++i) val[j.vars[i]] = key[i];
    Literal r = eval_expr(event, val, ctx);
    if (!std::holds_alternative<bool>(r)) throw EvalError("event predicate is not boolean");
    if (std::get<bool>(r)) total = total + mass;
  }
  return total;
}

// Entry-for-entry comparison within tolerance (exact when both sides exact).
inline bool joint_close(const JointTable& a, const JointTable& b, double tol) {
  if (a.vars != b.vars) return false;
  auto ita = a.entries.begin();
  auto itb = b.entries.begin();
  auto significant = [&](const Num& m) { return std::abs(m.to_double()) > tol; };
  while (ita != a.entries.end() || itb != b.entries.end()) {
    if (ita == a.entries.end()) {
      if (significant(itb->second)) return false;
      ++itb;
    } else if (itb == b.entries.end()) {
      if (significant(ita->second)) return false;
      ++ita;
    } else if (JointTable::key_lt(ita->first, itb->first)) {
      if (significant(ita->second)) return false;
      ++ita;
    } else if (JointTable::key_lt(itb->first, ita->first)) {
      if (significant(itb->second)) return false;
      ++itb;
    } else {
      if (std::abs((ita->second - itb->second).to_double()) > tol) return false;
      ++ita;
      ++itb;
    }
  }
  return true;
}

// Project a joint onto a subset of its variables, summing the rest out.
inline JointTable project(const JointTable& j, const std::set<std::string>& keep) {
  JointTable out;
  std::vector<size_t> idx;
  for (size_t i = 0; i < j.vars.size(); ++i) {
    if (keep.count(j.vars[i])) {
      out.vars.push_back(j.vars[i]);
      idx.push_back(i);
    }
  }
  for (const auto& [key, mass] : j.entries) {
    std::vector<Literal> k;
    k.reserve(idx.size());
    for (size_t i : idx) k.push_back(key[i]);
    auto [it, inserted] = out.entries.emplace(std::move(k), mass);
    if (!inserted) it->second = it->second + mass;
  }
  return out;
}

// Deterministic JSON form (keys sorted by construction).
inline nlohmann::json joint_to_json(const JointTable& j) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, mass] : j.entries) {
    nlohmann::json row;
    nlohmann::json vals = nlohmann::json::object();
    for (size_t i = 0; i < j.vars.size(); ++i) vals[j.vars[i]] = literal_str(key[i]);
    row["valuation"] = vals;
    row["mass"] = mass.to_double();
    row["mass_exact"] = mass.str();
    entries.push_back(row);
  }
  return nlohmann::json{{"variables", j.vars}, {"entries", entries}};
}

}  // namespace probly

#endif
