#ifndef PROBLY_COMP_HPP
#define PROBLY_COMP_HPP

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "probly/dist.hpp"

namespace probly {

struct Comp;
using CompPtr = std::shared_ptr<const Comp>;

// A nested, scoped computation: only `result` is exported to the update's
// target; every variable bound inside is invisible outside.
struct Nested {
  CompPtr comp;
  std::string result;
};

struct Update {
  std::string target;
  std::variant<DistPtr, Nested> body;
};

// Updates declared independent; linearization checks the declaration.
struct ParBlock {
  std::vector<Update> updates;
};

using Step = std::variant<Update, ParBlock>;

// Abstract computation: an initial variable->distribution environment (unit)
// followed by an ordered sequence of bind steps.
struct Comp {
  std::map<std::string, DistPtr> env;
  std::vector<Step> steps;
};

inline CompPtr make_comp(std::map<std::string, DistPtr> env, std::vector<Step> steps) {
  auto c = std::make_shared<Comp>();
  c->env = std::move(env);
  c->steps = std::move(steps);
  return c;
}

// ---- read/write sets ----

inline std::set<std::string> external_inputs(const CompPtr& c);

inline std::set<std::string> update_reads(const Update& u) {
  if (const auto* d = std::get_if<DistPtr>(&u.body)) return dist_free_vars(*d);
  return external_inputs(std::get<Nested>(u.body).comp);
}

inline std::set<std::string> update_writes(const Update& u) { return {u.target}; }

// Variables a computation reads from its enclosing scope: everything referenced
// before being bound locally (unit environment and earlier targets bind).
inline std::set<std::string> external_inputs(const CompPtr& c) {
  std::set<std::string> bound, reads;
  for (const auto& [v, d] : c->env) {
    for (const auto& r : dist_free_vars(d))
      if (!bound.count(r)) reads.insert(r);
    bound.insert(v);
  }
  auto visit_update = [&](const Update& u) {
    for (const auto& r : update_reads(u))
      if (!bound.count(r)) reads.insert(r);
    bound.insert(u.target);
  };
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      visit_update(*u);
    } else {
      for (const auto& u : std::get<ParBlock>(step).updates) visit_update(u);
    }
  }
  return reads;
}

// ---- parallel blocks ----

// True iff no update's write set touches another update's reads or writes.
inline bool check_parallel_independence(const ParBlock& block, std::string* offending = nullptr) {
  for (size_t i = 0; i < block.updates.size(); ++i) {
    for (size_t j = 0; j < block.updates.size(); ++j) {
      if (i == j) continue;
      const std::string& w = block.updates[i].target;
      if (j > i && block.updates[j].target == w) {
        if (offending) *offending = w;
        return false;
      }
      if (update_reads(block.updates[j]).count(w)) {
        if (offending) *offending = w;
        return false;
      }
    }
  }
  return true;
}

inline Update linearize_update(const Update& u);

inline CompPtr linearize(const CompPtr& c) {
  std::vector<Step> steps;
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      steps.emplace_back(linearize_update(*u));
    } else {
      const auto& block = std::get<ParBlock>(step);
      std::string offending;
      if (!check_parallel_independence(block, &offending))
        throw IndependenceViolation("parallel block is not independent: variable " + offending);
      for (const auto& u : block.updates) steps.emplace_back(linearize_update(u));
    }
  }
  return make_comp(c->env, std::move(steps));
}

inline Update linearize_update(const Update& u) {
  if (std::holds_alternative<DistPtr>(u.body)) return u;
  const auto& n = std::get<Nested>(u.body);
  return Update{u.target, Nested{linearize(n.comp), n.result}};
}

// ---- loop unrolling ----

// body composed with itself n times; n = 0 is the identity computation.
inline CompPtr unroll_loop(const CompPtr& body, size_t n) {
  std::vector<Step> steps;
  for (size_t i = 0; i < n; ++i)
    steps.insert(steps.end(), body->steps.begin(), body->steps.end());
  return make_comp(body->env, std::move(steps));
}

// ---- renaming and alpha-normalization ----

inline CompPtr comp_rename(const CompPtr& c, const std::map<std::string, ExprPtr>& sub,
                           const std::map<std::string, std::string>& names);

inline Update update_rename(const Update& u, const std::map<std::string, ExprPtr>& sub,
                            const std::map<std::string, std::string>& names) {
  std::string target = u.target;
  if (auto it = names.find(target); it != names.end()) target = it->second;
  if (const auto* d = std::get_if<DistPtr>(&u.body))
    return Update{target, dist_subst(*d, sub)};
  const auto& n = std::get<Nested>(u.body);
  std::string result = n.result;
  if (auto it = names.find(result); it != names.end()) result = it->second;
  return Update{target, Nested{comp_rename(n.comp, sub, names), result}};
}

inline CompPtr comp_rename(const CompPtr& c, const std::map<std::string, ExprPtr>& sub,
                           const std::map<std::string, std::string>& names) {
  std::map<std::string, DistPtr> env;
  for (const auto& [v, d] : c->env) {
    std::string name = v;
    if (auto it = names.find(name); it != names.end()) name = it->second;
    env[name] = dist_subst(d, sub);
  }
  std::vector<Step> steps;
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      steps.emplace_back(update_rename(*u, sub, names));
    } else {
      ParBlock block;
      for (const auto& u : std::get<ParBlock>(step).updates)
        block.updates.push_back(update_rename(u, sub, names));
      steps.emplace_back(std::move(block));
    }
  }
  return make_comp(std::move(env), std::move(steps));
}

namespace detail {
// Scope-local variables of a nested computation: unit-environment names plus
// every target that is not read before its first write (those are connected to
// the enclosing scope and keep their name).
inline std::set<std::string> scope_locals(const CompPtr& c) {
  std::set<std::string> locals, seen_read;
  for (const auto& [v, d] : c->env) locals.insert(v);
  auto visit_update = [&](const Update& u) {
    for (const auto& r : update_reads(u))
      if (!locals.count(r)) seen_read.insert(r);
    if (!seen_read.count(u.target)) locals.insert(u.target);
  };
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      visit_update(*u);
    } else {
      for (const auto& u : std::get<ParBlock>(step).updates) visit_update(u);
    }
  }
  return locals;
}
}  // namespace detail

inline CompPtr alpha_normalize(const CompPtr& c, size_t& counter);

inline Update alpha_normalize_update(const Update& u, size_t& counter) {
  if (std::holds_alternative<DistPtr>(u.body)) return u;
  const auto& n = std::get<Nested>(u.body);
  CompPtr inner = alpha_normalize(n.comp, counter);
  // Rename true locals to fresh canonical names, in first-binding order.
  std::set<std::string> locals = detail::scope_locals(inner);
  std::map<std::string, ExprPtr> sub;
  std::map<std::string, std::string> names;
  auto bind = [&](const std::string& v) {
    if (locals.count(v) && !names.count(v)) {
      std::string fresh = "_a" + std::to_string(counter++);
      names[v] = fresh;
      sub[v] = e_var(fresh);
    }
  };
  for (const auto& [v, d] : inner->env) bind(v);
  for (const auto& step : inner->steps) {
    if (const auto* up = std::get_if<Update>(&step)) {
      bind(up->target);
    } else {
      for (const auto& up : std::get<ParBlock>(step).updates) bind(up.target);
    }
  }
  std::string result = n.result;
  if (auto it = names.find(result); it != names.end()) result = it->second;
  return Update{u.target, Nested{comp_rename(inner, sub, names), result}};
}

inline CompPtr alpha_normalize(const CompPtr& c, size_t& counter) {
  std::vector<Step> steps;
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      steps.emplace_back(alpha_normalize_update(*u, counter));
    } else {
      ParBlock block;
      for (const auto& u : std::get<ParBlock>(step).updates)
        block.updates.push_back(alpha_normalize_update(u, counter));
      steps.emplace_back(std::move(block));
    }
  }
  return make_comp(c->env, std::move(steps));
}

inline CompPtr alpha_normalize(const CompPtr& c) {
  size_t counter = 0;
  return alpha_normalize(c, counter);
}

// ---- printing (DSL body syntax) ----

inline void print_comp_body(std::ostream& os, const CompPtr& c, int indent);

inline void print_update(std::ostream& os, const Update& u, int indent) {
  std::string pad(indent, ' ');
  os << pad << u.target << " := ";
  if (const auto* d = std::get_if<DistPtr>(&u.body)) {
    print_dist(os, *d);
  } else {
    const auto& n = std::get<Nested>(u.body);
    os << "scope(" << n.result << ") {\n";
    print_comp_body(os, n.comp, indent + 2);
    os << pad << "}";
  }
}

inline void print_comp_body(std::ostream& os, const CompPtr& c, int indent) {
  std::string pad(indent, ' ');
  if (!c->env.empty()) {
    os << pad << "init {\n";
    for (const auto& [v, d] : c->env) {
      os << pad << "  " << v << " := ";
      print_dist(os, d);
      os << ";\n";
    }
    os << pad << "}\n";
  }
  for (size_t i = 0; i < c->steps.size(); ++i) {
    if (const auto* u = std::get_if<Update>(&c->steps[i])) {
      print_update(os, *u, indent);
    } else {
      os << pad << "par {\n";
      for (const auto& u : std::get<ParBlock>(c->steps[i]).updates) {
        print_update(os, u, indent + 2);
        os << ";\n";
      }
      os << pad << "}";
    }
    if (i + 1 < c->steps.size()) os << ",";
    os << "\n";
  }
}

inline std::string comp_str(const CompPtr& c) {
  std::ostringstream os;
  print_comp_body(os, c, 0);
  return os.str();
}

// ---- structural equality and hashing ----

// Equal up to renaming of scope-local variables inside nested bodies.
inline bool structural_eq(const CompPtr& a, const CompPtr& b) {
  return comp_str(alpha_normalize(a)) == comp_str(alpha_normalize(b));
}

inline std::uint64_t comp_hash(const CompPtr& c) {
  std::string s = comp_str(alpha_normalize(c));
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace probly

#endif
