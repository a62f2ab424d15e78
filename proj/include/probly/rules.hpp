#ifndef PROBLY_RULES_HPP
#define PROBLY_RULES_HPP

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "probly/exact.hpp"
#include "probly/numeric.hpp"

namespace probly {

// Addresses a step: leading indices descend through nested scope bodies, the
// last index selects a step in that comp's step list.
using Path = std::vector<size_t>;

inline std::string path_str(const Path& p) {
  std::string s = "@";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += ".";
    s += std::to_string(p[i]);
  }
  return s;
}

inline Path parse_path(const std::string& s, size_t line_no = 0) {
  std::string body = s;
  if (!body.empty() && body[0] == '@') body = body.substr(1);
  Path p;
  std::stringstream ss(body);
  std::string part;
  while (std::getline(ss, part, '.')) {
    try {
      p.push_back(std::stoul(part));
    } catch (...) {
      throw BadPath("malformed path '" + s + "'" +
                    (line_no ? " at script line " + std::to_string(line_no) : ""));
    }
  }
  if (p.empty()) throw BadPath("empty path '" + s + "'");
  return p;
}

namespace detail {

inline const Comp& comp_at(const CompPtr& c, const Path& path, size_t depth) {
  if (depth + 1 == path.size()) return *c;
  size_t idx = path[depth];
  if (idx >= c->steps.size()) throw BadPath("path index out of range: " + path_str(path));
  const auto* u = std::get_if<Update>(&c->steps[idx]);
  if (!u || !std::holds_alternative<Nested>(u->body))
    throw BadPath("path descends through a non-scope step: " + path_str(path));
  return comp_at(std::get<Nested>(u->body).comp, path, depth + 1);
}

// Rewrite the comp that owns the step addressed by `path`; `f` receives that
// comp and the final step index and returns the replacement comp.
inline CompPtr rewrite_at(const CompPtr& c, const Path& path, size_t depth,
                          const std::function<CompPtr(const CompPtr&, size_t)>& f) {
  if (depth + 1 == path.size()) {
    if (path[depth] >= c->steps.size())
      throw BadPath("path index out of range: " + path_str(path));
    return f(c, path[depth]);
  }
  size_t idx = path[depth];
  if (idx >= c->steps.size()) throw BadPath("path index out of range: " + path_str(path));
  const auto* u = std::get_if<Update>(&c->steps[idx]);
  if (!u || !std::holds_alternative<Nested>(u->body))
    throw BadPath("path descends through a non-scope step: " + path_str(path));
  const auto& n = std::get<Nested>(u->body);
  CompPtr inner = rewrite_at(n.comp, path, depth + 1, f);
  std::vector<Step> steps = c->steps;
  steps[idx] = Update{u->target, Nested{inner, n.result}};
  return make_comp(c->env, std::move(steps));
}

inline std::set<std::string> step_reads(const Step& s) {
  if (const auto* u = std::get_if<Update>(&s)) return update_reads(*u);
  std::set<std::string> out;
  for (const auto& u : std::get<ParBlock>(s).updates) {
    auto r = update_reads(u);
    out.insert(r.begin(), r.end());
  }
  return out;
}

inline std::set<std::string> step_writes(const Step& s) {
  if (const auto* u = std::get_if<Update>(&s)) return {u->target};
  std::set<std::string> out;
  for (const auto& u : std::get<ParBlock>(s).updates) out.insert(u.target);
  return out;
}

inline const Update& expect_update(const Comp& c, size_t idx, const char* rule) {
  const auto* u = std::get_if<Update>(&c.steps[idx]);
  if (!u)
    throw PreconditionFailed(std::string(rule) + ": step is a parallel block, linearize first");
  return *u;
}

}  // namespace detail

// simplify() over every expression inside a distribution term.
inline DistPtr simplify_dist_exprs(const DistPtr& d);

// ---- term-rewrite rules ----

// Fuse a point-mass definition (x', point(E)) into its unique later reader and
// drop the defining update. x' must not be read again afterwards.
inline CompPtr rule_function_propagation(const CompPtr& c, const Path& path) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    const Update& def = detail::expect_update(*owner, idx, "function-propagation");
    const auto* db = std::get_if<DistPtr>(&def.body);
    if (!db || !std::holds_alternative<DistNode::PointMass>((*db)->node))
      throw PreconditionFailed("function-propagation: update at path is not a point mass");
    const std::string& x = def.target;
    ExprPtr value = std::get<DistNode::PointMass>((*db)->node).value;
    std::set<std::string> value_vars = free_vars(value);
    if (value_vars.count(x))
      throw PreconditionFailed("function-propagation: definition reads its own target");

    // Locate the unique reader; nothing in between may write x or any variable
    // the definition depends on.
    size_t reader = owner->steps.size();
    for (size_t k = idx + 1; k < owner->steps.size(); ++k) {
      auto reads = detail::step_reads(owner->steps[k]);
      auto writes = detail::step_writes(owner->steps[k]);
      if (reads.count(x)) { reader = k; break; }
      if (writes.count(x))
        throw PreconditionFailed("function-propagation: " + x + " is dead (overwritten before any read); use omit-unused");
      for (const auto& v : value_vars)
        if (writes.count(v))
          throw PreconditionFailed("function-propagation: dependency " + v +
                                   " is written before the read of " + x);
    }
    if (reader == owner->steps.size())
      throw PreconditionFailed("function-propagation: " + x + " is never read afterwards");
    const auto* ru = std::get_if<Update>(&owner->steps[reader]);
    if (!ru) throw PreconditionFailed("function-propagation: reader is a parallel block");
    const auto* rb = std::get_if<DistPtr>(&ru->body);
    if (!rb) throw PreconditionFailed("function-propagation: reader is a scoped update");
    // x' must not be used again after the reader (until overwritten).
    for (size_t k = reader + 1; k < owner->steps.size(); ++k) {
      if (detail::step_reads(owner->steps[k]).count(x))
        throw PreconditionFailed("function-propagation: " + x + " is used again later");
      if (detail::step_writes(owner->steps[k]).count(x)) break;
    }
    std::map<std::string, ExprPtr> sub{{x, value}};
    Update fused{ru->target, simplify_dist_exprs(dist_subst(*rb, sub))};
    std::vector<Step> steps;
    for (size_t k = 0; k < owner->steps.size(); ++k) {
      if (k == idx) continue;
      if (k == reader)
        steps.emplace_back(fused);
      else
        steps.push_back(owner->steps[k]);
    }
    return make_comp(owner->env, std::move(steps));
  });
}

// Remove an update whose value is overwritten before ever being read.
inline CompPtr rule_omit_unused(const CompPtr& c, const Path& path) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    const Update& dead = detail::expect_update(*owner, idx, "omit-unused");
    const std::string& x = dead.target;
    bool overwritten = false;
    for (size_t k = idx + 1; k < owner->steps.size(); ++k) {
      if (detail::step_reads(owner->steps[k]).count(x))
        throw PreconditionFailed("omit-unused: " + x + " is read before being overwritten");
      if (detail::step_writes(owner->steps[k]).count(x)) { overwritten = true; break; }
    }
    if (!overwritten)
      throw PreconditionFailed("omit-unused: " + x + " is never overwritten");
    std::vector<Step> steps;
    for (size_t k = 0; k < owner->steps.size(); ++k)
      if (k != idx) steps.push_back(owner->steps[k]);
    return make_comp(owner->env, std::move(steps));
  });
}

// Swap two adjacent independent updates.
inline CompPtr rule_permutation(const CompPtr& c, const Path& path) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    if (idx + 1 >= owner->steps.size())
      throw PreconditionFailed("permutation: no step after the addressed one");
    const Update& a = detail::expect_update(*owner, idx, "permutation");
    const Update& b = detail::expect_update(*owner, idx + 1, "permutation");
    if (a.target == b.target)
      throw PreconditionFailed("permutation: both updates write " + a.target);
    if (update_reads(b).count(a.target))
      throw PreconditionFailed("permutation: second update reads " + a.target);
    if (update_reads(a).count(b.target))
      throw PreconditionFailed("permutation: first update reads " + b.target);
    std::vector<Step> steps = owner->steps;
    std::swap(steps[idx], steps[idx + 1]);
    return make_comp(owner->env, std::move(steps));
  });
}

// Apply a registered rewrite to the scope body at `path` (A,B,C -> A,B',C).
inline CompPtr rule_congruence(const CompPtr& c, const Path& path,
                               const std::function<CompPtr(const CompPtr&)>& sub_rewrite) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    const Update& u = detail::expect_update(*owner, idx, "congruence");
    const auto* n = std::get_if<Nested>(&u.body);
    if (!n) throw PreconditionFailed("congruence: update at path has no scope body");
    std::vector<Step> steps = owner->steps;
    steps[idx] = Update{u.target, Nested{sub_rewrite(n->comp), n->result}};
    return make_comp(owner->env, std::move(steps));
  });
}

namespace detail {

inline void flatten_sum(const ExprPtr& e, std::vector<ExprPtr>& terms) {
  if (const auto* b = std::get_if<ExprNode::Binary>(&e->node)) {
    if (b->op == BinOp::Add) {
      flatten_sum(b->lhs, terms);
      flatten_sum(b->rhs, terms);
      return;
    }
  }
  terms.push_back(e);
}

inline ExprPtr fold_sum(const std::vector<ExprPtr>& terms) {
  if (terms.empty()) return e_int(0);
  ExprPtr acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) acc = e_add(acc, terms[i]);
  return acc;
}

// Updates of a scope body in declaration order (parallel blocks flattened);
// null when the body mixes in anything the normal-form rules cannot read.
inline std::vector<Update> flat_updates(const CompPtr& c) {
  std::vector<Update> out;
  for (const auto& step : c->steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      out.push_back(*u);
    } else {
      const auto& block = std::get<ParBlock>(step);
      std::string offending;
      if (!check_parallel_independence(block, &offending))
        throw PreconditionFailed("scope body contains a dependent parallel block (variable " +
                                 offending + ")");
      for (const auto& u : block.updates) out.push_back(u);
    }
  }
  return out;
}

}  // namespace detail

// Collapse a scope that sums independent normals (plus optional outer-variable
// shift terms) into a single normal update:
//   (x', ((x1,N(m1,v1)), ..., (xn,N(mn,vn)), (x', point(s + x1+...+xn))))
//     -> (x', normal(s + m1+...+mn, v1+...+vn))
inline CompPtr rule_normal_sum(const CompPtr& c, const Path& path) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    const Update& u = detail::expect_update(*owner, idx, "normal-sum");
    const auto* nested = std::get_if<Nested>(&u.body);
    if (!nested) throw PreconditionFailed("normal-sum: update at path has no scope body");
    if (!nested->comp->env.empty())
      throw PreconditionFailed("normal-sum: scope body must not declare an init environment");
    std::vector<Update> ups = detail::flat_updates(nested->comp);
    if (ups.size() < 2)
      throw PreconditionFailed("normal-sum: scope body too short for the summation pattern");
    size_t n = ups.size() - 1;
    std::vector<std::string> names;
    std::vector<ExprPtr> means, vars;
    std::set<std::string> namest;
    for (size_t i = 0; i < n; ++i) {
      const auto* db = std::get_if<DistPtr>(&ups[i].body);
      const DistNode::Normal* nd = db ? std::get_if<DistNode::Normal>(&(*db)->node) : nullptr;
      if (!nd)
        throw PreconditionFailed("normal-sum: update " + std::to_string(i) +
                                 " in the scope is not a normal draw");
      names.push_back(ups[i].target);
      namest.insert(ups[i].target);
      means.push_back(nd->mean);
      vars.push_back(nd->variance);
    }
    for (size_t i = 0; i < n; ++i) {
      for (const auto& v : free_vars(means[i]))
        if (namest.count(v))
          throw PreconditionFailed("normal-sum: mean of " + names[i] + " depends on summand " + v);
      for (const auto& v : free_vars(vars[i]))
        if (namest.count(v))
          throw PreconditionFailed("normal-sum: variance of " + names[i] + " depends on summand " + v);
    }
    const Update& last = ups.back();
    if (last.target != nested->result)
      throw PreconditionFailed("normal-sum: final scope update does not bind the result variable");
    const auto* lb = std::get_if<DistPtr>(&last.body);
    const DistNode::PointMass* pm = lb ? std::get_if<DistNode::PointMass>(&(*lb)->node) : nullptr;
    if (!pm) throw PreconditionFailed("normal-sum: result update is not a point mass");
    std::vector<ExprPtr> terms;
    detail::flatten_sum(pm->value, terms);
    std::set<std::string> pending = namest;
    std::vector<ExprPtr> shifts;
    for (const auto& t : terms) {
      const auto* v = std::get_if<ExprNode::Var>(&t->node);
      if (v && pending.count(v->name)) {
        pending.erase(v->name);
        continue;
      }
      for (const auto& fv : free_vars(t))
        if (namest.count(fv))
          throw PreconditionFailed("normal-sum: summand " + fv + " is used non-linearly");
      shifts.push_back(t);
    }
    if (!pending.empty())
      throw PreconditionFailed("normal-sum: result sum does not use every normal draw");
    std::vector<ExprPtr> mean_terms = shifts;
    mean_terms.insert(mean_terms.end(), means.begin(), means.end());
    ExprPtr mean = simplify(detail::fold_sum(mean_terms));
    ExprPtr variance = simplify(detail::fold_sum(vars));
    std::vector<Step> steps = owner->steps;
    steps[idx] = Update{u.target, d_normal(mean, variance)};
    return make_comp(owner->env, std::move(steps));
  });
}

// Replace a mean-voting scope over n noisy reads of one value by a single
// averaged noise draw:
//   (r, ((e_i, N(m_i, s_i)), (v_i, point(x + e_i)), (r, point((v1+..+vn)/n))))
//     -> (r, ((e, N(avg means, sum vars / n^2)), (r, point(x + e))))
inline CompPtr rule_voting_abstraction(const CompPtr& c, const Path& path) {
  return detail::rewrite_at(c, path, 0, [&](const CompPtr& owner, size_t idx) -> CompPtr {
    const Update& u = detail::expect_update(*owner, idx, "voting-abstraction");
    const auto* nested = std::get_if<Nested>(&u.body);
    if (!nested) throw PreconditionFailed("voting-abstraction: update at path has no scope body");
    if (!nested->comp->env.empty())
      throw PreconditionFailed("voting-abstraction: scope body must not declare an init environment");
    std::vector<Update> ups = detail::flat_updates(nested->comp);
    if (ups.size() < 3 || ups.size() % 2 == 0)
      throw PreconditionFailed("voting-abstraction: scope body does not have 2n+1 updates");
    size_t n = (ups.size() - 1) / 2;
    std::vector<std::string> noise;
    std::vector<ExprPtr> means, vars;
    for (size_t i = 0; i < n; ++i) {
      const auto* db = std::get_if<DistPtr>(&ups[i].body);
      const DistNode::Normal* nd = db ? std::get_if<DistNode::Normal>(&(*db)->node) : nullptr;
      if (!nd)
        throw PreconditionFailed("voting-abstraction: update " + std::to_string(i) +
                                 " is not a normal noise draw");
      noise.push_back(ups[i].target);
      means.push_back(nd->mean);
      vars.push_back(nd->variance);
    }
    // Reads v_i := point(x + e_i) with one shared x.
    ExprPtr shared_x;
    std::vector<std::string> reads;
    for (size_t i = 0; i < n; ++i) {
      const Update& ru = ups[n + i];
      const auto* db = std::get_if<DistPtr>(&ru.body);
      const DistNode::PointMass* pm = db ? std::get_if<DistNode::PointMass>(&(*db)->node) : nullptr;
      if (!pm)
        throw PreconditionFailed("voting-abstraction: read " + std::to_string(i) +
                                 " is not a point mass");
      const auto* bin = std::get_if<ExprNode::Binary>(&pm->value->node);
      if (!bin || bin->op != BinOp::Add)
        throw PreconditionFailed("voting-abstraction: read value is not x + noise");
      const auto* ev = std::get_if<ExprNode::Var>(&bin->rhs->node);
      if (!ev || ev->name != noise[i])
        throw PreconditionFailed("voting-abstraction: read " + std::to_string(i) +
                                 " does not add its own noise variable");
      if (shared_x == nullptr)
        shared_x = bin->lhs;
      else if (!expr_eq(shared_x, bin->lhs))
        throw PreconditionFailed("voting-abstraction: reads observe different values");
      reads.push_back(ru.target);
    }
    // The observed value must live outside the scope.
    std::set<std::string> bound;
    for (const auto& up : ups) bound.insert(up.target);
    for (const auto& v : free_vars(shared_x))
      if (bound.count(v))
        throw PreconditionFailed("voting-abstraction: observed value " + v +
                                 " is written inside the scope");
    // Vote r := point((v1 + ... + vn) / n).
    const Update& vote = ups.back();
    if (vote.target != nested->result)
      throw PreconditionFailed("voting-abstraction: final update does not bind the result");
    const auto* vb = std::get_if<DistPtr>(&vote.body);
    const DistNode::PointMass* vp = vb ? std::get_if<DistNode::PointMass>(&(*vb)->node) : nullptr;
    if (!vp) throw PreconditionFailed("voting-abstraction: vote is not a point mass");
    const auto* div = std::get_if<ExprNode::Binary>(&vp->value->node);
    bool div_ok = div && div->op == BinOp::Div;
    if (div_ok) {
      const auto* cst = std::get_if<ExprNode::Const>(&div->rhs->node);
      const Num* nn = cst ? std::get_if<Num>(&cst->value) : nullptr;
      div_ok = nn && *nn == Num(static_cast<std::int64_t>(n));
    }
    if (!div_ok)
      throw PreconditionFailed("voting-abstraction: vote is not the arithmetic mean of the reads");
    std::vector<ExprPtr> terms;
    detail::flatten_sum(div->lhs, terms);
    std::set<std::string> pend(reads.begin(), reads.end());
    for (const auto& t : terms) {
      const auto* v = std::get_if<ExprNode::Var>(&t->node);
      if (!v || !pend.count(v->name))
        throw PreconditionFailed("voting-abstraction: vote sum is not exactly the reads");
      pend.erase(v->name);
    }
    if (!pend.empty())
      throw PreconditionFailed("voting-abstraction: vote sum misses a read");
    // Symbolic parameters are carried through only when syntactically shared.
    auto all_equal = [](const std::vector<ExprPtr>& es) {
      for (size_t i = 1; i < es.size(); ++i)
        if (!expr_eq(es[0], es[i])) return false;
      return true;
    };
    auto closed = [](const ExprPtr& e) { return free_vars(e).empty(); };
    bool vars_closed = true, means_closed = true;
    for (const auto& e : vars) vars_closed = vars_closed && closed(e);
    for (const auto& e : means) means_closed = means_closed && closed(e);
    if (!vars_closed && !all_equal(vars))
      throw PreconditionFailed(
          "voting-abstraction: symbolic noise variances must be syntactically equal");
    if (!means_closed && !all_equal(means))
      throw PreconditionFailed(
          "voting-abstraction: symbolic noise means must be syntactically equal");
    ExprPtr nconst = e_int(static_cast<std::int64_t>(n));
    ExprPtr mean = all_equal(means)
                       ? means[0]
                       : simplify(e_div(detail::fold_sum(means), nconst));
    ExprPtr variance =
        all_equal(vars)
            ? simplify(e_div(vars[0], nconst))
            : simplify(e_div(detail::fold_sum(vars), e_int(static_cast<std::int64_t>(n * n))));
    std::string e_name = noise[0];
    std::vector<Step> inner_steps;
    inner_steps.emplace_back(Update{e_name, d_normal(mean, variance)});
    inner_steps.emplace_back(
        Update{nested->result, d_point(simplify(e_add(shared_x, e_var(e_name))))});
    CompPtr inner = make_comp({}, std::move(inner_steps));
    std::vector<Step> steps = owner->steps;
    steps[idx] = Update{u.target, Nested{inner, nested->result}};
    return make_comp(owner->env, std::move(steps));
  });
}

// ---- goals, obligations, proof state ----

enum class Relation { Lt, Le, Eq };

struct Goal {
  CompPtr comp;  // null: the proof state's subject computation
  ExprPtr event;
  Relation rel = Relation::Lt;
  Num bound;
};

struct ObligationRecord {
  std::string kind;         // cdf-bound | envelope-premise | arithmetic | external-assumption
  std::string description;
  bool discharged = false;
};

enum class GoalStatus { Open, Closed };

struct GoalState {
  Goal goal;
  GoalStatus status = GoalStatus::Open;
  std::string justification;
  std::vector<ObligationRecord> obligations;
  std::optional<Num> exact_value;    // set when a rule computed Pr exactly
  std::vector<size_t> children;      // sub-goals this goal was reduced to
};

struct TraceEntry {
  std::string rule;
  int goal = -1;  // -1: the subject term
  Path path;
  std::map<std::string, std::string> params;
  std::uint64_t before_hash = 0;
  std::uint64_t after_hash = 0;
};

struct ProofState {
  CompPtr subject;
  std::vector<GoalState> goals;
  std::vector<TraceEntry> trace;
};

inline const CompPtr& goal_comp(const ProofState& ps, const GoalState& g) {
  return g.goal.comp ? g.goal.comp : ps.subject;
}

namespace detail {

// Leading single-normal form (x, N(mu, sigma^2)) with closed parameters.
struct LeadingNormal {
  std::string var;
  NormalParams params;
};

inline LeadingNormal leading_normal(const CompPtr& c, const Ctx& ctx) {
  const DistNode::Normal* nd = nullptr;
  std::string var;
  if (c->env.empty() && c->steps.size() == 1) {
    const auto* u = std::get_if<Update>(&c->steps[0]);
    const auto* db = u ? std::get_if<DistPtr>(&u->body) : nullptr;
    nd = db ? std::get_if<DistNode::Normal>(&(*db)->node) : nullptr;
    if (u) var = u->target;
  } else if (c->steps.empty() && c->env.size() == 1) {
    nd = std::get_if<DistNode::Normal>(&c->env.begin()->second->node);
    var = c->env.begin()->first;
  }
  if (!nd)
    throw PreconditionFailed("goal computation is not a single normal draw (x, normal(m, v))");
  Valuation empty;
  double mean = as_num(eval_expr(nd->mean, empty, ctx), "normal mean").to_double();
  double variance = as_num(eval_expr(nd->variance, empty, ctx), "normal variance").to_double();
  return {var, NormalParams(mean, variance)};
}

// Event of shape `var <op> literal`; returns the literal bound.
inline bool match_var_cmp(const ExprPtr& e, BinOp op, const std::string& var, double& out) {
  const auto* b = std::get_if<ExprNode::Binary>(&e->node);
  if (!b || b->op != op) return false;
  const auto* v = std::get_if<ExprNode::Var>(&b->lhs->node);
  const auto* c = std::get_if<ExprNode::Const>(&b->rhs->node);
  const Num* n = c ? std::get_if<Num>(&c->value) : nullptr;
  if (!v || v->name != var || !n) return false;
  out = n->to_double();
  return true;
}

}  // namespace detail

// ---- goal-level rules ----

// Exact probability by the discrete expansion: peel the leading distribution,
// sum weight * Pr over its support, recursively to ground events.
inline Num rule_discrete_prob_computation(const CompPtr& c, const ExprPtr& event, const Ctx& ctx,
                                          size_t limit = kDefaultEnumLimit) {
  struct Expander {
    const ExprPtr& event;
    const Ctx& ctx;
    size_t limit;
    size_t work = 0;

    Num expand_env(std::map<std::string, DistPtr>::const_iterator it,
                   std::map<std::string, DistPtr>::const_iterator end,
                   const std::vector<Step>& steps, Valuation& val) {
      if (it == end) return expand_steps(steps, 0, val);
      if (dist_has_continuous(it->second))
        throw PreconditionFailed(
            "discrete-prob: leading distribution is not finite-support (normal present)");
      Num total(0);
      auto next = std::next(it);
      for (const auto& [lit, w] : dist_support(it->second, val, ctx)) {
        if (w.is_zero()) continue;
        auto saved = val.find(it->first) != val.end()
                         ? std::optional<Literal>(val[it->first])
                         : std::nullopt;
        val[it->first] = lit;
        total = total + w * expand_env(next, end, steps, val);
        if (saved) val[it->first] = *saved; else val.erase(it->first);
      }
      return total;
    }

    Num expand_steps(const std::vector<Step>& steps, size_t i, Valuation& val) {
      if (++work > limit)
        throw SizeLimitExceeded("discrete expansion exceeds the work limit");
      if (i == steps.size()) {
        Literal r = eval_expr(event, val, ctx);
        if (!std::holds_alternative<bool>(r)) throw EvalError("event predicate is not boolean");
        return std::get<bool>(r) ? Num(1) : Num(0);
      }
      if (const auto* u = std::get_if<Update>(&steps[i])) return expand_update(steps, i, *u, val);
      const auto& block = std::get<ParBlock>(steps[i]);
      std::string offending;
      if (!check_parallel_independence(block, &offending))
        throw IndependenceViolation("parallel block is not independent: variable " + offending);
      // Expand the block as its declaration-order linearization.
      std::vector<Step> rest;
      for (const auto& u : block.updates) rest.emplace_back(u);
      rest.insert(rest.end(), steps.begin() + static_cast<std::ptrdiff_t>(i) + 1, steps.end());
      return expand_steps(rest, 0, val);
    }

    Num expand_update(const std::vector<Step>& steps, size_t i, const Update& u, Valuation& val) {
      Num total(0);
      auto with_value = [&](const Literal& lit, const Num& w) {
        auto saved = val.find(u.target) != val.end() ? std::optional<Literal>(val[u.target])
                                                     : std::nullopt;
        val[u.target] = lit;
        total = total + w * expand_steps(steps, i + 1, val);
        if (saved) val[u.target] = *saved; else val.erase(u.target);
      };
      if (const auto* d = std::get_if<DistPtr>(&u.body)) {
        if (dist_has_continuous(*d))
          throw PreconditionFailed(
              "discrete-prob: leading distribution is not finite-support (normal present)");
        for (const auto& [lit, w] : dist_support(*d, val, ctx)) {
          if (w.is_zero()) continue;
          with_value(lit, w);
        }
        return total;
      }
      const auto& n = std::get<Nested>(u.body);
      auto inner = probly::detail::run_comp_exact({{val, Num(1)}}, n.comp, ctx, limit);
      for (const auto& [ival, w] : inner) {
        auto it = ival.find(n.result);
        if (it == ival.end()) throw EvalError("scope result variable never bound: " + n.result);
        with_value(it->second, w);
      }
      return total;
    }
  };

  Expander ex{event, ctx, limit};
  Valuation val;
  return ex.expand_env(c->env.begin(), c->env.end(), c->steps, val);
}

// Certified upper-tail bound: Pr([(x, N)](x <= a)) < eps via an upper envelope.
inline ObligationRecord rule_event_approx_upper(const Goal& g, const CompPtr& comp,
                                                const PiecewiseDensity& env, const Ctx& ctx) {
  if (g.rel != Relation::Lt) throw EventShapeMismatch("event-approx: goal must be a strict bound");
  auto lead = detail::leading_normal(comp, ctx);
  double a;
  if (!detail::match_var_cmp(g.event, BinOp::Le, lead.var, a))
    throw EventShapeMismatch("event-approx-upper: event must be " + lead.var + " <= a");
  if (!env.certified || env.role != EnvelopeRole::Upper ||
      env.certified_for.mean != lead.params.mean ||
      env.certified_for.variance != lead.params.variance)
    throw EnvelopeNotCertified("event-approx-upper: envelope is not a certified upper bound "
                               "for the goal's distribution");
  double bound = cumulative(env, a);
  ObligationRecord ob;
  ob.kind = "cdf-bound";
  ob.description = "P_A(" + std::to_string(a) + ") = " + std::to_string(bound) + " < " +
                   g.bound.str();
  if (!(bound < g.bound.to_double()))
    throw ObligationFalse("event-approx-upper: envelope bound " + std::to_string(bound) +
                          " does not establish " + g.bound.str());
  ob.discharged = true;
  return ob;
}

// Dual: Pr([(x, N)](x >= a)) < eps via a lower envelope, 1 - P_A(a) < eps.
inline ObligationRecord rule_event_approx_lower(const Goal& g, const CompPtr& comp,
                                                const PiecewiseDensity& env, const Ctx& ctx) {
  if (g.rel != Relation::Lt) throw EventShapeMismatch("event-approx: goal must be a strict bound");
  auto lead = detail::leading_normal(comp, ctx);
  double a;
  if (!detail::match_var_cmp(g.event, BinOp::Ge, lead.var, a))
    throw EventShapeMismatch("event-approx-lower: event must be " + lead.var + " >= a");
  if (!env.certified || env.role != EnvelopeRole::Lower ||
      env.certified_for.mean != lead.params.mean ||
      env.certified_for.variance != lead.params.variance)
    throw EnvelopeNotCertified("event-approx-lower: envelope is not a certified lower bound "
                               "for the goal's distribution");
  double bound = 1.0 - cumulative(env, a);
  ObligationRecord ob;
  ob.kind = "cdf-bound";
  ob.description = "1 - P_A(" + std::to_string(a) + ") = " + std::to_string(bound) + " < " +
                   g.bound.str();
  if (!(bound < g.bound.to_double()))
    throw ObligationFalse("event-approx-lower: envelope bound " + std::to_string(bound) +
                          " does not establish " + g.bound.str());
  ob.discharged = true;
  return ob;
}

// Split Pr(x >= a or x <= b) < eps into two tail goals with eps1 + eps2 = eps.
inline std::pair<Goal, Goal> rule_range_split(const Goal& g, const Num& eps1, const Num& eps2) {
  if (g.rel != Relation::Lt) throw EventShapeMismatch("range-split: goal must be a strict bound");
  if (!(eps1 + eps2 == g.bound))
    throw EventShapeMismatch("range-split: eps1 + eps2 must equal the goal bound");
  const auto* orn = std::get_if<ExprNode::Binary>(&g.event->node);
  if (!orn || orn->op != BinOp::Or)
    throw EventShapeMismatch("range-split: event is not a disjunction of two tails");
  auto tail = [](const ExprPtr& e, BinOp op) -> const ExprNode::Binary* {
    const auto* b = std::get_if<ExprNode::Binary>(&e->node);
    if (b && b->op == op && std::holds_alternative<ExprNode::Var>(b->lhs->node)) return b;
    return nullptr;
  };
  const ExprNode::Binary* upper = tail(orn->lhs, BinOp::Ge);
  const ExprNode::Binary* lower = tail(orn->rhs, BinOp::Le);
  ExprPtr upper_event = orn->lhs, lower_event = orn->rhs;
  if (!upper || !lower) {
    upper = tail(orn->rhs, BinOp::Ge);
    lower = tail(orn->lhs, BinOp::Le);
    upper_event = orn->rhs;
    lower_event = orn->lhs;
  }
  if (!upper || !lower)
    throw EventShapeMismatch("range-split: event must pair an upper and a lower tail");
  const auto& va = std::get<ExprNode::Var>(upper->lhs->node).name;
  const auto& vb = std::get<ExprNode::Var>(lower->lhs->node).name;
  if (va != vb)
    throw EventShapeMismatch("range-split: the two tails bound different variables");
  Goal g1{g.comp, upper_event, Relation::Lt, eps1};
  Goal g2{g.comp, lower_event, Relation::Lt, eps2};
  return {g1, g2};
}

// Left-tail monotonicity in sigma: a premise bound at variance s^2 transfers to
// any variance s'^2 <= s^2 for events x <= mean - a with a > 0.
inline void rule_normal_prob_monotone(const Goal& g, const CompPtr& comp, const Goal& premise,
                                      const CompPtr& premise_comp, const Ctx& ctx) {
  if (g.rel != Relation::Lt || premise.rel != Relation::Lt)
    throw PreconditionFailed("normal-monotone: both goals must be strict bounds");
  auto lead = detail::leading_normal(comp, ctx);
  auto plead = detail::leading_normal(premise_comp, ctx);
  double a_goal, a_prem;
  if (!detail::match_var_cmp(g.event, BinOp::Le, lead.var, a_goal) ||
      !detail::match_var_cmp(premise.event, BinOp::Le, plead.var, a_prem))
    throw EventShapeMismatch("normal-monotone: events must be left tails x <= mean - a");
  if (lead.params.mean != plead.params.mean || a_goal != a_prem)
    throw PreconditionFailed("normal-monotone: premise and goal disagree on mean or threshold");
  double a = lead.params.mean - a_goal;
  if (!(a > 0.0))
    throw PreconditionFailed("normal-monotone: threshold must lie strictly below the mean");
  // Sound direction only: the conclusion variance must not exceed the premise's.
  if (lead.params.variance > plead.params.variance)
    throw PreconditionFailed("normal-monotone: conclusion variance exceeds the premise variance");
  if (!(g.bound >= premise.bound))
    throw PreconditionFailed("normal-monotone: conclusion bound is tighter than the premise");
}

// Pr([(x, D)](x = y)) < eps reduces to the same bound over D' when
// D(y) <= D'(y).
inline Goal rule_event_weakening(const Goal& g, const CompPtr& comp, const DistPtr& weaker,
                                 const Ctx& ctx) {
  if (g.rel != Relation::Lt)
    throw EventShapeMismatch("event-weakening: goal must be a strict bound");
  // Leading single finite draw (x, D).
  const DistPtr* dp = nullptr;
  std::string var;
  if (comp->env.empty() && comp->steps.size() == 1) {
    const auto* u = std::get_if<Update>(&comp->steps[0]);
    if (u) {
      dp = std::get_if<DistPtr>(&u->body);
      var = u->target;
    }
  } else if (comp->steps.empty() && comp->env.size() == 1) {
    dp = &comp->env.begin()->second;
    var = comp->env.begin()->first;
  }
  if (!dp || dist_has_continuous(*dp))
    throw PreconditionFailed("event-weakening: goal computation is not a single finite draw");
  const auto* eq = std::get_if<ExprNode::Binary>(&g.event->node);
  const ExprNode::Var* ev = eq ? std::get_if<ExprNode::Var>(&eq->lhs->node) : nullptr;
  const ExprNode::Const* ec = eq ? std::get_if<ExprNode::Const>(&eq->rhs->node) : nullptr;
  if (!eq || eq->op != BinOp::Eq || !ev || ev->name != var || !ec)
    throw EventShapeMismatch("event-weakening: event must be " + var + " = value");
  Valuation empty;
  Num dy = dist_mass_at(*dp, ec->value, empty, ctx);
  Num dpy = dist_mass_at(weaker, ec->value, empty, ctx);
  if (dy > dpy)
    throw PreconditionFailed("event-weakening: D(y) = " + dy.str() + " exceeds D'(y) = " +
                             dpy.str());
  CompPtr premise_comp = make_comp({}, {Step(Update{var, weaker})});
  return Goal{premise_comp, g.event, Relation::Lt, g.bound};
}

inline DistPtr simplify_dist_exprs(const DistPtr& d) {
  return std::visit(
      [&](const auto& n) -> DistPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          return d_point(simplify(n.value));
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          return d_normal(simplify(n.mean), simplify(n.variance));
        } else if constexpr (std::is_same_v<T, DistNode::Conditional>) {
          std::vector<GuardedDist> cases;
          for (const auto& g : n.cases)
            cases.push_back({simplify(g.guard), simplify_dist_exprs(g.dist)});
          return d_cond(std::move(cases), simplify_dist_exprs(n.otherwise));
        } else {
          return d;
        }
      },
      d->node);
}

}  // namespace probly

#endif
