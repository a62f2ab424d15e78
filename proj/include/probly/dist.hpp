#ifndef PROBLY_DIST_HPP
#define PROBLY_DIST_HPP

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "probly/expr.hpp"

namespace probly {

struct DistNode;
using DistPtr = std::shared_ptr<const DistNode>;

struct GuardedDist {
  ExprPtr guard;
  DistPtr dist;
};

struct DistNode {
  // point(e): all mass on one value.
  struct PointMass { ExprPtr value; };
  // uniform(T): uniform over a named finite carrier type.
  struct UniformFinite { std::string carrier; };
  // normal(mean, variance).
  struct Normal { ExprPtr mean, variance; };
  // Finite weighted table; total mass may deviate from 1.
  struct Table { std::vector<std::pair<Literal, Num>> entries; };
  // Guarded distribution chain with a mandatory else branch.
  struct Conditional { std::vector<GuardedDist> cases; DistPtr otherwise; };

  std::variant<PointMass, UniformFinite, Normal, Table, Conditional> node;
};

inline DistPtr d_point(ExprPtr e) { return std::make_shared<DistNode>(DistNode{DistNode::PointMass{std::move(e)}}); }
inline DistPtr d_uniform(std::string carrier) { return std::make_shared<DistNode>(DistNode{DistNode::UniformFinite{std::move(carrier)}}); }
inline DistPtr d_normal(ExprPtr mean, ExprPtr var) { return std::make_shared<DistNode>(DistNode{DistNode::Normal{std::move(mean), std::move(var)}}); }
inline DistPtr d_table(std::vector<std::pair<Literal, Num>> entries) { return std::make_shared<DistNode>(DistNode{DistNode::Table{std::move(entries)}}); }
inline DistPtr d_cond(std::vector<GuardedDist> cases, DistPtr otherwise) { return std::make_shared<DistNode>(DistNode{DistNode::Conditional{std::move(cases), std::move(otherwise)}}); }

inline void collect_dist_vars(const DistPtr& d, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          collect_free_vars(n.value, out);
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          collect_free_vars(n.mean, out);
          collect_free_vars(n.variance, out);
        } else if constexpr (std::is_same_v<T, DistNode::Conditional>) {
          for (const auto& g : n.cases) {
            collect_free_vars(g.guard, out);
            collect_dist_vars(g.dist, out);
          }
          collect_dist_vars(n.otherwise, out);
        }
      },
      d->node);
}

inline std::set<std::string> dist_free_vars(const DistPtr& d) {
  std::set<std::string> out;
  collect_dist_vars(d, out);
  return out;
}

inline bool dist_eq(const DistPtr& a, const DistPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        const auto& m = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          return expr_eq(n.value, m.value);
        } else if constexpr (std::is_same_v<T, DistNode::UniformFinite>) {
          return n.carrier == m.carrier;
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          return expr_eq(n.mean, m.mean) && expr_eq(n.variance, m.variance);
        } else if constexpr (std::is_same_v<T, DistNode::Table>) {
          if (n.entries.size() != m.entries.size()) return false;
          for (size_t i = 0; i < n.entries.size(); ++i)
            if (!literal_eq(n.entries[i].first, m.entries[i].first) ||
                !(n.entries[i].second == m.entries[i].second))
              return false;
          return true;
        } else {  // Conditional
          if (n.cases.size() != m.cases.size()) return false;
          for (size_t i = 0; i < n.cases.size(); ++i)
            if (!expr_eq(n.cases[i].guard, m.cases[i].guard) ||
                !dist_eq(n.cases[i].dist, m.cases[i].dist))
              return false;
          return dist_eq(n.otherwise, m.otherwise);
        }
      },
      a->node);
}

inline DistPtr dist_subst(const DistPtr& d, const std::map<std::string, ExprPtr>& sub) {
  return std::visit(
      [&](const auto& n) -> DistPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          return d_point(subst(n.value, sub));
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          return d_normal(subst(n.mean, sub), subst(n.variance, sub));
        } else if constexpr (std::is_same_v<T, DistNode::Conditional>) {
          std::vector<GuardedDist> cases;
          for (const auto& g : n.cases) cases.push_back({subst(g.guard, sub), dist_subst(g.dist, sub)});
          return d_cond(std::move(cases), dist_subst(n.otherwise, sub));
        } else {
          return d;
        }
      },
      d->node);
}

inline bool dist_has_continuous(const DistPtr& d) {
  return std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::Normal>) {
          return true;
        } else if constexpr (std::is_same_v<T, DistNode::Conditional>) {
          for (const auto& g : n.cases)
            if (dist_has_continuous(g.dist)) return true;
          return dist_has_continuous(n.otherwise);
        } else {
          return false;
        }
      },
      d->node);
}

// Finite support of d under a concrete valuation: (value, weight) pairs.
// Throws ContinuousDistributionPresent on Normal.
inline std::vector<std::pair<Literal, Num>> dist_support(const DistPtr& d, const Valuation& val,
                                                         const Ctx& ctx) {
  return std::visit(
      [&](const auto& n) -> std::vector<std::pair<Literal, Num>> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          return {{eval_expr(n.value, val, ctx), Num(1)}};
        } else if constexpr (std::is_same_v<T, DistNode::UniformFinite>) {
          const auto& vs = ctx.types.values(n.carrier);
          Num w = Num(1) / Num(static_cast<std::int64_t>(vs.size()));
          std::vector<std::pair<Literal, Num>> out;
          for (const auto& v : vs) out.emplace_back(v, w);
          return out;
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          throw ContinuousDistributionPresent("normal distribution has no finite support");
        } else if constexpr (std::is_same_v<T, DistNode::Table>) {
          return n.entries;
        } else {  // Conditional
          for (const auto& g : n.cases) {
            if (detail::as_bool(eval_expr(g.guard, val, ctx), "distribution guard"))
              return dist_support(g.dist, val, ctx);
          }
          return dist_support(n.otherwise, val, ctx);
        }
      },
      d->node);
}

inline Num dist_total_mass(const std::vector<std::pair<Literal, Num>>& support) {
  Num total(0);
  for (const auto& [v, w] : support) total = total + w;
  return total;
}

// Mass a finite-support distribution assigns to one value under a valuation.
inline Num dist_mass_at(const DistPtr& d, const Literal& y, const Valuation& val, const Ctx& ctx) {
  Num total(0);
  for (const auto& [v, w] : dist_support(d, val, ctx))
    if (literal_eq(v, y)) total = total + w;
  return total;
}

inline void print_dist(std::ostream& os, const DistPtr& d) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DistNode::PointMass>) {
          os << "point(";
          print_expr(os, n.value);
          os << ")";
        } else if constexpr (std::is_same_v<T, DistNode::UniformFinite>) {
          os << "uniform(" << n.carrier << ")";
        } else if constexpr (std::is_same_v<T, DistNode::Normal>) {
          os << "normal(";
          print_expr(os, n.mean);
          os << ", ";
          print_expr(os, n.variance);
          os << ")";
        } else if constexpr (std::is_same_v<T, DistNode::Table>) {
          os << "table { ";
          for (size_t i = 0; i < n.entries.size(); ++i) {
            if (i) os << ", ";
            os << literal_str(n.entries[i].first) << ": " << n.entries[i].second.str();
          }
          os << " }";
        } else {  // Conditional
          bool first = true;
          for (const auto& g : n.cases) {
            os << (first ? "if " : " elif ");
            first = false;
            print_expr(os, g.guard);
            os << " then ";
            print_dist(os, g.dist);
          }
          os << " else ";
          print_dist(os, n.otherwise);
        }
      },
      d->node);
}

inline std::string dist_str(const DistPtr& d) {
  std::ostringstream os;
  print_dist(os, d);
  return os.str();
}

}  // namespace probly

#endif
