#ifndef PROBLY_EXPR_HPP
#define PROBLY_EXPR_HPP

#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "probly/value.hpp"

namespace probly {

enum class BinOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct GuardedExpr {
  ExprPtr guard;
  ExprPtr branch;
};

struct ExprNode {
  struct Const { Literal value; };
  struct Var { std::string name; };
  struct Binary { BinOp op; ExprPtr lhs, rhs; };
  struct Not { ExprPtr arg; };
  // Ordered guard chain with a mandatory else branch (total function).
  struct Cond { std::vector<GuardedExpr> cases; ExprPtr otherwise; };
  struct App { std::string symbol; std::vector<ExprPtr> args; };

  std::variant<Const, Var, Binary, Not, Cond, App> node;
};

inline ExprPtr e_const(Literal v) { return std::make_shared<ExprNode>(ExprNode{ExprNode::Const{std::move(v)}}); }
inline ExprPtr e_num(Num n) { return e_const(Literal(std::move(n))); }
inline ExprPtr e_int(std::int64_t n) { return e_num(Num(n)); }
inline ExprPtr e_bool(bool b) { return e_const(Literal(b)); }
inline ExprPtr e_sym(std::string s) { return e_const(Literal(Symbol{std::move(s)})); }
inline ExprPtr e_var(std::string n) { return std::make_shared<ExprNode>(ExprNode{ExprNode::Var{std::move(n)}}); }
inline ExprPtr e_bin(BinOp op, ExprPtr l, ExprPtr r) {
  return std::make_shared<ExprNode>(ExprNode{ExprNode::Binary{op, std::move(l), std::move(r)}});
}
inline ExprPtr e_not(ExprPtr a) { return std::make_shared<ExprNode>(ExprNode{ExprNode::Not{std::move(a)}}); }
inline ExprPtr e_cond(std::vector<GuardedExpr> cases, ExprPtr otherwise) {
  return std::make_shared<ExprNode>(ExprNode{ExprNode::Cond{std::move(cases), std::move(otherwise)}});
}
inline ExprPtr e_app(std::string sym, std::vector<ExprPtr> args) {
  return std::make_shared<ExprNode>(ExprNode{ExprNode::App{std::move(sym), std::move(args)}});
}
inline ExprPtr e_add(ExprPtr l, ExprPtr r) { return e_bin(BinOp::Add, std::move(l), std::move(r)); }
inline ExprPtr e_sub(ExprPtr l, ExprPtr r) { return e_bin(BinOp::Sub, std::move(l), std::move(r)); }
inline ExprPtr e_mul(ExprPtr l, ExprPtr r) { return e_bin(BinOp::Mul, std::move(l), std::move(r)); }
inline ExprPtr e_div(ExprPtr l, ExprPtr r) { return e_bin(BinOp::Div, std::move(l), std::move(r)); }
inline ExprPtr e_eq(ExprPtr l, ExprPtr r) { return e_bin(BinOp::Eq, std::move(l), std::move(r)); }

// Function symbols: declared, optionally with a ground definition. Symbols
// without a definition block evaluation (the term stays symbolic).
struct FuncDef {
  std::vector<std::string> params;
  ExprPtr body;  // null when uninterpreted
};

class FuncEnv {
 public:
  void declare(const std::string& name, std::vector<std::string> params, ExprPtr body = nullptr) {
    defs_[name] = FuncDef{std::move(params), std::move(body)};
  }
  bool declared(const std::string& name) const { return defs_.count(name) != 0; }
  const FuncDef* find(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, FuncDef>& all() const { return defs_; }

 private:
  std::map<std::string, FuncDef> defs_;
};

// Shared evaluation context: finite types and function definitions.
struct Ctx {
  TypeEnv types;
  FuncEnv funcs;
};

inline void collect_free_vars(const ExprPtr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Var>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          collect_free_vars(n.lhs, out);
          collect_free_vars(n.rhs, out);
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          collect_free_vars(n.arg, out);
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          for (const auto& g : n.cases) {
            collect_free_vars(g.guard, out);
            collect_free_vars(g.branch, out);
          }
          collect_free_vars(n.otherwise, out);
        } else if constexpr (std::is_same_v<T, ExprNode::App>) {
          for (const auto& a : n.args) collect_free_vars(a, out);
        }
      },
      e->node);
}

inline std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> out;
  collect_free_vars(e, out);
  return out;
}

// ---- evaluation ----

namespace detail {
inline Num as_num(const Literal& v, const char* what) {
  if (!std::holds_alternative<Num>(v)) throw EvalError(std::string("expected a number in ") + what);
  return std::get<Num>(v);
}
inline bool as_bool(const Literal& v, const char* what) {
  if (!std::holds_alternative<bool>(v)) throw EvalError(std::string("expected a boolean in ") + what);
  return std::get<bool>(v);
}
}  // namespace detail

inline Literal eval_expr(const ExprPtr& e, const Valuation& val, const Ctx& ctx);

inline Literal eval_binary(const ExprNode::Binary& b, const Valuation& val, const Ctx& ctx) {
  // Short-circuit booleans first.
  if (b.op == BinOp::And || b.op == BinOp::Or) {
    bool l = detail::as_bool(eval_expr(b.lhs, val, ctx), "boolean connective");
    if (b.op == BinOp::And && !l) return Literal(false);
    if (b.op == BinOp::Or && l) return Literal(true);
    return Literal(detail::as_bool(eval_expr(b.rhs, val, ctx), "boolean connective"));
  }
  Literal lv = eval_expr(b.lhs, val, ctx);
  Literal rv = eval_expr(b.rhs, val, ctx);
  switch (b.op) {
    case BinOp::Eq: return Literal(literal_eq(lv, rv));
    case BinOp::Ne: return Literal(!literal_eq(lv, rv));
    default: break;
  }
  Num l = detail::as_num(lv, "arithmetic/comparison");
  Num r = detail::as_num(rv, "arithmetic/comparison");
  switch (b.op) {
    case BinOp::Add: return Literal(l + r);
    case BinOp::Sub: return Literal(l - r);
    case BinOp::Mul: return Literal(l * r);
    case BinOp::Div:
      if (r.is_zero()) throw EvalError("division by zero");
      return Literal(l / r);
    case BinOp::Lt: return Literal(l < r);
    case BinOp::Le: return Literal(l <= r);
    case BinOp::Gt: return Literal(l > r);
    case BinOp::Ge: return Literal(l >= r);
    default: throw EvalError("unreachable binary op");
  }
}

inline Literal eval_expr(const ExprPtr& e, const Valuation& val, const Ctx& ctx) {
  return std::visit(
      [&](const auto& n) -> Literal {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Const>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ExprNode::Var>) {
          auto it = val.find(n.name);
          if (it == val.end()) throw UnknownVariable("unbound variable: " + n.name);
          return it->second;
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          return eval_binary(n, val, ctx);
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          return Literal(!detail::as_bool(eval_expr(n.arg, val, ctx), "not"));
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          for (const auto& g : n.cases) {
            if (detail::as_bool(eval_expr(g.guard, val, ctx), "guard"))
              return eval_expr(g.branch, val, ctx);
          }
          return eval_expr(n.otherwise, val, ctx);
        } else {  // App
          const FuncDef* def = ctx.funcs.find(n.symbol);
          if (def == nullptr || def->body == nullptr)
            throw UndefinedSymbol("no definition for function symbol: " + n.symbol);
          if (def->params.size() != n.args.size())
            throw EvalError("arity mismatch for " + n.symbol);
          Valuation inner;
          for (size_t i = 0; i < n.args.size(); ++i)
            inner[def->params[i]] = eval_expr(n.args[i], val, ctx);
          return eval_expr(def->body, inner, ctx);
        }
      },
      e->node);
}

// ---- structural equality ----

inline bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        const auto& m = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, ExprNode::Const>) {
          return n.value.index() == m.value.index() && literal_eq(n.value, m.value);
        } else if constexpr (std::is_same_v<T, ExprNode::Var>) {
          return n.name == m.name;
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          return n.op == m.op && expr_eq(n.lhs, m.lhs) && expr_eq(n.rhs, m.rhs);
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          return expr_eq(n.arg, m.arg);
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          if (n.cases.size() != m.cases.size()) return false;
          for (size_t i = 0; i < n.cases.size(); ++i)
            if (!expr_eq(n.cases[i].guard, m.cases[i].guard) ||
                !expr_eq(n.cases[i].branch, m.cases[i].branch))
              return false;
          return expr_eq(n.otherwise, m.otherwise);
        } else {  // App
          if (n.symbol != m.symbol || n.args.size() != m.args.size()) return false;
          for (size_t i = 0; i < n.args.size(); ++i)
            if (!expr_eq(n.args[i], m.args[i])) return false;
          return true;
        }
      },
      a->node);
}

// ---- substitution and renaming ----

inline ExprPtr subst(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Const>) {
          return e;
        } else if constexpr (std::is_same_v<T, ExprNode::Var>) {
          auto it = sub.find(n.name);
          return it == sub.end() ? e : it->second;
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          return e_bin(n.op, subst(n.lhs, sub), subst(n.rhs, sub));
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          return e_not(subst(n.arg, sub));
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          std::vector<GuardedExpr> cases;
          for (const auto& g : n.cases)
            cases.push_back({subst(g.guard, sub), subst(g.branch, sub)});
          return e_cond(std::move(cases), subst(n.otherwise, sub));
        } else {  // App
          std::vector<ExprPtr> args;
          for (const auto& a : n.args) args.push_back(subst(a, sub));
          return e_app(n.symbol, std::move(args));
        }
      },
      e->node);
}

// ---- light simplification (literal folding and unit laws) ----

inline ExprPtr simplify(const ExprPtr& e) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          ExprPtr l = simplify(n.lhs);
          ExprPtr r = simplify(n.rhs);
          auto lit = [](const ExprPtr& x) -> const Num* {
            if (const auto* c = std::get_if<ExprNode::Const>(&x->node))
              if (const auto* v = std::get_if<Num>(&c->value)) return v;
            return nullptr;
          };
          const Num* lc = lit(l);
          const Num* rc = lit(r);
          if (lc && rc) {
            switch (n.op) {
              case BinOp::Add: return e_num(*lc + *rc);
              case BinOp::Sub: return e_num(*lc - *rc);
              case BinOp::Mul: return e_num(*lc * *rc);
              case BinOp::Div:
                if (!rc->is_zero()) return e_num(*lc / *rc);
                break;
              default: break;
            }
          }
          if (n.op == BinOp::Add && lc && lc->is_zero()) return r;
          if (n.op == BinOp::Add && rc && rc->is_zero()) return l;
          if (n.op == BinOp::Sub && rc && rc->is_zero()) return l;
          if (n.op == BinOp::Mul && lc && *lc == Num(1)) return r;
          if (n.op == BinOp::Mul && rc && *rc == Num(1)) return l;
          if (n.op == BinOp::Div && rc && *rc == Num(1)) return l;
          return e_bin(n.op, l, r);
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          return e_not(simplify(n.arg));
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          std::vector<GuardedExpr> cases;
          for (const auto& g : n.cases) cases.push_back({simplify(g.guard), simplify(g.branch)});
          return e_cond(std::move(cases), simplify(n.otherwise));
        } else if constexpr (std::is_same_v<T, ExprNode::App>) {
          std::vector<ExprPtr> args;
          for (const auto& a : n.args) args.push_back(simplify(a));
          return e_app(n.symbol, std::move(args));
        } else {
          return e;
        }
      },
      e->node);
}

// ---- printing (DSL syntax, round-trips through the parser) ----

namespace detail {
inline int prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
    case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 3;
    case BinOp::Add: case BinOp::Sub: return 4;
    case BinOp::Mul: case BinOp::Div: return 5;
  }
  return 0;
}
inline const char* op_str(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+"; case BinOp::Sub: return "-";
    case BinOp::Mul: return "*"; case BinOp::Div: return "/";
    case BinOp::Eq: return "="; case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<"; case BinOp::Le: return "<=";
    case BinOp::Gt: return ">"; case BinOp::Ge: return ">=";
    case BinOp::And: return "and"; case BinOp::Or: return "or";
  }
  return "?";
}
}  // namespace detail

inline void print_expr(std::ostream& os, const ExprPtr& e, int parent_prec = 0) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExprNode::Const>) {
          os << literal_str(n.value);
        } else if constexpr (std::is_same_v<T, ExprNode::Var>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, ExprNode::Binary>) {
          int p = detail::prec(n.op);
          if (p <= parent_prec) os << "(";
          print_expr(os, n.lhs, p - 1);
          os << " " << detail::op_str(n.op) << " ";
          print_expr(os, n.rhs, p);
          if (p <= parent_prec) os << ")";
        } else if constexpr (std::is_same_v<T, ExprNode::Not>) {
          os << "not ";
          print_expr(os, n.arg, 6);
        } else if constexpr (std::is_same_v<T, ExprNode::Cond>) {
          if (parent_prec > 0) os << "(";
          bool first = true;
          for (const auto& g : n.cases) {
            os << (first ? "if " : " elif ");
            first = false;
            print_expr(os, g.guard, 0);
            os << " then ";
            print_expr(os, g.branch, 0);
          }
          os << " else ";
          print_expr(os, n.otherwise, 0);
          if (parent_prec > 0) os << ")";
        } else {  // App
          os << n.symbol << "(";
          for (size_t i = 0; i < n.args.size(); ++i) {
            if (i) os << ", ";
            print_expr(os, n.args[i], 0);
          }
          os << ")";
        }
      },
      e->node);
}

inline std::string expr_str(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

}  // namespace probly

#endif
