#ifndef PROBLY_PARSER_HPP
#define PROBLY_PARSER_HPP

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "probly/comp.hpp"
#include "probly/rules.hpp"

namespace probly {

// A parsed system file: declarations plus one computation.
struct SystemFile {
  Ctx ctx;
  std::map<std::string, DistPtr> dists;  // named tables, usable in scripts
  CompPtr comp;
};

namespace parser_detail {

struct Token {
  enum Kind { Ident, Number, Punct, End } kind = End;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.col);
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        bump();
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
        bump();
      tok_.kind = Token::Number;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    // Multi-char punctuation first.
    for (const char* p : {":=", "<=", ">=", "!="}) {
      if (src_.compare(pos_, 2, p) == 0) {
        tok_.kind = Token::Punct;
        tok_.text = p;
        bump();
        bump();
        return;
      }
    }
    tok_.kind = Token::Punct;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  SystemFile parse_file() {
    SystemFile sys;
    bool saw_system = false;
    while (lex_.peek().kind != Token::End) {
      const Token& t = lex_.peek();
      if (t.kind != Token::Ident) lex_.fail("expected a declaration or 'system'");
      if (t.text == "type") parse_type_decl(sys);
      else if (t.text == "var") parse_var_decl(sys);
      else if (t.text == "dist") parse_dist_decl(sys);
      else if (t.text == "func") parse_func_decl(sys);
      else if (t.text == "system") { parse_system(sys); saw_system = true; }
      else lex_.fail("unexpected declaration '" + t.text + "'");
    }
    if (!saw_system) lex_.fail("file has no 'system' block");
    auto inputs = external_inputs(sys.comp);
    if (!inputs.empty())
      lex_.fail("variable read before being bound: " + *inputs.begin());
    return sys;
  }

  ExprPtr parse_event_only(const SystemFile& sys) {
    enum_values_ = collect_enum_values(sys);
    ExprPtr e = parse_expr();
    if (lex_.peek().kind != Token::End) lex_.fail("trailing input after event");
    return e;
  }

  // `Pr(<event>) <rel> <number>`.
  Goal parse_goal_only(const SystemFile& sys) {
    enum_values_ = collect_enum_values(sys);
    expect_ident("Pr");
    expect_punct("(");
    ExprPtr event = parse_expr();
    expect_punct(")");
    Token rel = lex_.next();
    Relation r;
    if (rel.text == "<") r = Relation::Lt;
    else if (rel.text == "<=") r = Relation::Le;
    else if (rel.text == "=") r = Relation::Eq;
    else lex_.fail("expected <, <=, or = after Pr(...)");
    Num bound = parse_number_token();
    if (lex_.peek().kind != Token::End) lex_.fail("trailing input after goal");
    return Goal{nullptr, event, r, bound};
  }

 private:
  static std::set<std::string> collect_enum_values(const SystemFile& sys) {
    std::set<std::string> out;
    for (const auto& [name, vals] : sys.ctx.types.all())
      for (const auto& v : vals)
        if (std::holds_alternative<Symbol>(v)) out.insert(std::get<Symbol>(v).name);
    return out;
  }

  // ---- declarations ----

  void parse_type_decl(SystemFile& sys) {
    lex_.next();  // type
    std::string name = expect_any_ident("type name");
    expect_punct("=");
    expect_punct("{");
    std::vector<Literal> values;
    while (true) {
      std::string v = expect_any_ident("enum value");
      values.push_back(Literal(Symbol{v}));
      enum_values_.insert(v);
      if (accept_punct(",")) continue;
      break;
    }
    expect_punct("}");
    expect_punct(";");
    sys.ctx.types.declare(name, std::move(values));
  }

  void parse_var_decl(SystemFile& sys) {
    lex_.next();  // var
    expect_any_ident("variable name");
    expect_punct(":");
    expect_any_ident("carrier type");
    expect_punct(";");
    // Carrier annotations are documentation; binding is checked structurally.
  }

  void parse_dist_decl(SystemFile& sys) {
    lex_.next();  // dist
    std::string name = expect_any_ident("distribution name");
    expect_punct("=");
    DistPtr d = parse_dist(sys);
    expect_punct(";");
    sys.dists[name] = d;
  }

  void parse_func_decl(SystemFile& sys) {
    lex_.next();  // func
    std::string name = expect_any_ident("function name");
    expect_punct("(");
    std::vector<std::string> params;
    if (!accept_punct(")")) {
      while (true) {
        params.push_back(expect_any_ident("parameter"));
        if (accept_punct(",")) continue;
        break;
      }
      expect_punct(")");
    }
    ExprPtr body = nullptr;
    if (accept_punct("=")) body = parse_expr();
    expect_punct(";");
    sys.ctx.funcs.declare(name, std::move(params), std::move(body));
  }

  void parse_system(SystemFile& sys) {
    lex_.next();  // system
    expect_punct("{");
    sys.comp = parse_comp_body(sys);
    expect_punct("}");
  }

  // ---- computation bodies ----

  CompPtr parse_comp_body(SystemFile& sys) {
    std::map<std::string, DistPtr> env;
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == "init") {
      lex_.next();
      expect_punct("{");
      while (!accept_punct("}")) {
        std::string var = expect_any_ident("variable");
        expect_punct(":=");
        env[var] = parse_dist(sys);
        expect_punct(";");
      }
    }
    std::vector<Step> steps;
    if (!at_punct("}")) {
      while (true) {
        parse_step_into(sys, steps);
        if (accept_punct(",")) continue;
        break;
      }
    }
    return make_comp(std::move(env), std::move(steps));
  }

  void parse_step_into(SystemFile& sys, std::vector<Step>& steps) {
    const Token& t = lex_.peek();
    if (t.kind == Token::Ident && t.text == "par") {
      lex_.next();
      expect_punct("{");
      ParBlock block;
      while (!accept_punct("}")) {
        block.updates.push_back(parse_update(sys));
        expect_punct(";");
      }
      steps.emplace_back(std::move(block));
      return;
    }
    if (t.kind == Token::Ident && t.text == "repeat") {
      lex_.next();
      Token n = lex_.next();
      if (n.kind != Token::Number) lex_.fail("expected an iteration count after 'repeat'");
      size_t count = std::stoul(n.text);
      expect_punct("{");
      std::vector<Step> body;
      if (!at_punct("}")) {
        while (true) {
          parse_step_into(sys, body);
          if (accept_punct(",")) continue;
          break;
        }
      }
      expect_punct("}");
      CompPtr unrolled = unroll_loop(make_comp({}, std::move(body)), count);
      steps.insert(steps.end(), unrolled->steps.begin(), unrolled->steps.end());
      return;
    }
    steps.emplace_back(parse_update(sys));
  }

  Update parse_update(SystemFile& sys) {
    std::string target = expect_any_ident("update target");
    expect_punct(":=");
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == "scope") {
      lex_.next();
      expect_punct("(");
      std::string result = expect_any_ident("scope result variable");
      expect_punct(")");
      expect_punct("{");
      CompPtr inner = parse_comp_body(sys);
      expect_punct("}");
      return Update{target, Nested{inner, result}};
    }
    return Update{target, parse_dist(sys)};
  }

  // ---- distributions ----

  DistPtr parse_dist(SystemFile& sys) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Ident) lex_.fail("expected a distribution");
    if (t.text == "point") {
      lex_.next();
      expect_punct("(");
      ExprPtr e = parse_expr();
      expect_punct(")");
      return d_point(e);
    }
    if (t.text == "uniform") {
      lex_.next();
      expect_punct("(");
      std::string carrier = expect_any_ident("finite type");
      expect_punct(")");
      return d_uniform(carrier);
    }
    if (t.text == "normal") {
      lex_.next();
      expect_punct("(");
      ExprPtr mean = parse_expr();
      expect_punct(",");
      ExprPtr var = parse_expr();
      expect_punct(")");
      return d_normal(mean, var);
    }
    if (t.text == "table") {
      lex_.next();
      expect_punct("{");
      std::vector<std::pair<Literal, Num>> entries;
      while (true) {
        Literal value = parse_literal();
        expect_punct(":");
        Num weight = parse_number_token();
        if (weight.is_negative()) lex_.fail("table weight must be >= 0");
        entries.emplace_back(std::move(value), weight);
        if (accept_punct(",")) continue;
        break;
      }
      expect_punct("}");
      return d_table(std::move(entries));
    }
    if (t.text == "if") {
      lex_.next();
      std::vector<GuardedDist> cases;
      ExprPtr guard = parse_expr();
      expect_ident("then");
      cases.push_back({guard, parse_dist(sys)});
      while (lex_.peek().kind == Token::Ident && lex_.peek().text == "elif") {
        lex_.next();
        ExprPtr gg = parse_expr();
        expect_ident("then");
        cases.push_back({gg, parse_dist(sys)});
      }
      expect_ident("else");
      DistPtr otherwise = parse_dist(sys);
      return d_cond(std::move(cases), std::move(otherwise));
    }
    // Named distribution reference, inlined.
    auto it = sys.dists.find(t.text);
    if (it != sys.dists.end()) {
      lex_.next();
      return it->second;
    }
    lex_.fail("unknown distribution '" + t.text + "'");
  }

  Literal parse_literal() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Number || (t.kind == Token::Punct && t.text == "-"))
      return Literal(parse_number_token());
    if (t.kind == Token::Ident) {
      Token id = lex_.next();
      if (id.text == "true") return Literal(true);
      if (id.text == "false") return Literal(false);
      return Literal(Symbol{id.text});
    }
    lex_.fail("expected a literal");
  }

  // allow_slash admits rational literals a/b; only safe in contexts where a
  // '/' can never be an operator (table weights, literal keys, goal bounds).
  Num parse_number_token(bool allow_slash = true) {
    bool neg = accept_punct("-");
    Token t = lex_.next();
    if (t.kind != Token::Number) lex_.fail("expected a number");
    std::string text = t.text;
    if (allow_slash && text.find('.') == std::string::npos && at_punct("/")) {
      lex_.next();
      Token d = lex_.next();
      if (d.kind != Token::Number) lex_.fail("expected a denominator");
      text += "/" + d.text;
    }
    Num n = parse_number(text);
    return neg ? -n : n;
  }

  // ---- expressions ----

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (lex_.peek().kind == Token::Ident && lex_.peek().text == "or") {
      lex_.next();
      e = e_bin(BinOp::Or, e, parse_and());
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (lex_.peek().kind == Token::Ident && lex_.peek().text == "and") {
      lex_.next();
      e = e_bin(BinOp::And, e, parse_cmp());
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    const Token& t = lex_.peek();
    if (t.kind == Token::Punct) {
      BinOp op;
      if (t.text == "=") op = BinOp::Eq;
      else if (t.text == "!=") op = BinOp::Ne;
      else if (t.text == "<") op = BinOp::Lt;
      else if (t.text == "<=") op = BinOp::Le;
      else if (t.text == ">") op = BinOp::Gt;
      else if (t.text == ">=") op = BinOp::Ge;
      else return e;
      lex_.next();
      return e_bin(op, e, parse_add());
    }
    return e;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (at_punct("+") || at_punct("-")) {
      bool add = lex_.next().text == "+";
      e = fold(add ? BinOp::Add : BinOp::Sub, e, parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (at_punct("*") || at_punct("/")) {
      bool mul = lex_.next().text == "*";
      e = fold(mul ? BinOp::Mul : BinOp::Div, e, parse_unary());
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (at_punct("-")) {
      lex_.next();
      return fold(BinOp::Sub, e_int(0), parse_unary());
    }
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == "not") {
      lex_.next();
      return e_not(parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Number) {
      return e_num(parse_number_token(/*allow_slash=*/false));
    }
    if (t.kind == Token::Punct && t.text == "(") {
      lex_.next();
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Ident) {
      if (t.text == "if") {
        lex_.next();
        std::vector<GuardedExpr> cases;
        ExprPtr guard = parse_expr();
        expect_ident("then");
        cases.push_back({guard, parse_expr()});
        while (lex_.peek().kind == Token::Ident && lex_.peek().text == "elif") {
          lex_.next();
          ExprPtr g = parse_expr();
          expect_ident("then");
          cases.push_back({g, parse_expr()});
        }
        expect_ident("else");
        return e_cond(std::move(cases), parse_expr());
      }
      Token id = lex_.next();
      if (id.text == "true") return e_bool(true);
      if (id.text == "false") return e_bool(false);
      if (at_punct("(")) {
        lex_.next();
        std::vector<ExprPtr> args;
        if (!accept_punct(")")) {
          while (true) {
            args.push_back(parse_expr());
            if (accept_punct(",")) continue;
            break;
          }
          expect_punct(")");
        }
        return e_app(id.text, std::move(args));
      }
      if (enum_values_.count(id.text)) return e_sym(id.text);
      return e_var(id.text);
    }
    lex_.fail("expected an expression");
  }

  // Fold literal arithmetic at parse time so printed rationals round-trip.
  static ExprPtr fold(BinOp op, const ExprPtr& l, const ExprPtr& r) {
    const auto* lc = std::get_if<ExprNode::Const>(&l->node);
    const auto* rc = std::get_if<ExprNode::Const>(&r->node);
    const Num* ln = lc ? std::get_if<Num>(&lc->value) : nullptr;
    const Num* rn = rc ? std::get_if<Num>(&rc->value) : nullptr;
    if (ln && rn) {
      switch (op) {
        case BinOp::Add: return e_num(*ln + *rn);
        case BinOp::Sub: return e_num(*ln - *rn);
        case BinOp::Mul: return e_num(*ln * *rn);
        case BinOp::Div:
          if (!rn->is_zero()) return e_num(*ln / *rn);
          break;
        default: break;
      }
    }
    return e_bin(op, l, r);
  }

  // ---- token helpers ----

  bool at_punct(const std::string& p) const {
    return lex_.peek().kind == Token::Punct && lex_.peek().text == p;
  }
  bool accept_punct(const std::string& p) {
    if (at_punct(p)) {
      lex_.next();
      return true;
    }
    return false;
  }
  void expect_punct(const std::string& p) {
    if (!accept_punct(p)) lex_.fail("expected '" + p + "'");
  }
  void expect_ident(const std::string& kw) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Ident || t.text != kw) lex_.fail("expected '" + kw + "'");
    lex_.next();
  }
  std::string expect_any_ident(const std::string& what) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Ident) lex_.fail("expected " + what);
    return lex_.next().text;
  }

  Lexer lex_;
  std::set<std::string> enum_values_;
};

}  // namespace parser_detail

inline SystemFile parse_system(const std::string& text) {
  parser_detail::Parser p(text);
  return p.parse_file();
}

inline ExprPtr parse_event(const std::string& text, const SystemFile& sys) {
  parser_detail::Parser p(text);
  return p.parse_event_only(sys);
}

inline Goal parse_goal(const std::string& text, const SystemFile& sys) {
  parser_detail::Parser p(text);
  return p.parse_goal_only(sys);
}

// ---- printing a whole system file ----

inline std::string print_system(const SystemFile& sys) {
  std::ostringstream os;
  for (const auto& [name, values] : sys.ctx.types.all()) {
    if (name == "Bool") continue;
    os << "type " << name << " = { ";
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) os << ", ";
      os << literal_str(values[i]);
    }
    os << " };\n";
  }
  for (const auto& [name, def] : sys.ctx.funcs.all()) {
    os << "func " << name << "(";
    for (size_t i = 0; i < def.params.size(); ++i) {
      if (i) os << ", ";
      os << def.params[i];
    }
    os << ")";
    if (def.body) {
      os << " = ";
      print_expr(os, def.body);
    }
    os << ";\n";
  }
  for (const auto& [name, d] : sys.dists) {
    os << "dist " << name << " = ";
    print_dist(os, d);
    os << ";\n";
  }
  os << "system {\n";
  print_comp_body(os, sys.comp, 2);
  os << "}\n";
  return os.str();
}

}  // namespace probly

#endif
