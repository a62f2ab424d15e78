#ifndef PROBLY_VALUE_HPP
#define PROBLY_VALUE_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "probly/errors.hpp"
#include "probly/rational.hpp"

namespace probly {

// Value of a named finite (enumeration) carrier type.
struct Symbol {
  std::string name;
  friend bool operator==(const Symbol& a, const Symbol& b) { return a.name == b.name; }
  friend bool operator<(const Symbol& a, const Symbol& b) { return a.name < b.name; }
};

// Runtime value: boolean, number, or enumeration symbol.
using Literal = std::variant<bool, Num, Symbol>;

inline bool literal_eq(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) { return x == std::get<std::decay_t<decltype(x)>>(b); }, a);
}

// Total order for canonical tables: by kind, then by value.
inline bool literal_lt(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return std::visit(
      [&](const auto& x) { return x < std::get<std::decay_t<decltype(x)>>(b); }, a);
}

struct LiteralLess {
  bool operator()(const Literal& a, const Literal& b) const { return literal_lt(a, b); }
};

inline std::string literal_str(const Literal& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<Num>(v)) return std::get<Num>(v).str();
  return std::get<Symbol>(v).name;
}

using Valuation = std::map<std::string, Literal>;

// Named finite carrier types. "Bool" is built in.
class TypeEnv {
 public:
  TypeEnv() {
    types_["Bool"] = {Literal(false), Literal(true)};
  }
  void declare(const std::string& name, std::vector<Literal> values) {
    types_[name] = std::move(values);
  }
  bool has(const std::string& name) const { return types_.count(name) != 0; }
  const std::vector<Literal>& values(const std::string& name) const {
    auto it = types_.find(name);
    if (it == types_.end()) throw UndefinedSymbol("unknown finite type: " + name);
    return it->second;
  }
  const std::map<std::string, std::vector<Literal>>& all() const { return types_; }

 private:
  std::map<std::string, std::vector<Literal>> types_;
};

}  // namespace probly

#endif
