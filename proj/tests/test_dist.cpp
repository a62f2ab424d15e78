#include <catch2/catch_amalgamated.hpp>

#include "probly/dist.hpp"

using namespace probly;

namespace {
Ctx color_ctx() {
  Ctx ctx;
  ctx.types.declare("Color", {Literal(Symbol{"red"}), Literal(Symbol{"blue"})});
  return ctx;
}
}  // namespace

TEST_CASE("point mass support") {
  Ctx ctx;
  Valuation val{{"x", Literal(Num(3))}};
  auto s = dist_support(d_point(e_add(e_var("x"), e_int(1))), val, ctx);
  REQUIRE(s.size() == 1);
  CHECK(literal_eq(s[0].first, Literal(Num(4))));
  CHECK(s[0].second == Num(1));
}

TEST_CASE("uniform over a finite carrier") {
  Ctx ctx = color_ctx();
  Valuation val;
  auto s = dist_support(d_uniform("Color"), val, ctx);
  REQUIRE(s.size() == 2);
  CHECK(s[0].second == Num::ratio(1, 2));
  CHECK(s[1].second == Num::ratio(1, 2));
  auto b = dist_support(d_uniform("Bool"), val, ctx);
  REQUIRE(b.size() == 2);
  CHECK(literal_eq(b[0].first, Literal(false)));
  CHECK(literal_eq(b[1].first, Literal(true)));
  CHECK_THROWS_AS(dist_support(d_uniform("NoSuch"), val, ctx), UndefinedSymbol);
}

TEST_CASE("tables admit improper mass") {
  Ctx ctx;
  Valuation val;
  DistPtr d = d_table({{Literal(Num(0)), Num::ratio(1, 2)}, {Literal(Num(1)), Num::ratio(1, 4)}});
  auto s = dist_support(d, val, ctx);
  CHECK(dist_total_mass(s) == Num::ratio(3, 4));
}

TEST_CASE("normal has no finite support") {
  Ctx ctx;
  Valuation val;
  DistPtr d = d_normal(e_int(0), e_int(1));
  CHECK(dist_has_continuous(d));
  CHECK_THROWS_AS(dist_support(d, val, ctx), ContinuousDistributionPresent);
  // Continuity is detected through conditional branches too.
  DistPtr c = d_cond({{e_bool(false), d_point(e_int(0))}}, d);
  CHECK(dist_has_continuous(c));
}

TEST_CASE("conditional picks the first true guard") {
  Ctx ctx = color_ctx();
  Valuation val{{"c", Literal(Symbol{"red"})}};
  DistPtr red = d_table({{Literal(Symbol{"red"}), Num::ratio(19, 20)},
                         {Literal(Symbol{"blue"}), Num::ratio(1, 20)}});
  DistPtr blue = d_table({{Literal(Symbol{"red"}), Num::ratio(1, 20)},
                          {Literal(Symbol{"blue"}), Num::ratio(19, 20)}});
  DistPtr d = d_cond({{e_eq(e_var("c"), e_sym("red")), red}}, blue);
  auto s = dist_support(d, val, ctx);
  CHECK(literal_eq(s[0].first, Literal(Symbol{"red"})));
  CHECK(s[0].second == Num::ratio(19, 20));
  val["c"] = Literal(Symbol{"blue"});
  auto s2 = dist_support(d, val, ctx);
  CHECK(s2[0].second == Num::ratio(1, 20));
}

TEST_CASE("free variables of distributions") {
  DistPtr d = d_cond({{e_eq(e_var("c"), e_sym("red")), d_point(e_var("x"))}},
                     d_normal(e_var("m"), e_var("s")));
  CHECK(dist_free_vars(d) == std::set<std::string>{"c", "x", "m", "s"});
  CHECK(dist_free_vars(d_uniform("Color")).empty());
}

TEST_CASE("substitution into distributions") {
  DistPtr d = d_point(e_add(e_var("x"), e_var("e")));
  std::map<std::string, ExprPtr> sub{{"x", e_sub(e_var("p"), e_var("r"))}};
  CHECK(dist_str(dist_subst(d, sub)) == "point(p - r + e)");
  // Tables and uniforms have nothing to substitute into.
  DistPtr t = d_table({{Literal(Num(1)), Num(1)}});
  CHECK(dist_subst(t, sub).get() == t.get());
}

TEST_CASE("mass at a value") {
  Ctx ctx;
  Valuation val;
  DistPtr d = d_table({{Literal(Num(0)), Num::ratio(1, 4)}, {Literal(Num(1)), Num::ratio(3, 4)}});
  CHECK(dist_mass_at(d, Literal(Num(1)), val, ctx) == Num::ratio(3, 4));
  CHECK(dist_mass_at(d, Literal(Num(7)), val, ctx) == Num(0));
}

TEST_CASE("distribution printing") {
  CHECK(dist_str(d_point(e_int(0))) == "point(0)");
  CHECK(dist_str(d_uniform("Bool")) == "uniform(Bool)");
  CHECK(dist_str(d_normal(e_int(0), e_int(1))) == "normal(0, 1)");
  CHECK(dist_str(d_table({{Literal(Num::ratio(19, 20)), Num::ratio(1, 2)}})) ==
        "table { 19/20: 1/2 }");
  DistPtr c = d_cond({{e_eq(e_var("c"), e_sym("red")), d_point(e_int(1))}}, d_point(e_int(2)));
  CHECK(dist_str(c) == "if c = red then point(1) else point(2)");
}

TEST_CASE("distribution structural equality") {
  DistPtr a = d_normal(e_var("m"), e_int(4));
  DistPtr b = d_normal(e_var("m"), e_int(4));
  CHECK(dist_eq(a, b));
  CHECK_FALSE(dist_eq(a, d_normal(e_var("m"), e_int(9))));
  CHECK_FALSE(dist_eq(a, d_point(e_var("m"))));
}
