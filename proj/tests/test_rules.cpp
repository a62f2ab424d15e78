#include <catch2/catch_amalgamated.hpp>

#include "probly/rules.hpp"
#include "support.hpp"

using namespace probly;
using testsupport::parse_asset;

namespace {

DistPtr half_table() {
  return d_table({{Literal(Num(0)), Num::ratio(1, 2)}, {Literal(Num(1)), Num::ratio(1, 2)}});
}

// Joints agree after projecting both onto their common variable set.
void check_preserves_joint(const CompPtr& before, const CompPtr& after, const Ctx& ctx) {
  JointTable jb = eval_joint(before, ctx);
  JointTable ja = eval_joint(after, ctx);
  std::set<std::string> common;
  for (const auto& v : jb.vars)
    if (std::find(ja.vars.begin(), ja.vars.end(), v) != ja.vars.end()) common.insert(v);
  CHECK(joint_close(project(jb, common), project(ja, common), 1e-12));
}

}  // namespace

TEST_CASE("function propagation fuses a point definition") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"w", half_table()}),
                             Step(Update{"x", d_point(e_add(e_var("w"), e_int(1)))}),
                             Step(Update{"y", d_point(e_mul(e_var("x"), e_int(2)))})});
  CompPtr out = rule_function_propagation(c, {1});
  REQUIRE(out->steps.size() == 2);
  const auto& fused = std::get<Update>(out->steps[1]);
  CHECK(fused.target == "y");
  CHECK(dist_str(*std::get_if<DistPtr>(&fused.body)) == "point((w + 1) * 2)");
  check_preserves_joint(c, out, ctx);
}

TEST_CASE("function propagation skips independent steps in between") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"p", half_table()}),
                             Step(Update{"pp", d_point(e_sub(e_var("p"), e_int(1)))}),
                             Step(Update{"e", half_table()}),
                             Step(Update{"x", d_point(e_mul(e_var("pp"),
                                                            e_add(e_int(1), e_var("e"))))})});
  CompPtr out = rule_function_propagation(c, {1});
  REQUIRE(out->steps.size() == 3);
  CHECK(dist_str(*std::get_if<DistPtr>(&std::get<Update>(out->steps[2]).body)) ==
        "point((p - 1) * (1 + e))");
  check_preserves_joint(c, out, ctx);
}

TEST_CASE("function propagation rejections") {
  CompPtr still_used =
      make_comp({}, {Step(Update{"x", d_point(e_int(1))}),
                     Step(Update{"y", d_point(e_var("x"))}),
                     Step(Update{"z", d_point(e_var("x"))})});
  CHECK_THROWS_AS(rule_function_propagation(still_used, {0}), PreconditionFailed);

  CompPtr not_point = make_comp({}, {Step(Update{"x", half_table()}),
                                     Step(Update{"y", d_point(e_var("x"))})});
  CHECK_THROWS_AS(rule_function_propagation(not_point, {0}), PreconditionFailed);

  CompPtr never_read = make_comp({}, {Step(Update{"x", d_point(e_int(1))}),
                                      Step(Update{"y", d_point(e_int(2))})});
  CHECK_THROWS_AS(rule_function_propagation(never_read, {0}), PreconditionFailed);

  // Dependency clobbered between the definition and its reader.
  CompPtr clobbered =
      make_comp({}, {Step(Update{"w", d_point(e_int(3))}),
                     Step(Update{"x", d_point(e_add(e_var("w"), e_int(1)))}),
                     Step(Update{"w", d_point(e_int(9))}),
                     Step(Update{"y", d_point(e_var("x"))})});
  CHECK_THROWS_AS(rule_function_propagation(clobbered, {1}), PreconditionFailed);
}

TEST_CASE("omit unused removes a dead update") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"x", half_table()}),
                             Step(Update{"y", half_table()}),
                             Step(Update{"x", d_point(e_int(7))})});
  CompPtr out = rule_omit_unused(c, {0});
  REQUIRE(out->steps.size() == 2);
  check_preserves_joint(c, out, ctx);

  CompPtr read_first = make_comp({}, {Step(Update{"x", half_table()}),
                                      Step(Update{"y", d_point(e_var("x"))}),
                                      Step(Update{"x", d_point(e_int(0))})});
  CHECK_THROWS_AS(rule_omit_unused(read_first, {0}), PreconditionFailed);

  CompPtr live = make_comp({}, {Step(Update{"x", half_table()})});
  CHECK_THROWS_AS(rule_omit_unused(live, {0}), PreconditionFailed);
}

TEST_CASE("permutation swaps independent neighbours") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"a", half_table()}), Step(Update{"b", half_table()}),
                             Step(Update{"s", d_point(e_add(e_var("a"), e_var("b")))})});
  CompPtr out = rule_permutation(c, {0});
  CHECK(std::get<Update>(out->steps[0]).target == "b");
  CHECK(std::get<Update>(out->steps[1]).target == "a");
  check_preserves_joint(c, out, ctx);

  CompPtr dependent = make_comp({}, {Step(Update{"a", half_table()}),
                                     Step(Update{"b", d_point(e_var("a"))})});
  CHECK_THROWS_AS(rule_permutation(dependent, {0}), PreconditionFailed);

  CompPtr same = make_comp({}, {Step(Update{"a", half_table()}),
                                Step(Update{"a", half_table()})});
  CHECK_THROWS_AS(rule_permutation(same, {0}), PreconditionFailed);

  CHECK_THROWS_AS(rule_permutation(c, {2}), PreconditionFailed);  // nothing after
  CHECK_THROWS_AS(rule_permutation(c, {9}), BadPath);
}

TEST_CASE("congruence rewrites inside a scope") {
  Ctx ctx;
  CompPtr inner = make_comp({}, {Step(Update{"t", half_table()}),
                                 Step(Update{"t", d_point(e_int(1))}),
                                 Step(Update{"out", d_point(e_var("t"))})});
  CompPtr c = make_comp({}, {Step(Update{"r", Nested{inner, "out"}})});
  CompPtr out = rule_congruence(c, {0}, [](const CompPtr& body) {
    return rule_omit_unused(body, {0});
  });
  const auto& n = std::get<Nested>(std::get<Update>(out->steps[0]).body);
  CHECK(n.comp->steps.size() == 2);
  check_preserves_joint(c, out, ctx);

  CompPtr flat = make_comp({}, {Step(Update{"r", half_table()})});
  CHECK_THROWS_AS(rule_congruence(flat, {0}, [](const CompPtr& b) { return b; }),
                  PreconditionFailed);
}

TEST_CASE("paths descend through nested scopes") {
  Ctx ctx;
  CompPtr innermost = make_comp({}, {Step(Update{"t", half_table()}),
                                     Step(Update{"t", d_point(e_int(0))}),
                                     Step(Update{"u", d_point(e_var("t"))})});
  CompPtr mid = make_comp({}, {Step(Update{"m", Nested{innermost, "u"}})});
  CompPtr c = make_comp({}, {Step(Update{"r", Nested{mid, "m"}})});
  // @0.0.0 targets the dead update in the innermost body.
  CompPtr out = rule_omit_unused(c, {0, 0, 0});
  check_preserves_joint(c, out, ctx);
  CHECK_THROWS_AS(rule_omit_unused(c, {0, 5, 0}), BadPath);
  CHECK_THROWS_AS(rule_omit_unused(mid, {0, 0, 0, 0}), BadPath);
}

TEST_CASE("normal sum collapses independent draws") {
  CompPtr inner = make_comp({}, {Step(Update{"x1", d_normal(e_int(1), e_int(4))}),
                                 Step(Update{"x2", d_normal(e_int(2), e_int(9))}),
                                 Step(Update{"s", d_point(e_add(e_var("x1"), e_var("x2")))})});
  CompPtr c = make_comp({}, {Step(Update{"r", Nested{inner, "s"}})});
  CompPtr out = rule_normal_sum(c, {0});
  const auto& u = std::get<Update>(out->steps[0]);
  CHECK(dist_str(*std::get_if<DistPtr>(&u.body)) == "normal(3, 13)");
}

TEST_CASE("normal sum carries outer shift terms into the mean") {
  CompPtr inner = make_comp({}, {Step(Update{"e", d_normal(e_var("m"), e_var("v"))}),
                                 Step(Update{"r", d_point(e_add(e_var("x"), e_var("e")))})});
  CompPtr c = make_comp({}, {Step(Update{"r", Nested{inner, "r"}})});
  CompPtr out = rule_normal_sum(c, {0});
  CHECK(dist_str(*std::get_if<DistPtr>(&std::get<Update>(out->steps[0]).body)) ==
        "normal(x + m, v)");
}

TEST_CASE("normal sum rejections") {
  auto wrap = [](CompPtr inner, std::string result) {
    return make_comp({}, {Step(Update{"r", Nested{std::move(inner), std::move(result)}})});
  };
  CompPtr not_normal = wrap(make_comp({}, {Step(Update{"x1", half_table()}),
                                           Step(Update{"s", d_point(e_var("x1"))})}),
                            "s");
  CHECK_THROWS_AS(rule_normal_sum(not_normal, {0}), PreconditionFailed);

  CompPtr missing = wrap(make_comp({}, {Step(Update{"x1", d_normal(e_int(0), e_int(1))}),
                                        Step(Update{"x2", d_normal(e_int(0), e_int(1))}),
                                        Step(Update{"s", d_point(e_var("x1"))})}),
                         "s");
  CHECK_THROWS_AS(rule_normal_sum(missing, {0}), PreconditionFailed);

  CompPtr nonlinear = wrap(make_comp({}, {Step(Update{"x1", d_normal(e_int(0), e_int(1))}),
                                          Step(Update{"s", d_point(e_mul(e_var("x1"),
                                                                         e_int(2)))})}),
                           "s");
  CHECK_THROWS_AS(rule_normal_sum(nonlinear, {0}), PreconditionFailed);

  // The second draw's mean depends on the first: not independent.
  CompPtr chained = wrap(make_comp({}, {Step(Update{"x1", d_normal(e_int(0), e_int(1))}),
                                        Step(Update{"x2", d_normal(e_var("x1"), e_int(1))}),
                                        Step(Update{"s", d_point(e_add(e_var("x1"),
                                                                       e_var("x2")))})}),
                         "s");
  CHECK_THROWS_AS(rule_normal_sum(chained, {0}), PreconditionFailed);

  CompPtr flat = make_comp({}, {Step(Update{"r", d_normal(e_int(0), e_int(1))})});
  CHECK_THROWS_AS(rule_normal_sum(flat, {0}), PreconditionFailed);
}

TEST_CASE("voting abstraction on the bundled mean voter") {
  auto sys = parse_asset("voter_mean.psys");
  CompPtr out = rule_voting_abstraction(sys.comp, {0});
  const auto& n = std::get<Nested>(std::get<Update>(out->steps[0]).body);
  REQUIRE(n.comp->steps.size() == 2);
  const auto& noise = std::get<Update>(n.comp->steps[0]);
  CHECK(dist_str(*std::get_if<DistPtr>(&noise.body)) == "normal(0, 1/3)");
  const auto& read = std::get<Update>(n.comp->steps[1]);
  CHECK(dist_str(*std::get_if<DistPtr>(&read.body)) == "point(x + " + noise.target + ")");

  // Folding the remaining scope gives the closed form x + N(0, 1/3).
  CompPtr folded = rule_normal_sum(out, {0});
  CHECK(dist_str(*std::get_if<DistPtr>(&std::get<Update>(folded->steps[0]).body)) ==
        "normal(x, 1/3)");
}

TEST_CASE("voting abstraction keeps shared symbolic parameters") {
  auto sys = parse_asset("vote2.psys");
  CompPtr out = rule_voting_abstraction(sys.comp, {0});
  const auto& n = std::get<Nested>(std::get<Update>(out->steps[0]).body);
  const auto& noise = std::get<Update>(n.comp->steps[0]);
  CHECK(dist_str(*std::get_if<DistPtr>(&noise.body)) == "normal(muE(), sigmaE2(x) / 2)");
}

TEST_CASE("voting abstraction rejections") {
  auto wrap = [](std::vector<Step> steps, std::string result) {
    return make_comp({}, {Step(Update{"r", Nested{make_comp({}, std::move(steps)), result}})});
  };
  // Even update count: no 2n+1 structure.
  CHECK_THROWS_AS(
      rule_voting_abstraction(
          wrap({Step(Update{"e1", d_normal(e_int(0), e_int(1))}),
                Step(Update{"v1", d_point(e_add(e_var("x"), e_var("e1")))})},
               "v1"),
          {0}),
      PreconditionFailed);
  // Reads observe different values.
  CHECK_THROWS_AS(
      rule_voting_abstraction(
          wrap({Step(Update{"e1", d_normal(e_int(0), e_int(1))}),
                Step(Update{"e2", d_normal(e_int(0), e_int(1))}),
                Step(Update{"v1", d_point(e_add(e_var("x"), e_var("e1")))}),
                Step(Update{"v2", d_point(e_add(e_var("y"), e_var("e2")))}),
                Step(Update{"r", d_point(e_div(e_add(e_var("v1"), e_var("v2")), e_int(2)))})},
               "r"),
          {0}),
      PreconditionFailed);
  // Vote divides by the wrong count.
  CHECK_THROWS_AS(
      rule_voting_abstraction(
          wrap({Step(Update{"e1", d_normal(e_int(0), e_int(1))}),
                Step(Update{"e2", d_normal(e_int(0), e_int(1))}),
                Step(Update{"v1", d_point(e_add(e_var("x"), e_var("e1")))}),
                Step(Update{"v2", d_point(e_add(e_var("x"), e_var("e2")))}),
                Step(Update{"r", d_point(e_div(e_add(e_var("v1"), e_var("v2")), e_int(3)))})},
               "r"),
          {0}),
      PreconditionFailed);
  // Differing symbolic variances cannot be averaged syntactically.
  CHECK_THROWS_AS(
      rule_voting_abstraction(
          wrap({Step(Update{"e1", d_normal(e_int(0), e_var("a"))}),
                Step(Update{"e2", d_normal(e_int(0), e_var("b"))}),
                Step(Update{"v1", d_point(e_add(e_var("x"), e_var("e1")))}),
                Step(Update{"v2", d_point(e_add(e_var("x"), e_var("e2")))}),
                Step(Update{"r", d_point(e_div(e_add(e_var("v1"), e_var("v2")), e_int(2)))})},
               "r"),
          {0}),
      PreconditionFailed);
}

TEST_CASE("voting abstraction with unequal closed variances averages them") {
  auto wrap = [](std::vector<Step> steps, std::string result) {
    return make_comp({}, {Step(Update{"r", Nested{make_comp({}, std::move(steps)), result}})});
  };
  CompPtr c = wrap({Step(Update{"e1", d_normal(e_int(0), e_int(1))}),
                    Step(Update{"e2", d_normal(e_int(0), e_int(3))}),
                    Step(Update{"v1", d_point(e_add(e_var("x"), e_var("e1")))}),
                    Step(Update{"v2", d_point(e_add(e_var("x"), e_var("e2")))}),
                    Step(Update{"r", d_point(e_div(e_add(e_var("v1"), e_var("v2")), e_int(2)))})},
                   "r");
  CompPtr out = rule_voting_abstraction(c, {0});
  const auto& n = std::get<Nested>(std::get<Update>(out->steps[0]).body);
  // (1 + 3) / 2^2 = 1.
  CHECK(dist_str(*std::get_if<DistPtr>(&std::get<Update>(n.comp->steps[0]).body)) ==
        "normal(0, 1)");
}

TEST_CASE("discrete probability computation matches the enumeration oracle") {
  auto sys = parse_asset("discrete_sort_red.psys");
  ExprPtr ev = e_eq(e_var("s"), e_sym("stack2"));
  Num p = rule_discrete_prob_computation(sys.comp, ev, sys.ctx);
  CHECK(p == Num::ratio(97, 1000));
  CHECK(p == prob_event(eval_joint(sys.comp, sys.ctx), ev, sys.ctx));

  testsupport::Gen gen(5);
  Ctx ctx;
  for (int i = 0; i < 25; ++i) {
    CompPtr c = gen.comp(4);
    JointTable j = eval_joint(c, ctx);
    ExprPtr e = gen.event(j.vars);
    CHECK(rule_discrete_prob_computation(c, e, ctx) == prob_event(j, e, ctx));
  }
}

TEST_CASE("discrete probability computation error paths") {
  Ctx ctx;
  CompPtr cont = make_comp({}, {Step(Update{"x", d_normal(e_int(0), e_int(1))})});
  CHECK_THROWS_AS(rule_discrete_prob_computation(cont, e_bin(BinOp::Le, e_var("x"), e_int(0)), ctx),
                  PreconditionFailed);

  std::vector<std::pair<Literal, Num>> entries;
  for (int i = 0; i < 8; ++i) entries.emplace_back(Literal(Num(i)), Num::ratio(1, 8));
  std::vector<Step> steps;
  for (int i = 0; i < 8; ++i)
    steps.emplace_back(Update{"v" + std::to_string(i), d_table(entries)});
  CompPtr big = make_comp({}, std::move(steps));
  CHECK_THROWS_AS(
      rule_discrete_prob_computation(big, e_eq(e_var("v0"), e_int(0)), ctx, 1000),
      SizeLimitExceeded);

  CompPtr c = make_comp({}, {Step(Update{"x", half_table()})});
  CHECK_THROWS_AS(rule_discrete_prob_computation(c, e_var("x"), ctx), EvalError);
}

TEST_CASE("event approximation upper tail") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"x", d_normal(e_int(0), e_int(1))})});
  NormalParams p(0.0, 1.0);
  PiecewiseDensity env = build_upper_envelope(p, GridSpec{8.0, 320});  // width 0.05

  Goal ok{nullptr, e_bin(BinOp::Le, e_var("x"), e_int(-3)), Relation::Lt, parse_number("0.002")};
  ObligationRecord ob = rule_event_approx_upper(ok, c, env, ctx);
  CHECK(ob.discharged);
  CHECK(ob.kind == "cdf-bound");

  // A coarse grid cannot certify a tight epsilon: ObligationFalse, not success.
  PiecewiseDensity coarse = build_upper_envelope(p, GridSpec{8.0, 16});  // width 1
  Goal tight{nullptr, e_bin(BinOp::Le, e_var("x"), e_int(-3)), Relation::Lt,
             parse_number("0.001")};
  CHECK_THROWS_AS(rule_event_approx_upper(tight, c, coarse, ctx), ObligationFalse);

  // Envelope certified for a different distribution is rejected.
  PiecewiseDensity other = build_upper_envelope(NormalParams(1.0, 1.0), GridSpec{8.0, 320});
  CHECK_THROWS_AS(rule_event_approx_upper(ok, c, other, ctx), EnvelopeNotCertified);
  PiecewiseDensity wrong_role = build_lower_envelope(p, GridSpec{8.0, 320});
  CHECK_THROWS_AS(rule_event_approx_upper(ok, c, wrong_role, ctx), EnvelopeNotCertified);

  Goal wrong_event{nullptr, e_bin(BinOp::Ge, e_var("x"), e_int(-3)), Relation::Lt,
                   parse_number("0.002")};
  CHECK_THROWS_AS(rule_event_approx_upper(wrong_event, c, env, ctx), EventShapeMismatch);
}

TEST_CASE("event approximation lower tail") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"x", d_normal(e_int(0), e_int(1))})});
  NormalParams p(0.0, 1.0);
  // 1 - P_A(a) pays for the whole staircase deficit, so the grid must be fine.
  PiecewiseDensity env = build_lower_envelope(p, GridSpec{8.0, 3200});
  Goal ok{nullptr, e_bin(BinOp::Ge, e_var("x"), e_int(3)), Relation::Lt, parse_number("0.01")};
  ObligationRecord ob = rule_event_approx_lower(ok, c, env, ctx);
  CHECK(ob.discharged);
  // True tail at a = 0 is one half: epsilon 0.4 is refused, not falsely closed.
  Goal impossible{nullptr, e_bin(BinOp::Ge, e_var("x"), e_int(0)), Relation::Lt,
                  parse_number("0.4")};
  CHECK_THROWS_AS(rule_event_approx_lower(impossible, c, env, ctx), ObligationFalse);
  // A coarse grid refuses an epsilon the true distribution would meet.
  PiecewiseDensity coarse = build_lower_envelope(p, GridSpec{8.0, 320});
  CHECK_THROWS_AS(rule_event_approx_lower(ok, c, coarse, ctx), ObligationFalse);
  PiecewiseDensity wrong_role = build_upper_envelope(p, GridSpec{8.0, 3200});
  CHECK_THROWS_AS(rule_event_approx_lower(ok, c, wrong_role, ctx), EnvelopeNotCertified);
}

TEST_CASE("range split") {
  ExprPtr upper = e_bin(BinOp::Ge, e_var("x"), e_int(3));
  ExprPtr lower = e_bin(BinOp::Le, e_var("x"), e_int(-3));
  Goal g{nullptr, e_bin(BinOp::Or, upper, lower), Relation::Lt, parse_number("0.01")};
  auto [g1, g2] = rule_range_split(g, parse_number("0.004"), parse_number("0.006"));
  CHECK(expr_str(g1.event) == "x >= 3");
  CHECK(g1.bound == parse_number("0.004"));
  CHECK(expr_str(g2.event) == "x <= -3");
  CHECK(g2.bound == parse_number("0.006"));

  CHECK_THROWS_AS(rule_range_split(g, parse_number("0.004"), parse_number("0.004")),
                  EventShapeMismatch);  // epsilons must sum to the bound
  Goal notor{nullptr, upper, Relation::Lt, parse_number("0.01")};
  CHECK_THROWS_AS(rule_range_split(notor, parse_number("0.005"), parse_number("0.005")),
                  EventShapeMismatch);
  Goal mixed{nullptr,
             e_bin(BinOp::Or, upper, e_bin(BinOp::Le, e_var("y"), e_int(-3))),
             Relation::Lt, parse_number("0.01")};
  CHECK_THROWS_AS(rule_range_split(mixed, parse_number("0.005"), parse_number("0.005")),
                  EventShapeMismatch);
}

TEST_CASE("normal tail monotonicity, sound direction only") {
  Ctx ctx;
  CompPtr wide = make_comp({}, {Step(Update{"x", d_normal(e_int(0), e_int(4))})});
  CompPtr narrow = make_comp({}, {Step(Update{"x", d_normal(e_int(0), e_int(1))})});
  ExprPtr tail = e_bin(BinOp::Le, e_var("x"), e_int(-2));
  Goal premise{nullptr, tail, Relation::Lt, parse_number("0.2")};
  Goal conclusion{nullptr, tail, Relation::Lt, parse_number("0.2")};

  // Shrinking the variance keeps a left-tail bound valid.
  rule_normal_prob_monotone(conclusion, narrow, premise, wide, ctx);

  // The reverse direction (growing variance) is rejected as unsound.
  CHECK_THROWS_AS(rule_normal_prob_monotone(conclusion, wide, premise, narrow, ctx),
                  PreconditionFailed);

  // Threshold at or above the mean is out of scope.
  ExprPtr above = e_bin(BinOp::Le, e_var("x"), e_int(0));
  Goal p2{nullptr, above, Relation::Lt, parse_number("0.7")};
  Goal c2{nullptr, above, Relation::Lt, parse_number("0.7")};
  CHECK_THROWS_AS(rule_normal_prob_monotone(c2, narrow, p2, wide, ctx), PreconditionFailed);

  // Conclusion cannot tighten the premise's bound.
  Goal tighter{nullptr, tail, Relation::Lt, parse_number("0.1")};
  CHECK_THROWS_AS(rule_normal_prob_monotone(tighter, narrow, premise, wide, ctx),
                  PreconditionFailed);
}

TEST_CASE("event weakening") {
  Ctx ctx;
  DistPtr d = d_table({{Literal(Num(0)), Num::ratio(1, 10)}, {Literal(Num(1)), Num::ratio(9, 10)}});
  DistPtr weaker = d_table({{Literal(Num(0)), Num::ratio(1, 5)},
                            {Literal(Num(1)), Num::ratio(4, 5)}});
  CompPtr c = make_comp({}, {Step(Update{"v", d})});
  Goal g{nullptr, e_eq(e_var("v"), e_int(0)), Relation::Lt, parse_number("0.25")};
  Goal premise = rule_event_weakening(g, c, weaker, ctx);
  CHECK(premise.bound == g.bound);
  CHECK(expr_str(premise.event) == "v = 0");
  // The premise computation draws from the weaker distribution.
  Num pd = rule_discrete_prob_computation(premise.comp, premise.event, ctx);
  CHECK(pd == Num::ratio(1, 5));

  // D(y) > D'(y): not a weakening at this point.
  Goal g1{nullptr, e_eq(e_var("v"), e_int(1)), Relation::Lt, parse_number("0.95")};
  CHECK_THROWS_AS(rule_event_weakening(g1, c, weaker, ctx), PreconditionFailed);

  Goal shape{nullptr, e_bin(BinOp::Le, e_var("v"), e_int(0)), Relation::Lt, parse_number("0.25")};
  CHECK_THROWS_AS(rule_event_weakening(shape, c, weaker, ctx), EventShapeMismatch);

  CompPtr cont = make_comp({}, {Step(Update{"v", d_normal(e_int(0), e_int(1))})});
  CHECK_THROWS_AS(rule_event_weakening(g, cont, weaker, ctx), PreconditionFailed);
}
