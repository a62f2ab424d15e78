#include <catch2/catch_amalgamated.hpp>

#include "probly/exact.hpp"
#include "probly/sample.hpp"
#include "support.hpp"

using namespace probly;
using testsupport::parse_asset;

TEST_CASE("substreams are deterministic and order-independent") {
  // Same (seed, index) always yields the same draws.
  SplitRng a = SplitRng::stream(7, 123);
  SplitRng b = SplitRng::stream(7, 123);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  // Different indices decorrelate; evaluation order does not matter.
  std::vector<std::uint64_t> forward, backward;
  for (int i = 0; i < 8; ++i) forward.push_back(SplitRng::stream(7, i).next_u64());
  for (int i = 7; i >= 0; --i) backward.push_back(SplitRng::stream(7, i).next_u64());
  std::reverse(backward.begin(), backward.end());
  CHECK(forward == backward);
  CHECK(std::set<std::uint64_t>(forward.begin(), forward.end()).size() == forward.size());
}

TEST_CASE("open-unit uniforms stay in (0,1)") {
  SplitRng rng = SplitRng::stream(1, 0);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.next_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("estimates are reproducible for a fixed seed") {
  auto sys = parse_asset("coin.psys");
  ExprPtr ev = e_eq(e_var("b"), e_bool(true));
  SampleConfig cfg;
  cfg.n = 5000;
  cfg.seed = 42;
  Estimate e1 = estimate_prob(sys.comp, ev, sys.ctx, cfg);
  Estimate e2 = estimate_prob(sys.comp, ev, sys.ctx, cfg);
  CHECK(e1.p_hat == e2.p_hat);
  CHECK(e1.ci_low == e2.ci_low);
  CHECK(e1.ci_high == e2.ci_high);
  cfg.seed = 43;
  Estimate e3 = estimate_prob(sys.comp, ev, sys.ctx, cfg);
  CHECK(e1.p_hat != e3.p_hat);  // different seed, different draw
}

TEST_CASE("wilson interval shrinks like one over sqrt n") {
  double lo1, hi1, lo2, hi2;
  wilson_interval(500, 1000, 0.99, lo1, hi1);
  wilson_interval(50000, 100000, 0.99, lo2, hi2);
  double w1 = hi1 - lo1, w2 = hi2 - lo2;
  CHECK(w1 / w2 == Catch::Approx(10.0).epsilon(0.05));
  // Extremes stay clamped inside [0, 1].
  double lo, hi;
  wilson_interval(0, 100, 0.99, lo, hi);
  CHECK(lo == 0.0);
  CHECK(hi > 0.0);
  wilson_interval(100, 100, 0.99, lo, hi);
  CHECK(hi == 1.0);
  CHECK(lo < 1.0);
}

TEST_CASE("coin estimate brackets one half") {
  auto sys = parse_asset("coin.psys");
  ExprPtr ev = e_eq(e_var("b"), e_bool(true));
  SampleConfig cfg;
  cfg.n = 100000;
  cfg.seed = 1;
  Estimate est = estimate_prob(sys.comp, ev, sys.ctx, cfg);
  CHECK(est.ci_low <= 0.5);
  CHECK(est.ci_high >= 0.5);
  CHECK(est.half_width < 0.01);
}

TEST_CASE("sampler agrees with the exact oracle on random discrete systems") {
  testsupport::Gen gen(99);
  Ctx ctx;
  int outside = 0;
  for (int iter = 0; iter < 10; ++iter) {
    CompPtr c = gen.comp(4);
    JointTable j = eval_joint(c, ctx);
    if (!(total_mass(j) == Num(1))) continue;  // improper: sampler refuses
    ExprPtr ev = gen.event(j.vars);
    Num truth = prob_event(j, ev, ctx);
    SampleConfig cfg;
    cfg.n = 20000;
    cfg.seed = 7 + static_cast<std::uint64_t>(iter);
    Estimate est = estimate_prob(c, ev, ctx, cfg);
    if (truth.to_double() < est.ci_low || truth.to_double() > est.ci_high) ++outside;
  }
  CHECK(outside <= 1);  // 99% intervals; allow one unlucky case
}

TEST_CASE("improper distributions cannot be sampled") {
  Ctx ctx;
  DistPtr improper = d_table({{Literal(Num(0)), Num::ratio(1, 2)}});
  CompPtr c = make_comp({}, {Step(Update{"v", improper})});
  SplitRng rng = SplitRng::stream(0, 0);
  CHECK_THROWS_AS(sample_run(c, ctx, rng), ImproperDistribution);
}

TEST_CASE("normal sampling matches its moments") {
  Ctx ctx;
  CompPtr c = make_comp({}, {Step(Update{"x", d_normal(e_int(1), e_int(4))})});
  SampleConfig cfg;
  cfg.n = 200000;
  cfg.seed = 5;
  Moments m = estimate_moments(c, e_var("x"), ctx, cfg);
  CHECK(std::abs(m.mean - 1.0) < 4.0 * m.mean_se);
  CHECK(std::abs(m.variance - 4.0) < 4.0 * m.variance_se);
}

TEST_CASE("voter mean concentrates") {
  // Averaging three unit-variance sensors cuts the variance to 1/3.
  auto sys = parse_asset("voter_mean.psys");
  SampleConfig cfg;
  cfg.n = 100000;
  cfg.seed = 11;
  Moments m = estimate_moments(sys.comp, e_var("r"), sys.ctx, cfg);
  CHECK(std::abs(m.mean - 0.0) < 4.0 * m.mean_se);
  CHECK(std::abs(m.variance - 1.0 / 3.0) < 4.0 * m.variance_se);
}

TEST_CASE("conditional distributions sample by guard") {
  Ctx ctx;
  DistPtr d = d_cond({{e_eq(e_var("c"), e_int(1)), d_normal(e_int(10), e_int(1))}},
                     d_normal(e_int(-10), e_int(1)));
  CompPtr c = make_comp({}, {Step(Update{"c", d_point(e_int(1))}), Step(Update{"x", d})});
  SampleConfig cfg;
  cfg.n = 1000;
  cfg.seed = 3;
  Moments m = estimate_moments(c, e_var("x"), ctx, cfg);
  CHECK(m.mean > 5.0);
}
