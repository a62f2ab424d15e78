#ifndef PROBLY_SAMPLE_HPP
#define PROBLY_SAMPLE_HPP

#include <cstdint>
#include <cmath>

#include "json.hpp"
#include "probly/comp.hpp"
#include "probly/numeric.hpp"

namespace probly {

// Splittable counter-based generator: every sample index derives its own
// substream, so serial and parallel execution draw identical values.
class SplitRng {
 public:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static SplitRng stream(std::uint64_t seed, std::uint64_t index) {
    SplitRng rng;
    rng.state_ = mix(seed ^ mix(index + 1));
    return rng;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in the open interval (0, 1).
  double next_open01() {
    double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return u;
  }

 private:
  std::uint64_t state_ = 0;
};

struct SampleConfig {
  std::uint64_t n = 100000;
  std::uint64_t seed = 0;
  double gamma = 0.99;  // confidence level
};

struct Estimate {
  double p_hat = 0.0;
  double half_width = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double gamma = 0.99;

  // The Wilson interval is asymmetric; keep its actual endpoints too.
  double ci_low = 0.0;
  double ci_high = 1.0;
};

constexpr double kProperMassTol = 1e-9;

// Draw one value from a distribution term under the current valuation.
inline Literal sample_dist(const DistPtr& d, const Valuation& val, const Ctx& ctx, SplitRng& rng) {
  if (const auto* n = std::get_if<DistNode::Normal>(&d->node)) {
    double mean = detail::as_num(eval_expr(n->mean, val, ctx), "normal mean").to_double();
    double var = detail::as_num(eval_expr(n->variance, val, ctx), "normal variance").to_double();
    NormalParams p(mean, var);
    return Literal(Num(p.mean + p.sigma() * normal_quantile(rng.next_open01())));
  }
  if (const auto* c = std::get_if<DistNode::Conditional>(&d->node)) {
    for (const auto& g : c->cases)
      if (detail::as_bool(eval_expr(g.guard, val, ctx), "distribution guard"))
        return sample_dist(g.dist, val, ctx, rng);
    return sample_dist(c->otherwise, val, ctx, rng);
  }
  auto support = dist_support(d, val, ctx);
  Num total = dist_total_mass(support);
  if (std::abs(total.to_double() - 1.0) > kProperMassTol)
    throw ImproperDistribution("cannot sample a distribution with total mass " + total.str());
  double u = rng.next_open01();
  double acc = 0.0;
  for (const auto& [lit, w] : support) {
    acc += w.to_double();
    if (u <= acc) return lit;
  }
  return support.back().first;
}

namespace detail {

inline void sample_steps(Valuation& val, const std::vector<Step>& steps, const Ctx& ctx,
                         SplitRng& rng);

inline void sample_comp_into(Valuation& val, const CompPtr& c, const Ctx& ctx, SplitRng& rng) {
  for (const auto& [v, d] : c->env) val[v] = sample_dist(d, val, ctx, rng);
  sample_steps(val, c->steps, ctx, rng);
}

inline void sample_update(Valuation& val, const Update& u, const Ctx& ctx, SplitRng& rng) {
  if (const auto* d = std::get_if<DistPtr>(&u.body)) {
    val[u.target] = sample_dist(*d, val, ctx, rng);
    return;
  }
  const auto& n = std::get<Nested>(u.body);
  Valuation inner = val;  // scope: locals die with the copy
  sample_comp_into(inner, n.comp, ctx, rng);
  auto it = inner.find(n.result);
  if (it == inner.end()) throw EvalError("scope result variable never bound: " + n.result);
  val[u.target] = it->second;
}

inline void sample_steps(Valuation& val, const std::vector<Step>& steps, const Ctx& ctx,
                         SplitRng& rng) {
  for (const auto& step : steps) {
    if (const auto* u = std::get_if<Update>(&step)) {
      sample_update(val, *u, ctx, rng);
    } else {
      for (const auto& u : std::get<ParBlock>(step).updates) sample_update(val, u, ctx, rng);
    }
  }
}

}  // namespace detail

// One end-to-end execution of the computation.
inline Valuation sample_run(const CompPtr& c, const Ctx& ctx, SplitRng& rng) {
  Valuation val;
  detail::sample_comp_into(val, c, ctx, rng);
  return val;
}

// Wilson score interval at confidence gamma.
inline void wilson_interval(std::uint64_t hits, std::uint64_t n, double gamma, double& lo,
                            double& hi) {
  double z = normal_quantile(0.5 + gamma / 2.0);
  double nn = static_cast<double>(n);
  double p = static_cast<double>(hits) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

inline Estimate estimate_prob(const CompPtr& c, const ExprPtr& event, const Ctx& ctx,
                              const SampleConfig& cfg) {
  if (cfg.n < 1) throw Error("sample count must be >= 1");
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < cfg.n; ++i) {
    SplitRng rng = SplitRng::stream(cfg.seed, i);
    Valuation val = sample_run(c, ctx, rng);
    Literal r = eval_expr(event, val, ctx);
    if (!std::holds_alternative<bool>(r)) throw EvalError("event predicate is not boolean");
    if (std::get<bool>(r)) ++hits;
  }
  Estimate est;
  est.n = cfg.n;
  est.seed = cfg.seed;
  est.gamma = cfg.gamma;
  est.p_hat = static_cast<double>(hits) / static_cast<double>(cfg.n);
  wilson_interval(hits, cfg.n, cfg.gamma, est.ci_low, est.ci_high);
  est.half_width = (est.ci_high - est.ci_low) / 2.0;
  return est;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  std::uint64_t n = 0;
};

inline Moments estimate_moments(const CompPtr& c, const ExprPtr& target, const Ctx& ctx,
                                const SampleConfig& cfg) {
  if (cfg.n < 1) throw Error("sample count must be >= 1");
  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t i = 0; i < cfg.n; ++i) {
    SplitRng rng = SplitRng::stream(cfg.seed, i);
    Valuation val = sample_run(c, ctx, rng);
    double x = detail::as_num(eval_expr(target, val, ctx), "moment target").to_double();
    double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  Moments m;
  m.n = cfg.n;
  m.mean = mean;
  m.variance = cfg.n > 1 ? m2 / static_cast<double>(cfg.n - 1) : 0.0;
  m.mean_se = std::sqrt(m.variance / static_cast<double>(cfg.n));
  m.variance_se = cfg.n > 1
                      ? m.variance * std::sqrt(2.0 / static_cast<double>(cfg.n - 1))
                      : 0.0;
  return m;
}

inline nlohmann::json estimate_to_json(const Estimate& e) {
  return nlohmann::json{{"p_hat", e.p_hat},       {"half_width", e.half_width},
                        {"ci_low", e.ci_low},     {"ci_high", e.ci_high},
                        {"n", e.n},               {"seed", e.seed},
                        {"gamma", e.gamma}};
}

}  // namespace probly

#endif
