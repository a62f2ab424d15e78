// Shared helpers for the test suites: asset loading, an independent
// high-precision normal CDF oracle, and random term generators.
#ifndef PROBLY_TESTS_SUPPORT_HPP
#define PROBLY_TESTS_SUPPORT_HPP

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "probly/parser.hpp"

namespace testsupport {

inline std::string asset_path(const std::string& name) {
  return std::string(PROBLY_ASSETS_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string load_asset(const std::string& name) { return read_file(asset_path(name)); }

inline probly::SystemFile parse_asset(const std::string& name) {
  return probly::parse_system(load_asset(name));
}

// ---- independent normal CDF oracle ----
//
// Deliberately avoids std::erf/std::erfc (used by the implementation):
// Taylor series for small arguments, Lentz continued fraction for the tail,
// all in long double.

inline long double erf_series(long double x) {
  // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
  long double term = x;  // n = 0 term before the 1/(2n+1) factor
  long double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    long double add = term / (2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-24L * std::abs(sum)) break;
  }
  return sum * 2.0L / std::sqrt(std::acos(-1.0L));
}

inline long double erfc_cf(long double x) {
  // erfc(x) = exp(-x^2) / (x sqrt(pi)) * K, with the continued fraction
  // K = 1/(1+ (1/2x^2)/(1+ (2/2x^2)/(1+ ...))) evaluated by modified Lentz.
  const long double tiny = 1e-30L;
  long double f = tiny, C = f, D = 0.0L;
  for (int n = 0; n < 500; ++n) {
    long double a = n == 0 ? 1.0L : n / (2.0L * x * x);
    long double b = 1.0L;
    D = b + a * D;
    if (D == 0.0L) D = tiny;
    C = b + a / C;
    if (C == 0.0L) C = tiny;
    D = 1.0L / D;
    long double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0L) < 1e-22L) break;
  }
  return std::exp(-x * x) / (x * std::sqrt(std::acos(-1.0L))) * f;
}

inline long double oracle_erf(long double x) {
  if (x < 0) return -oracle_erf(-x);
  if (x < 3.0L) return erf_series(x);
  return 1.0L - erfc_cf(x);
}

inline double oracle_normal_cdf(double x, double mean, double variance) {
  long double z = (static_cast<long double>(x) - mean) / std::sqrt(static_cast<long double>(variance));
  return static_cast<double>(0.5L * (1.0L + oracle_erf(z / std::sqrt(2.0L))));
}

// ---- random term generation ----

struct Gen {
  std::mt19937_64 rng;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

  probly::ExprPtr num_expr(const std::vector<std::string>& vars, int depth) {
    using namespace probly;
    if (depth <= 0 || vars.empty() || chance(0.3)) {
      if (!vars.empty() && chance(0.5)) return e_var(vars[pick(vars.size())]);
      return e_int(static_cast<std::int64_t>(pick(5)) - 1);
    }
    switch (pick(4)) {
      case 0: return e_add(num_expr(vars, depth - 1), num_expr(vars, depth - 1));
      case 1: return e_sub(num_expr(vars, depth - 1), num_expr(vars, depth - 1));
      case 2: return e_mul(num_expr(vars, depth - 1), num_expr(vars, depth - 1));
      default: {
        ExprPtr guard = e_bin(chance(0.5) ? BinOp::Le : BinOp::Eq, num_expr(vars, 0),
                              num_expr(vars, 0));
        return e_cond({{guard, num_expr(vars, depth - 1)}}, num_expr(vars, depth - 1));
      }
    }
  }

  // Proper finite table over small integers with exact rational weights.
  probly::DistPtr table_dist() {
    using namespace probly;
    size_t k = 2 + pick(2);
    std::vector<std::int64_t> cuts;
    for (size_t i = 0; i + 1 < k; ++i) cuts.push_back(static_cast<std::int64_t>(1 + pick(7)));
    cuts.push_back(8);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<Literal, Num>> entries;
    std::int64_t prev = 0;
    for (size_t i = 0; i < k; ++i) {
      std::int64_t w = cuts[i] - prev;
      prev = cuts[i];
      if (w == 0) continue;
      entries.emplace_back(Literal(Num(static_cast<std::int64_t>(i))), Num::ratio(w, 8));
    }
    return d_table(std::move(entries));
  }

  probly::DistPtr discrete_dist(const std::vector<std::string>& vars, int depth = 2) {
    using namespace probly;
    switch (pick(depth > 0 ? 3 : 2)) {
      case 0: return d_point(num_expr(vars, 2));
      case 1: return table_dist();
      default: {
        ExprPtr guard = e_bin(BinOp::Le, num_expr(vars, 0), num_expr(vars, 0));
        return d_cond({{guard, discrete_dist(vars, 0)}}, discrete_dist(vars, 0));
      }
    }
  }

  // Random straight-line finite-discrete computation with no external inputs.
  probly::CompPtr comp(size_t n_steps, size_t n_vars = 4) {
    using namespace probly;
    std::vector<std::string> pool;
    for (size_t i = 0; i < n_vars; ++i) pool.push_back("v" + std::to_string(i));
    std::vector<std::string> bound;
    std::vector<Step> steps;
    for (size_t i = 0; i < n_steps; ++i) {
      std::string target = pool[pick(pool.size())];
      steps.emplace_back(Update{target, discrete_dist(bound)});
      if (std::find(bound.begin(), bound.end(), target) == bound.end()) bound.push_back(target);
    }
    return make_comp({}, std::move(steps));
  }

  // Random boolean event over the given variables.
  probly::ExprPtr event(const std::vector<std::string>& vars) {
    using namespace probly;
    ExprPtr a = e_bin(BinOp::Le, num_expr(vars, 1), num_expr(vars, 1));
    if (chance(0.5)) return a;
    ExprPtr b = e_bin(chance(0.5) ? BinOp::Eq : BinOp::Lt, num_expr(vars, 1), num_expr(vars, 1));
    return e_bin(chance(0.5) ? BinOp::And : BinOp::Or, a, b);
  }
};

}  // namespace testsupport

#endif
