#ifndef PROBLY_NUMERIC_HPP
#define PROBLY_NUMERIC_HPP

#include <cmath>
#include <vector>

#include "json.hpp"
#include "probly/errors.hpp"

namespace probly {

struct NormalParams {
  double mean = 0.0;
  double variance = 1.0;

  NormalParams() = default;
  NormalParams(double mu, double var) : mean(mu), variance(var) {
    if (!(var > 0.0)) throw InvalidVariance("normal variance must be > 0");
  }
  double sigma() const { return std::sqrt(variance); }
};

inline double normal_pdf(double x, const NormalParams& p) {
  double s = p.sigma();
  double z = (x - p.mean) / s;
  return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
}

inline double normal_cdf(double x, const NormalParams& p) {
  double z = (x - p.mean) / p.sigma();
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Standard normal quantile: Acklam's rational approximation polished with one
// Halley step against normal_cdf.
inline double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error("quantile argument must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (q < plow) {
    double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= 1.0 - plow) {
    double u = q - 0.5;
    double t = u * u;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  NormalParams std_normal;
  double e = normal_cdf(x, std_normal) - q;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

enum class EnvelopeRole { Upper, Lower };

// Piecewise-constant density bound for a normal density. Upper envelopes carry
// analytic tail-mass bounds outside the grid; lower envelopes are zero there.
struct PiecewiseDensity {
  std::vector<double> breakpoints;  // strictly increasing
  std::vector<double> densities;    // one per interval, >= 0
  EnvelopeRole role = EnvelopeRole::Upper;
  double tail_mass_left = 0.0;   // bound on mass below breakpoints.front()
  double tail_mass_right = 0.0;  // bound on mass above breakpoints.back()
  bool certified = false;        // built by an envelope constructor
  NormalParams certified_for;    // only meaningful when certified

  double integral() const {
    double s = tail_mass_left + tail_mass_right;
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
      s += densities[i] * (breakpoints[i + 1] - breakpoints[i]);
    return s;
  }
};

struct GridSpec {
  double half_width_sigmas = 8.0;  // grid covers mean +- this many sigmas
  size_t pieces = 320;
};

namespace detail {
// One-sided Gaussian tail bound: P(X > t) <= f(t) * sigma^2 / (t - mean).
inline double gaussian_tail_bound(double t, const NormalParams& p) {
  return normal_pdf(t, p) * p.variance / (t - p.mean);
}
}  // namespace detail

// Pointwise upper bound of the normal density: per-interval maximum (attained
// at the endpoint nearer the mean, or the mean itself), analytic tail bounds.
inline PiecewiseDensity build_upper_envelope(const NormalParams& p, const GridSpec& grid) {
  if (grid.pieces < 1 || !(grid.half_width_sigmas > 0.0))
    throw BadGrid("envelope grid must have >= 1 piece and positive half-width");
  double lo = p.mean - grid.half_width_sigmas * p.sigma();
  double hi = p.mean + grid.half_width_sigmas * p.sigma();
  double w = (hi - lo) / static_cast<double>(grid.pieces);
  PiecewiseDensity env;
  env.role = EnvelopeRole::Upper;
  env.breakpoints.reserve(grid.pieces + 1);
  for (size_t i = 0; i <= grid.pieces; ++i) env.breakpoints.push_back(lo + w * static_cast<double>(i));
  env.breakpoints.back() = hi;
  for (size_t i = 0; i < grid.pieces; ++i) {
    double a = env.breakpoints[i], b = env.breakpoints[i + 1];
    double at = (p.mean >= a && p.mean <= b) ? p.mean : (std::abs(a - p.mean) < std::abs(b - p.mean) ? a : b);
    env.densities.push_back(normal_pdf(at, p));
  }
  env.tail_mass_left = detail::gaussian_tail_bound(2.0 * p.mean - lo, p);
  env.tail_mass_right = detail::gaussian_tail_bound(hi, p);
  env.certified = true;
  env.certified_for = p;
  return env;
}

// Pointwise lower bound: per-interval minimum (endpoint farther from the
// mean), zero tails.
inline PiecewiseDensity build_lower_envelope(const NormalParams& p, const GridSpec& grid) {
  if (grid.pieces < 1 || !(grid.half_width_sigmas > 0.0))
    throw BadGrid("envelope grid must have >= 1 piece and positive half-width");
  double lo = p.mean - grid.half_width_sigmas * p.sigma();
  double hi = p.mean + grid.half_width_sigmas * p.sigma();
  double w = (hi - lo) / static_cast<double>(grid.pieces);
  PiecewiseDensity env;
  env.role = EnvelopeRole::Lower;
  env.breakpoints.reserve(grid.pieces + 1);
  for (size_t i = 0; i <= grid.pieces; ++i) env.breakpoints.push_back(lo + w * static_cast<double>(i));
  env.breakpoints.back() = hi;
  for (size_t i = 0; i < grid.pieces; ++i) {
    double a = env.breakpoints[i], b = env.breakpoints[i + 1];
    double at = std::abs(a - p.mean) > std::abs(b - p.mean) ? a : b;
    env.densities.push_back(normal_pdf(at, p));
  }
  env.certified = true;
  env.certified_for = p;
  return env;
}

// Integral of the piecewise density over (-inf, a], tails per role policy.
inline double cumulative(const PiecewiseDensity& d, double a) {
  double s = d.role == EnvelopeRole::Upper ? d.tail_mass_left : 0.0;
  for (size_t i = 0; i + 1 < d.breakpoints.size(); ++i) {
    double lo = d.breakpoints[i], hi = d.breakpoints[i + 1];
    if (a <= lo) return s;
    s += d.densities[i] * (std::min(a, hi) - lo);
    if (a <= hi) return s;
  }
  if (d.role == EnvelopeRole::Upper) s += d.tail_mass_right;
  return s;
}

inline nlohmann::json envelope_to_json(const PiecewiseDensity& d) {
  return nlohmann::json{
      {"breakpoints", d.breakpoints},
      {"densities", d.densities},
      {"role", d.role == EnvelopeRole::Upper ? "upper" : "lower"},
      {"tail_mass_left", d.tail_mass_left},
      {"tail_mass_right", d.tail_mass_right},
      {"certified", d.certified},
      {"mean", d.certified_for.mean},
      {"variance", d.certified_for.variance},
  };
}

}  // namespace probly

#endif
