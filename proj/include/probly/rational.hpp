#ifndef PROBLY_RATIONAL_HPP
#define PROBLY_RATIONAL_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace probly {

// Exact rational over 64-bit ints. Arithmetic that would overflow is reported
// via Overflow so callers can fall back to floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0, gcd(|num|, den) == 1

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    num = n;
    den = d;
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
};

namespace detail {
inline bool fits64(__int128 v) {
  return v >= static_cast<__int128>(INT64_MIN) && v <= static_cast<__int128>(INT64_MAX);
}
inline bool make_rational(__int128 n, __int128 d, Rational& out) {
  if (d == 0) return false;
  if (d < 0) { n = -n; d = -d; }
  __int128 an = n < 0 ? -n : n;
  __int128 g = d;
  while (an != 0) { __int128 t = an; an = g % an; g = t; }
  if (g > 1) { n /= g; d /= g; }
  if (!fits64(n) || !fits64(d)) return false;
  out.num = static_cast<std::int64_t>(n);
  out.den = static_cast<std::int64_t>(d);
  return true;
}
}  // namespace detail

inline bool rat_add(const Rational& a, const Rational& b, Rational& out) {
  return detail::make_rational(
      static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
      static_cast<__int128>(a.den) * b.den, out);
}
inline bool rat_sub(const Rational& a, const Rational& b, Rational& out) {
  return detail::make_rational(
      static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
      static_cast<__int128>(a.den) * b.den, out);
}
inline bool rat_mul(const Rational& a, const Rational& b, Rational& out) {
  return detail::make_rational(static_cast<__int128>(a.num) * b.num,
                               static_cast<__int128>(a.den) * b.den, out);
}
inline bool rat_div(const Rational& a, const Rational& b, Rational& out) {
  if (b.num == 0) return false;
  return detail::make_rational(static_cast<__int128>(a.num) * b.den,
                               static_cast<__int128>(a.den) * b.num, out);
}

// A number that stays exact-rational as long as every operand is rational and
// no 64-bit overflow occurs; otherwise it degrades to double.
class Num {
 public:
  Num() : exact_(true), rat_(0), dbl_(0.0) {}
  Num(std::int64_t n) : exact_(true), rat_(n), dbl_(0.0) {}
  Num(int n) : Num(static_cast<std::int64_t>(n)) {}
  Num(const Rational& r) : exact_(true), rat_(r), dbl_(0.0) {}
  Num(double d) : exact_(false), rat_(), dbl_(d) {}

  static Num ratio(std::int64_t n, std::int64_t d) { return Num(Rational(n, d)); }

  bool exact() const { return exact_; }
  const Rational& rat() const { return rat_; }
  double to_double() const { return exact_ ? rat_.to_double() : dbl_; }
  bool is_zero() const { return exact_ ? rat_.is_zero() : dbl_ == 0.0; }
  bool is_negative() const { return exact_ ? rat_.num < 0 : dbl_ < 0.0; }

  friend Num operator+(const Num& a, const Num& b) {
    Rational r;
    if (a.exact_ && b.exact_ && rat_add(a.rat_, b.rat_, r)) return Num(r);
    return Num(a.to_double() + b.to_double());
  }
  friend Num operator-(const Num& a, const Num& b) {
    Rational r;
    if (a.exact_ && b.exact_ && rat_sub(a.rat_, b.rat_, r)) return Num(r);
    return Num(a.to_double() - b.to_double());
  }
  friend Num operator*(const Num& a, const Num& b) {
    Rational r;
    if (a.exact_ && b.exact_ && rat_mul(a.rat_, b.rat_, r)) return Num(r);
    return Num(a.to_double() * b.to_double());
  }
  friend Num operator/(const Num& a, const Num& b) {
    if (b.is_zero()) throw std::domain_error("division by zero");
    Rational r;
    if (a.exact_ && b.exact_ && rat_div(a.rat_, b.rat_, r)) return Num(r);
    return Num(a.to_double() / b.to_double());
  }
  Num operator-() const { return Num(0) - *this; }

  // Numeric comparison across representations.
  friend bool operator==(const Num& a, const Num& b) {
    if (a.exact_ && b.exact_) return a.rat_ == b.rat_;
    return a.to_double() == b.to_double();
  }
  friend bool operator<(const Num& a, const Num& b) {
    if (a.exact_ && b.exact_) return a.rat_ < b.rat_;
    return a.to_double() < b.to_double();
  }
  friend bool operator<=(const Num& a, const Num& b) { return a < b || a == b; }
  friend bool operator>(const Num& a, const Num& b) { return b < a; }
  friend bool operator>=(const Num& a, const Num& b) { return b <= a; }

  std::string str() const {
    if (exact_) {
      if (rat_.den == 1) return std::to_string(rat_.num);
      return std::to_string(rat_.num) + "/" + std::to_string(rat_.den);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", dbl_);
    return buf;
  }

 private:
  bool exact_;
  Rational rat_;
  double dbl_;
};

inline std::ostream& operator<<(std::ostream& os, const Num& n) { return os << n.str(); }

// Parse "12", "-0.95", or "19/20" into an exact rational; falls back to
// double on overflow or exponent notation.
inline Num parse_number(const std::string& s) {
  auto bad = [&]() -> Num { throw std::invalid_argument("malformed number: " + s); };
  if (s.empty()) return bad();
  if (s.find_first_of("eE") != std::string::npos) return Num(std::stod(s));
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::int64_t n = std::stoll(s.substr(0, slash));
    std::int64_t d = std::stoll(s.substr(slash + 1));
    if (d == 0) return bad();
    return Num(Rational(n, d));
  }
  bool neg = s[0] == '-';
  size_t i = neg || s[0] == '+' ? 1 : 0;
  __int128 num = 0;
  __int128 den = 1;
  bool seen_dot = false, seen_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) return bad();
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') return bad();
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    if (num > static_cast<__int128>(INT64_MAX) || den > static_cast<__int128>(INT64_MAX))
      return Num(std::stod(s));
  }
  if (!seen_digit) return bad();
  if (neg) num = -num;
  Rational r;
  if (!detail::make_rational(num, den, r)) return Num(std::stod(s));
  return Num(r);
}

}  // namespace probly

#endif
