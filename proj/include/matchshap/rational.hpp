#pragma once

// Exact arithmetic used throughout: arbitrary-precision rationals for game
// values and big integers for factorial-weighted sums. No floating point
// enters the exact pipeline; decimals are produced only at output time.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace matchshap {

using BigInt = mpz_class;
using Rational = mpq_class;

inline BigInt factorial(unsigned long n) {
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

// C(n, k); zero when k > n.
inline BigInt binomial(unsigned long n, unsigned long k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

inline BigInt pow10(unsigned long k) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

// 0!, 1!, ..., n_max! precomputed once per computation.
class FactorialTable {
 public:
  explicit FactorialTable(int n_max) {
    table_.reserve(static_cast<std::size_t>(n_max) + 1);
    table_.emplace_back(1);
    for (int i = 1; i <= n_max; ++i) table_.push_back(table_.back() * i);
  }
  const BigInt& operator[](int i) const { return table_.at(static_cast<std::size_t>(i)); }

 private:
  std::vector<BigInt> table_;
};

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

// Requires is_integral(q).
inline BigInt to_integer(const Rational& q) {
  if (!is_integral(q)) throw std::invalid_argument("rational is not an integer");
  return q.get_num();
}

// Accepts "5", "-3", "2.5", "5/2". Decimal-to-rational conversion is exact
// (digits over a power of ten, then reduced).
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("invalid rational '" + std::string(text) + "'"); };
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) fail();
  auto all_digits = [](std::string_view v) {
    if (v.empty()) return false;
    for (char c : v)
      if (c < '0' || c > '9') return false;
    return true;
  };
  // explicit base 10: the default-base constructor would read a leading
  // zero as octal
  auto decimal = [](std::string_view v) { return BigInt{std::string(v), 10}; };
  Rational q;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) fail();
    BigInt d = decimal(den);
    if (d == 0) fail();
    q = make_rational(decimal(num), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (!all_digits(whole) || !all_digits(frac)) fail();
    q = make_rational(decimal(std::string(whole) + std::string(frac)), pow10(frac.size()));
  } else {
    if (!all_digits(s)) fail();
    q = Rational(decimal(s));
  }
  if (negative) q = -q;
  return q;
}

// Reduced fraction with positive denominator: "5/2", "-1/3", "7".
inline std::string to_fraction_string(const Rational& q) { return q.get_str(); }

namespace detail {
// Number of decimal digits of |z|, z != 0.
inline long decimal_digits(const BigInt& z) {
  long d = static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 10));
  // sizeinbase may overestimate by one.
  if (d > 1 && abs(z) < pow10(static_cast<unsigned long>(d - 1))) --d;
  return d;
}
}  // namespace detail

// Exact decimal rendering with `digits` significant digits (round half away
// from zero). Zero renders as "0"; very large/small magnitudes switch to
// exponent notation.
inline std::string to_decimal_string(const Rational& q, int digits = 12) {
  if (digits < 1) throw std::invalid_argument("need at least one significant digit");
  if (q == 0) return "0";
  const bool negative = q < 0;
  BigInt a = abs(q.get_num());
  BigInt b = q.get_den();
  // Exponent e with 10^e <= a/b < 10^(e+1).
  long e = detail::decimal_digits(a) - detail::decimal_digits(b);
  auto at_least_pow = [&](long k) {  // a/b >= 10^k ?
    return k >= 0 ? a >= b * pow10(static_cast<unsigned long>(k))
                  : a * pow10(static_cast<unsigned long>(-k)) >= b;
  };
  while (!at_least_pow(e)) --e;
  while (at_least_pow(e + 1)) ++e;

  const long k = digits - 1 - e;
  BigInt num = a, den = b;
  if (k >= 0)
    num *= pow10(static_cast<unsigned long>(k));
  else
    den *= pow10(static_cast<unsigned long>(-k));
  BigInt r = (2 * num + den) / (2 * den);  // round half up on |q|
  if (r == pow10(static_cast<unsigned long>(digits))) {
    r = pow10(static_cast<unsigned long>(digits - 1));
    ++e;
  }
  std::string ds = r.get_str();

  std::string out;
  if (e >= 0 && e <= digits + 2) {
    if (e + 1 >= static_cast<long>(ds.size())) {
      out = ds + std::string(static_cast<std::size_t>(e + 1) - ds.size(), '0');
    } else {
      out = ds.substr(0, static_cast<std::size_t>(e + 1)) + "." + ds.substr(static_cast<std::size_t>(e + 1));
    }
  } else if (e < 0 && e >= -4) {
    out = "0." + std::string(static_cast<std::size_t>(-e - 1), '0') + ds;
  } else {
    out = ds.substr(0, 1) + "." + ds.substr(1) + "e" + (e >= 0 ? "+" : "") + std::to_string(e);
  }
  return negative ? "-" + out : out;
}

}  // namespace matchshap
