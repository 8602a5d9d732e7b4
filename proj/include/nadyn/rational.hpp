#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "nadyn/errors.hpp"

namespace nadyn {

/// Exact arbitrary-precision fraction, always stored in lowest terms with a
/// positive denominator. Thin value type over GMP's mpq_class.
class Rational {
 public:
  Rational() = default;

  template <std::signed_integral I>
  Rational(I v) : q_(static_cast<long>(v)) {}  // NOLINT(google-explicit-constructor)

  template <std::unsigned_integral U>
  Rational(U v) : q_(static_cast<unsigned long>(v)) {}  // NOLINT(google-explicit-constructor)

  Rational(long num, long den) {
    if (den == 0) throw InvalidArgument("zero denominator");
    q_ = mpq_class(num, 1);
    q_ /= den;
  }

  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  /// Parses "p/q" or an integer. Decimal points and exponents are rejected.
  static Rational parse(std::string_view text) {
    std::string s(text);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    if (s.empty()) throw ParseError("empty rational literal");
    if (s.find_first_of(".eE") != std::string::npos) {
      throw ParseError("float literal '" + s +
                       "' not accepted; write exact rationals as p/q (e.g. \"1/2\")");
    }
    const auto slash = s.find('/');
    const auto valid_int = [](std::string_view t, bool allow_sign) {
      if (t.empty()) return false;
      std::size_t i = 0;
      if (allow_sign && (t[0] == '-' || t[0] == '+')) i = 1;
      if (i == t.size()) return false;
      for (; i < t.size(); ++i) {
        if (t[i] < '0' || t[i] > '9') return false;
      }
      return true;
    };
    std::string num = slash == std::string::npos ? s : s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!valid_int(num, true) || !valid_int(den, false)) {
      throw ParseError("malformed rational literal '" + s + "'");
    }
    if (num[0] == '+') num.erase(num.begin());
    mpz_class n(num, 10);
    mpz_class d(den, 10);
    if (d == 0) throw ParseError("zero denominator in '" + s + "'");
    mpq_class q(n, d);
    q.canonicalize();
    return Rational(std::move(q));
  }

  std::string str() const { return q_.get_str(); }
  double to_double() const { return q_.get_d(); }
  const mpq_class& raw() const noexcept { return q_; }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  bool is_integer() const { return q_.get_den() == 1; }

  Rational abs() const { return Rational(mpq_class(::abs(q_))); }

  Rational operator-() const { return Rational(mpq_class(-q_)); }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw InvalidArgument("division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  mpq_class q_{0};
};

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace nadyn
