#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "spinflow/errors.hpp"

namespace spinflow {

// Exact rational with int64 numerator/denominator, always normalized
// (den > 0, gcd = 1). Intermediate products go through __int128; anything
// that cannot be reduced back into int64 throws rather than silently
// overflowing. Plenty of headroom for the factorial-sized denominators of
// truncated genus series (11! ~ 4e7).
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from_i128(n, d);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw InvalidArgumentError("rational division by zero");
    return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  // n! as a rational; throws once the product leaves int64.
  static Rational factorial(int n) {
    if (n < 0) throw InvalidArgumentError("factorial of negative integer");
    __int128 f = 1;
    for (int i = 2; i <= n; ++i) {
      f *= i;
      if (f > INT64_MAX) throw InvalidArgumentError("factorial overflow");
    }
    return Rational(static_cast<long long>(f));
  }

 private:
  static __int128 i128(long long v) { return static_cast<__int128>(v); }

  static Rational from_i128(__int128 n, __int128 d) {
    if (d == 0) throw InvalidArgumentError("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw InvalidArgumentError("rational overflow");
    Rational r;
    r.num_ = static_cast<long long>(n);
    r.den_ = static_cast<long long>(d);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) { __int128 t = a % b; a = b; b = t; }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    Rational r = from_i128(num_, den_);
    num_ = r.num_;
    den_ = r.den_;
  }

  long long num_;
  long long den_;
};

}  // namespace spinflow
