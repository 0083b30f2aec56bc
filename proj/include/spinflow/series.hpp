#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spinflow/errors.hpp"

// Truncated commutative series in named form-degree generators. The ring is
// the quotient by total degree > dmax and by the odd sector: odd-degree
// generators are one-shot volume tokens, so any monomial carrying two odd
// factors (repeated or distinct) is identified with zero. That keeps the
// algebra honestly commutative while still carrying the single odd datum a
// fixed-point density needs; products are truncated, never reordered.

namespace spinflow {

struct Generator {
  std::string name;
  int degree = 2;
};

class SeriesRing {
 public:
  SeriesRing() = default;
  SeriesRing(std::vector<Generator> gens, int dmax) : gens_(std::move(gens)), dmax_(dmax) {
    if (dmax_ < 0) throw InvalidArgumentError("truncation degree must be nonnegative");
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      if (gens_[i].degree < 1)
        throw InvalidArgumentError("generator degrees must be positive");
      if (gens_[i].name.empty()) throw InvalidArgumentError("generator needs a name");
      for (std::size_t j = 0; j < i; ++j)
        if (gens_[j].name == gens_[i].name)
          throw InvalidArgumentError("duplicate generator name: " + gens_[i].name);
    }
  }

  int dmax() const { return dmax_; }
  int size() const { return static_cast<int>(gens_.size()); }
  const std::vector<Generator>& generators() const { return gens_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < gens_.size(); ++i)
      if (gens_[i].name == name) return static_cast<int>(i);
    throw InvalidArgumentError("unknown generator: " + name);
  }

  int degree_of(const std::vector<int>& expo) const {
    int d = 0;
    for (std::size_t i = 0; i < gens_.size(); ++i) d += expo[i] * gens_[i].degree;
    return d;
  }

  int odd_factor_count(const std::vector<int>& expo) const {
    int c = 0;
    for (std::size_t i = 0; i < gens_.size(); ++i)
      if (gens_[i].degree % 2 == 1) c += expo[i];
    return c;
  }

  // Canonical display form, also the integrator table key: "u1^2*dtheta",
  // constant monomial prints as "1".
  std::string monomial_name(const std::vector<int>& expo) const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      if (expo[i] == 0) continue;
      if (!first) os << "*";
      os << gens_[i].name;
      if (expo[i] > 1) os << "^" << expo[i];
      first = false;
    }
    return first ? "1" : os.str();
  }

  friend bool operator==(const SeriesRing& a, const SeriesRing& b) {
    if (a.dmax_ != b.dmax_ || a.gens_.size() != b.gens_.size()) return false;
    for (std::size_t i = 0; i < a.gens_.size(); ++i)
      if (a.gens_[i].name != b.gens_[i].name || a.gens_[i].degree != b.gens_[i].degree)
        return false;
    return true;
  }
  friend bool operator!=(const SeriesRing& a, const SeriesRing& b) { return !(a == b); }

 private:
  std::vector<Generator> gens_;
  int dmax_ = 0;
};

template <typename Coeff>
class FormSeries {
 public:
  FormSeries() = default;
  explicit FormSeries(SeriesRing ring) : ring_(std::move(ring)) {}

  static FormSeries constant(const SeriesRing& ring, Coeff c) {
    FormSeries s(ring);
    s.add_term(std::vector<int>(ring.size(), 0), std::move(c));
    return s;
  }

  static FormSeries generator(const SeriesRing& ring, const std::string& name) {
    FormSeries s(ring);
    std::vector<int> expo(ring.size(), 0);
    expo[ring.index_of(name)] = 1;
    s.add_term(std::move(expo), Coeff(1));
    return s;
  }

  const SeriesRing& ring() const { return ring_; }
  const std::map<std::vector<int>, Coeff>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Accumulates a term, applying the ring quotient: monomials above the
  // truncation degree or with two odd factors are zero by definition.
  void add_term(std::vector<int> expo, Coeff c) {
    if (static_cast<int>(expo.size()) != ring_.size())
      throw InvalidArgumentError("exponent vector does not match the ring");
    for (int e : expo)
      if (e < 0) throw InvalidArgumentError("negative exponent");
    if (ring_.degree_of(expo) > ring_.dmax()) return;
    if (ring_.odd_factor_count(expo) > 1) return;
    auto it = terms_.find(expo);
    if (it == terms_.end()) {
      if (!(c == Coeff(0))) terms_.emplace(std::move(expo), std::move(c));
      return;
    }
    it->second += c;
    if (it->second == Coeff(0)) terms_.erase(it);
  }

  Coeff coefficient(const std::vector<int>& expo) const {
    auto it = terms_.find(expo);
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  Coeff constant_term() const { return coefficient(std::vector<int>(ring_.size(), 0)); }

  friend FormSeries operator+(const FormSeries& a, const FormSeries& b) {
    a.require_same_ring(b);
    FormSeries out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, c);
    return out;
  }

  friend FormSeries operator-(const FormSeries& a, const FormSeries& b) {
    a.require_same_ring(b);
    FormSeries out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, Coeff(0) - c);
    return out;
  }

  FormSeries operator-() const {
    FormSeries out(ring_);
    for (const auto& [e, c] : terms_) out.add_term(e, Coeff(0) - c);
    return out;
  }

  friend bool operator==(const FormSeries& a, const FormSeries& b) {
    return a.ring_ == b.ring_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const FormSeries& a, const FormSeries& b) { return !(a == b); }

  friend FormSeries operator*(const Coeff& s, const FormSeries& a) {
    FormSeries out(a.ring_);
    for (const auto& [e, c] : a.terms_) out.add_term(e, s * c);
    return out;
  }

  friend FormSeries operator*(const FormSeries& a, const FormSeries& b) {
    a.require_same_ring(b);
    FormSeries out(a.ring_);
    std::vector<int> expo(a.ring_.size(), 0);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < expo.size(); ++i) expo[i] = ea[i] + eb[i];
        out.add_term(expo, ca * cb);
      }
    return out;
  }

  // Multiplicative inverse of a unit: (c + N)^{-1} = c^{-1} sum (-N/c)^j,
  // with N nilpotent by truncation.
  FormSeries inverted() const {
    Coeff c0 = constant_term();
    if (c0 == Coeff(0))
      throw InvalidArgumentError("series with zero constant term has no inverse");
    FormSeries nil = *this;
    std::vector<int> zero(ring_.size(), 0);
    nil.add_term(zero, Coeff(0) - c0);

    FormSeries out = constant(ring_, Coeff(1) / c0);
    FormSeries power = constant(ring_, Coeff(1));
    Coeff sign_over_c(1);
    for (int j = 1; j <= ring_.dmax() && !nil.is_zero(); ++j) {
      power = power * nil;
      if (power.is_zero()) break;
      sign_over_c = (Coeff(0) - sign_over_c) / c0;
      out = out + (sign_over_c / c0) * power;
    }
    return out;
  }

  // Monomials of exact degree dmax (the part an integrator consumes).
  FormSeries top_part() const {
    FormSeries out(ring_);
    for (const auto& [e, c] : terms_)
      if (ring_.degree_of(e) == ring_.dmax()) out.add_term(e, c);
    return out;
  }

  template <typename To, typename Fn>
  FormSeries<To> map_coefficients(Fn&& f) const {
    FormSeries<To> out(ring_);
    for (const auto& [e, c] : terms_) out.add_term(e, f(c));
    return out;
  }

 private:
  void require_same_ring(const FormSeries& other) const {
    if (ring_ != other.ring_)
      throw InvalidArgumentError("series live in different rings");
  }

  SeriesRing ring_;
  std::map<std::vector<int>, Coeff> terms_;
};

// sum_j coeffs[j] * x^j for a series x without constant term (so the sum is
// finite under truncation).
template <typename Coeff>
FormSeries<Coeff> compose_univariate(const std::vector<Coeff>& coeffs,
                                     const FormSeries<Coeff>& x) {
  if (!(x.constant_term() == Coeff(0)))
    throw InvalidArgumentError("composition argument must have zero constant term");
  FormSeries<Coeff> out(x.ring());
  for (std::size_t j = coeffs.size(); j-- > 0;) {
    out = out * x;
    std::vector<int> zero(x.ring().size(), 0);
    out.add_term(zero, coeffs[j]);
  }
  return out;
}

}  // namespace spinflow
