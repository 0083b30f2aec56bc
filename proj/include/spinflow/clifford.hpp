#pragma once

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "spinflow/errors.hpp"

// Odd complex Clifford algebra C(n), n = 2m+1, with the convention
//
//   c_i c_j + c_j c_i = -2 delta_ij,
//
// its 2^m-dimensional spin representation (chirality normalized to +Id),
// the symbol map into the exterior algebra Lambda C^n, and the super-trace
// formula that reads the spin trace of a non-scalar element off the
// top-degree coefficient of sigma(a) applied to the vacuum.

namespace spinflow {

using cplx = std::complex<double>;

// Element of C(n): sparse map from generator subsets (bitmask, bit i-1 for
// c_i, factors in ascending index order) to complex coefficients.
class CliffordElement {
 public:
  explicit CliffordElement(int n) : n_(n) {}

  int n() const { return n_; }
  const std::map<std::uint32_t, cplx>& terms() const { return terms_; }

  cplx coefficient(std::uint32_t mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  void add_term(std::uint32_t mask, cplx coeff) {
    if (mask >= (1u << n_)) throw InvalidArgumentError("generator index outside algebra");
    cplx c = (terms_[mask] += coeff);
    if (std::abs(c) == 0.0) terms_.erase(mask);
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [mask, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  // True when the empty-subset coefficient is negligible next to the rest.
  bool has_zero_scalar_part() const {
    return std::abs(coefficient(0)) <= 1e-12 * (1.0 + max_abs_coeff());
  }

  friend CliffordElement operator+(const CliffordElement& a, const CliffordElement& b) {
    check_same(a, b);
    CliffordElement r = a;
    for (const auto& [mask, c] : b.terms_) r.add_term(mask, c);
    return r;
  }

  friend CliffordElement operator-(const CliffordElement& a, const CliffordElement& b) {
    check_same(a, b);
    CliffordElement r = a;
    for (const auto& [mask, c] : b.terms_) r.add_term(mask, -c);
    return r;
  }

  friend CliffordElement operator*(cplx s, const CliffordElement& a) {
    CliffordElement r(a.n_);
    if (std::abs(s) == 0.0) return r;
    for (const auto& [mask, c] : a.terms_) r.terms_[mask] = s * c;
    return r;
  }

  // Product in C(n). Reordering sign: one transposition per pair i in `a`,
  // j in `b` with i > j; each repeated generator contributes c_i^2 = -1.
  friend CliffordElement operator*(const CliffordElement& a, const CliffordElement& b) {
    check_same(a, b);
    CliffordElement r(a.n_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        int swaps = 0;
        std::uint32_t hi = ma >> 1;  // bits of `a` strictly above each bit of `b`
        while (hi != 0) {
          swaps += std::popcount(hi & mb);
          hi >>= 1;
        }
        int contractions = std::popcount(ma & mb);
        double sign = ((swaps + contractions) % 2 == 0) ? 1.0 : -1.0;
        r.add_term(ma ^ mb, sign * ca * cb);
      }
    }
    return r;
  }

  bool approx_equal(const CliffordElement& other, double tol) const {
    check_same(*this, other);
    for (std::uint32_t mask = 0; mask < (1u << n_); ++mask)
      if (std::abs(coefficient(mask) - other.coefficient(mask)) > tol) return false;
    return true;
  }

 private:
  static void check_same(const CliffordElement& a, const CliffordElement& b) {
    if (a.n_ != b.n_) throw InvalidArgumentError("elements from different Clifford algebras");
  }

  int n_;
  std::map<std::uint32_t, cplx> terms_;
};

inline CliffordElement clifford_generator(int n, int i) {
  if (i < 1 || i > n) throw InvalidArgumentError("generator index out of range");
  CliffordElement e(n);
  e.add_term(1u << (i - 1), 1.0);
  return e;
}

inline CliffordElement clifford_scalar(int n, cplx s) {
  CliffordElement e(n);
  e.add_term(0, s);
  return e;
}

// C(n) together with its concrete spin representation.
class CliffordAlgebra {
 public:
  explicit CliffordAlgebra(int n) : n_(n) {
    if (n < 3 || n > 11 || n % 2 == 0)
      throw InvalidArgumentError("Clifford rank must be odd and within [3, 11]");
    m_ = (n - 1) / 2;
    build_generator_reps();
  }

  int n() const { return n_; }
  int m() const { return m_; }
  int spin_dim() const { return 1 << m_; }
  int exterior_dim() const { return 1 << n_; }

  const Eigen::MatrixXcd& generator_rep(int i) const {
    if (i < 1 || i > n_) throw InvalidArgumentError("generator index out of range");
    return gen_[i - 1];
  }

  // Matrix of an element in the spin representation.
  Eigen::MatrixXcd spin_rep(const CliffordElement& a) const {
    check_element(a);
    int d = spin_dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& [mask, c] : a.terms()) {
      Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(d, d);
      for (int i = 0; i < n_; ++i)
        if (mask & (1u << i)) prod = prod * gen_[i];
      out += c * prod;
    }
    return out;
  }

  // sigma(c_i) = e_i wedge - iota(e_i); applied to a vector over the
  // subset-indexed basis of Lambda C^n.
  Eigen::VectorXcd symbol_apply(const CliffordElement& a, const Eigen::VectorXcd& v) const {
    check_element(a);
    if (v.size() != exterior_dim())
      throw InvalidArgumentError("vector dimension does not match exterior algebra");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (const auto& [mask, c] : a.terms()) {
      Eigen::VectorXcd w = v;
      // Monomial factors act right-to-left: highest generator index first.
      for (int i = n_ - 1; i >= 0; --i)
        if (mask & (1u << i)) w = apply_generator_symbol(i + 1, w);
      out += c * w;
    }
    return out;
  }

  // Full matrix of the symbol on Lambda C^n (2^n x 2^n; use sparingly).
  Eigen::MatrixXcd symbol(const CliffordElement& a) const {
    int d = exterior_dim();
    Eigen::MatrixXcd out(d, d);
    Eigen::VectorXcd basis = Eigen::VectorXcd::Zero(d);
    for (int col = 0; col < d; ++col) {
      basis.setZero();
      basis[col] = 1.0;
      out.col(col) = symbol_apply(a, basis);
    }
    return out;
  }

  // Spin trace of a non-scalar element through the symbol:
  //   Tr_S(a) = -sqrt(-1) * (-2 sqrt(-1))^m * (sigma(a) 1)_[top].
  // The orientation of the top form (ascending e_1 ^ ... ^ e_n) is fixed by
  // cross-checking against the direct matrix trace; see the test suite.
  cplx trace_spin_via_symbol(const CliffordElement& a) const {
    check_element(a);
    if (!a.has_zero_scalar_part())
      throw InvalidArgumentError("trace formula requires a vanishing scalar part");
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(exterior_dim());
    vac[0] = 1.0;
    Eigen::VectorXcd img = symbol_apply(a, vac);
    cplx top = img[exterior_dim() - 1];
    cplx factor = -cplx(0.0, 1.0) * std::pow(cplx(0.0, -2.0), m_);
    return factor * top;
  }

 private:
  void check_element(const CliffordElement& a) const {
    if (a.n() != n_) throw InvalidArgumentError("element does not belong to this algebra");
  }

  static Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j)
        out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
  }

  void build_generator_reps() {
    Eigen::MatrixXcd s1(2, 2), s2(2, 2), s3(2, 2), id2 = Eigen::MatrixXcd::Identity(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, cplx(0, -1), cplx(0, 1), 0;
    s3 << 1, 0, 0, -1;

    // Hermitian anticommuting involutions gamma_i on 2^m dimensions:
    //   gamma_{2k+1} = s3^k (x) s1 (x) 1,  gamma_{2k+2} = s3^k (x) s2 (x) 1,
    //   gamma_n = s3^m;  then c_i = sqrt(-1) gamma_i squares to -1.
    auto chain = [&](int k, const Eigen::MatrixXcd& mid) {
      Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
      for (int t = 0; t < k; ++t) out = kron(out, s3);
      out = kron(out, mid);
      for (int t = k + 1; t < m_; ++t) out = kron(out, id2);
      return out;
    };

    gen_.clear();
    for (int k = 0; k < m_; ++k) {
      gen_.push_back(cplx(0, 1) * chain(k, s1));
      gen_.push_back(cplx(0, 1) * chain(k, s2));
    }
    Eigen::MatrixXcd last = Eigen::MatrixXcd::Identity(1, 1);
    for (int t = 0; t < m_; ++t) last = kron(last, s3);
    gen_.push_back(cplx(0, 1) * last);

    // Normalize chirality: sqrt(-1)^{m+1} c_1 ... c_n must represent as +Id.
    // The construction can land on -Id; flipping one generator's sign flips it.
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(spin_dim(), spin_dim());
    for (const auto& g : gen_) prod = prod * g;
    cplx gamma = std::pow(cplx(0, 1), m_ + 1) * prod(0, 0);
    if (std::abs(gamma + 1.0) < 1e-9) {
      gen_.back() = -gen_.back();
      prod = Eigen::MatrixXcd::Identity(spin_dim(), spin_dim());
      for (const auto& g : gen_) prod = prod * g;
      gamma = std::pow(cplx(0, 1), m_ + 1) * prod(0, 0);
    }
    Eigen::MatrixXcd chir = std::pow(cplx(0, 1), m_ + 1) * prod;
    if (!chir.isApprox(Eigen::MatrixXcd::Identity(spin_dim(), spin_dim()), 1e-10))
      throw Error("chirality failed to normalize to the identity");
  }

  // sigma(c_i) on a subset-basis vector: wedge minus contraction, with the
  // usual (-1)^{#{j in T : j < i}} position sign for both.
  Eigen::VectorXcd apply_generator_symbol(int i, const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    std::uint32_t bit = 1u << (i - 1);
    std::uint32_t below = bit - 1;
    for (std::uint32_t T = 0; T < static_cast<std::uint32_t>(v.size()); ++T) {
      cplx c = v[T];
      if (c == 0.0) continue;
      double sign = (std::popcount(T & below) % 2 == 0) ? 1.0 : -1.0;
      if (T & bit)
        out[T ^ bit] -= sign * c;  // contraction term, with its minus sign
      else
        out[T | bit] += sign * c;  // wedge term
    }
    return out;
  }

  int n_;
  int m_;
  std::vector<Eigen::MatrixXcd> gen_;
};

}  // namespace spinflow
