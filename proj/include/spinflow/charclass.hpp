#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "spinflow/errors.hpp"
#include "spinflow/rational.hpp"
#include "spinflow/series.hpp"

// Characteristic-class side of the fixed-point computation: exact-rational
// A-hat series, odd Chern character coefficients, Pfaffians of antisymmetric
// series matrices, and the localized density attached to one fixed component.
// Coefficients stay rational until a numeric evaluation is unavoidable.

namespace spinflow {

using cplx = std::complex<double>;

// Calibration constants for the density prefactor, which is
// kLefschetzKappa^{(k+1)/2} together with one factor of kNormalBlockPhase per
// normal 2-plane (k = dimension of the fixed component). The pair is pinned
// by one requirement: for the full circle (k = 1, no normal planes) the
// density ch(g) = ik dtheta must integrate to the Toeplitz index of g, i.e.
// to minus the winding number. That forces kappa = +i/(2 pi); the block
// phase -i is then the unique choice making the product-over-planes form of
// the density and its Pfaffian form agree (see the equivalence test).
inline const cplx kLefschetzKappa{0.0, 1.0 / (2.0 * std::numbers::pi)};
inline const cplx kNormalBlockPhase{0.0, -1.0};

namespace detail {

inline cplx ipow(cplx base, int n) {
  cplx out{1.0, 0.0};
  for (int i = 0; i < n; ++i) out *= base;
  return out;
}

}  // namespace detail

// Coefficients A_j of x^{2j} in (x/2)/sin(x/2), obtained by exactly inverting
// sin(x/2)/(x/2) = sum_j (-1)^j x^{2j} / (4^j (2j+1)!). The leading values are
// 1, 1/24, 7/5760, 31/967680, 127/154828800.
inline std::vector<Rational> ahat_series_coefficients(int max_power) {
  if (max_power < 0) throw InvalidArgumentError("max_power must be nonnegative");
  std::vector<Rational> h(max_power + 1);
  Rational pow4(1);
  for (int j = 0; j <= max_power; ++j) {
    h[j] = Rational(j % 2 == 0 ? 1 : -1) / (pow4 * Rational::factorial(2 * j + 1));
    pow4 = pow4 * Rational(4);
  }
  std::vector<Rational> a(max_power + 1);
  a[0] = Rational(1);
  for (int n = 1; n <= max_power; ++n) {
    Rational acc(0);
    for (int k = 1; k <= n; ++k) acc = acc + h[k] * a[n - k];
    a[n] = -acc;
  }
  return a;
}

// Product over Chern roots of the even series sum_j A_j r^{2j}. Empty root
// list gives the constant series 1.
inline FormSeries<Rational> ahat_factor(const SeriesRing& ring,
                                        const std::vector<std::string>& roots) {
  FormSeries<Rational> out = FormSeries<Rational>::constant(ring, Rational(1));
  for (const auto& name : roots) {
    const Generator& gen = ring.generators()[ring.index_of(name)];
    if (gen.degree % 2 != 0)
      throw InvalidArgumentError("Chern root " + name + " must have even degree");
    int max_j = ring.dmax() / (2 * gen.degree);
    std::vector<Rational> coeffs = ahat_series_coefficients(max_j);
    auto r = FormSeries<Rational>::generator(ring, name);
    out = out * compose_univariate(coeffs, r * r);
  }
  return out;
}

// c_j = j!/(2j+1)!, the exact value of the Beta integral
// integral_0^1 (u(1-u))^j du = (j!)^2/(2j+1)! divided by j!.
inline Rational odd_chern_coefficient(int j) {
  if (j < 0) throw InvalidArgumentError("odd Chern index must be nonnegative");
  return Rational::factorial(j) / Rational::factorial(2 * j + 1);
}

// Assembles sum_j c_j T_j from supplied odd trace data T_j (the series
// standing for Tr((g^{-1}dg)^{2j+1})).
inline FormSeries<cplx> odd_chern_character(
    const std::map<int, FormSeries<cplx>>& traces) {
  if (traces.empty())
    throw InvalidArgumentError("odd Chern character needs at least one trace term");
  FormSeries<cplx> out(traces.begin()->second.ring());
  for (const auto& [j, series] : traces) {
    cplx c(odd_chern_coefficient(j).to_double(), 0.0);
    out = out + c * series;
  }
  return out;
}

namespace detail {

template <typename Coeff>
FormSeries<Coeff> pfaffian_matching_sum(
    const std::vector<std::vector<FormSeries<Coeff>>>& a,
    const std::vector<int>& active) {
  const SeriesRing& ring = a[0][0].ring();
  if (active.empty()) return FormSeries<Coeff>::constant(ring, Coeff(1));
  FormSeries<Coeff> acc(ring);
  for (std::size_t k = 1; k < active.size(); ++k) {
    std::vector<int> rest;
    rest.reserve(active.size() - 2);
    for (std::size_t t = 1; t < active.size(); ++t)
      if (t != k) rest.push_back(active[t]);
    auto term = a[active[0]][active[k]] * pfaffian_matching_sum(a, rest);
    // Pairing the lowest active index with the k-th remaining one skips k-1
    // indices, contributing the sign (-1)^{k-1} of the matching permutation.
    acc = (k % 2 == 1) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace detail

// Pfaffian of an antisymmetric series matrix as the signed sum over perfect
// matchings (practical for sizes up to 8).
template <typename Coeff>
FormSeries<Coeff> pfaffian(const std::vector<std::vector<FormSeries<Coeff>>>& a) {
  const std::size_t n = a.size();
  if (n == 0) throw InvalidArgumentError("pfaffian needs a nonempty matrix");
  if (n % 2 != 0) throw InvalidArgumentError("pfaffian needs even size");
  for (const auto& row : a)
    if (row.size() != n) throw InvalidArgumentError("pfaffian needs a square matrix");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (!(a[i][j] + a[j][i]).is_zero())
        throw InvalidArgumentError("pfaffian needs an antisymmetric matrix");
  std::vector<int> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = static_cast<int>(i);
  return detail::pfaffian_matching_sum(a, active);
}

// One fixed component of the isometry: an odd-dimensional piece F with
// rotation angles on the normal 2-planes, formal Chern roots for the tangent
// and normal curvatures, the restricted odd Chern character, and a table of
// characteristic numbers that stands in for integration over F. Keys of the
// integrator table are canonical monomial names as produced by
// SeriesRing::monomial_name.
struct FixedPointData {
  int dim_f = 1;
  std::vector<double> angles;
  std::vector<std::string> f_roots;
  std::vector<std::string> nu_roots;
  SeriesRing ring;
  FormSeries<cplx> chern_character;
  std::map<std::string, cplx> integrator;
};

namespace detail {

inline double angle_mod_two_pi(double theta) {
  double r = std::remainder(theta, 2.0 * std::numbers::pi);
  return std::abs(r);
}

}  // namespace detail

inline void validate_component(const FixedPointData& data) {
  if (data.dim_f < 1 || data.dim_f % 2 == 0)
    throw InvalidArgumentError("fixed component dimension must be odd and positive");
  if (data.ring.dmax() != data.dim_f)
    throw InvalidArgumentError("ring truncation degree must equal the component dimension");
  if (static_cast<int>(data.f_roots.size()) != (data.dim_f - 1) / 2)
    throw InvalidArgumentError("tangent root count must be (dim-1)/2");
  if (data.nu_roots.size() != data.angles.size())
    throw InvalidArgumentError("need one normal root per rotation angle");
  for (const auto& name : data.f_roots)
    if (data.ring.generators()[data.ring.index_of(name)].degree != 2)
      throw InvalidArgumentError("tangent root " + name + " must have degree 2");
  for (const auto& name : data.nu_roots)
    if (data.ring.generators()[data.ring.index_of(name)].degree != 2)
      throw InvalidArgumentError("normal root " + name + " must have degree 2");
  for (double theta : data.angles) {
    if (!std::isfinite(theta)) throw InvalidArgumentError("angles must be finite");
    if (detail::angle_mod_two_pi(theta) < 1e-12)
      throw SingularAngleError("rotation angle vanishes modulo 2 pi");
    if (theta <= 0.0 || theta >= 2.0 * std::numbers::pi)
      throw InvalidArgumentError("angles must lie in (0, 2 pi)");
  }
  if (data.chern_character.ring() != data.ring)
    throw InvalidArgumentError("Chern character lives in a different ring");
}

// Product over normal 2-planes of [2 sin((theta_i + v_i)/2)]^{-1}, with the
// sine expanded as a finite Taylor series in the nilpotent curvature root
// v_i. Well defined precisely when no angle is a multiple of 2 pi.
inline FormSeries<cplx> sin_normal_factor(const FixedPointData& data) {
  if (data.nu_roots.size() != data.angles.size())
    throw InvalidArgumentError("need one normal root per rotation angle");
  FormSeries<cplx> out = FormSeries<cplx>::constant(data.ring, cplx(1.0, 0.0));
  for (std::size_t i = 0; i < data.angles.size(); ++i) {
    double theta = data.angles[i];
    if (detail::angle_mod_two_pi(theta) < 1e-12)
      throw SingularAngleError("rotation angle vanishes modulo 2 pi");
    const Generator& gen = data.ring.generators()[data.ring.index_of(data.nu_roots[i])];
    if (gen.degree % 2 != 0)
      throw InvalidArgumentError("normal root " + data.nu_roots[i] + " must have even degree");
    double half = theta / 2.0;
    // Derivatives of sin((theta+v)/2) in v cycle through sin, cos, -sin,
    // -cos of theta/2, each order picking up a factor 1/2.
    const double table[4] = {std::sin(half), std::cos(half), -std::sin(half),
                             -std::cos(half)};
    int max_j = data.ring.dmax() / gen.degree;
    std::vector<cplx> coeffs(max_j + 1);
    double weight = 1.0;
    for (int j = 0; j <= max_j; ++j) {
      coeffs[j] = cplx(table[j % 4] * weight, 0.0);
      weight /= 2.0 * (j + 1);
    }
    auto v = FormSeries<cplx>::generator(data.ring, data.nu_roots[i]);
    auto block = cplx(2.0, 0.0) * compose_univariate(coeffs, v);
    out = out * block.inverted();
  }
  return out;
}

// Contribution of one fixed component: the prefactor times the integrator
// applied to the top-degree part of ch(g) * A-hat(F) * [2 sin]^{-1}.
inline cplx lefschetz_contribution(const FixedPointData& data) {
  validate_component(data);
  const int k = data.dim_f;
  const int s = static_cast<int>(data.angles.size());
  auto ahat = ahat_factor(data.ring, data.f_roots).map_coefficients<cplx>([](const Rational& r) {
    return cplx(r.to_double(), 0.0);
  });
  FormSeries<cplx> density = data.chern_character * ahat * sin_normal_factor(data);
  FormSeries<cplx> top = density.top_part();
  cplx total{0.0, 0.0};
  for (const auto& [expo, c] : top.terms()) {
    std::string name = data.ring.monomial_name(expo);
    auto it = data.integrator.find(name);
    if (it == data.integrator.end())
      throw InvalidArgumentError("integrator value missing for monomial " + name);
    total += c * it->second;
  }
  return detail::ipow(kLefschetzKappa, (k + 1) / 2) * detail::ipow(kNormalBlockPhase, s) *
         total;
}

// Sum over all fixed components; an empty fixed-point set contributes zero.
inline cplx lefschetz_total(const std::vector<FixedPointData>& components) {
  cplx total{0.0, 0.0};
  for (const auto& c : components) total += lefschetz_contribution(c);
  return total;
}

}  // namespace spinflow
