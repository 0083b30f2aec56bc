#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "spinflow/equispec.hpp"
#include "spinflow/errors.hpp"
#include "spinflow/specflow.hpp"

// Truncated equivariant eta invariants and the heat one-form along operator
// paths. For a finite Hermitian matrix the t-integral collapses to a closed
// form per eigenvalue, sum_{lambda != 0} chi(h) sign(lambda) erfc(sqrt(eps)
// |lambda|), which is exact; numeric quadrature of the t-integral survives
// only as a test oracle.
//
// Sign convention: alpha is normalized so that along any Hermitian path
// d/du eta_eps(D_u) = 2 alpha(D_u, dD/du) away from kernel crossings; each
// eigenvalue contributes d/du [sign erfc] = -2 sqrt(eps/pi) e^{-eps lambda^2}
// lambda-dot, which forces the leading minus below. With this normalization
// the path integral of alpha reproduces the index and the spectral flow
// enters with the opposite sign.

namespace spinflow {

struct EtaContext {
  Eigen::MatrixXcd D;
  GroupAction action;
  int h_power = 0;
  double epsilon = 1.0;
};

namespace detail {

inline double real_checked(cplx z, const char* what) {
  if (std::abs(z.imag()) > 1e-8)
    throw EquivarianceError(std::string(what) + " has a non-real value");
  return z.real();
}

// Compensated accumulation keeps quadrature sums independent of magnitude
// spread across nodes.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

// eta_eps(h; D) = sum over spectral points with lambda != 0 of
// chi_h(multiplicity) * sign(lambda) * erfc(sqrt(eps) |lambda|).
inline double eta_truncated(const EtaContext& ctx) {
  if (!(ctx.epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  IsotypicSpectrum spec = equivariant_eigendecompose(ctx.D, ctx.action);
  double scale = 1.0;
  for (const auto& pt : spec.points) scale = std::max(scale, std::abs(pt.lambda));
  double ztol = 1e-10 * scale;
  double root_eps = std::sqrt(ctx.epsilon);
  cplx value = spec.weighted_character_sum(ctx.h_power, [&](double lam) {
    if (std::abs(lam) <= ztol) return 0.0;
    return (lam > 0 ? 1.0 : -1.0) * std::erfc(root_eps * std::abs(lam));
  });
  return detail::real_checked(value, "truncated eta");
}

// Degenerate eps -> 0 limit for finite matrices: the character-weighted
// signature sum over nonzero eigenvalues.
inline double eta_limit(const Eigen::MatrixXcd& D, const GroupAction& action, int h_power) {
  IsotypicSpectrum spec = equivariant_eigendecompose(D, action);
  double scale = 1.0;
  for (const auto& pt : spec.points) scale = std::max(scale, std::abs(pt.lambda));
  double ztol = 1e-10 * scale;
  cplx value = spec.weighted_character_sum(h_power, [&](double lam) {
    if (std::abs(lam) <= ztol) return 0.0;
    return lam > 0 ? 1.0 : -1.0;
  });
  return detail::real_checked(value, "eta limit");
}

namespace detail {

// Tr(U^h X e^{-eps D^2}) with full input validation; the caller decides how
// to treat a nonzero imaginary part.
inline cplx heat_pairing_trace(const Eigen::MatrixXcd& D, const Eigen::MatrixXcd& X,
                               const GroupAction& action, int h_power, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  if ((D - D.adjoint()).norm() > 1e-9 * std::max(1.0, D.norm()))
    throw InvalidArgumentError("base operator must be Hermitian");
  if ((X - X.adjoint()).norm() > 1e-9 * std::max(1.0, X.norm()))
    throw InvalidArgumentError("perturbation must be Hermitian");
  check_equivariant(D, action, "base operator");
  check_equivariant(X, action, "perturbation");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
  Eigen::VectorXd decay = (-epsilon * es.eigenvalues().array().square()).exp();
  Eigen::MatrixXcd heat =
      es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().adjoint();
  return (action.power(h_power) * X * heat).trace();
}

}  // namespace detail

// alpha_{eps,h}(D, X) = -sqrt(eps/pi) Tr(U^h X e^{-eps D^2}).
inline double alpha_form(const Eigen::MatrixXcd& D, const Eigen::MatrixXcd& X,
                         const GroupAction& action, int h_power, double epsilon) {
  cplx tr = detail::heat_pairing_trace(D, X, action, h_power, epsilon);
  return -std::sqrt(epsilon / kPi) * detail::real_checked(tr, "heat trace");
}

// Central difference of eta_eps along D + tX at t = 0 paired with the
// closed-form 2*alpha; the two must agree wherever no kernel crossing sits
// inside the differencing window.
inline std::pair<double, double> variation_check(const Eigen::MatrixXcd& D,
                                                 const Eigen::MatrixXcd& X,
                                                 const GroupAction& action, int h_power,
                                                 double epsilon, double step) {
  if (!(step > 0.0)) throw InvalidArgumentError("difference step must be positive");
  EtaContext plus{D + step * X, action, h_power, epsilon};
  EtaContext minus{D - step * X, action, h_power, epsilon};
  double fd = (eta_truncated(plus) - eta_truncated(minus)) / (2.0 * step);
  return {fd, 2.0 * alpha_form(D, X, action, h_power, epsilon)};
}

namespace detail {

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on the
// Legendre recurrence.
inline void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
      }
      deriv = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / deriv;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    double wi = 2.0 / ((1.0 - z * z) * deriv * deriv);
    w[i] = 0.5 * wi;
    w[n - 1 - i] = 0.5 * wi;
  }
}

}  // namespace detail

// Integral of alpha along the family, int_0^1 alpha(D_u, dD/du) du, by
// Gauss-Legendre quadrature with order doubling until two consecutive
// orders agree within 1e-4. For index paths the value lands on the
// character trace of the equivariant index at h.
inline double heat_index_integral(const OperatorFamily& fam, int h_power, double epsilon,
                                  int quadrature_order = 32) {
  validate_family(fam);
  if (!fam.refiner || !fam.velocity)
    throw InvalidArgumentError("path integral needs refiner and velocity callbacks");
  if (quadrature_order < 2) throw InvalidArgumentError("quadrature order must be at least 2");

  // The per-node traces are accumulated as complex numbers: for characters
  // of order > 2 the integrand picks up a sector-leakage term that is
  // exponentially small in 1/epsilon yet can sit above the strict realness
  // threshold in the middle of the admissible epsilon window. The leakage
  // telescopes away under the u-integral, so realness is enforced on the
  // integral, not node by node.
  cplx prev{std::numeric_limits<double>::quiet_NaN(), 0.0};
  std::vector<double> x, w;
  for (int order = quadrature_order; order <= 512; order *= 2) {
    detail::gauss_legendre_01(order, x, w);
    detail::KahanSum re, im;
    for (int i = 0; i < order; ++i) {
      cplx tr = detail::heat_pairing_trace(fam.refiner(x[i]), fam.velocity(x[i]),
                                           fam.action, h_power, epsilon);
      re.add(w[i] * tr.real());
      im.add(w[i] * tr.imag());
    }
    cplx cur = -std::sqrt(epsilon / kPi) * cplx(re.sum, im.sum);
    if (std::isfinite(prev.real()) && std::abs(cur - prev) < 1e-4)
      return detail::real_checked(cur, "heat path integral");
    prev = cur;
  }
  throw ConvergenceError("heat quadrature did not stabilize under order doubling");
}

// The path integral for every pairing of the given group powers and heat
// times in one pass. Numerically identical to calling heat_index_integral
// per pair (same nodes, same stopping rule applied uniformly across the
// grid) but each node's eigendecomposition -- the dominant cost -- is shared:
// with V diagonalizing D_u, Tr(U^h X e^{-eps D_u^2}) reduces to the diagonal
// of V* U^h X V contracted against exp(-eps lambda_i^2), so extra grid
// entries cost one matrix product (per h) and one O(dim) contraction (per
// eps) instead of a fresh O(dim^3) solve.
struct HeatGridResult {
  std::vector<int> h_powers;
  std::vector<double> epsilons;
  std::vector<std::vector<double>> values;  // values[i][j]: h_powers[i], epsilons[j]
  int quadrature_order = 0;                 // order at which the grid stabilized
};

inline HeatGridResult heat_index_integral_grid(const OperatorFamily& fam,
                                               const std::vector<int>& h_powers,
                                               const std::vector<double>& epsilons,
                                               int quadrature_order = 32) {
  validate_family(fam);
  if (!fam.refiner || !fam.velocity)
    throw InvalidArgumentError("path integral needs refiner and velocity callbacks");
  if (quadrature_order < 2) throw InvalidArgumentError("quadrature order must be at least 2");
  if (h_powers.empty() || epsilons.empty())
    throw InvalidArgumentError("heat grid needs at least one group power and one epsilon");
  for (double eps : epsilons)
    if (!(eps > 0.0)) throw InvalidArgumentError("epsilon must be positive");

  const std::size_t H = h_powers.size();
  const std::size_t E = epsilons.size();
  std::vector<Eigen::MatrixXcd> u_pow;
  u_pow.reserve(H);
  for (int h : h_powers) u_pow.push_back(fam.action.power(h));

  std::vector<std::vector<cplx>> prev;
  std::vector<double> x, w;
  for (int order = quadrature_order; order <= 512; order *= 2) {
    detail::gauss_legendre_01(order, x, w);
    std::vector<std::vector<detail::KahanSum>> re(H, std::vector<detail::KahanSum>(E));
    std::vector<std::vector<detail::KahanSum>> im(H, std::vector<detail::KahanSum>(E));
    for (int i = 0; i < order; ++i) {
      Eigen::MatrixXcd D = fam.refiner(x[i]);
      Eigen::MatrixXcd X = fam.velocity(x[i]);
      if ((D - D.adjoint()).norm() > 1e-9 * std::max(1.0, D.norm()))
        throw InvalidArgumentError("base operator must be Hermitian");
      if ((X - X.adjoint()).norm() > 1e-9 * std::max(1.0, X.norm()))
        throw InvalidArgumentError("perturbation must be Hermitian");
      check_equivariant(D, fam.action, "base operator");
      check_equivariant(X, fam.action, "perturbation");

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
      const Eigen::MatrixXcd& V = es.eigenvectors();
      Eigen::ArrayXd lam2 = es.eigenvalues().array().square();
      Eigen::MatrixXcd XV = X * V;
      std::vector<Eigen::ArrayXd> decay(E);
      for (std::size_t b = 0; b < E; ++b) decay[b] = (-epsilons[b] * lam2).exp();
      for (std::size_t a = 0; a < H; ++a) {
        Eigen::MatrixXcd W = u_pow[a] * XV;
        // Tr(U^h X e^{-eps D^2}) = sum_c (V* W)_{cc} e^{-eps lambda_c^2}
        Eigen::VectorXcd diag(V.cols());
        for (Eigen::Index c = 0; c < V.cols(); ++c) diag[c] = V.col(c).dot(W.col(c));
        for (std::size_t b = 0; b < E; ++b) {
          cplx t = 0.0;
          for (Eigen::Index c = 0; c < V.cols(); ++c) t += diag[c] * decay[b][c];
          re[a][b].add(w[i] * t.real());
          im[a][b].add(w[i] * t.imag());
        }
      }
    }
    std::vector<std::vector<cplx>> cur(H, std::vector<cplx>(E));
    for (std::size_t a = 0; a < H; ++a)
      for (std::size_t b = 0; b < E; ++b)
        cur[a][b] = -std::sqrt(epsilons[b] / kPi) * cplx(re[a][b].sum, im[a][b].sum);

    bool stable = !prev.empty();
    for (std::size_t a = 0; stable && a < H; ++a)
      for (std::size_t b = 0; stable && b < E; ++b)
        if (!(std::abs(cur[a][b] - prev[a][b]) < 1e-4)) stable = false;
    if (stable) {
      HeatGridResult out;
      out.h_powers = h_powers;
      out.epsilons = epsilons;
      out.quadrature_order = order;
      out.values.assign(H, std::vector<double>(E, 0.0));
      for (std::size_t a = 0; a < H; ++a)
        for (std::size_t b = 0; b < E; ++b)
          out.values[a][b] = detail::real_checked(cur[a][b], "heat path integral");
      return out;
    }
    prev = std::move(cur);
  }
  throw ConvergenceError("heat quadrature did not stabilize under order doubling");
}

}  // namespace spinflow
