#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "spinflow/errors.hpp"

// Finite cyclic symmetry Z_p acting by a unitary U with U^p = Id, isotypic
// decomposition of commuting Hermitian operators, and character bookkeeping
// for virtual representations. Character j labels the U-eigenvalue
// exp(2 pi i j / p); the generator's character value is chi_j(1) = exp(2 pi i j / p).

namespace spinflow {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Z_p acting on C^d through a unitary matrix U of order p.
struct GroupAction {
  int p = 1;
  Eigen::MatrixXcd U;

  GroupAction() = default;
  GroupAction(int order, Eigen::MatrixXcd u) : p(order), U(std::move(u)) {
    if (p < 1) throw InvalidArgumentError("group order must be positive");
    if (U.rows() != U.cols()) throw InvalidArgumentError("action matrix must be square");
    int d = static_cast<int>(U.rows());
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    if ((U.adjoint() * U - id).norm() > 1e-10 * std::max(1.0, U.norm()))
      throw InvalidArgumentError("action matrix must be unitary");
    Eigen::MatrixXcd up = id;
    for (int k = 0; k < p; ++k) up = up * U;
    if ((up - id).norm() > 1e-8 * std::max(1.0, static_cast<double>(d)))
      throw InvalidArgumentError("action matrix does not have the declared order");
  }

  int dim() const { return static_cast<int>(U.rows()); }

  static GroupAction trivial(int d) {
    GroupAction a;
    a.p = 1;
    a.U = Eigen::MatrixXcd::Identity(d, d);
    return a;
  }

  // U^h for h taken mod p.
  Eigen::MatrixXcd power(int h) const {
    int hh = ((h % p) + p) % p;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(dim(), dim());
    for (int k = 0; k < hh; ++k) out = out * U;
    return out;
  }
};

// Virtual representation of Z_p: integer coefficient per character.
struct RepElement {
  std::vector<long long> coeffs;

  RepElement() = default;
  explicit RepElement(int p) : coeffs(p, 0) {}

  int p() const { return static_cast<int>(coeffs.size()); }
  long long total() const {
    long long t = 0;
    for (long long c : coeffs) t += c;
    return t;
  }

  friend RepElement operator+(const RepElement& a, const RepElement& b) {
    if (a.p() != b.p()) throw InvalidArgumentError("rep elements over different groups");
    RepElement r(a.p());
    for (int j = 0; j < a.p(); ++j) r.coeffs[j] = a.coeffs[j] + b.coeffs[j];
    return r;
  }
  friend RepElement operator-(const RepElement& a, const RepElement& b) {
    if (a.p() != b.p()) throw InvalidArgumentError("rep elements over different groups");
    RepElement r(a.p());
    for (int j = 0; j < a.p(); ++j) r.coeffs[j] = a.coeffs[j] - b.coeffs[j];
    return r;
  }
  RepElement operator-() const {
    RepElement r(p());
    for (int j = 0; j < p(); ++j) r.coeffs[j] = -coeffs[j];
    return r;
  }
  friend bool operator==(const RepElement& a, const RepElement& b) {
    return a.coeffs == b.coeffs;
  }
};

// Tr(h, r) = sum_j r_j exp(2 pi i j h / p) for the group element g^h.
inline cplx character_trace(const RepElement& r, int h_power) {
  cplx t = 0.0;
  int p = r.p();
  for (int j = 0; j < p; ++j) {
    double ang = 2.0 * kPi * static_cast<double>(j) * static_cast<double>(h_power) / p;
    t += static_cast<double>(r.coeffs[j]) * cplx(std::cos(ang), std::sin(ang));
  }
  return t;
}

// Pi_j = (1/p) sum_k conj(chi_j(k)) U^k, the orthogonal projector onto the
// subspace where U acts as exp(2 pi i j / p).
inline std::vector<Eigen::MatrixXcd> isotypic_projectors(const GroupAction& action) {
  int p = action.p;
  int d = action.dim();
  std::vector<Eigen::MatrixXcd> proj(p, Eigen::MatrixXcd::Zero(d, d));
  Eigen::MatrixXcd uk = Eigen::MatrixXcd::Identity(d, d);
  for (int k = 0; k < p; ++k) {
    for (int j = 0; j < p; ++j) {
      double ang = -2.0 * kPi * static_cast<double>(j) * static_cast<double>(k) / p;
      proj[j] += cplx(std::cos(ang), std::sin(ang)) / static_cast<double>(p) * uk;
    }
    uk = uk * action.U;
  }
  return proj;
}

// Orthonormal column bases of the isotypic subspaces, one matrix per
// character (may have zero columns). Extracted from the projector spectra so
// the bases are orthonormal even when U's eigenvalues cluster.
inline std::vector<Eigen::MatrixXcd> isotypic_bases(const GroupAction& action) {
  std::vector<Eigen::MatrixXcd> bases;
  int d = action.dim();
  int total = 0;
  for (const auto& proj : isotypic_projectors(action)) {
    Eigen::MatrixXcd herm = 0.5 * (proj + proj.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    int rank = 0;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > 0.5) ++rank;
    Eigen::MatrixXcd basis(d, rank);
    int col = 0;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > 0.5) basis.col(col++) = es.eigenvectors().col(i);
    bases.push_back(std::move(basis));
    total += rank;
  }
  if (total != d) throw Error("isotypic subspaces do not fill the space");
  return bases;
}

// One merged spectral point: representative eigenvalue and the multiplicity
// of each character among the eigenvectors at that eigenvalue.
struct SpectralPoint {
  double lambda = 0.0;
  RepElement multiplicity;
};

// Spectrum of an equivariant Hermitian operator organized by character.
struct IsotypicSpectrum {
  int p = 1;
  std::vector<SpectralPoint> points;  // ascending in lambda

  long long total_multiplicity() const {
    long long t = 0;
    for (const auto& pt : points) t += pt.multiplicity.total();
    return t;
  }

  // Tr(g^h acting on the eigenspace weighted by f(lambda)).
  cplx weighted_character_sum(int h_power, const std::function<double(double)>& f) const {
    cplx out = 0.0;
    for (const auto& pt : points) out += f(pt.lambda) * character_trace(pt.multiplicity, h_power);
    return out;
  }
};

inline void check_equivariant(const Eigen::MatrixXcd& A, const GroupAction& action,
                              const char* what) {
  if (A.rows() != action.dim() || A.cols() != action.dim())
    throw InvalidArgumentError("operator dimension does not match the action");
  double scale = std::max(1.0, A.norm());
  if ((A * action.U - action.U * A).norm() > 1e-8 * scale)
    throw EquivarianceError(std::string(what) + " does not commute with the group action");
}

// Diagonalize an equivariant Hermitian D per character block and merge
// eigenvalues across blocks. cluster_tol <= 0 selects the default
// 1e-8 * (spectral diameter).
inline IsotypicSpectrum equivariant_eigendecompose(const Eigen::MatrixXcd& D,
                                                   const GroupAction& action,
                                                   double cluster_tol = -1.0) {
  if ((D - D.adjoint()).norm() > 1e-10 * std::max(1.0, D.norm()))
    throw InvalidArgumentError("operator must be Hermitian");
  check_equivariant(D, action, "operator");

  std::vector<std::pair<double, int>> eigs;  // (lambda, character)
  auto bases = isotypic_bases(action);
  for (int j = 0; j < action.p; ++j) {
    if (bases[j].cols() == 0) continue;
    Eigen::MatrixXcd block = bases[j].adjoint() * D * bases[j];
    block = 0.5 * (block + block.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
    for (int i = 0; i < block.rows(); ++i) eigs.emplace_back(es.eigenvalues()[i], j);
  }
  std::sort(eigs.begin(), eigs.end());

  double diameter = eigs.empty() ? 0.0 : eigs.back().first - eigs.front().first;
  double tol = cluster_tol > 0.0 ? cluster_tol : std::max(1e-8 * diameter, 1e-12);

  IsotypicSpectrum spec;
  spec.p = action.p;
  std::size_t i = 0;
  while (i < eigs.size()) {
    std::size_t start = i;
    double sum = 0.0;
    RepElement mult(action.p);
    // grow the cluster while consecutive eigenvalues stay within tol
    while (i < eigs.size() && (i == start || eigs[i].first - eigs[i - 1].first <= tol)) {
      sum += eigs[i].first;
      mult.coeffs[eigs[i].second] += 1;
      ++i;
    }
    spec.points.push_back({sum / static_cast<double>(i - start), mult});
  }
  return spec;
}

}  // namespace spinflow
