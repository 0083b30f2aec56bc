#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "spinflow/equispec.hpp"
#include "spinflow/errors.hpp"
#include "spinflow/specflow.hpp"

// Fourier-truncated circle model: a unitary matrix-valued trigonometric
// polynomial g acting on modes |n| <= Lambda of L^2(S^1) (x) C^N, the Dirac
// operator D = diag(n), the Hardy reflection P = sign(n) with sign(0) = +1,
// Toeplitz compressions, and the equivariant index of T_g = P_+ g P_+ for
// the rotation-by-2pi/p action. Conjugated operators are compressed from
// their exact infinite-matrix entries (g is a polynomial, so each entry is a
// finite sum), never from products of truncations.

namespace spinflow {

// Unitary loop g(theta) = sum_j A_j e^{i j theta} with Fourier support in p*Z.
class MatrixLoop {
 public:
  MatrixLoop(int N, int p, std::map<int, Eigen::MatrixXcd> coeffs)
      : N_(N), p_(p), A_(std::move(coeffs)) {
    if (N_ < 1) throw InvalidArgumentError("loop needs a positive matrix size");
    if (p_ < 1) throw InvalidArgumentError("loop needs a positive symmetry order");
    degree_ = 0;
    for (auto it = A_.begin(); it != A_.end();) {
      if (it->second.rows() != N_ || it->second.cols() != N_)
        throw InvalidArgumentError("loop coefficient has wrong dimensions");
      if (it->second.norm() == 0.0) {
        it = A_.erase(it);
        continue;
      }
      if (it->first % p_ != 0)
        throw EquivarianceError("loop Fourier support must lie in multiples of p");
      degree_ = std::max(degree_, std::abs(it->first));
      ++it;
    }
    check_unitarity();
  }

  int N() const { return N_; }
  int p() const { return p_; }
  int degree() const { return degree_; }
  const std::map<int, Eigen::MatrixXcd>& coefficients() const { return A_; }

  Eigen::MatrixXcd coefficient(int j) const {
    auto it = A_.find(j);
    return it == A_.end() ? Eigen::MatrixXcd::Zero(N_, N_) : it->second;
  }

  Eigen::MatrixXcd eval(double theta) const {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(N_, N_);
    for (const auto& [j, Aj] : A_)
      g += std::exp(cplx(0.0, j * theta)) * Aj;
    return g;
  }

  // Pointwise inverse g(theta)^{-1} = g(theta)^*: coefficients A_{-j}^*.
  MatrixLoop adjoint() const {
    std::map<int, Eigen::MatrixXcd> B;
    for (const auto& [j, Aj] : A_) B[-j] = Aj.adjoint();
    return MatrixLoop(N_, p_, std::move(B));
  }

  // Constant-unitary conjugation V g V^*.
  MatrixLoop conjugated(const Eigen::MatrixXcd& V) const {
    std::map<int, Eigen::MatrixXcd> B;
    for (const auto& [j, Aj] : A_) B[j] = V * Aj * V.adjoint();
    return MatrixLoop(N_, p_, std::move(B));
  }

  // Fourier coefficients of the Hermitian multiplier -i g^{-1} g', i.e.
  // Omega_l with -i g^* g' = sum_l Omega_l e^{i l theta}.
  std::map<int, Eigen::MatrixXcd> log_derivative_coeffs() const {
    std::map<int, Eigen::MatrixXcd> O;
    for (const auto& [j, Aj] : A_) {
      for (const auto& [k, Ak] : A_) {
        int l = j - k;
        auto [it, inserted] = O.try_emplace(l, Eigen::MatrixXcd::Zero(N_, N_));
        it->second += static_cast<double>(j) * Ak.adjoint() * Aj;
      }
    }
    for (auto it = O.begin(); it != O.end();)
      it = (it->second.norm() == 0.0) ? O.erase(it) : std::next(it);
    return O;
  }

  static MatrixLoop scalar_monomial(int k, int p = 1) {
    std::map<int, Eigen::MatrixXcd> A;
    A[k] = Eigen::MatrixXcd::Identity(1, 1);
    return MatrixLoop(1, p, std::move(A));
  }

  static MatrixLoop diagonal(const std::vector<int>& ks, int p = 1) {
    int N = static_cast<int>(ks.size());
    std::map<int, Eigen::MatrixXcd> A;
    for (int b = 0; b < N; ++b) {
      auto [it, inserted] = A.try_emplace(ks[b], Eigen::MatrixXcd::Zero(N, N));
      it->second(b, b) = 1.0;
    }
    return MatrixLoop(N, p, std::move(A));
  }

 private:
  void check_unitarity() const {
    int points = 4 * (degree_ + 1);
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(N_, N_);
    for (int t = 0; t < points; ++t) {
      double theta = 2.0 * kPi * t / points;
      Eigen::MatrixXcd g = eval(theta);
      if ((g.adjoint() * g - id).norm() > 1e-8 * std::max(1.0, std::sqrt(double(N_))))
        throw InvalidArgumentError("loop is not unitary on the sample grid");
    }
  }

  int N_;
  int p_;
  std::map<int, Eigen::MatrixXcd> A_;
  int degree_;
};

// Truncated model on modes -Lambda..Lambda. Row/column layout: mode-major,
// index (n + Lambda) * N + component.
class CircleModel {
 public:
  CircleModel(MatrixLoop loop, int lambda) : loop_(std::move(loop)), lambda_(lambda) {
    int guard = 8 * (loop_.degree() + 1);
    if (lambda_ < guard)
      throw InvalidArgumentError("cutoff too small for the loop degree (needs >= 8(d+1))");
  }

  const MatrixLoop& loop() const { return loop_; }
  int lambda() const { return lambda_; }
  int N() const { return loop_.N(); }
  int p() const { return loop_.p(); }
  int num_modes() const { return 2 * lambda_ + 1; }
  int dim() const { return num_modes() * N(); }

  int character_of_mode(int n) const { return (((-n) % p()) + p()) % p(); }

  // D = diag(n) (x) Id_N: spectrum exactly {-Lambda..Lambda}, multiplicity N.
  Eigen::MatrixXcd dirac() const {
    Eigen::VectorXcd d(dim());
    for (int n = -lambda_; n <= lambda_; ++n)
      for (int b = 0; b < N(); ++b) d[(n + lambda_) * N() + b] = n;
    return d.asDiagonal();
  }

  // P = P_+ - P_-: +1 on modes n >= 0 (the Hardy half includes the zero mode).
  Eigen::MatrixXcd reflection() const {
    Eigen::VectorXcd d(dim());
    for (int n = -lambda_; n <= lambda_; ++n)
      for (int b = 0; b < N(); ++b) d[(n + lambda_) * N() + b] = (n >= 0) ? 1.0 : -1.0;
    return d.asDiagonal();
  }

  // Rotation by 2pi/p: mode e^{i n theta} picks up e^{-2 pi i n / p}.
  GroupAction action() const {
    Eigen::VectorXcd d(dim());
    for (int n = -lambda_; n <= lambda_; ++n) {
      cplx phase = std::exp(cplx(0.0, -2.0 * kPi * n / p()));
      for (int b = 0; b < N(); ++b) d[(n + lambda_) * N() + b] = phase;
    }
    GroupAction a;
    a.p = p();
    a.U = Eigen::MatrixXcd(d.asDiagonal());
    return a;
  }

  // Multiplication by g compressed to the window: banded block Toeplitz.
  Eigen::MatrixXcd multiplication_compression() const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim(), dim());
    for (const auto& [j, Aj] : loop_.coefficients())
      for (int n = -lambda_; n <= lambda_; ++n) {
        int np = n + j;
        if (np < -lambda_ || np > lambda_) continue;
        M.block((np + lambda_) * N(), (n + lambda_) * N(), N(), N()) = Aj;
      }
    return M;
  }

  // T_g = P_+ g P_+ on modes 0..Lambda: square, size (Lambda+1) N.
  Eigen::MatrixXcd toeplitz_compression() const {
    int modes = lambda_ + 1;
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(modes * N(), modes * N());
    for (const auto& [j, Aj] : loop_.coefficients())
      for (int n = 0; n < modes; ++n) {
        int np = n + j;
        if (np < 0 || np >= modes) continue;
        T.block(np * N(), n * N(), N(), N()) = Aj;
      }
    return T;
  }

  // Compression of g^{-1} D g = D + (-i g^{-1} g'); entries are exact.
  Eigen::MatrixXcd conjugated_dirac() const {
    Eigen::MatrixXcd M = dirac();
    for (const auto& [l, Ol] : loop_.log_derivative_coeffs())
      for (int n = -lambda_; n <= lambda_; ++n) {
        int np = n + l;
        if (np < -lambda_ || np > lambda_) continue;
        M.block((np + lambda_) * N(), (n + lambda_) * N(), N(), N()) += Ol;
      }
    return M;
  }

  // Compression of g^{-1} P g: entry (n', n) = sum_l A^*_{l-n'} sign(l) A_{l-n}.
  Eigen::MatrixXcd conjugated_reflection() const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim(), dim());
    const auto& A = loop_.coefficients();
    for (const auto& [ja, Aa] : A) {      // Aa = A_{l-n'}, so l = n' + ja
      for (const auto& [jb, Ab] : A) {    // Ab = A_{l-n},  so l = n + jb
        int band = jb - ja;               // n' - n
        for (int n = -lambda_; n <= lambda_; ++n) {
          int np = n + band;
          if (np < -lambda_ || np > lambda_) continue;
          int l = n + jb;
          double sgn = (l >= 0) ? 1.0 : -1.0;
          M.block((np + lambda_) * N(), (n + lambda_) * N(), N(), N()) +=
              sgn * Aa.adjoint() * Ab;
        }
      }
    }
    return M;
  }

  // Linear path D_u = (1-u) D + u (g^{-1} D g)^c with exact refiner/velocity.
  OperatorFamily d_path(int samples = 33) const {
    return linear_family(dirac(), conjugated_dirac(), samples);
  }

  // Linear path P_u = (1-u) P + u (g^{-1} P g)^c.
  OperatorFamily p_path(int samples = 33) const {
    return linear_family(reflection(), conjugated_reflection(), samples);
  }

 private:
  OperatorFamily linear_family(Eigen::MatrixXcd start, Eigen::MatrixXcd end,
                               int samples) const {
    if (samples < 2) throw InvalidArgumentError("a path needs at least two samples");
    OperatorFamily fam;
    fam.action = action();
    Eigen::MatrixXcd vel = end - start;
    for (int i = 0; i < samples; ++i) {
      double u = static_cast<double>(i) / (samples - 1);
      fam.u.push_back(u);
      fam.D.push_back(start + u * vel);
    }
    fam.refiner = [start, vel](double u) -> Eigen::MatrixXcd { return start + u * vel; };
    fam.velocity = [vel](double) -> Eigen::MatrixXcd { return vel; };
    return fam;
  }

  MatrixLoop loop_;
  int lambda_;
};

struct SectionOptions {
  double svd_tol = 1e-7;     // singular values below this span the null space
  double gap_min = 1e3;      // required ratio across the null-space cut
  bool check_doubling = true;  // re-run at 2*Lambda and compare
};

struct KernelCokernelResult {
  RepElement kernel;
  RepElement cokernel;
  double kernel_gap = std::numeric_limits<double>::infinity();
  double cokernel_gap = std::numeric_limits<double>::infinity();
};

namespace detail {

// Null space of the rectangular section of T_g: domain modes 0..Lambda-d,
// range modes 0..Lambda. Returns character multiplicities of the null space.
inline std::pair<RepElement, double> section_null_rep(const MatrixLoop& loop, int lambda,
                                                      const SectionOptions& opt) {
  int N = loop.N();
  int p = loop.p();
  int d = loop.degree();
  int dom_modes = lambda - d + 1;
  int ran_modes = lambda + 1;
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(ran_modes * N, dom_modes * N);
  for (const auto& [j, Aj] : loop.coefficients())
    for (int n = 0; n < dom_modes; ++n) {
      int np = n + j;
      if (np < 0 || np >= ran_modes) continue;
      T.block(np * N, n * N, N, N) = Aj;
    }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();  // descending
  int q = static_cast<int>(s.size());
  int nullity = 0;
  while (nullity < q && s[q - 1 - nullity] < opt.svd_tol) ++nullity;

  double gap = std::numeric_limits<double>::infinity();
  if (nullity > 0 && nullity < q) {
    gap = s[q - nullity - 1] / std::max(s[q - nullity], 1e-300);
    if (gap < opt.gap_min)
      throw IllConditionedKernelError("no clean singular-value gap at the null tolerance");
  } else if (nullity == 0 && q > 0 && s[q - 1] < opt.svd_tol * opt.gap_min) {
    throw IllConditionedKernelError("smallest singular value sits too close to the tolerance");
  }

  // Character multiplicities: the action is diagonal in the mode basis, so a
  // null-space (U-invariant) subspace decomposes by summing |component|^2
  // over modes of each character; the sums must be near-integers.
  RepElement rep(p);
  std::vector<double> weight(p, 0.0);
  for (int c = 0; c < nullity; ++c) {
    Eigen::VectorXcd v = svd.matrixV().col(q - 1 - c);
    for (int n = 0; n < dom_modes; ++n) {
      int j = (((-n) % p) + p) % p;
      weight[j] += v.segment(n * N, N).squaredNorm();
    }
  }
  for (int j = 0; j < p; ++j) {
    long long r = std::llround(weight[j]);
    if (std::abs(weight[j] - static_cast<double>(r)) > 1e-6)
      throw IllConditionedKernelError("null space is not split cleanly by the action");
    rep.coeffs[j] = r;
  }
  return {rep, gap};
}

}  // namespace detail

// Kernel and cokernel of T_g as virtual-representation data, from rectangular
// finite sections (square sections have equal nullities by construction and
// say nothing about the index). The cokernel is the kernel of the adjoint
// symbol's section. Results must survive doubling the cutoff.
inline KernelCokernelResult kernel_cokernel(const CircleModel& model,
                                            const SectionOptions& opt = {}) {
  KernelCokernelResult res;
  auto [ker, kgap] = detail::section_null_rep(model.loop(), model.lambda(), opt);
  auto [cok, cgap] = detail::section_null_rep(model.loop().adjoint(), model.lambda(), opt);
  res.kernel = ker;
  res.cokernel = cok;
  res.kernel_gap = kgap;
  res.cokernel_gap = cgap;
  if (opt.check_doubling) {
    auto [ker2, kg2] = detail::section_null_rep(model.loop(), 2 * model.lambda(), opt);
    auto [cok2, cg2] = detail::section_null_rep(model.loop().adjoint(), 2 * model.lambda(), opt);
    if (!(ker2 == res.kernel) || !(cok2 == res.cokernel))
      throw TruncationError("kernel/cokernel changed when the cutoff was doubled");
  }
  return res;
}

// Ind_H(T_g) = [ker] - [coker] in R(Z_p).
inline RepElement equivariant_index(const CircleModel& model, const SectionOptions& opt = {}) {
  KernelCokernelResult kc = kernel_cokernel(model, opt);
  return kc.kernel - kc.cokernel;
}

// Winding of det g around the circle by phase continuation on a grid of
// 64 (d+1) points; adjacent phase steps above pi/2 abort.
inline long long winding_number(const MatrixLoop& loop) {
  int points = 64 * (loop.degree() + 1);
  double total = 0.0;
  cplx prev = loop.eval(0.0).determinant();
  for (int t = 1; t <= points; ++t) {
    double theta = 2.0 * kPi * t / points;
    cplx cur = loop.eval(theta).determinant();
    double step = std::arg(cur / prev);
    if (std::abs(step) > 0.5 * kPi)
      throw ConvergenceError("phase continuation under-resolved for det g");
    total += step;
    prev = cur;
  }
  double w = total / (2.0 * kPi);
  long long rounded = std::llround(w);
  if (std::abs(w - static_cast<double>(rounded)) > 1e-6)
    throw ConvergenceError("det g phase does not close to an integer winding");
  return rounded;
}

}  // namespace spinflow
