#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "spinflow/equispec.hpp"
#include "spinflow/errors.hpp"

// Equivariant spectral flow of a sampled path of Hermitian matrices that all
// commute with one Z_p action. The flow through a level c is the net count of
// eigenvalue crossings (upward = +1), computed per character block as the
// difference of counting functions N_{<c} at the endpoints. Interior samples
// exist to certify that the sampling is fine enough to trust the crossing
// log; intervals that cannot be certified are bisected through a refiner.

namespace spinflow {

// Path of equivariant Hermitian operators over u in [0,1].
struct OperatorFamily {
  std::vector<double> u;
  std::vector<Eigen::MatrixXcd> D;
  GroupAction action;
  // Produces D(u) for arbitrary u; required when certification must bisect.
  std::function<Eigen::MatrixXcd(double)> refiner;
  // Path velocity dD/du; used by heat-kernel integrals along the path.
  std::function<Eigen::MatrixXcd(double)> velocity;
};

inline void validate_family(const OperatorFamily& fam) {
  if (fam.u.size() < 2 || fam.u.size() != fam.D.size())
    throw InvalidArgumentError("family needs matching sample and matrix lists");
  if (std::abs(fam.u.front()) > 1e-12 || std::abs(fam.u.back() - 1.0) > 1e-12)
    throw InvalidArgumentError("parameter grid must cover [0, 1]");
  for (std::size_t i = 1; i < fam.u.size(); ++i)
    if (fam.u[i] <= fam.u[i - 1])
      throw InvalidArgumentError("parameter grid must be strictly increasing");
  for (const auto& Dm : fam.D) {
    if ((Dm - Dm.adjoint()).norm() > 1e-9 * std::max(1.0, Dm.norm()))
      throw InvalidArgumentError("family samples must be Hermitian");
    check_equivariant(Dm, fam.action, "family sample");
  }
}

struct LevelOptions {
  double zero_tol_rel = 1e-9;   // |lambda| below this (times scale) counts as zero
  double delta_max = 0.5;       // cap on the half-gap delta
};

// Pick the level -delta below the smallest nonzero endpoint eigenvalue
// magnitude; level 0 when both endpoints are invertible.
inline double choose_level(const OperatorFamily& fam, const LevelOptions& opt = {}) {
  validate_family(fam);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es0(fam.D.front());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es1(fam.D.back());
  double scale = std::max({1.0, es0.eigenvalues().cwiseAbs().maxCoeff(),
                           es1.eigenvalues().cwiseAbs().maxCoeff()});
  double ztol = opt.zero_tol_rel * scale;

  bool any_zero = false;
  double min_nonzero = std::numeric_limits<double>::infinity();
  auto scan = [&](const Eigen::VectorXd& ev) {
    for (int i = 0; i < ev.size(); ++i) {
      double a = std::abs(ev[i]);
      if (a <= ztol)
        any_zero = true;
      else
        min_nonzero = std::min(min_nonzero, a);
    }
  };
  scan(es0.eigenvalues());
  scan(es1.eigenvalues());

  if (!any_zero) return 0.0;
  if (!std::isfinite(min_nonzero))
    throw LevelSelectionError("endpoints have no nonzero eigenvalue to set a gap");
  double delta = std::min(0.5 * min_nonzero, opt.delta_max);
  double level = -delta;
  auto hits_level = [&](const Eigen::VectorXd& ev) {
    for (int i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i] - level) <= ztol) return true;
    return false;
  };
  if (hits_level(es0.eigenvalues()) || hits_level(es1.eigenvalues()))
    throw LevelSelectionError("endpoint eigenvalue sits at the candidate level");
  return level;
}

struct CrossingRecord {
  double u_lo = 0.0;
  double u_hi = 0.0;
  int character = 0;
  int direction = 0;  // +1 upward through the level, -1 downward
};

struct FlowResult {
  double level = 0.0;
  long long scalar_flow = 0;
  RepElement equivariant_flow;
  std::vector<CrossingRecord> crossings;
  int refinements = 0;  // midpoint insertions performed during certification
};

struct FlowOptions {
  int max_bisection_depth = 20;
  double guard_factor = 2.0;      // guard radius = factor * ||D_next - D_prev||
  double endpoint_margin = 1e-6;  // level must avoid endpoint spectra by this
};

namespace detail {

struct FlowSample {
  double u;
  Eigen::MatrixXcd D;
  std::vector<std::vector<double>> block_eigs;  // per character, ascending
  std::vector<int> below;                       // per character: #{lambda < level}
};

inline FlowSample make_flow_sample(double u, Eigen::MatrixXcd D,
                                   const std::vector<Eigen::MatrixXcd>& bases,
                                   double level) {
  FlowSample s;
  s.u = u;
  s.D = std::move(D);
  s.block_eigs.resize(bases.size());
  s.below.resize(bases.size(), 0);
  for (std::size_t j = 0; j < bases.size(); ++j) {
    if (bases[j].cols() == 0) continue;
    Eigen::MatrixXcd block = bases[j].adjoint() * s.D * bases[j];
    block = 0.5 * (block + block.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
    s.block_eigs[j].assign(es.eigenvalues().data(), es.eigenvalues().data() + block.rows());
    for (double lam : s.block_eigs[j])
      if (lam < level) ++s.below[j];
  }
  return s;
}

inline int window_count(const std::vector<double>& eigs, double level, double radius) {
  int w = 0;
  for (double lam : eigs)
    if (std::abs(lam - level) <= radius) ++w;
  return w;
}

}  // namespace detail

// Net equivariant crossing count of the family through `level`. The level
// must avoid both endpoint spectra by the configured margin.
inline FlowResult spectral_flow_per_character(const OperatorFamily& fam, double level,
                                              const FlowOptions& opt = {}) {
  validate_family(fam);
  auto bases = isotypic_bases(fam.action);

  FlowResult out;
  out.level = level;
  out.equivariant_flow = RepElement(fam.action.p);

  std::vector<detail::FlowSample> samples;
  samples.reserve(fam.u.size());
  for (std::size_t i = 0; i < fam.u.size(); ++i)
    samples.push_back(detail::make_flow_sample(fam.u[i], fam.D[i], bases, level));

  for (const auto* endpoint : {&samples.front(), &samples.back()})
    for (const auto& eigs : endpoint->block_eigs)
      for (double lam : eigs)
        if (std::abs(lam - level) < opt.endpoint_margin)
          throw InvalidArgumentError("level too close to an endpoint eigenvalue");

  // Certify one interval; on failure bisect through the refiner.
  std::function<void(const detail::FlowSample&, const detail::FlowSample&, int)> process =
      [&](const detail::FlowSample& a, const detail::FlowSample& b, int depth) {
        // Guard radius from the full-matrix difference: an upper bound on
        // per-block eigenvalue motion across the interval (Weyl).
        double guard = opt.guard_factor * (b.D - a.D).norm();
        bool certified = true;
        for (std::size_t j = 0; j < bases.size() && certified; ++j) {
          int delta = a.below[j] - b.below[j];
          int wa = detail::window_count(a.block_eigs[j], level, guard);
          int wb = detail::window_count(b.block_eigs[j], level, guard);
          if (std::abs(delta) > std::min(wa, wb)) certified = false;
        }
        if (!certified) {
          if (depth >= opt.max_bisection_depth)
            throw ConvergenceError("bisection depth cap reached while certifying flow");
          if (!fam.refiner)
            throw ResolutionError("family cannot be certified and has no refiner");
          double umid = 0.5 * (a.u + b.u);
          auto mid = detail::make_flow_sample(umid, fam.refiner(umid), bases, level);
          if ((mid.D - mid.D.adjoint()).norm() > 1e-9 * std::max(1.0, mid.D.norm()))
            throw InvalidArgumentError("refined sample is not Hermitian");
          ++out.refinements;
          process(a, mid, depth + 1);
          process(mid, b, depth + 1);
          return;
        }
        for (std::size_t j = 0; j < bases.size(); ++j) {
          int net = a.below[j] - b.below[j];  // positive = net upward crossings
          int dir = net > 0 ? +1 : -1;
          for (int c = 0; c < std::abs(net); ++c)
            out.crossings.push_back({a.u, b.u, static_cast<int>(j), dir});
        }
      };

  for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    process(samples[i], samples[i + 1], 0);

  for (std::size_t j = 0; j < bases.size(); ++j) {
    long long f = samples.front().below[j] - samples.back().below[j];
    out.equivariant_flow.coeffs[j] = f;
    out.scalar_flow += f;
  }
  return out;
}

struct HomotopyCheckResult {
  double level = 0.0;
  RepElement flow_a;
  RepElement flow_b;
  bool equal = false;
};

// Two families with identical endpoints and the same action must have equal
// equivariant flow. The shared level is selected from the first family.
inline HomotopyCheckResult homotopy_invariance_check(const OperatorFamily& fa,
                                                     const OperatorFamily& fb,
                                                     const FlowOptions& opt = {}) {
  validate_family(fa);
  validate_family(fb);
  if (fa.action.p != fb.action.p || (fa.action.U - fb.action.U).norm() > 1e-12)
    throw InvalidArgumentError("families carry different group actions");
  if ((fa.D.front() - fb.D.front()).norm() > 1e-10 ||
      (fa.D.back() - fb.D.back()).norm() > 1e-10)
    throw InvalidArgumentError("families do not share endpoints");

  HomotopyCheckResult res;
  res.level = choose_level(fa);
  res.flow_a = spectral_flow_per_character(fa, res.level, opt).equivariant_flow;
  res.flow_b = spectral_flow_per_character(fb, res.level, opt).equivariant_flow;
  res.equal = (res.flow_a == res.flow_b);
  return res;
}

}  // namespace spinflow
