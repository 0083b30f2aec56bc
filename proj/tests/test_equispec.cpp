#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "spinflow/equispec.hpp"

using namespace spinflow;

namespace {

Eigen::MatrixXcd cyclic_shift(int d) {
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) U((i + 1) % d, i) = 1.0;
  return U;
}

// Group-average of a random Hermitian matrix: exactly equivariant.
Eigen::MatrixXcd random_equivariant_hermitian(const GroupAction& action, std::mt19937_64& rng) {
  int d = action.dim();
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) = cplx(g(rng), g(rng));
  S = 0.5 * (S + S.adjoint()).eval();
  Eigen::MatrixXcd avg = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd uk = Eigen::MatrixXcd::Identity(d, d);
  for (int k = 0; k < action.p; ++k) {
    avg += uk * S * uk.adjoint();
    uk = uk * action.U;
  }
  return avg / static_cast<double>(action.p);
}

}  // namespace

TEST_CASE("action_validates_unitarity_and_order") {
  CHECK_THROWS_AS(GroupAction(2, 2.0 * Eigen::MatrixXcd::Identity(3, 3)), InvalidArgumentError);
  // a 4-cycle does not have order 2
  CHECK_THROWS_AS(GroupAction(2, cyclic_shift(4)), InvalidArgumentError);
  CHECK_NOTHROW(GroupAction(4, cyclic_shift(4)));
  CHECK_THROWS_AS(GroupAction(0, Eigen::MatrixXcd::Identity(2, 2)), InvalidArgumentError);
}

TEST_CASE("trivial_group_has_identity_projector") {
  GroupAction a = GroupAction::trivial(4);
  auto proj = isotypic_projectors(a);
  REQUIRE(proj.size() == 1);
  CHECK(proj[0].isApprox(Eigen::MatrixXcd::Identity(4, 4), 1e-14));
}

TEST_CASE("cyclic_permutation_projects_onto_fourier_lines") {
  // Oracle: diagonalize U directly; each projector must be rank one and
  // project onto the eigenline with U-eigenvalue exp(2 pi i j / 3).
  int p = 3;
  GroupAction a(p, cyclic_shift(p));
  auto proj = isotypic_projectors(a);
  REQUIRE(static_cast<int>(proj.size()) == p);
  for (int j = 0; j < p; ++j) {
    CHECK(std::abs(proj[j].trace().real() - 1.0) < 1e-12);  // rank one
    cplx omega = std::exp(cplx(0.0, 2.0 * kPi * j / p));
    CHECK((a.U * proj[j] - omega * proj[j]).norm() < 1e-12);
  }
}

TEST_CASE("projectors_are_an_orthogonal_resolution_of_identity") {
  for (int p : {1, 2, 3, 4}) {
    int d = 2 * p;
    // two p-cycles side by side: order exactly p, two-dimensional isotypes
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
    U.block(0, 0, p, p) = cyclic_shift(p);
    U.block(p, p, p, p) = cyclic_shift(p);
    GroupAction a(p, U);
    auto proj = isotypic_projectors(a);
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < p; ++j) {
      CHECK((proj[j] * proj[j] - proj[j]).norm() < 1e-12);
      CHECK((proj[j] - proj[j].adjoint()).norm() < 1e-12);
      for (int l = 0; l < j; ++l) CHECK((proj[j] * proj[l]).norm() < 1e-12);
      sum += proj[j];
    }
    CHECK(sum.isApprox(Eigen::MatrixXcd::Identity(d, d), 1e-12));
  }
}

TEST_CASE("fourier_mode_carries_negated_character") {
  // Truncated circle modes n = -L..L: U = diag(exp(-2 pi i n / p)), D = diag(n).
  // Eigenvalue n must land in character j = (-n) mod p; for p = 2 that is n mod 2.
  int L = 5, p = 2;
  int d = 2 * L + 1;
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(d, d);
  for (int n = -L; n <= L; ++n) {
    int idx = n + L;
    U(idx, idx) = std::exp(cplx(0.0, -2.0 * kPi * n / p));
    D(idx, idx) = n;
  }
  IsotypicSpectrum spec = equivariant_eigendecompose(D, GroupAction(p, U));
  REQUIRE(spec.points.size() == static_cast<std::size_t>(d));
  for (const auto& pt : spec.points) {
    int n = static_cast<int>(std::lround(pt.lambda));
    int j = ((-n) % p + p) % p;
    CHECK(pt.multiplicity.coeffs[j] == 1);
    CHECK(pt.multiplicity.total() == 1);
  }
}

TEST_CASE("eigendecompose_matches_plain_solver_on_random_equivariant_operators") {
  std::mt19937_64 rng(2024);
  for (int p : {1, 2, 3}) {
    int d = 3 * p;
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
    for (int b = 0; b < 3; ++b) U.block(b * p, b * p, p, p) = cyclic_shift(p);
    GroupAction a(p, U);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXcd D = random_equivariant_hermitian(a, rng);
      IsotypicSpectrum spec = equivariant_eigendecompose(D, a);
      CHECK(spec.total_multiplicity() == d);

      // Oracle: flat eigenvalue list from a plain Hermitian solve.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
      std::vector<double> flat;
      for (const auto& pt : spec.points)
        for (long long c = 0; c < pt.multiplicity.total(); ++c) flat.push_back(pt.lambda);
      REQUIRE(flat.size() == static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) CHECK(std::abs(flat[i] - es.eigenvalues()[i]) < 1e-8);
    }
  }
}

TEST_CASE("eigendecompose_rejects_bad_operators") {
  int p = 2, d = 4;
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(d, d);
  U.block(0, 0, 2, 2) = cyclic_shift(2);
  U.block(2, 2, 2, 2) = cyclic_shift(2);
  GroupAction a(p, U);

  Eigen::MatrixXcd nonherm = Eigen::MatrixXcd::Zero(d, d);
  nonherm(0, 1) = 1.0;
  CHECK_THROWS_AS(equivariant_eigendecompose(nonherm, a), InvalidArgumentError);

  Eigen::MatrixXcd noncomm = Eigen::MatrixXcd::Zero(d, d);
  noncomm(0, 0) = 1.0;  // diag(1,0,0,0) does not commute with the first 2-cycle
  CHECK_THROWS_AS(equivariant_eigendecompose(noncomm, a), EquivarianceError);
}

TEST_CASE("nearby_eigenvalues_merge_into_one_point") {
  int d = 3;
  GroupAction a = GroupAction::trivial(d);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(d, d);
  D(0, 0) = 1.0;
  D(1, 1) = 1.0 + 1e-13;
  D(2, 2) = 2.0;
  IsotypicSpectrum spec = equivariant_eigendecompose(D, a);
  REQUIRE(spec.points.size() == 2);
  CHECK(spec.points[0].multiplicity.total() == 2);
  CHECK(spec.points[0].lambda == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("character_trace_evaluates_virtual_representations") {
  RepElement r(2);
  r.coeffs = {1, 2};  // chi_0 + 2 chi_1
  CHECK(std::abs(character_trace(r, 0) - cplx(3.0)) < 1e-14);
  CHECK(std::abs(character_trace(r, 1) - cplx(-1.0)) < 1e-14);

  RepElement zero(3);
  CHECK(std::abs(character_trace(zero, 2)) == 0.0);
}

TEST_CASE("character_traces_invert_back_to_coefficients") {
  // Orthogonality roundtrip: coefficients recovered by inverse DFT of the
  // trace values at h = 0..p-1.
  std::mt19937_64 rng(555);
  std::uniform_int_distribution<long long> coeff(-4, 4);
  for (int p : {1, 2, 3, 5}) {
    RepElement r(p);
    for (auto& c : r.coeffs) c = coeff(rng);
    for (int j = 0; j < p; ++j) {
      cplx acc = 0.0;
      for (int h = 0; h < p; ++h) {
        double ang = -2.0 * kPi * static_cast<double>(j) * h / p;
        acc += character_trace(r, h) * cplx(std::cos(ang), std::sin(ang));
      }
      acc /= static_cast<double>(p);
      CHECK(std::abs(acc.imag()) < 1e-12);
      CHECK(std::llround(acc.real()) == r.coeffs[j]);
    }
  }
}

TEST_CASE("rep_element_arithmetic") {
  RepElement a(3), b(3);
  a.coeffs = {1, 0, 2};
  b.coeffs = {0, 1, 1};
  CHECK((a + b).coeffs == std::vector<long long>{1, 1, 3});
  CHECK((a - b).coeffs == std::vector<long long>{1, -1, 1});
  CHECK((-a).coeffs == std::vector<long long>{-1, 0, -2});
  CHECK(a.total() == 3);
  RepElement c(2);
  CHECK_THROWS_AS(a + c, InvalidArgumentError);
}
