#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bjj/fock.hpp"
#include "bjj/states.hpp"
#include "oracles.hpp"

using namespace bjj;
using Catch::Matchers::WithinAbs;

TEST_CASE("ladder_apply on single-particle states") {
  // a_R |0_L, 1_R> = |0_L, 0_R>
  auto out = ladder_apply(a_R, TwoModeState::basis(1, 1));
  REQUIRE(out.n_total() == 0);
  REQUIRE_THAT(std::abs(out.amplitude(0) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));

  // adag_R |1_L, 0_R> = |1_L, 1_R>
  out = ladder_apply(adag_R, TwoModeState::basis(1, 0));
  REQUIRE(out.n_total() == 2);
  REQUIRE_THAT(std::abs(out.amplitude(1) - Complex(1.0, 0.0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(out.amplitude(0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(out.amplitude(2)), WithinAbs(0.0, 1e-15));

  // a_L |2_L, 0_R> = sqrt(2) |1_L, 0_R>
  out = ladder_apply(a_L, TwoModeState::basis(2, 0));
  REQUIRE(out.n_total() == 1);
  REQUIRE_THAT(std::abs(out.amplitude(0)), WithinAbs(std::sqrt(2.0), 1e-15));
}

TEST_CASE("annihilating the vacuum is a domain error") {
  const TwoModeState vacuum(0, Eigen::VectorXcd::Ones(1));
  REQUIRE_THROWS_AS(ladder_apply(a_L, vacuum), std::domain_error);
  REQUIRE_THROWS_AS(ladder_apply(a_R, vacuum), std::domain_error);
}

TEST_CASE("bosonic commutator on every basis state") {
  for (int n = 1; n <= 12; ++n) {
    for (int m = 0; m <= n; ++m) {
      const auto s = TwoModeState::basis(n, m);
      for (Mode mode : {Mode::Left, Mode::Right}) {
        const LadderOp create{mode, LadderKind::Create};
        const LadderOp destroy{mode, LadderKind::Annihilate};
        const auto a_adag = ladder_apply(destroy, ladder_apply(create, s));
        const auto adag_a = ladder_apply(create, ladder_apply(destroy, s));
        const Eigen::VectorXcd comm = a_adag.amplitudes() - adag_a.amplitudes();
        REQUIRE((comm - s.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("expectation against dense operator matrices") {
  std::mt19937_64 rng(991);
  for (int n : {1, 2, 3, 5, 8}) {
    const auto rho = oracle::random_density_matrix(n, rng);
    const std::vector<std::vector<LadderOp>> strings = {
        {adag_L, a_R},
        {adag_R, a_L},
        {adag_L, a_L},
        {adag_R, a_R},
        {adag_L, adag_L, a_R, a_R},
        {adag_R, a_L, adag_L, a_R},
    };
    for (const auto& ops : strings) {
      const Complex fast = expectation(ops, rho);
      const Complex dense = oracle::expectation_dense(ops, rho);
      REQUIRE_THAT(std::abs(fast - dense), WithinAbs(0.0, 1e-10));
    }
  }
}

TEST_CASE("number conservation and hermiticity of coherences") {
  std::mt19937_64 rng(1234);
  for (int n : {1, 4, 9}) {
    const auto rho = oracle::random_density_matrix(n, rng);

    const Complex total = expectation({adag_L, a_L}, rho) + expectation({adag_R, a_R}, rho);
    REQUIRE_THAT(std::abs(total - Complex(double(n), 0.0)), WithinAbs(0.0, 1e-10));

    const Complex lr = expectation({adag_L, a_R}, rho);
    const Complex rl = expectation({adag_R, a_L}, rho);
    REQUIRE_THAT(std::abs(lr - std::conj(rl)), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("non-number-conserving strings are rejected") {
  std::mt19937_64 rng(7);
  const auto rho = oracle::random_density_matrix(3, rng);
  REQUIRE_THROWS_AS(expectation({adag_L}, rho), std::domain_error);
  REQUIRE_THROWS_AS(expectation({adag_L, adag_R, a_L}, rho), std::domain_error);
}

TEST_CASE("phase-state coherence and NOON coherence") {
  for (int n : {1, 2, 5, 9}) {
    const double phi = 0.73;
    const auto rho = DensityMatrix::from_pure(phase_state(n, phi));
    const Complex expected = 0.5 * double(n) * std::polar(1.0, phi);
    REQUIRE_THAT(std::abs(expectation({adag_L, a_R}, rho) - expected),
                 WithinAbs(0.0, 1e-12));
  }
  for (int n : {2, 3, 6}) {
    const auto rho = DensityMatrix::from_pure(noon_state(n));
    REQUIRE_THAT(std::abs(expectation({adag_L, a_R}, rho)), WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("pure-state density matrices have unit trace and rank one") {
  std::mt19937_64 rng(42);
  for (int n : {1, 3, 7, 12}) {
    const auto psi = oracle::random_state(n, rng);
    const auto rho = DensityMatrix::from_pure(psi);
    REQUIRE(rho.has_unit_trace(1e-12));
    REQUIRE(rho.is_hermitian(1e-12));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries());
    const auto& ev = es.eigenvalues();
    REQUIRE_THAT(ev.maxCoeff(), WithinAbs(1.0, 1e-12));
    for (Eigen::Index i = 0; i + 1 < ev.size(); ++i)
      REQUIRE_THAT(ev(i), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("matrix_element handles sector mismatch and vacuum annihilation") {
  const auto bra = TwoModeState::basis(2, 1);
  const auto ket = TwoModeState::basis(2, 2);
  const std::vector<LadderOp> raise_only = {adag_L};
  REQUIRE_THROWS_AS(matrix_element(raise_only, bra, ket), std::domain_error);

  // (adag_L)^3 (a_R)^3 on N=2 annihilates everything.
  const auto ops = cross_coherence_string(3);
  REQUIRE_THAT(std::abs(expectation(ops, DensityMatrix::from_pure(ket))),
               WithinAbs(0.0, 1e-15));
}
