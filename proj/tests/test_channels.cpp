#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bjj/channels.hpp"
#include "bjj/constants.hpp"
#include "bjj/dynamics.hpp"
#include "bjj/observables.hpp"
#include "oracles.hpp"

using namespace bjj;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("loss-rate scaling law") {
  GasParams gas;
  gas.coupling_g = GasParams::coupling_from_scattering(5.3e-9, 1.44e-25);
  gas.n_therm = 0.0;
  REQUIRE(rate_loss(gas) == 0.0);

  gas.n_therm = 2.5e18;
  const double base = rate_loss(gas);
  gas.n_therm = 5.0e18;
  REQUIRE_THAT(rate_loss(gas), WithinRel(8.0 * base, 1e-12));
}

TEST_CASE("thermal dephasing rate is the loss rate per thermal atom") {
  REQUIRE_THAT(rate_dec(4e-3, 10000), WithinRel(4e-7, 1e-12));
  REQUIRE_THAT(rate_dec(4e-3, 1), WithinRel(4e-3, 1e-15));
  REQUIRE_THROWS_AS(rate_dec(4e-3, 0), std::domain_error);
}

TEST_CASE("three-body rate reproduces the reference magnitude") {
  // hbar a_s^4 / m = 5e-30 cm^6/s together with n_bec = 5e14 cm^-3 gives
  // 1.25 1/s per atom. Solve for a_s at the rubidium mass.
  const double mass = 1.44e-25;
  const double hbar_a4_over_m = 5e-30 * 1e-12;  // m^6/s
  const double a_s = std::pow(hbar_a4_over_m * mass / constants::hbar, 0.25);
  const double n_bec = 5e20;
  REQUIRE_THAT(rate_three_body(a_s, mass, n_bec), WithinRel(1.25, 1e-10));

  REQUIRE(rate_three_body(a_s, mass, 0.0) == 0.0);
  const double r1 = rate_three_body(a_s, mass, n_bec);
  const double r2 = rate_three_body(0.5 * a_s, mass, n_bec);
  REQUIRE_THAT(r1 / r2, WithinRel(16.0, 1e-10));
}

TEST_CASE("dephasing map basics") {
  std::mt19937_64 rng(5);
  const auto rho = oracle::random_density_matrix(5, rng);

  const auto same = apply_dephasing_map(rho, 0.0);
  REQUIRE((same.entries() - rho.entries()).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS_AS(apply_dephasing_map(rho, -0.1), std::domain_error);

  const auto damped = apply_dephasing_map(rho, 0.4);
  REQUIRE(damped.has_unit_trace(1e-12));
  REQUIRE(damped.is_hermitian(1e-12));
  REQUIRE(damped.min_eigenvalue() >= -1e-10);
}

TEST_CASE("dephasing map scales NOON corners by exp(-c N^2)") {
  for (int n : {2, 5, 8}) {
    const double c = 0.21;
    const auto rho = DensityMatrix::from_pure(noon_state(n));
    const auto out = apply_dephasing_map(rho, c);
    const Complex corner = out.entry(n, 0);
    REQUIRE_THAT(std::abs(corner), WithinRel(0.5 * std::exp(-c * n * n), 1e-12));
  }
}

TEST_CASE("dephasing map composes additively") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> cdist(0.0, 1.5);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + int(rng() % 10);
    const auto rho = oracle::random_density_matrix(n, rng);
    const double c1 = cdist(rng), c2 = cdist(rng);
    const auto once = apply_dephasing_map(rho, c1 + c2);
    const auto twice = apply_dephasing_map(apply_dephasing_map(rho, c1), c2);
    REQUIRE((once.entries() - twice.entries()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("Gaussian phase noise equals the dephasing map") {
  // Direct phi integration of
  //   rho(t) = int dphi f(phi, t) e^{-i phi n_R} rho_Sch e^{i phi n_R}
  // with Gaussian f of variance Delta^2; element-wise this multiplies
  // rho(m, l) by the characteristic function exp(-Delta^2 (m-l)^2 / 2).
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    const auto rho = oracle::random_density_matrix(n, rng);
    const double delta2 = 0.83;
    const double delta = std::sqrt(delta2);

    const int n_steps = 4000;
    const double span = 10.0 * delta;
    const double h = 2.0 * span / n_steps;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int i = 0; i <= n_steps; ++i) {
      const double phi = -span + i * h;
      const double w =
          (i == 0 || i == n_steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double f =
          std::exp(-0.5 * phi * phi / delta2) / (std::sqrt(2.0 * constants::pi) * delta);
      Eigen::MatrixXcd rotated(n + 1, n + 1);
      for (int m = 0; m <= n; ++m)
        for (int l = 0; l <= n; ++l)
          rotated(m, l) = std::polar(1.0, -phi * double(m - l)) * rho.entry(m, l);
      acc += (w * h / 3.0) * f * rotated;
    }

    const auto mapped = apply_dephasing_map(rho, 0.5 * delta2);
    REQUIRE((acc - mapped.entries()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("closed-form decay factors") {
  REQUIRE(coherence_decay_under_loss(10, 4e-3, 0.0) == 1.0);
  REQUIRE_THAT(coherence_decay_under_loss(10, 4e-3, 1.0),
               WithinRel(std::exp(-0.04), 1e-13));
  // Doubling N squares the factor.
  const double f1 = coherence_decay_under_loss(7, 0.02, 1.3);
  const double f2 = coherence_decay_under_loss(14, 0.02, 1.3);
  REQUIRE_THAT(f2, WithinRel(f1 * f1, 1e-12));

  REQUIRE(coherence_decay_three_body(5, 1.25, 0.0) == 1.0);
  REQUIRE_THAT(coherence_decay_three_body(1, 1.25, 1.0),
               WithinRel(std::exp(-1.25), 1e-13));
  REQUIRE_THAT(coherence_decay_three_body(9, 0.4, 0.7),
               WithinRel(coherence_decay_under_loss(9, 0.4, 0.7), 1e-15));
}

TEST_CASE("spontaneous-emission strength") {
  REQUIRE(spont_emission_strength(3.8e7, -6.8e14, 0.0, 1.0) == 0.0);
  const double c1 = spont_emission_strength(1.0, 2.0, 5.0, 3.0);
  const double c2 = spont_emission_strength(1.0, 4.0, 5.0, 3.0);
  REQUIRE_THAT(c1, WithinRel(4.0 * c2, 1e-13));
  REQUIRE_THROWS_AS(spont_emission_strength(1.0, 0.0, 5.0, 3.0), std::domain_error);
}

TEST_CASE("optical-trap visibility threshold worked example") {
  // Collapse dephasing outruns spontaneous emission iff
  // lambda A^2 gamma_bar > Gamma Omega_bar / (4 delta^2). For a potassium
  // trap at 1064 nm (Gamma = 3.8e7 1/s, delta = -6.74e14 rad/s) and the
  // documented Omega_bar = 7.27e13 rad^2/s^2 the threshold sits at
  // lambda ~ 1e-12 1/s.
  const double gamma_sp = 3.8e7, delta = -6.74e14, omega = 7.27e13;
  const double spont_rate = spont_emission_strength(gamma_sp, delta, omega, 1.0);
  const double lambda_threshold = spont_rate / (39.0 * 39.0 * 1.0);
  REQUIRE(lambda_threshold > 0.5e-12);
  REQUIRE(lambda_threshold < 2e-12);
  REQUIRE(csl_dominates(2e-12, 39, 1.0, 1, spont_rate, ChannelScaling::ConstantInN));
  REQUIRE_FALSE(
      csl_dominates(5e-13, 39, 1.0, 1, spont_rate, ChannelScaling::ConstantInN));
}

TEST_CASE("loss channel in the integrator reproduces exp(-Lambda N t)") {
  for (int n : {2, 4, 6}) {
    ModelParams params;
    params.n_total = n;
    params.nucleons = 1;
    params.gamma_bar = 1.0;
    const double lambda_loss = 0.8;
    const EvolutionChannel loss{ChannelKind::Loss, lambda_loss};
    const auto rho0 = DensityMatrix::from_pure(noon_state(n));
    const double t = 0.9;
    const std::vector<EvolutionChannel> channels = {loss};
    const auto rho = integrate_master_equation(
        rho0, params, channels, t, default_time_step(params, channels, t));
    const double got = std::abs(rho.entry(n, 0));
    const double want = 0.5 * std::exp(-lambda_loss * double(n) * t);
    REQUIRE_THAT(got, WithinAbs(want, 1e-6));
  }
}

TEST_CASE("channel-rate bundle with the linear variance default") {
  ChannelRates rates;
  rates.lambda_loss = 4e-3;
  rates.lambda_dec = rate_dec(rates.lambda_loss, 10000);
  rates.phase_noise_variance = linear_phase_noise_variance(0.3);
  REQUIRE_THAT(rates.phase_noise_variance(2.0), WithinRel(0.6, 1e-15));
  REQUIRE_THROWS_AS(linear_phase_noise_variance(-0.1), std::domain_error);

  // Delta^2(t)/2 feeds the shared map; at t = 2 that is strength 0.3.
  std::mt19937_64 rng(8);
  const auto rho = oracle::random_density_matrix(3, rng);
  const auto out = apply_dephasing_map(rho, 0.5 * rates.phase_noise_variance(2.0));
  REQUIRE_THAT(std::abs(out.entry(0, 3)),
               WithinRel(std::abs(rho.entry(0, 3)) * std::exp(-0.3 * 9.0), 1e-12));
}

TEST_CASE("dominance predicate is scale invariant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double lambda = 1e-17 * u(rng);
    const double rate = 1e-3 * u(rng);
    const std::int64_t n = 1 + std::int64_t(rng() % 1000000);
    const double k = u(rng) * 100.0;
    for (auto scaling : {ChannelScaling::LinearInN, ChannelScaling::ConstantInN}) {
      const bool base = csl_dominates(lambda, 87, 1.0, n, rate, scaling);
      const bool scaled = csl_dominates(k * lambda, 87, 1.0, n, k * rate, scaling);
      REQUIRE(base == scaled);
    }
  }
}
