#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "bjj/constants.hpp"
#include "bjj/fock.hpp"

namespace bjj {

/// Bulk-gas inputs feeding the laboratory decoherence rates.
struct GasParams {
  double coupling_g = 0.0;        ///< atom-atom coupling g = 4 pi hbar^2 a_s / m [J m^3]
  double n_therm = 0.0;           ///< thermal cloud density [1/m^3]
  double n_bec = 0.0;             ///< condensate density [1/m^3]
  std::int64_t n_therm_atoms = 1; ///< atom count of the thermal cloud
  double temperature_ratio = 0.0; ///< T / T_c

  static double coupling_from_scattering(double a_s, double mass) {
    if (!(mass > 0.0)) throw std::domain_error("GasParams: mass must be > 0");
    return 4.0 * constants::pi * constants::hbar * constants::hbar * a_s / mass;
  }

  void validate() const {
    if (n_therm < 0.0 || n_bec < 0.0)
      throw std::domain_error("GasParams: densities must be >= 0");
    if (temperature_ratio < 0.0)
      throw std::domain_error("GasParams: temperature_ratio must be >= 0");
  }
};

/// Collected decoherence rates of one experimental setup.
struct ChannelRates {
  double lambda_loss = 0.0;        ///< condensate-to-thermal-cloud loss [1/s]
  double lambda_dec = 0.0;         ///< thermal-collision dephasing [1/s]
  double lambda_three_body = 0.0;  ///< three-body recombination, per atom [1/s]
  std::function<double(double)> phase_noise_variance;  ///< Delta^2(t)
  double spont_rate_eff = 0.0;     ///< Gamma Omega_bar / (4 delta^2) [1/s]
};

/// Linear-in-t phase-noise variance Delta^2(t) = D t.
inline std::function<double(double)> linear_phase_noise_variance(double d_rate) {
  if (d_rate < 0.0)
    throw std::domain_error("linear_phase_noise_variance: rate must be >= 0");
  return [d_rate](double t) { return d_rate * t; };
}

/// Scaling estimate of the atom-loss rate, g^2 n_therm^3 / hbar^2. Measured
/// values (e.g. 4e-3 1/s) can be supplied directly instead.
inline double rate_loss(const GasParams& gas) {
  gas.validate();
  const double g_over_hbar = gas.coupling_g / constants::hbar;
  return g_over_hbar * g_over_hbar * gas.n_therm * gas.n_therm * gas.n_therm;
}

/// Thermal-collision dephasing rate Lambda_loss / N_therm.
inline double rate_dec(double lambda_loss, std::int64_t n_therm_atoms) {
  if (n_therm_atoms < 1)
    throw std::domain_error("rate_dec: n_therm_atoms must be >= 1");
  return lambda_loss / double(n_therm_atoms);
}

/// Per-atom three-body recombination rate hbar a_s^4 n_bec^2 / m.
inline double rate_three_body(double a_s, double mass, double n_bec) {
  if (!(a_s > 0.0) || !(mass > 0.0) || n_bec < 0.0)
    throw std::domain_error("rate_three_body: inputs must be positive (n_bec >= 0)");
  const double a2 = a_s * a_s;
  return constants::hbar * a2 * a2 * n_bec * n_bec / mass;
}

/// The shared dephasing map rho(m,l) -> exp(-c (m-l)^2) rho(m,l).
/// One element law serves the collapse noise (c = lambda A^2 gamma_bar t),
/// Gaussian phase noise (c = Delta^2(t)/2) and spontaneous emission
/// (c = Gamma Omega_bar t / 4 delta^2).
inline DensityMatrix apply_dephasing_map(const DensityMatrix& rho, double strength) {
  if (strength < 0.0)
    throw std::domain_error("apply_dephasing_map: strength must be >= 0");
  const int n = rho.n_total();
  Eigen::MatrixXcd out(n + 1, n + 1);
  for (int m = 0; m <= n; ++m)
    for (int l = 0; l <= n; ++l) {
      const double diff = double(m - l);
      out(m, l) = std::exp(-strength * diff * diff) * rho.entry(m, l);
    }
  return DensityMatrix(n, std::move(out));
}

/// N-particle coherence survival under atom loss, exp(-Lambda_loss N t).
inline double coherence_decay_under_loss(std::int64_t n_total, double lambda_loss,
                                         double t) {
  if (n_total < 0 || lambda_loss < 0.0 || t < 0.0)
    throw std::domain_error("coherence_decay_under_loss: arguments must be >= 0");
  return std::exp(-lambda_loss * double(n_total) * t);
}

/// N-particle coherence survival under three-body recombination,
/// exp(-rate N t); same functional form as the loss decay.
inline double coherence_decay_three_body(std::int64_t n_total, double rate_per_atom,
                                         double t) {
  if (n_total < 0 || rate_per_atom < 0.0 || t < 0.0)
    throw std::domain_error("coherence_decay_three_body: arguments must be >= 0");
  return std::exp(-rate_per_atom * double(n_total) * t);
}

/// Accumulated dephasing strength of spontaneous photon emission,
/// c = Gamma Omega_bar t / (4 delta^2), to feed apply_dephasing_map.
inline double spont_emission_strength(double gamma_sp, double delta,
                                      double omega_bar, double t) {
  if (delta == 0.0)
    throw std::domain_error("spont_emission_strength: detuning must be nonzero");
  if (gamma_sp < 0.0 || t < 0.0)
    throw std::domain_error("spont_emission_strength: gamma_sp and t must be >= 0");
  return gamma_sp * omega_bar * t / (4.0 * delta * delta);
}

enum class ChannelScaling { LinearInN, ConstantInN };

/// Whether the collapse decoherence of an N-atom NOON state outruns a
/// competing channel: lambda A^2 gamma_bar N^2 against rate N (LinearInN)
/// or against a plain rate (ConstantInN).
inline bool csl_dominates(double lambda, int nucleons, double gamma_bar,
                          std::int64_t n_total, double channel_rate,
                          ChannelScaling scaling) {
  const double csl = lambda * double(nucleons) * double(nucleons) * gamma_bar *
                     double(n_total) * double(n_total);
  const double channel = (scaling == ChannelScaling::LinearInN)
                             ? channel_rate * double(n_total)
                             : channel_rate;
  return csl >= channel;
}

}  // namespace bjj
