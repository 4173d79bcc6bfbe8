#pragma once

#include <cmath>
#include <complex>

#include "bjj/constants.hpp"
#include "bjj/fock.hpp"

namespace bjj {

namespace detail {

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

/// Atomic coherent state (a_L^dag + e^{i phi} a_R^dag)^N |0> / sqrt(N! 2^N).
/// Amplitude at right occupation m is sqrt(C(N,m)) e^{i m phi} / 2^{N/2}.
inline TwoModeState phase_state(int n_total, double phi) {
  if (n_total < 1) throw std::domain_error("phase_state: n_total must be >= 1");
  Eigen::VectorXcd amps(n_total + 1);
  for (int m = 0; m <= n_total; ++m) {
    const double mag =
        std::exp(0.5 * (detail::log_choose(n_total, m) - n_total * std::log(2.0)));
    amps(m) = std::polar(mag, m * phi);
  }
  TwoModeState s(n_total, std::move(amps));
  return s.normalized();
}

/// (|N,0> + |0,N>) / sqrt(2).
inline TwoModeState noon_state(int n_total) {
  if (n_total < 1) throw std::domain_error("noon_state: n_total must be >= 1");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(n_total + 1);
  amps(0) = 1.0 / std::sqrt(2.0);
  amps(n_total) = 1.0 / std::sqrt(2.0);
  return TwoModeState(n_total, std::move(amps));
}

/// Cat state (|phi> + e^{i beta} |phi + pi>) / sqrt(2), renormalized.
///
/// The two phase states are exactly orthogonal (binomial alternating-sum
/// identity), so the renormalization is a pure safeguard and amounts to the
/// 1/sqrt(2) prefactor.
inline TwoModeState superposition_state(int n_total, double phi, double beta) {
  if (n_total < 1) throw std::domain_error("superposition_state: n_total must be >= 1");
  const TwoModeState a = phase_state(n_total, phi);
  const TwoModeState b = phase_state(n_total, phi + constants::pi);
  Eigen::VectorXcd amps =
      (a.amplitudes() + std::polar(1.0, beta) * b.amplitudes()) / std::sqrt(2.0);
  return TwoModeState(n_total, std::move(amps)).normalized();
}

}  // namespace bjj
