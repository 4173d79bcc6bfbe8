#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "bjj/constants.hpp"
#include "bjj/errors.hpp"
#include "bjj/fock.hpp"
#include "bjj/states.hpp"

namespace bjj {

/// Physical parameters of one simulation scenario. Energies enter as angular
/// frequencies (U/hbar, J/hbar), so hbar never appears in the dynamics.
struct ModelParams {
  std::int64_t n_total = 1;   ///< number of atoms N
  int nucleons = 1;           ///< nucleons per atom A
  double u_over_hbar = 0.0;   ///< on-site interaction U/hbar [rad/s]
  double j_over_hbar = 0.0;   ///< hopping J/hbar [rad/s]
  double lambda = 0.0;        ///< collapse rate [1/s]
  double r_c = 1e-7;          ///< collapse resolution length [m]
  double gamma_bar = 1.0;     ///< dimensionless mode-overlap kernel

  void validate() const {
    if (n_total < 1) throw std::domain_error("ModelParams: n_total must be >= 1");
    if (nucleons < 1) throw std::domain_error("ModelParams: nucleons must be >= 1");
    if (lambda < 0.0) throw std::domain_error("ModelParams: lambda must be >= 0");
    if (!(r_c > 0.0)) throw std::domain_error("ModelParams: r_c must be > 0");
    if (gamma_bar < 0.0 || gamma_bar > 1.0)
      throw std::domain_error("ModelParams: gamma_bar must be in [0, 1]");
  }

  /// Dephasing rate lambda A^2 gamma_bar entering exp(-rate t (m-l)^2).
  double csl_rate() const {
    return lambda * double(nucleons) * double(nucleons) * gamma_bar;
  }
};

/// A sampled complex-valued coherence trajectory.
struct CoherenceSeries {
  std::vector<double> times;
  std::vector<Complex> values;

  void validate() const {
    if (times.size() != values.size())
      throw std::domain_error("CoherenceSeries: times/values lengths differ");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw std::domain_error("CoherenceSeries: times must be strictly increasing");
  }
};

/// Extra decoherence channels accepted by the integrator.
///
/// Dephasing contributes -(rate/2) sum_i [n_i, [n_i, rho]], i.e. the element
/// factor exp(-rate t (m-l)^2). Loss is the no-jump anticommutator part
/// -(rate/2) {n_L + n_R, rho} of the one-body loss dissipator, which inside
/// the fixed-N block is a uniform exp(-rate N t) damping of every element.
enum class ChannelKind { Dephasing, Loss };

struct EvolutionChannel {
  ChannelKind kind;
  double rate = 0.0;  ///< [1/s], must be >= 0
};

/// Exact element law of the collapse master equation at J = 0:
///   rho(m,l,t) = exp(i (U/hbar) t (l+m-N)(l-m))
///                exp(-lambda A^2 gamma_bar t (m-l)^2) rho(m,l,0).
/// Populations are untouched; off-diagonals rotate with the Kerr phases and
/// damp with the occupation-difference square.
inline DensityMatrix evolve_csl_analytic(const DensityMatrix& rho0,
                                         const ModelParams& params, double t) {
  params.validate();
  if (params.j_over_hbar != 0.0)
    throw std::domain_error(
        "evolve_csl_analytic: valid only at J = 0; use integrate_master_equation");
  if (t < 0.0) throw std::domain_error("evolve_csl_analytic: t must be >= 0");
  const int n = rho0.n_total();
  if (params.n_total != n)
    throw std::domain_error("evolve_csl_analytic: particle numbers differ");

  const double u = params.u_over_hbar;
  const double damp_rate = params.csl_rate();
  Eigen::MatrixXcd out(n + 1, n + 1);
  for (int m = 0; m <= n; ++m) {
    for (int l = 0; l <= n; ++l) {
      const double phase = u * t * double((l + m - n)) * double(l - m);
      const double damp = std::exp(-damp_rate * t * double(m - l) * double(m - l));
      out(m, l) = std::polar(damp, phase) * rho0.entry(m, l);
    }
  }
  return DensityMatrix(n, std::move(out));
}

namespace detail {

/// Hopping part of H/hbar in the number basis: -j (adag_L a_R + adag_R a_L).
inline Eigen::MatrixXcd hopping_hamiltonian(int n, double j_over_hbar) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  for (int m = 1; m <= n; ++m) {
    const double el = -j_over_hbar * std::sqrt(double(m) * double(n - m + 1));
    h(m - 1, m) = el;  // adag_L a_R
    h(m, m - 1) = el;  // adag_R a_L
  }
  return h;
}

}  // namespace detail

/// Default RK4 step satisfying
/// dt * max(|U/hbar| N^2, lambda A^2 gamma_bar N^2, |J/hbar| N, channel rates) <= 1e-3,
/// clamped to the total integration time.
inline double default_time_step(const ModelParams& params,
                                std::span<const EvolutionChannel> channels,
                                double t_total) {
  const double n = double(params.n_total);
  double scale = std::max({std::abs(params.u_over_hbar) * n * n,
                           params.csl_rate() * n * n,
                           std::abs(params.j_over_hbar) * n});
  for (const auto& ch : channels) {
    const double w = (ch.kind == ChannelKind::Dephasing) ? n * n : n;
    scale = std::max(scale, ch.rate * w);
  }
  if (scale <= 0.0) return t_total;
  return std::min(1e-3 / scale, t_total);
}

inline double default_time_step(const ModelParams& params, double t_total) {
  return default_time_step(params, std::span<const EvolutionChannel>{}, t_total);
}

/// Fixed-step RK4 integration of
///   d rho/dt = -i [H/hbar, rho]
///              - (lambda A^2 gamma_bar / 2) sum_i [n_i, [n_i, rho]]
///              + extra channels,
/// with H/hbar = -(J/hbar)(adag_L a_R + h.c.) - (U/hbar) n_L n_R.
/// The step count is ceil(t/dt), so the realized step never exceeds dt.
inline DensityMatrix integrate_master_equation(const DensityMatrix& rho0,
                                               const ModelParams& params,
                                               std::span<const EvolutionChannel> channels,
                                               double t, double dt) {
  params.validate();
  if (t < 0.0) throw std::domain_error("integrate_master_equation: t must be >= 0");
  if (!(dt > 0.0)) throw std::domain_error("integrate_master_equation: dt must be > 0");
  if (dt > t) throw std::domain_error("integrate_master_equation: dt must not exceed t");
  const int n = rho0.n_total();
  if (params.n_total != n)
    throw std::domain_error("integrate_master_equation: particle numbers differ");
  for (const auto& ch : channels)
    if (ch.rate < 0.0)
      throw std::domain_error("integrate_master_equation: channel rates must be >= 0");

  const double u = params.u_over_hbar;
  const double j = params.j_over_hbar;
  double dephase_rate = params.csl_rate();
  double loss_rate = 0.0;
  for (const auto& ch : channels) {
    if (ch.kind == ChannelKind::Dephasing) dephase_rate += ch.rate;
    else loss_rate += ch.rate;
  }

  // Element-wise generator for everything diagonal in the number basis.
  Eigen::MatrixXcd gen(n + 1, n + 1);
  for (int m = 0; m <= n; ++m) {
    const double km = double(n - m) * double(m);  // n_L n_R eigenvalue
    for (int l = 0; l <= n; ++l) {
      const double kl = double(n - l) * double(l);
      const double diff = double(m - l);
      gen(m, l) = Complex(-dephase_rate * diff * diff - loss_rate * double(n),
                          u * (km - kl));
    }
  }

  const bool has_hopping = (j != 0.0);
  Eigen::MatrixXcd hop;
  if (has_hopping) hop = detail::hopping_hamiltonian(n, j);

  auto rhs = [&](const Eigen::MatrixXcd& r) -> Eigen::MatrixXcd {
    Eigen::MatrixXcd d = gen.cwiseProduct(r);
    if (has_hopping) d.noalias() += Complex(0.0, -1.0) * (hop * r - r * hop);
    return d;
  };

  const long steps = std::max<long>(1, long(std::ceil(t / dt - 1e-12)));
  const double h = t / double(steps);

  Eigen::MatrixXcd rho = rho0.entries();
  Eigen::MatrixXcd k1, k2, k3, k4;
  for (long s = 0; s < steps; ++s) {
    k1 = rhs(rho);
    k2 = rhs(rho + (0.5 * h) * k1);
    k3 = rhs(rho + (0.5 * h) * k2);
    k4 = rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((s & 0x3f) == 0x3f || s == steps - 1) {
      if (!rho.allFinite()) {
        std::ostringstream msg;
        msg << "integrate_master_equation: non-finite values at step " << (s + 1)
            << " of " << steps << " (h = " << h << ")";
        throw numerical_error(msg.str());
      }
    }
  }
  return DensityMatrix(n, std::move(rho));
}

/// Phase coherence of an initial phase state at J = 0:
///   <adag_L a_R>_t = (N/2) e^{i phi} cos^{N-1}(t U/hbar) exp(-lambda A^2 gamma_bar t).
inline Complex phase_coherence_closed_form(const ModelParams& params, double phi,
                                           double t) {
  params.validate();
  if (params.j_over_hbar != 0.0)
    throw std::domain_error("phase_coherence_closed_form: valid only at J = 0");
  const double n = double(params.n_total);
  const double kerr = std::pow(std::cos(params.u_over_hbar * t), n - 1.0);
  const double damp = std::exp(-params.csl_rate() * t);
  return std::polar(0.5 * n * damp, phi) * kerr;
}

/// Closed form of the k-particle cross coherence between the two branches of
/// an interaction-evolved cat state,
///   <phi(t)| (adag_L)^k (a_R)^k |(phi+pi)(t)>
///     = N! / ((N-k)! 2^k) (-1)^k e^{i k phi} i^{N-k} sin^{N-k}(U k t / hbar).
/// Verified element-by-element against the ladder-operator evaluation; the
/// magnitude vanishes for k < N at t = 0 and is constant N!/2^N at k = N.
inline Complex cross_coherence_closed_form(int n_total, int k, double phi,
                                           double u_over_hbar, double t) {
  if (n_total < 1)
    throw std::domain_error("cross_coherence_closed_form: n_total must be >= 1");
  if (k < 0 || k > n_total)
    throw std::domain_error("cross_coherence_closed_form: need 0 <= k <= N");
  const double log_pref = std::lgamma(n_total + 1.0) - std::lgamma(n_total - k + 1.0) -
                          k * std::log(2.0);
  const double s = std::sin(u_over_hbar * double(k) * t);
  const double s_pow = (n_total == k) ? 1.0 : std::pow(s, double(n_total - k));
  // (-1)^k i^{N-k}
  const int quarter_turns = ((n_total - k) % 4 + 4) % 4;
  static const Complex i_pow[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                   Complex(0, -1)};
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * i_pow[quarter_turns] * std::polar(std::exp(log_pref), k * phi) * s_pow;
}

struct CatFormationResult {
  double fidelity;  ///< squared overlap with the best-fit cat state
  double beta;      ///< maximizing relative phase [rad]
};

/// Evolves |phi> unitarily (J = 0, lambda = 0) to t2 = pi hbar / (2U) and
/// returns the squared overlap with superposition_state(N, phi, beta) at the
/// overlap-maximizing beta. For even N the fidelity is 1; odd N forms a cat
/// of differently rotated phase states and the fidelity drops.
inline CatFormationResult kerr_cat_formation_check(int n_total, double phi,
                                                   double u_over_hbar) {
  if (n_total < 2)
    throw std::domain_error("kerr_cat_formation_check: n_total must be >= 2");
  if (u_over_hbar == 0.0)
    throw std::domain_error("kerr_cat_formation_check: U must be nonzero");

  // At t2 the Kerr phases are exp(i pi (N-m) m / 2) independent of sign(U).
  const TwoModeState initial = phase_state(n_total, phi);
  Eigen::VectorXcd evolved = initial.amplitudes();
  for (int m = 0; m <= n_total; ++m) {
    const int km = ((n_total - m) * m) % 4;
    static const Complex phase[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                     Complex(0, -1)};
    evolved(m) *= phase[km];
  }
  const TwoModeState at_t2(n_total, std::move(evolved));

  // |<cat(beta)|psi>|^2 = |z1 + e^{-i beta} z2|^2 / 2 is maximal when the two
  // branch overlaps align.
  const Complex z1 = phase_state(n_total, phi).inner(at_t2);
  const Complex z2 = phase_state(n_total, phi + constants::pi).inner(at_t2);
  const double beta = std::arg(z2) - std::arg(z1);
  const double amp = std::abs(z1) + std::abs(z2);
  return CatFormationResult{0.5 * amp * amp, beta};
}

}  // namespace bjj
