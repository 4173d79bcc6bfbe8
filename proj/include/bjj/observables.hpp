#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "bjj/constants.hpp"
#include "bjj/fock.hpp"
#include "bjj/kernels.hpp"

namespace bjj {

/// <adag_L a_R>. Couples neighbouring occupation numbers, so only the first
/// off-diagonal of rho contributes.
inline Complex phase_coherence(const DensityMatrix& rho) {
  const int n = rho.n_total();
  Complex sum(0.0, 0.0);
  for (int l = 1; l <= n; ++l)
    sum += std::sqrt(double(l) * double(n - l + 1)) * rho.entry(l, l - 1);
  return sum;
}

/// N-particle coherence Tr[(adag_L)^N (a_R)^N rho] = N! rho(N, 0).
/// Overflows double beyond N = 170; the normalized trajectory
/// rho(N,0,t)/rho(N,0,0) avoids the factorial entirely.
inline Complex n_particle_coherence(const DensityMatrix& rho) {
  const int n = rho.n_total();
  if (n > 170)
    throw std::domain_error("n_particle_coherence: N! overflows for N > 170");
  return std::tgamma(n + 1.0) * rho.entry(n, 0);
}

/// Single-particle density matrix
///   (1/N) [[<n_L>, <adag_L a_R>], [<adag_R a_L>, <n_R>]];
/// Hermitian with unit trace.
inline Eigen::Matrix2cd single_particle_dm(const DensityMatrix& rho) {
  const int n = rho.n_total();
  if (n < 1) throw std::domain_error("single_particle_dm: need at least one atom");
  Complex n_right(0.0, 0.0);
  for (int m = 0; m <= n; ++m) n_right += double(m) * rho.entry(m, m);
  const Complex n_left = rho.trace() * double(n) - n_right;
  const Complex off = phase_coherence(rho);
  Eigen::Matrix2cd out;
  out << n_left, off, std::conj(off), n_right;
  return out / double(n);
}

/// Momentum density along the junction axis,
///   f(p) = N |psi_L(p)|^2 {1 + (2/N) Re(exp(-i d p / hbar) <adag_L a_R>)},
/// with the Gaussian envelope of the well model normalized so that the
/// envelope integrates to N over p (fringes average out for d >> sigma).
inline Eigen::VectorXd momentum_density(const DensityMatrix& rho,
                                        const Eigen::VectorXd& p_grid,
                                        const WellGeometry& geom) {
  geom.validate();
  const double n = double(rho.n_total());
  const Complex coh = phase_coherence(rho);
  const double sigma_p = constants::hbar / geom.width_sigma;
  const double env_norm = 1.0 / (sigma_p * std::sqrt(2.0 * constants::pi));
  const double d_over_hbar = geom.separation_d / constants::hbar;

  Eigen::VectorXd out(p_grid.size());
  for (Eigen::Index i = 0; i < p_grid.size(); ++i) {
    const double p = p_grid(i);
    const double env = env_norm * std::exp(-0.5 * p * p / (sigma_p * sigma_p));
    const Complex fringe = std::polar(1.0, -d_over_hbar * p) * coh;
    out(i) = n * env * (1.0 + 2.0 / n * fringe.real());
  }
  return out;
}

/// Least-squares fit of density = envelope (c0 + c1 cos(d p/hbar) + c2 sin(d p/hbar));
/// returns the fringe contrast sqrt(c1^2 + c2^2) / c0. Equals |2 <adag_L a_R> / N|
/// for densities produced by momentum_density.
inline double fringe_contrast(const Eigen::VectorXd& density,
                              const Eigen::VectorXd& p_grid,
                              const WellGeometry& geom) {
  geom.validate();
  if (density.size() != p_grid.size() || p_grid.size() < 3)
    throw std::domain_error("fringe_contrast: need matching grids with >= 3 points");
  const double sigma_p = constants::hbar / geom.width_sigma;
  const double env_norm = 1.0 / (sigma_p * std::sqrt(2.0 * constants::pi));
  const double d_over_hbar = geom.separation_d / constants::hbar;

  Eigen::MatrixXd design(p_grid.size(), 3);
  Eigen::VectorXd ratio(p_grid.size());
  for (Eigen::Index i = 0; i < p_grid.size(); ++i) {
    const double p = p_grid(i);
    const double env = env_norm * std::exp(-0.5 * p * p / (sigma_p * sigma_p));
    const double theta = d_over_hbar * p;
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(theta);
    design(i, 2) = std::sin(theta);
    ratio(i) = density(i) / env;
  }
  const Eigen::Vector3d c =
      design.colPivHouseholderQr().solve(ratio);
  if (c(0) == 0.0) return 0.0;
  return std::hypot(c(1), c(2)) / c(0);
}

}  // namespace bjj
