#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "bjj/constants.hpp"
#include "bjj/quadrature.hpp"

namespace bjj {

/// Parametric double-well geometry. Each well density is an isotropic
/// normalized Gaussian |psi(x)|^2 ~ exp(-2 |x -+ (d/2) x_hat|^2 / sigma^2),
/// i.e. sigma is the 1/e^2 half-width of the density. The wells sit at
/// -+ d/2 on the x axis.
struct WellGeometry {
  double separation_d;  ///< distance between well centers [m]
  double width_sigma;   ///< 1/e^2 half-width of each well density [m]

  void validate() const {
    if (!(separation_d > 0.0))
      throw std::domain_error("WellGeometry: separation_d must be > 0");
    if (!(width_sigma > 0.0))
      throw std::domain_error("WellGeometry: width_sigma must be > 0");
  }

  /// Two-mode sanity: wells should not overlap appreciably.
  bool two_mode_sane() const { return width_sigma <= 0.5 * separation_d; }

  /// Per-axis variance of the well density.
  double density_variance() const { return 0.25 * width_sigma * width_sigma; }
};

enum class GammaBarMethod { Quadrature, ClosedFormApprox };

namespace detail {

/// Per-axis double integral  int int exp(-(y-y')^2 / 4 r_c^2) phi(y) phi(y'-c)
/// for unit Gaussians phi of variance s, evaluated by iterated adaptive
/// quadrature in peak-centered coordinates.
inline double axis_overlap_quadrature(double c, double s, double r_c,
                                      const QuadratureOptions& opts) {
  const double sd = std::sqrt(s);
  const double span = 10.0;
  const double inv4rc2 = 1.0 / (4.0 * r_c * r_c);
  const double norm = 1.0 / std::sqrt(2.0 * constants::pi);

  QuadratureOptions inner_opts = opts;
  inner_opts.rel_tol = 0.1 * opts.rel_tol;

  auto outer = [&](double x) {
    auto inner = [&](double xp) {
      const double delta = sd * (x - xp) - c;
      return norm * std::exp(-0.5 * xp * xp) * std::exp(-delta * delta * inv4rc2);
    };
    const double g = integrate_adaptive(inner, -span, span, 1.0, inner_opts);
    return norm * std::exp(-0.5 * x * x) * g;
  };
  return integrate_adaptive(outer, -span, span, 1.0, opts);
}

/// Same integral in closed form (Gaussian convolution):
///   (1 + s/r_c^2)^{-1/2} exp(-c^2 / (4 (s + r_c^2))).
inline double axis_overlap_closed(double c, double s, double r_c) {
  const double v = s + r_c * r_c;
  return std::sqrt(r_c * r_c / v) * std::exp(-0.25 * c * c / v);
}

}  // namespace detail

/// Exact mode-overlap kernel of the Gaussian well model,
///   gamma_bar = (1 + sigma^2/(4 r_c^2))^{-3/2} (1 - exp(-d^2/(sigma^2 + 4 r_c^2))).
/// Reduces to 1 - exp(-d^2 / 4 r_c^2) as sigma -> 0.
inline double gamma_bar_gaussian_closed(const WellGeometry& geom, double r_c) {
  geom.validate();
  if (!(r_c > 0.0)) throw std::domain_error("gamma_bar: r_c must be > 0");
  const double s = geom.density_variance();
  const double d = geom.separation_d;
  const double a0 = detail::axis_overlap_closed(0.0, s, r_c);
  const double ad = detail::axis_overlap_closed(d, s, r_c);
  return a0 * a0 * (a0 - ad);
}

/// CSL mode-overlap factor
///   gamma_bar = int int exp(-|y-y'|^2/4 r_c^2) n_L(y) (n_L(y') - n_R(y')),
/// over the Gaussian well model. Quadrature evaluates the double integral
/// numerically (the 3D integral factorizes per axis); ClosedFormApprox
/// returns the point-well limit 1 - exp(-d^2 / 4 r_c^2).
inline double gamma_bar(const WellGeometry& geom, double r_c, GammaBarMethod method,
                        const QuadratureOptions& opts = {}) {
  geom.validate();
  if (!(r_c > 0.0)) throw std::domain_error("gamma_bar: r_c must be > 0");
  if (method == GammaBarMethod::ClosedFormApprox) {
    const double x = geom.separation_d / (2.0 * r_c);
    return 1.0 - std::exp(-x * x);
  }
  const double s = geom.density_variance();
  const double a0 = detail::axis_overlap_quadrature(0.0, s, r_c, opts);
  const double ad = detail::axis_overlap_quadrature(geom.separation_d, s, r_c, opts);
  return a0 * a0 * (a0 - ad);
}

/// Uniform unit-sphere plane-wave integral F(z) = int_{|u|=1} du exp(-i u.z)
/// = 4 pi sin(|z|)/|z|, with the removable singularity F(0) = 4 pi. The
/// imaginary part vanishes by parity.
inline double sphere_kernel_F(const Eigen::Vector3d& z) {
  const double r = z.norm();
  if (r < 1e-4) {
    const double r2 = r * r;
    return 4.0 * constants::pi * (1.0 - r2 / 6.0 * (1.0 - r2 / 20.0));
  }
  return 4.0 * constants::pi * std::sin(r) / r;
}

inline double sphere_kernel_F(double z_norm) {
  return sphere_kernel_F(Eigen::Vector3d(z_norm, 0.0, 0.0));
}

/// Spontaneous-emission mode-overlap factor
///   omega_bar = int int Omega(y) Omega(y') F(k (y-y')) n_L(y) (n_L(y') - n_R(y')),
/// [rad^2/s^2]. The Rabi profile is taken along the junction axis x and
/// constant transversally; the transverse Gaussian directions enter through
/// an average of F over the transverse displacement (Rayleigh with per-axis
/// variance 2s). Evaluated on tensor Gauss-Legendre grids refined until the
/// result is stable; failure to stabilize raises numerical_error.
inline double omega_bar(const WellGeometry& geom,
                        const std::function<double(double)>& rabi_profile,
                        double k_resonance, const QuadratureOptions& opts = {}) {
  geom.validate();
  if (!rabi_profile) throw std::domain_error("omega_bar: rabi_profile is required");
  if (k_resonance < 0.0)
    throw std::domain_error("omega_bar: k_resonance must be >= 0");

  const double s = geom.density_variance();
  const double d = geom.separation_d;
  const double sd = std::sqrt(s);
  const double span = 8.0;  // Gaussian support in units of sd
  const double rho_max = 8.0 * std::sqrt(2.0 * s);
  const double norm = 1.0 / std::sqrt(2.0 * constants::pi);
  const double cl = -0.5 * d, cr = 0.5 * d;

  // Node counts start high enough to resolve the plane-wave oscillation over
  // the integration windows.
  const double cycles_x =
      k_resonance * (2.0 * span * sd + d) / (2.0 * constants::pi);
  const double cycles_rho = k_resonance * rho_max / (2.0 * constants::pi);
  int nx = std::max(48, int(16.0 * cycles_x) + 16);
  int nrho = std::max(48, int(16.0 * cycles_rho) + 16);

  double prev = 0.0;
  bool have_prev = false;
  for (int level = 0; level < 4; ++level, nx *= 2, nrho *= 2) {
    std::vector<double> xn, xw, rn, rw;
    detail::gauss_legendre(nx, xn, xw);
    detail::gauss_legendre(nrho, rn, rw);

    auto f_transverse = [&](double dx) {
      if (k_resonance == 0.0) return 4.0 * constants::pi;
      double acc = 0.0;
      for (int r = 0; r < nrho; ++r) {
        const double rho = 0.5 * rho_max * (rn[std::size_t(r)] + 1.0);
        const double w = rho / (2.0 * s) * std::exp(-rho * rho / (4.0 * s));
        acc += rw[std::size_t(r)] * w *
               sphere_kernel_F(k_resonance * std::hypot(dx, rho));
      }
      return 0.5 * rho_max * acc;
    };

    // Row samples phi(x - ca) Omega(x) on the scaled grid for both centers.
    const std::size_t nxs = std::size_t(nx);
    std::vector<double> x_l(nxs, 0.0);
    std::vector<double> g_l(nxs, 0.0);
    std::vector<double> x_r(nxs, 0.0);
    std::vector<double> g_r(nxs, 0.0);
    for (int i = 0; i < nx; ++i) {
      const double xi = span * xn[std::size_t(i)];
      const double w = span * xw[std::size_t(i)] * norm * std::exp(-0.5 * xi * xi);
      x_l[std::size_t(i)] = cl + sd * xi;
      g_l[std::size_t(i)] = w * rabi_profile(x_l[std::size_t(i)]);
      x_r[std::size_t(i)] = cr + sd * xi;
      g_r[std::size_t(i)] = w * rabi_profile(x_r[std::size_t(i)]);
    }

    double t_self = 0.0, t_cross = 0.0;
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < nx; ++j) {
        const double fbar_self = f_transverse(x_l[std::size_t(i)] - x_l[std::size_t(j)]);
        const double fbar_cross = f_transverse(x_l[std::size_t(i)] - x_r[std::size_t(j)]);
        t_self += g_l[std::size_t(i)] * g_l[std::size_t(j)] * fbar_self;
        t_cross += g_l[std::size_t(i)] * g_r[std::size_t(j)] * fbar_cross;
      }
    }

    const double value = t_self - t_cross;
    const double scale = std::abs(t_self) + std::abs(t_cross);
    if (have_prev &&
        std::abs(value - prev) <= opts.rel_tol * std::max(std::abs(value), 1e-7 * scale))
      return value;
    prev = value;
    have_prev = true;
  }
  throw numerical_error(
      "omega_bar: tensor quadrature did not stabilize after 4 refinements");
}

}  // namespace bjj
