#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bjj/errors.hpp"

namespace bjj {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  int max_depth = 30;
  // Uniform seed panels; interior features narrower than (b-a)/initial_panels
  // would otherwise be invisible to the first Simpson stencil.
  int initial_panels = 16;
};

namespace detail {

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb,
                            double m, double fm, double whole, double eps,
                            int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // The second test stops refinement at the rounding floor of the panel.
  if (std::abs(delta) <= 15.0 * eps ||
      std::abs(delta) <= 8e-16 * (std::abs(left) + std::abs(right) + std::abs(whole)))
    return left + right + delta / 15.0;
  if (depth <= 0)
    throw numerical_error("adaptive_simpson: refinement limit reached without convergence");
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre polynomial.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(std::size_t(n), 0.0);
  weights.assign(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[std::size_t(i)] = x;
    weights[std::size_t(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b], seeded with a uniform
/// composite grid. The tolerance is relative to max(|scale|, first estimate);
/// convergence failure raises numerical_error.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double scale,
                          const QuadratureOptions& opts = {}) {
  if (!(b > a)) return 0.0;
  const int k = std::max(1, opts.initial_panels);
  const std::size_t nk = std::size_t(k);
  std::vector<double> edges(nk + 1, 0.0);
  std::vector<double> f_edges(nk + 1, 0.0);
  std::vector<double> mids(nk, 0.0);
  std::vector<double> f_mids(nk, 0.0);
  std::vector<double> panel(nk, 0.0);
  double whole = 0.0;
  for (int i = 0; i <= k; ++i) {
    edges[std::size_t(i)] = a + (b - a) * double(i) / double(k);
    f_edges[std::size_t(i)] = f(edges[std::size_t(i)]);
  }
  for (int i = 0; i < k; ++i) {
    mids[std::size_t(i)] = 0.5 * (edges[std::size_t(i)] + edges[std::size_t(i) + 1]);
    f_mids[std::size_t(i)] = f(mids[std::size_t(i)]);
    panel[std::size_t(i)] = (edges[std::size_t(i) + 1] - edges[std::size_t(i)]) / 6.0 *
                            (f_edges[std::size_t(i)] + 4.0 * f_mids[std::size_t(i)] +
                             f_edges[std::size_t(i) + 1]);
    whole += panel[std::size_t(i)];
  }
  const double eps = opts.rel_tol * std::max(std::abs(scale), std::abs(whole));
  if (eps == 0.0) return whole;
  double total = 0.0;
  for (int i = 0; i < k; ++i)
    total += detail::adaptive_simpson_rec(
        f, edges[std::size_t(i)], f_edges[std::size_t(i)], edges[std::size_t(i) + 1],
        f_edges[std::size_t(i) + 1], mids[std::size_t(i)], f_mids[std::size_t(i)],
        panel[std::size_t(i)], eps / double(k), opts.max_depth);
  return total;
}

}  // namespace bjj
