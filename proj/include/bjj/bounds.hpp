#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bjj/channels.hpp"
#include "bjj/kernels.hpp"

namespace bjj {

/// One lambda(r_c) boundary; the excluded region is the set of lambda values
/// strictly above the curve.
struct ExclusionCurve {
  std::vector<double> r_c_grid;      ///< [m], strictly increasing
  std::vector<double> lambda_bound;  ///< [1/s], > 0
  std::string label;

  void validate() const {
    if (r_c_grid.size() != lambda_bound.size())
      throw std::domain_error("ExclusionCurve: grid/bound lengths differ");
    for (std::size_t i = 0; i < r_c_grid.size(); ++i) {
      if (i > 0 && !(r_c_grid[i] > r_c_grid[i - 1]))
        throw std::domain_error("ExclusionCurve: r_c grid must be strictly increasing");
      if (!(lambda_bound[i] > 0.0))
        throw std::domain_error("ExclusionCurve: bounds must be > 0");
    }
  }
};

/// Largest collapse rate compatible with a phase state keeping its coherence
/// for t_coh: lambda <= 1 / (t_coh A^2 gamma_bar).
inline double lambda_bound_phase(double t_coh, int nucleons, double gamma_bar) {
  if (!(t_coh > 0.0)) throw std::domain_error("lambda_bound_phase: t_coh must be > 0");
  if (nucleons < 1) throw std::domain_error("lambda_bound_phase: nucleons must be >= 1");
  if (!(gamma_bar > 0.0))
    throw std::domain_error("lambda_bound_phase: gamma_bar must be > 0 (coincident wells)");
  return 1.0 / (t_coh * double(nucleons) * double(nucleons) * gamma_bar);
}

/// Same bound from an N-atom entangled state; the N-particle coherence decays
/// N^2 times faster, so lambda <= 1 / (t_coh N^2 A^2 gamma_bar).
inline double lambda_bound_entangled(double t_coh, std::int64_t n_total, int nucleons,
                                     double gamma_bar) {
  if (n_total < 1)
    throw std::domain_error("lambda_bound_entangled: n_total must be >= 1");
  return lambda_bound_phase(t_coh, nucleons, gamma_bar) /
         (double(n_total) * double(n_total));
}

struct ExclusionScenario {
  double t_coh;                ///< preserved-coherence time [s]
  std::int64_t n_total;        ///< atoms in the entangled state
  int nucleons;                ///< nucleons per atom
  WellGeometry geom;
  GammaBarMethod gamma_method = GammaBarMethod::ClosedFormApprox;
  std::optional<double> gamma_bar_override;  ///< bypasses the kernel evaluation
  std::string label;
};

/// Sweeps lambda_bound_entangled over an r_c grid, recomputing gamma_bar per
/// point unless the scenario pins it to a constant.
inline ExclusionCurve exclusion_curve(const ExclusionScenario& scenario,
                                      const std::vector<double>& r_c_grid) {
  ExclusionCurve curve;
  curve.label = scenario.label;
  curve.r_c_grid = r_c_grid;
  curve.lambda_bound.resize(r_c_grid.size());
  for (std::size_t i = 0; i < r_c_grid.size(); ++i) {
    const double gb = scenario.gamma_bar_override
                          ? *scenario.gamma_bar_override
                          : gamma_bar(scenario.geom, r_c_grid[i], scenario.gamma_method);
    curve.lambda_bound[i] =
        lambda_bound_entangled(scenario.t_coh, scenario.n_total, scenario.nucleons, gb);
  }
  curve.validate();
  return curve;
}

/// Smallest atom number for which the collapse decoherence outruns a
/// competing channel. The NOON collapse rate grows as N^2 while the channel
/// grows linearly in N (loss, three-body) or stays constant (thermal
/// dephasing, phase noise, spontaneous emission), so the verdict always
/// improves with N:
///   LinearInN:   N >= rate / (lambda A^2 gamma_bar)
///   ConstantInN: N >= sqrt(rate / (lambda A^2 gamma_bar)).
inline std::int64_t min_atoms_vs_channel(double channel_rate, ChannelScaling scaling,
                                         double lambda, int nucleons,
                                         double gamma_bar) {
  if (!(lambda > 0.0))
    throw std::domain_error("min_atoms_vs_channel: lambda must be > 0");
  if (channel_rate < 0.0)
    throw std::domain_error("min_atoms_vs_channel: channel_rate must be >= 0");
  if (!(gamma_bar > 0.0))
    throw std::domain_error("min_atoms_vs_channel: gamma_bar must be > 0");
  const double csl = lambda * double(nucleons) * double(nucleons) * gamma_bar;
  double n_min = (scaling == ChannelScaling::LinearInN) ? channel_rate / csl
                                                        : std::sqrt(channel_rate / csl);
  n_min = std::ceil(n_min);
  if (n_min > 9.0e18)
    throw std::overflow_error("min_atoms_vs_channel: required atom number exceeds int64");
  return std::max<std::int64_t>(1, std::int64_t(n_min));
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV export, columns r_c_m, lambda_bound_per_s, label; 17 significant digits.
inline void write_csv(std::ostream& os, std::span<const ExclusionCurve> curves) {
  os << "r_c_m,lambda_bound_per_s,label\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.r_c_grid.size(); ++i)
      os << detail::fmt17(c.r_c_grid[i]) << ',' << detail::fmt17(c.lambda_bound[i])
         << ',' << c.label << '\n';
}

/// JSON export mirroring the CSV content.
inline void write_json(std::ostream& os, std::span<const ExclusionCurve> curves) {
  os << "{\n  \"curves\": [\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    os << "    {\n      \"label\": \"" << c.label << "\",\n      \"points\": [\n";
    for (std::size_t i = 0; i < c.r_c_grid.size(); ++i) {
      os << "        {\"r_c_m\": " << detail::fmt17(c.r_c_grid[i])
         << ", \"lambda_bound_per_s\": " << detail::fmt17(c.lambda_bound[i]) << "}";
      os << (i + 1 < c.r_c_grid.size() ? ",\n" : "\n");
    }
    os << "      ]\n    }" << (k + 1 < curves.size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
}

}  // namespace bjj
