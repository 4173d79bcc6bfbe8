// Command-line front end: JSON scenario configs in, plot-ready CSV/JSON out.
//
// Exit codes: 0 success, 2 config schema violation (field path on stderr),
// 3 numerical failure, 1 anything else. Errors are emitted as one JSON
// object on stderr. For a fixed config (and seed) the output files are
// byte-identical across runs and thread counts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bjj/bjj.hpp"

namespace {

using nlohmann::json;

struct SchemaError : std::runtime_error {
  std::string field;
  SchemaError(std::string f, const std::string& msg)
      : std::runtime_error(msg), field(std::move(f)) {}
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const json* find_node(const json& root, const std::string& path) {
  const json* cur = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos
                                                   ? std::string::npos
                                                   : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

double require_number(const json& root, const std::string& path) {
  const json* node = find_node(root, path);
  if (!node) throw SchemaError(path, "missing required field");
  if (!node->is_number()) throw SchemaError(path, "expected a number");
  return node->get<double>();
}

double optional_number(const json& root, const std::string& path, double fallback) {
  const json* node = find_node(root, path);
  if (!node) return fallback;
  if (!node->is_number()) throw SchemaError(path, "expected a number");
  return node->get<double>();
}

std::int64_t require_integer(const json& root, const std::string& path) {
  const json* node = find_node(root, path);
  if (!node) throw SchemaError(path, "missing required field");
  if (node->is_number_integer()) return node->get<std::int64_t>();
  if (node->is_number()) {
    const double v = node->get<double>();
    if (v == std::floor(v) && std::abs(v) < 9.2e18) return std::int64_t(v);
  }
  throw SchemaError(path, "expected an integer");
}

std::int64_t optional_integer(const json& root, const std::string& path,
                              std::int64_t fallback) {
  return find_node(root, path) ? require_integer(root, path) : fallback;
}

std::string require_string(const json& root, const std::string& path) {
  const json* node = find_node(root, path);
  if (!node) throw SchemaError(path, "missing required field");
  if (!node->is_string()) throw SchemaError(path, "expected a string");
  return node->get<std::string>();
}

std::string optional_string(const json& root, const std::string& path,
                            const std::string& fallback) {
  return find_node(root, path) ? require_string(root, path) : fallback;
}

// ---------------------------------------------------------------------------
// Shared config fragments

struct GeometryConfig {
  bjj::WellGeometry geom{1e-5, 1e-6};
  bjj::GammaBarMethod method = bjj::GammaBarMethod::ClosedFormApprox;
  std::optional<double> gamma_bar_override;
};

GeometryConfig read_geometry(const json& root, const std::string& prefix) {
  GeometryConfig g;
  g.geom.separation_d = require_number(root, prefix + ".d_m");
  g.geom.width_sigma = require_number(root, prefix + ".sigma_m");
  const std::string method =
      optional_string(root, prefix + ".gamma_bar_method", "closed-form-approx");
  if (method == "closed-form-approx")
    g.method = bjj::GammaBarMethod::ClosedFormApprox;
  else if (method == "quadrature")
    g.method = bjj::GammaBarMethod::Quadrature;
  else
    throw SchemaError(prefix + ".gamma_bar_method",
                      "expected 'closed-form-approx' or 'quadrature'");
  if (find_node(root, prefix + ".gamma_bar_override"))
    g.gamma_bar_override = require_number(root, prefix + ".gamma_bar_override");
  try {
    g.geom.validate();
  } catch (const std::domain_error& e) {
    throw SchemaError(prefix, e.what());
  }
  return g;
}

bjj::ModelParams read_params(const json& root, const GeometryConfig& g) {
  bjj::ModelParams p;
  p.n_total = require_integer(root, "params.n_atoms");
  p.nucleons = int(require_integer(root, "params.nucleons_a"));
  p.u_over_hbar = optional_number(root, "params.u_over_hbar_rad_per_s", 0.0);
  p.j_over_hbar = optional_number(root, "params.j_over_hbar_rad_per_s", 0.0);
  p.lambda = require_number(root, "params.lambda_per_s");
  p.r_c = require_number(root, "params.r_c_m");
  p.gamma_bar = g.gamma_bar_override
                    ? *g.gamma_bar_override
                    : bjj::gamma_bar(g.geom, p.r_c, g.method);
  try {
    p.validate();
  } catch (const std::domain_error& e) {
    throw SchemaError("params", e.what());
  }
  return p;
}

struct ChannelConfig {
  double loss = 0.0;         // [1/s]
  double three_body = 0.0;   // per atom [1/s]
  double phase_noise_d = 0.0;  // Delta^2(t) = D t  [1/s]
  double spont = 0.0;        // Gamma Omega_bar / 4 delta^2  [1/s]

  double dephasing_rate() const { return 0.5 * phase_noise_d + spont; }
  double loss_rate() const { return loss + three_body; }
  bool any_loss() const { return loss_rate() > 0.0; }
};

ChannelConfig read_channels(const json& root) {
  ChannelConfig c;
  c.loss = optional_number(root, "channels.loss_per_s", 0.0);
  c.three_body = optional_number(root, "channels.three_body_per_atom_per_s", 0.0);
  c.phase_noise_d =
      optional_number(root, "channels.phase_noise_variance_rate_per_s", 0.0);
  c.spont = optional_number(root, "channels.spont_rate_eff_per_s", 0.0);
  if (c.loss < 0.0) throw SchemaError("channels.loss_per_s", "must be >= 0");
  if (c.three_body < 0.0)
    throw SchemaError("channels.three_body_per_atom_per_s", "must be >= 0");
  if (c.phase_noise_d < 0.0)
    throw SchemaError("channels.phase_noise_variance_rate_per_s", "must be >= 0");
  if (c.spont < 0.0) throw SchemaError("channels.spont_rate_eff_per_s", "must be >= 0");
  return c;
}

struct StateConfig {
  std::string kind;  // phase | noon | superposition
  double phi = 0.0;
  double beta = 0.0;
};

StateConfig read_state(const json& root) {
  StateConfig s;
  s.kind = require_string(root, "state.kind");
  if (s.kind != "phase" && s.kind != "noon" && s.kind != "superposition")
    throw SchemaError("state.kind", "expected 'phase', 'noon' or 'superposition'");
  s.phi = optional_number(root, "state.phi_rad", 0.0);
  s.beta = optional_number(root, "state.beta_rad", 0.0);
  return s;
}

bjj::TwoModeState build_state(const StateConfig& s, std::int64_t n) {
  if (n > 128)
    throw SchemaError("params.n_atoms",
                      "matrix methods support n_atoms <= 128; use method 'closed-form'");
  const int ni = int(n);
  if (s.kind == "phase") return bjj::phase_state(ni, s.phi);
  if (s.kind == "noon") return bjj::noon_state(ni);
  return bjj::superposition_state(ni, s.phi, s.beta);
}

struct TimeGrid {
  std::vector<double> times;
};

TimeGrid read_times(const json& root) {
  TimeGrid g;
  const double t0 = optional_number(root, "times.t_start_s", 0.0);
  const double t1 = require_number(root, "times.t_end_s");
  const std::int64_t n = require_integer(root, "times.num_points");
  if (t0 < 0.0) throw SchemaError("times.t_start_s", "must be >= 0");
  if (!(t1 > t0)) throw SchemaError("times.t_end_s", "must exceed t_start_s");
  if (n < 2 || n > 1000000) throw SchemaError("times.num_points", "expected 2..1e6");
  g.times.resize(std::size_t(n));
  for (std::int64_t i = 0; i < n; ++i)
    g.times[std::size_t(i)] = t0 + (t1 - t0) * double(i) / double(n - 1);
  return g;
}

// ---------------------------------------------------------------------------
// Output helpers

struct OutputContext {
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::uint64_t seed = 12345;
};

std::ofstream open_output(const OutputContext& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  std::ofstream os(ctx.out_dir / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + name);
  return os;
}

void header_line(std::ostream& os, const std::string& key, const std::string& value) {
  os << "# " << key << " = " << value << "\n";
}

void header_line(std::ostream& os, const std::string& key, double value) {
  header_line(os, key, fmt17(value));
}

// Tiny JSON writer with fixed key order and 17-significant-digit numbers.
class JsonWriter {
 public:
  JsonWriter& field(const std::string& key, const std::string& value) {
    entries_.push_back("\"" + key + "\": \"" + value + "\"");
    return *this;
  }
  JsonWriter& field(const std::string& key, double value) {
    entries_.push_back("\"" + key + "\": " + fmt17(value));
    return *this;
  }
  JsonWriter& field(const std::string& key, std::int64_t value) {
    entries_.push_back("\"" + key + "\": " + std::to_string(value));
    return *this;
  }
  JsonWriter& field(const std::string& key, bool value) {
    entries_.push_back(std::string("\"") + key + "\": " + (value ? "true" : "false"));
    return *this;
  }
  JsonWriter& raw(const std::string& key, const std::string& raw_value) {
    entries_.push_back("\"" + key + "\": " + raw_value);
    return *this;
  }
  std::string str(int indent = 0) const {
    const std::string pad(std::size_t(indent), ' ');
    const std::string inner_pad(std::size_t(indent) + 2, ' ');
    std::string out = "{\n";
    for (std::size_t i = 0; i < entries_.size(); ++i)
      out += inner_pad + entries_[i] + (i + 1 < entries_.size() ? ",\n" : "\n");
    out += pad + "}";
    return out;
  }

 private:
  std::vector<std::string> entries_;
};

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = std::min<unsigned>(threads, unsigned(count));
  std::vector<std::future<void>> futs;
  futs.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w)
    futs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    }));
  for (auto& f : futs) f.get();
}

// ---------------------------------------------------------------------------
// Subcommands

void echo_common_headers(std::ostream& os, const bjj::ModelParams& p,
                         const GeometryConfig& g) {
  header_line(os, "n_atoms", std::to_string(p.n_total));
  header_line(os, "nucleons_a", std::to_string(p.nucleons));
  header_line(os, "u_over_hbar_rad_per_s", p.u_over_hbar);
  header_line(os, "j_over_hbar_rad_per_s", p.j_over_hbar);
  header_line(os, "lambda_per_s", p.lambda);
  header_line(os, "r_c_m", p.r_c);
  header_line(os, "d_m", g.geom.separation_d);
  header_line(os, "sigma_m", g.geom.width_sigma);
  header_line(os, "gamma_bar", p.gamma_bar);
  header_line(os, "csl_dephasing_rate_per_s", p.csl_rate());
}

void run_evolve(const json& cfg, const OutputContext& ctx) {
  const auto geometry = read_geometry(cfg, "geometry");
  const auto params = read_params(cfg, geometry);
  const auto state = read_state(cfg);
  const auto channels = read_channels(cfg);
  const auto grid = read_times(cfg);
  const std::string observable =
      optional_string(cfg, "observable", "n-particle-coherence");
  const std::string method = optional_string(cfg, "method", "closed-form");
  if (observable != "phase-coherence" && observable != "n-particle-coherence")
    throw SchemaError("observable",
                      "expected 'phase-coherence' or 'n-particle-coherence'");
  if (method != "closed-form" && method != "analytic" && method != "rk4")
    throw SchemaError("method", "expected 'closed-form', 'analytic' or 'rk4'");

  auto os = open_output(ctx, "evolve.csv");
  header_line(os, "subcommand", "evolve");
  echo_common_headers(os, params, geometry);
  header_line(os, "state_kind", state.kind);
  header_line(os, "state_phi_rad", state.phi);
  header_line(os, "state_beta_rad", state.beta);
  header_line(os, "observable", observable);
  header_line(os, "method", method);
  header_line(os, "loss_per_s", channels.loss);
  header_line(os, "three_body_per_atom_per_s", channels.three_body);
  header_line(os, "phase_noise_variance_rate_per_s", channels.phase_noise_d);
  header_line(os, "spont_rate_eff_per_s", channels.spont);

  const double n = double(params.n_total);

  if (method == "closed-form") {
    if (params.j_over_hbar != 0.0)
      throw SchemaError("params.j_over_hbar_rad_per_s",
                        "closed-form evolution requires J = 0; use method 'rk4'");
    if (observable == "phase-coherence") {
      if (state.kind != "phase")
        throw SchemaError("state.kind",
                          "closed-form phase coherence applies to the phase state");
      if (channels.any_loss())
        throw SchemaError("channels",
                          "closed-form phase coherence supports dephasing-type "
                          "channels only; use method 'rk4'");
      os << "t_s,value_re,value_im,value_abs,gamma_t\n";
      for (double t : grid.times) {
        const bjj::Complex v = bjj::phase_coherence_closed_form(params, state.phi, t) *
                               std::exp(-channels.dephasing_rate() * t);
        const double gamma_t = std::abs(v) / (0.5 * n);
        os << fmt17(t) << ',' << fmt17(v.real()) << ',' << fmt17(v.imag()) << ','
           << fmt17(std::abs(v)) << ',' << fmt17(gamma_t) << '\n';
      }
    } else {
      // Normalized N-particle coherence; the Kerr phases cancel on the
      // corner element, so the trajectory is the real product of the
      // collapse, dephasing and loss exponentials.
      os << "t_s,gamma_t\n";
      const double dephase = params.csl_rate() + channels.dephasing_rate();
      for (double t : grid.times) {
        const double gamma_t =
            std::exp(-dephase * n * n * t - channels.loss_rate() * n * t);
        os << fmt17(t) << ',' << fmt17(gamma_t) << '\n';
      }
    }
    return;
  }

  // Matrix methods.
  const auto psi = build_state(state, params.n_total);
  const auto rho0 = bjj::DensityMatrix::from_pure(psi);
  auto observe = [&](const bjj::DensityMatrix& rho) {
    return observable == "phase-coherence" ? bjj::phase_coherence(rho)
                                           : bjj::n_particle_coherence(rho);
  };
  if (observable == "n-particle-coherence" && params.n_total > 170)
    throw SchemaError("params.n_atoms",
                      "N! overflows above 170; use method 'closed-form'");

  std::vector<bjj::Complex> values(grid.times.size());
  if (method == "analytic") {
    if (params.j_over_hbar != 0.0)
      throw SchemaError("params.j_over_hbar_rad_per_s",
                        "the analytic propagator requires J = 0; use method 'rk4'");
    parallel_for(grid.times.size(), ctx.threads, [&](std::size_t i) {
      const double t = grid.times[i];
      auto rho = bjj::evolve_csl_analytic(rho0, params, t);
      if (channels.dephasing_rate() > 0.0)
        rho = bjj::apply_dephasing_map(rho, channels.dephasing_rate() * t);
      bjj::Complex v = observe(rho);
      v *= std::exp(-channels.loss_rate() * n * t);
      values[i] = v;
    });
  } else {
    std::vector<bjj::EvolutionChannel> extra;
    if (channels.dephasing_rate() > 0.0)
      extra.push_back({bjj::ChannelKind::Dephasing, channels.dephasing_rate()});
    if (channels.loss_rate() > 0.0)
      extra.push_back({bjj::ChannelKind::Loss, channels.loss_rate()});
    const double dt_cfg = optional_number(cfg, "dt_s", 0.0);
    bjj::DensityMatrix rho = rho0;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < grid.times.size(); ++i) {
      const double seg = grid.times[i] - t_prev;
      if (seg > 0.0) {
        double dt = dt_cfg > 0.0 ? dt_cfg
                                 : bjj::default_time_step(params, extra, seg);
        dt = std::min(dt, seg);
        rho = bjj::integrate_master_equation(rho, params, extra, seg, dt);
      }
      values[i] = observe(rho);
      t_prev = grid.times[i];
    }
  }

  os << "t_s,value_re,value_im,value_abs,gamma_t\n";
  const double scale = std::abs(values.front());
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const bjj::Complex v = values[i];
    const double gamma_t = scale > 0.0 ? std::abs(v) / scale : 0.0;
    os << fmt17(grid.times[i]) << ',' << fmt17(v.real()) << ',' << fmt17(v.imag())
       << ',' << fmt17(std::abs(v)) << ',' << fmt17(gamma_t) << '\n';
  }
}

void run_bounds(const json& cfg, const OutputContext& ctx) {
  const json* grid_node = find_node(cfg, "r_c_grid");
  if (!grid_node) throw SchemaError("r_c_grid", "missing required field");
  const double r_min = require_number(cfg, "r_c_grid.min_m");
  const double r_max = require_number(cfg, "r_c_grid.max_m");
  const std::int64_t n_pts = require_integer(cfg, "r_c_grid.num_points");
  const std::string spacing = optional_string(cfg, "r_c_grid.spacing", "log");
  if (!(r_min > 0.0)) throw SchemaError("r_c_grid.min_m", "must be > 0");
  if (!(r_max > r_min)) throw SchemaError("r_c_grid.max_m", "must exceed min_m");
  if (n_pts < 2 || n_pts > 100000)
    throw SchemaError("r_c_grid.num_points", "expected 2..1e5");
  if (spacing != "log" && spacing != "linear")
    throw SchemaError("r_c_grid.spacing", "expected 'log' or 'linear'");

  std::vector<double> grid(static_cast<std::size_t>(n_pts), 0.0);
  for (std::int64_t i = 0; i < n_pts; ++i) {
    const double f = double(i) / double(n_pts - 1);
    grid[std::size_t(i)] = spacing == "log"
                               ? r_min * std::pow(r_max / r_min, f)
                               : r_min + (r_max - r_min) * f;
  }

  const json* scen_node = find_node(cfg, "scenarios");
  if (!scen_node || !scen_node->is_array() || scen_node->empty())
    throw SchemaError("scenarios", "expected a nonempty array");

  std::vector<bjj::ExclusionScenario> scenarios;
  for (std::size_t k = 0; k < scen_node->size(); ++k) {
    const json& s = (*scen_node)[k];
    const std::string prefix = "scenarios[" + std::to_string(k) + "]";
    auto local = [&](const char* key) { return prefix + "." + key; };
    bjj::ExclusionScenario scenario;
    if (!s.contains("t_coh_s") || !s["t_coh_s"].is_number())
      throw SchemaError(local("t_coh_s"), "expected a number");
    scenario.t_coh = s["t_coh_s"].get<double>();
    if (!s.contains("n_atoms")) throw SchemaError(local("n_atoms"), "missing");
    scenario.n_total = s["n_atoms"].get<std::int64_t>();
    if (!s.contains("nucleons_a")) throw SchemaError(local("nucleons_a"), "missing");
    scenario.nucleons = s["nucleons_a"].get<int>();
    if (!s.contains("d_m") || !s.contains("sigma_m"))
      throw SchemaError(prefix, "needs d_m and sigma_m");
    scenario.geom = bjj::WellGeometry{s["d_m"].get<double>(), s["sigma_m"].get<double>()};
    const std::string method =
        s.contains("gamma_bar_method") ? s["gamma_bar_method"].get<std::string>()
                                       : "closed-form-approx";
    if (method == "closed-form-approx")
      scenario.gamma_method = bjj::GammaBarMethod::ClosedFormApprox;
    else if (method == "quadrature")
      scenario.gamma_method = bjj::GammaBarMethod::Quadrature;
    else
      throw SchemaError(local("gamma_bar_method"),
                        "expected 'closed-form-approx' or 'quadrature'");
    if (s.contains("gamma_bar_override"))
      scenario.gamma_bar_override = s["gamma_bar_override"].get<double>();
    scenario.label = s.contains("label") ? s["label"].get<std::string>()
                                         : "scenario-" + std::to_string(k);
    try {
      scenario.geom.validate();
    } catch (const std::domain_error& e) {
      throw SchemaError(prefix, e.what());
    }
    scenarios.push_back(std::move(scenario));
  }

  std::vector<bjj::ExclusionCurve> curves(scenarios.size());
  parallel_for(scenarios.size(), ctx.threads, [&](std::size_t i) {
    curves[i] = bjj::exclusion_curve(scenarios[i], grid);
  });

  auto csv = open_output(ctx, "bounds.csv");
  header_line(csv, "subcommand", "bounds");
  header_line(csv, "r_c_min_m", r_min);
  header_line(csv, "r_c_max_m", r_max);
  header_line(csv, "num_points", std::to_string(n_pts));
  header_line(csv, "spacing", spacing);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    std::ostringstream desc;
    desc << "label=" << s.label << " t_coh_s=" << fmt17(s.t_coh)
         << " n_atoms=" << s.n_total << " nucleons_a=" << s.nucleons
         << " d_m=" << fmt17(s.geom.separation_d)
         << " sigma_m=" << fmt17(s.geom.width_sigma);
    header_line(csv, "scenario_" + std::to_string(i), desc.str());
  }
  bjj::write_csv(csv, curves);

  auto js = open_output(ctx, "bounds.json");
  bjj::write_json(js, curves);
}

void run_rates(const json& cfg, const OutputContext& ctx) {
  bjj::GasParams gas;
  if (find_node(cfg, "gas.coupling_g_j_m3")) {
    gas.coupling_g = require_number(cfg, "gas.coupling_g_j_m3");
  } else {
    const double a_s = require_number(cfg, "gas.a_s_m");
    const double mass = require_number(cfg, "gas.mass_kg");
    gas.coupling_g = bjj::GasParams::coupling_from_scattering(a_s, mass);
  }
  gas.n_therm = optional_number(cfg, "gas.n_therm_per_m3", 0.0);
  gas.n_bec = optional_number(cfg, "gas.n_bec_per_m3", 0.0);
  gas.n_therm_atoms = optional_integer(cfg, "gas.n_therm_atoms", 1);
  gas.temperature_ratio = optional_number(cfg, "gas.temperature_ratio", 0.0);
  try {
    gas.validate();
    if (gas.n_therm_atoms < 1) throw std::domain_error("n_therm_atoms must be >= 1");
  } catch (const std::domain_error& e) {
    throw SchemaError("gas", e.what());
  }

  const double lambda = require_number(cfg, "csl.lambda_per_s");
  const int nucleons = int(require_integer(cfg, "csl.nucleons_a"));
  const double gamma_bar = optional_number(cfg, "csl.gamma_bar", 1.0);
  if (!(lambda > 0.0)) throw SchemaError("csl.lambda_per_s", "must be > 0");

  const double lambda_loss =
      find_node(cfg, "lambda_loss_override_per_s")
          ? require_number(cfg, "lambda_loss_override_per_s")
          : bjj::rate_loss(gas);
  const double lambda_dec = bjj::rate_dec(lambda_loss, gas.n_therm_atoms);

  double three_body = 0.0;
  if (find_node(cfg, "gas.a_s_m") && gas.n_bec > 0.0) {
    three_body = bjj::rate_three_body(require_number(cfg, "gas.a_s_m"),
                                      require_number(cfg, "gas.mass_kg"), gas.n_bec);
  }

  const double phase_noise_d =
      optional_number(cfg, "phase_noise_variance_rate_per_s", 0.0);

  double spont_rate = 0.0;
  bool have_spont = false;
  if (find_node(cfg, "spont")) {
    const double gamma_sp = require_number(cfg, "spont.gamma_sp_per_s");
    const double delta = require_number(cfg, "spont.delta_rad_per_s");
    const double omega_bar = require_number(cfg, "spont.omega_bar_rad2_per_s2");
    if (delta == 0.0) throw SchemaError("spont.delta_rad_per_s", "must be nonzero");
    spont_rate = bjj::spont_emission_strength(gamma_sp, delta, omega_bar, 1.0);
    have_spont = true;
  }

  const double csl_rate =
      lambda * double(nucleons) * double(nucleons) * gamma_bar;

  JsonWriter rates;
  rates.field("lambda_loss_per_s", lambda_loss)
      .field("lambda_dec_per_s", lambda_dec)
      .field("lambda_three_body_per_atom_per_s", three_body)
      .field("phase_noise_variance_rate_per_s", phase_noise_d)
      .field("spont_rate_eff_per_s", spont_rate);

  JsonWriter min_atoms;
  min_atoms.field("vs_loss", bjj::min_atoms_vs_channel(
                                 lambda_loss, bjj::ChannelScaling::LinearInN, lambda,
                                 nucleons, gamma_bar));
  if (three_body > 0.0)
    min_atoms.field("vs_three_body",
                    bjj::min_atoms_vs_channel(three_body,
                                              bjj::ChannelScaling::LinearInN, lambda,
                                              nucleons, gamma_bar));
  min_atoms.field("vs_thermal_dephasing",
                  bjj::min_atoms_vs_channel(lambda_dec,
                                            bjj::ChannelScaling::ConstantInN, lambda,
                                            nucleons, gamma_bar));
  if (phase_noise_d > 0.0)
    min_atoms.field("vs_phase_noise",
                    bjj::min_atoms_vs_channel(0.5 * phase_noise_d,
                                              bjj::ChannelScaling::ConstantInN, lambda,
                                              nucleons, gamma_bar));
  if (have_spont)
    min_atoms.field("vs_spontaneous_emission",
                    bjj::min_atoms_vs_channel(spont_rate,
                                              bjj::ChannelScaling::ConstantInN, lambda,
                                              nucleons, gamma_bar));

  JsonWriter top;
  top.field("subcommand", std::string("rates"))
      .field("coupling_g_j_m3", gas.coupling_g)
      .field("n_therm_per_m3", gas.n_therm)
      .field("n_bec_per_m3", gas.n_bec)
      .field("n_therm_atoms", gas.n_therm_atoms)
      .field("lambda_per_s", lambda)
      .field("nucleons_a", std::int64_t(nucleons))
      .field("gamma_bar", gamma_bar)
      .field("csl_noon_rate_prefactor_per_s", csl_rate)
      .raw("rates", rates.str(2))
      .raw("min_atoms", min_atoms.str(2));

  auto os = open_output(ctx, "rates.json");
  os << top.str() << "\n";
}

void run_gamma_bar(const json& cfg, const OutputContext& ctx) {
  const double d = require_number(cfg, "d_m");
  const double sigma = require_number(cfg, "sigma_m");
  const double r_c = require_number(cfg, "r_c_m");
  const std::string method = optional_string(cfg, "method", "both");
  if (method != "both" && method != "quadrature" && method != "closed-form-approx")
    throw SchemaError("method", "expected 'both', 'quadrature' or 'closed-form-approx'");
  bjj::WellGeometry geom{d, sigma};
  try {
    geom.validate();
    if (!(r_c > 0.0)) throw std::domain_error("r_c_m must be > 0");
  } catch (const std::domain_error& e) {
    throw SchemaError("(inputs)", e.what());
  }

  JsonWriter out;
  out.field("subcommand", std::string("gamma-bar"))
      .field("d_m", d)
      .field("sigma_m", sigma)
      .field("r_c_m", r_c)
      .field("two_mode_sane", geom.two_mode_sane());
  if (method != "quadrature")
    out.field("gamma_bar_closed_form_approx",
              bjj::gamma_bar(geom, r_c, bjj::GammaBarMethod::ClosedFormApprox));
  if (method != "closed-form-approx") {
    out.field("gamma_bar_quadrature",
              bjj::gamma_bar(geom, r_c, bjj::GammaBarMethod::Quadrature));
    out.field("gamma_bar_gaussian_closed", bjj::gamma_bar_gaussian_closed(geom, r_c));
  }
  auto os = open_output(ctx, "gamma_bar.json");
  os << out.str() << "\n";
}

void run_momentum(const json& cfg, const OutputContext& ctx) {
  const auto geometry = read_geometry(cfg, "geometry");
  const auto params = read_params(cfg, geometry);
  const auto state = read_state(cfg);
  const auto channels = read_channels(cfg);
  const double t = optional_number(cfg, "time_s", 0.0);
  if (t < 0.0) throw SchemaError("time_s", "must be >= 0");
  if (params.j_over_hbar != 0.0)
    throw SchemaError("params.j_over_hbar_rad_per_s",
                      "momentum profiles are evolved analytically and require J = 0");

  const double span = optional_number(cfg, "p_grid.p_max_over_sigma_p", 4.0);
  const std::int64_t n_pts = optional_integer(cfg, "p_grid.num_points", 801);
  if (!(span > 0.0)) throw SchemaError("p_grid.p_max_over_sigma_p", "must be > 0");
  if (n_pts < 3 || n_pts > 1000000)
    throw SchemaError("p_grid.num_points", "expected 3..1e6");

  const auto psi = build_state(state, params.n_total);
  auto rho = bjj::evolve_csl_analytic(bjj::DensityMatrix::from_pure(psi), params, t);
  if (channels.dephasing_rate() > 0.0)
    rho = bjj::apply_dephasing_map(rho, channels.dephasing_rate() * t);
  // Loss-type channels scale the whole fixed-N block uniformly and do not
  // change the fringe contrast; they are omitted here.

  const double sigma_p = bjj::constants::hbar / geometry.geom.width_sigma;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(Eigen::Index(n_pts),
                                                    -span * sigma_p, span * sigma_p);
  Eigen::VectorXd density(grid.size());
  parallel_for(std::size_t(grid.size()), ctx.threads, [&](std::size_t i) {
    Eigen::VectorXd one(1);
    one(0) = grid(Eigen::Index(i));
    density(Eigen::Index(i)) = bjj::momentum_density(rho, one, geometry.geom)(0);
  });

  const double contrast = bjj::fringe_contrast(density, grid, geometry.geom);
  const bjj::Complex coh = bjj::phase_coherence(rho);

  auto os = open_output(ctx, "momentum.csv");
  header_line(os, "subcommand", "momentum");
  echo_common_headers(os, params, geometry);
  header_line(os, "state_kind", state.kind);
  header_line(os, "state_phi_rad", state.phi);
  header_line(os, "time_s", t);
  header_line(os, "sigma_p_kg_m_per_s", sigma_p);
  header_line(os, "fringe_period_kg_m_per_s",
              2.0 * bjj::constants::pi * bjj::constants::hbar / geometry.geom.separation_d);
  header_line(os, "phase_coherence_re", coh.real());
  header_line(os, "phase_coherence_im", coh.imag());
  header_line(os, "fringe_contrast", contrast);
  os << "p_kg_m_per_s,density_per_kg_m_per_s\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    os << fmt17(grid(i)) << ',' << fmt17(density(i)) << '\n';
}

void run_validate(const json& cfg, const OutputContext& ctx) {
  std::vector<int> n_values = {2, 4, 6};
  if (const json* node = find_node(cfg, "n_values")) {
    if (!node->is_array() || node->empty())
      throw SchemaError("n_values", "expected a nonempty array of integers");
    n_values.clear();
    for (const auto& v : *node) n_values.push_back(v.get<int>());
  }
  const std::int64_t cases = optional_integer(cfg, "cases_per_n", 20);
  const double t_budget = optional_number(cfg, "t_max_rate_product", 5.0);
  const double tolerance = optional_number(cfg, "tolerance", 1e-8);
  if (cases < 1 || cases > 10000) throw SchemaError("cases_per_n", "expected 1..1e4");

  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u_dist(0.1, 2.0);
  std::uniform_real_distribution<double> rate_dist(0.01, 1.0);
  std::uniform_real_distribution<double> frac(0.2, 1.0);

  double worst = 0.0;
  std::int64_t total = 0;
  for (int n : n_values) {
    if (n < 1 || n > 64) throw SchemaError("n_values", "entries must be in 1..64");
    for (std::int64_t c = 0; c < cases; ++c) {
      Eigen::MatrixXcd g(n + 1, n + 1);
      for (int r = 0; r <= n; ++r)
        for (int cc = 0; cc <= n; ++cc)
          g(r, cc) = bjj::Complex(gauss(rng), gauss(rng));
      Eigen::MatrixXcd w = g * g.adjoint();
      w /= w.trace();
      const bjj::DensityMatrix rho0(n, std::move(w));

      bjj::ModelParams params;
      params.n_total = n;
      params.nucleons = 1;
      params.u_over_hbar = u_dist(rng);
      params.lambda = rate_dist(rng);
      params.gamma_bar = 1.0;

      const double max_rate =
          std::max(params.u_over_hbar, params.lambda) * double(n) * double(n);
      const double t = frac(rng) * t_budget / max_rate;
      const auto ref = bjj::evolve_csl_analytic(rho0, params, t);
      const auto num = bjj::integrate_master_equation(
          rho0, params, {}, t, bjj::default_time_step(params, t));
      worst = std::max(worst,
                       (ref.entries() - num.entries()).cwiseAbs().maxCoeff());
      ++total;
    }
  }

  const bool pass = worst <= tolerance;
  JsonWriter out;
  out.field("subcommand", std::string("validate"))
      .field("seed", std::int64_t(ctx.seed))
      .field("cases", total)
      .field("tolerance", tolerance)
      .field("max_abs_deviation", worst)
      .field("pass", pass);
  auto os = open_output(ctx, "validate.json");
  os << out.str() << "\n";
  if (!pass)
    throw bjj::numerical_error("validate: max deviation " + fmt17(worst) +
                               " exceeds tolerance " + fmt17(tolerance));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-mode Bose Josephson junction collapse and decoherence toolkit"};
  app.fallthrough();
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 0;
  std::uint64_t seed = 12345;
  app.add_option("--config", config_path, "JSON scenario config")->required();
  app.add_option("--out", out_dir, "output directory (default: current)");
  app.add_option("--threads", threads, "worker threads for sweeps");
  app.add_option("--seed", seed, "RNG seed (validate subcommand)");

  auto* evolve = app.add_subcommand("evolve", "coherence time series");
  auto* bounds = app.add_subcommand("bounds", "lambda-r_c exclusion curves");
  auto* rates = app.add_subcommand("rates", "decoherence-rate report");
  auto* gamma = app.add_subcommand("gamma-bar", "mode-overlap kernel value");
  auto* momentum = app.add_subcommand("momentum", "interference fringe profile");
  auto* validate = app.add_subcommand("validate", "analytic-vs-integrator check");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  if (threads == 0) {
    if (const char* env = std::getenv("BJJ_CSL_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) threads = unsigned(v);
    }
    if (threads == 0) threads = 1;
  }

  OutputContext ctx{std::filesystem::path(out_dir), threads, seed};

  try {
    json cfg;
    {
      std::ifstream is(config_path);
      if (!is) throw std::runtime_error("cannot read config file: " + config_path);
      try {
        cfg = json::parse(is);
      } catch (const json::parse_error& e) {
        throw SchemaError("(root)", std::string("config is not valid JSON: ") + e.what());
      }
    }

    if (evolve->parsed()) run_evolve(cfg, ctx);
    else if (bounds->parsed()) run_bounds(cfg, ctx);
    else if (rates->parsed()) run_rates(cfg, ctx);
    else if (gamma->parsed()) run_gamma_bar(cfg, ctx);
    else if (momentum->parsed()) run_momentum(cfg, ctx);
    else if (validate->parsed()) run_validate(cfg, ctx);
    return 0;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "{\"error\": \"schema\", \"field\": \"%s\", \"message\": \"%s\"}\n",
                 e.field.c_str(), e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "{\"error\": \"schema\", \"field\": \"(config)\", \"message\": \"%s\"}\n",
                 e.what());
    return 2;
  } catch (const bjj::numerical_error& e) {
    std::fprintf(stderr, "{\"error\": \"numerical\", \"message\": \"%s\"}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\": \"internal\", \"message\": \"%s\"}\n", e.what());
    return 1;
  }
}
