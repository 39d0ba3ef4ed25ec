// Copyright 2026 The selfkerr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line front end. All frequencies and rates given on the command
// line are in units of gamma; --gamma only rescales what is printed.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "selfkerr/errors.hpp"
#include "selfkerr/kernel.hpp"
#include "selfkerr/optfit.hpp"
#include "selfkerr/oracle.hpp"
#include "selfkerr/parallel.hpp"
#include "selfkerr/transport.hpp"

namespace selfkerr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNonConvergence = 3;

struct RunConfig {
  std::string subcommand;
  double gamma = 1.0;
  double delta = 0.0;
  std::string chi;    // empty: subcommand default
  std::string sites;  // empty: subcommand default
  std::optional<double> sigma;
  double omega0 = 0.0;
  int grid_points = 512;
  double half_width = 0.0;
  std::string phi = "pi";
  std::string format = "csv";
  std::string output;
  int threads = 0;  // 0: SELFKERR_THREADS or hardware concurrency

  std::string kind = "n_closed";
  std::vector<std::string> freqs;
  std::string field = "pair";
  double sigma_lo = 1e-3;
  double sigma_hi = 0.5;
  double sigma_tol = 1e-4;
  int coarse_points = 16;
  int max_iterations = 200;
  std::string input;
  std::string column = "one_minus_f";
  std::string x_column = "n_sites";
  std::string range;
  double dt = 0.01;
  double tolerance = 1e-3;
  int n_freq = 25;
};

// ---------------------------------------------------------------------------
// Parsing helpers

inline double parse_double(std::string_view text, const char* what) {
  std::string s(text);
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(std::string("cannot parse ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline int parse_int(std::string_view text, const char* what) {
  const double v = parse_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw InvalidArgument(std::string(what) + " must be an integer: '" + std::string(text) + "'");
  }
  return static_cast<int>(v);
}

/// "3,6,25", "4-20", "4..20" or mixtures such as "2,4-6".
inline std::vector<int> parse_sites(std::string_view text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) throw InvalidArgument("empty entry in site list '" + std::string(text) + "'");
    std::size_t dots = part.find("..");
    std::size_t width = 2;
    if (dots == std::string::npos) {
      dots = part.find('-', 1);
      width = 1;
    }
    if (dots == std::string::npos) {
      out.push_back(parse_int(part, "site count"));
      continue;
    }
    const int lo = parse_int(part.substr(0, dots), "site range start");
    const int hi = parse_int(part.substr(dots + width), "site range end");
    if (hi < lo) throw InvalidArgument("site range '" + part + "' is decreasing");
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  }
  for (int n : out) {
    if (n < 1) throw InvalidArgument("site counts must be >= 1");
  }
  return out;
}

/// A number, or a multiple/fraction of pi: "pi", "-pi", "pi/2", "0.5*pi", "2pi".
inline double parse_phase(std::string_view text) {
  std::string s(text);
  const auto pos = s.find("pi");
  if (pos == std::string::npos) return parse_double(s, "phase");
  std::string coef = s.substr(0, pos);
  std::string rest = s.substr(pos + 2);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double factor = 1.0;
  if (coef == "-") factor = -1.0;
  else if (!coef.empty() && coef != "+") factor = parse_double(coef, "phase");
  if (!rest.empty()) {
    if (rest.front() != '/') throw InvalidArgument("cannot parse phase '" + s + "'");
    factor /= parse_double(rest.substr(1), "phase");
  }
  return factor * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<long long, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else return std::to_string(v);
      },
      c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
        }
        return v;
      },
      c);
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

inline void write_json(std::ostream& os, const nlohmann::ordered_json& config, const Table& t) {
  nlohmann::ordered_json doc;
  doc["config"] = config;
  doc["results"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    doc["results"].push_back(std::move(obj));
  }
  os << doc.dump(2) << '\n';
}

/// Reads a table written by write_csv or write_json.
inline Table read_table(std::istream& is) {
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  Table t;
  if (first != std::string::npos && text[first] == '{') {
    const auto doc = nlohmann::ordered_json::parse(text);
    if (!doc.contains("results") || !doc["results"].is_array()) {
      throw InvalidArgument("JSON input has no results array");
    }
    for (const auto& obj : doc["results"]) {
      if (t.columns.empty()) {
        for (const auto& [key, value] : obj.items()) t.columns.push_back(key);
      }
      std::vector<Cell> row;
      for (const auto& col : t.columns) {
        const auto& v = obj.at(col);
        if (v.is_number()) row.emplace_back(v.get<double>());
        else if (v.is_boolean()) row.emplace_back(v.get<bool>());
        else row.emplace_back(v.dump());
      }
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split(line, ',');
    if (t.columns.empty()) {
      t.columns = std::move(parts);
      continue;
    }
    if (parts.size() != t.columns.size()) {
      throw InvalidArgument("CSV row has " + std::to_string(parts.size()) + " fields, header has " +
                            std::to_string(t.columns.size()));
    }
    std::vector<Cell> row(parts.begin(), parts.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline double cell_number(const Cell& c, const std::string& column) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return parse_double(*s, column.c_str());
  throw InvalidArgument("column '" + column + "' is not numeric");
}

// ---------------------------------------------------------------------------
// Subcommands

struct Outcome {
  Table table;
  int status = kExitOk;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline ChainParams chain_params(const RunConfig& cfg, std::string_view default_chi) {
  ChainParams p;
  p.gamma = 1.0;
  p.delta = cfg.delta;
  p.chi = KerrStrength::parse(cfg.chi.empty() ? default_chi : std::string_view(cfg.chi));
  p.n_sites = 1;
  return p;
}

inline std::vector<int> sites(const RunConfig& cfg, std::string_view fallback) {
  return parse_sites(cfg.sites.empty() ? fallback : std::string_view(cfg.sites));
}

inline double sigma(const RunConfig& cfg, double fallback) {
  const double s = cfg.sigma.value_or(fallback);
  if (!(s > 0.0)) throw InvalidArgument("--sigma must be > 0");
  return s;
}

inline unsigned thread_count(const RunConfig& cfg) {
  if (cfg.threads < 0) throw InvalidArgument("--threads must be >= 0");
  return cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : default_thread_count();
}

inline FidelitySettings fidelity_settings(const RunConfig& cfg, unsigned threads) {
  FidelitySettings s;
  s.phi = parse_phase(cfg.phi);
  s.center_detuning = cfg.omega0;
  s.grid_points = cfg.grid_points;
  s.half_width = cfg.half_width;
  s.threads = threads;
  return s;
}

inline FrequencyGrid grid(const RunConfig& cfg, const ChainParams& p, const GaussianPacket& pk) {
  FrequencyGrid g = FrequencyGrid::for_packet(p, pk, cfg.grid_points);
  if (cfg.half_width > 0.0) g.half_width = cfg.half_width;
  g.validate();
  return g;
}

}  // namespace detail

inline Outcome run_kernel_eval(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "1");
  const KernelKind kind = parse_kernel_kind(cfg.kind);
  if (cfg.freqs.empty()) throw InvalidArgument("kernel-eval needs --freqs w1,w2,nu1,nu2");
  const double g = cfg.gamma;
  Outcome out;
  out.table.columns = {"n_sites", "kind", "w1", "w2", "nu1", "nu2", "value_re", "value_im"};
  for (int n : detail::sites(cfg, "1")) {
    p.n_sites = n;
    for (const auto& quad : cfg.freqs) {
      const auto parts = split(quad, ',');
      if (parts.size() != 4) throw InvalidArgument("--freqs takes four comma-separated values");
      double f[4];
      for (int i = 0; i < 4; ++i) f[i] = parse_double(parts[i], "frequency");
      const Complex v = kernel::kernel_value(kind, p, f[0], f[1], f[2], f[3]) / (g * g);
      out.table.rows.push_back({Cell(static_cast<long long>(n)), Cell(std::string(to_string(kind))),
                                Cell(f[0] * g), Cell(f[1] * g), Cell(f[2] * g), Cell(f[3] * g),
                                Cell(v.real()), Cell(v.imag())});
    }
  }
  return out;
}

inline Outcome run_transport(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "1");
  const auto ns = detail::sites(cfg, "1");
  if (ns.size() != 1) throw InvalidArgument("transport takes a single --sites value");
  p.n_sites = ns.front();
  const GaussianPacket pk{cfg.omega0, detail::sigma(cfg, 0.1)};
  const FrequencyGrid g = detail::grid(cfg, p, pk);
  const unsigned threads = detail::thread_count(cfg);
  const double scale = cfg.gamma;
  Outcome out;
  const auto single = transport::propagate_single(p, pk, g);
  if (cfg.field == "single") {
    const auto in = transport::sample_input(pk, g, p.delta);
    out.table.columns = {"w", "in_re", "in_im", "out_re", "out_im"};
    for (int i = 0; i < g.n_points; ++i) {
      // Amplitudes carry 1/sqrt(frequency).
      const double a = 1.0 / std::sqrt(scale);
      out.table.rows.push_back({Cell(g.point(i) * scale), Cell(in.samples[i].real() * a),
                                Cell(in.samples[i].imag() * a), Cell(single.samples[i].real() * a),
                                Cell(single.samples[i].imag() * a)});
    }
    return out;
  }
  const KernelKind kind = parse_kernel_kind(cfg.kind);
  const bool chain_kind = kind == KernelKind::n_closed || kind == KernelKind::n_sum;
  const auto two = chain_kind ? transport::chain_pair_amplitude(p, pk, g, threads)
                              : transport::propagate_two(p, pk, g, {kind, threads});
  if (cfg.field == "summary") {
    const Complex ov = transport::overlap(single, two);
    out.table.columns = {"n_sites", "sigma", "overlap_re", "overlap_im", "fidelity", "grid_norm"};
    out.table.rows.push_back({Cell(static_cast<long long>(p.n_sites)), Cell(pk.bandwidth * scale),
                              Cell(ov.real()), Cell(ov.imag()),
                              Cell(transport::avg_gate_fidelity(ov, parse_phase(cfg.phi))),
                              Cell(two.norm())});
    return out;
  }
  if (cfg.field != "pair") throw InvalidArgument("--field must be pair, single or summary");
  out.table.columns = {"w1", "w2", "pair_re", "pair_im"};
  for (int i = 0; i < g.n_points; ++i) {
    for (int j = 0; j < g.n_points; ++j) {
      const Complex v = two(i, j) / scale;
      out.table.rows.push_back(
          {Cell(g.point(i) * scale), Cell(g.point(j) * scale), Cell(v.real()), Cell(v.imag())});
    }
  }
  return out;
}

inline Outcome run_fidelity(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "inf");
  const unsigned threads = detail::thread_count(cfg);
  const auto settings = detail::fidelity_settings(cfg, threads);
  const double sigma = detail::sigma(cfg, 0.1);
  Outcome out;
  out.table.columns = {"n_sites", "sigma", "overlap_re", "overlap_im", "fidelity"};
  for (int n : detail::sites(cfg, "3")) {
    p.n_sites = n;
    const GaussianPacket pk{settings.center_detuning, sigma};
    const Complex ov =
        transport::chain_overlap(p, pk, optfit::fidelity_grid(p, pk, settings), threads);
    out.table.rows.push_back({Cell(static_cast<long long>(n)), Cell(sigma * cfg.gamma),
                              Cell(ov.real()), Cell(ov.imag()),
                              Cell(transport::avg_gate_fidelity(ov, settings.phi))});
  }
  return out;
}

inline OptimizerOptions optimizer_options(const RunConfig& cfg) {
  OptimizerOptions o;
  o.sigma_lo = cfg.sigma_lo;
  o.sigma_hi = cfg.sigma_hi;
  o.sigma_tolerance = cfg.sigma_tol;
  o.coarse_points = cfg.coarse_points;
  o.max_iterations = cfg.max_iterations;
  return o;
}

inline Outcome run_sweep(const RunConfig& cfg) {
  const ChainParams p = detail::chain_params(cfg, "inf");
  const unsigned threads = detail::thread_count(cfg);
  const auto settings = detail::fidelity_settings(cfg, 1);
  const auto ns = detail::sites(cfg, "4-20");
  const auto entries = optfit::sweep_sites(p, ns, settings, optimizer_options(cfg), threads);
  Outcome out;
  out.table.columns = {"n_sites", "sigma_opt", "f_max", "one_minus_f"};
  for (const auto& e : entries) {
    if (!e.record) {
      out.status = kExitNonConvergence;
      out.diagnostics.push_back("N=" + std::to_string(e.n_sites) + ": " + e.error);
      continue;
    }
    out.table.rows.push_back({Cell(static_cast<long long>(e.n_sites)),
                              Cell(e.record->sigma_opt * cfg.gamma), Cell(e.record->f_max),
                              Cell(1.0 - e.record->f_max)});
  }
  return out;
}

inline Outcome run_optimize(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "inf");
  const unsigned threads = detail::thread_count(cfg);
  const auto settings = detail::fidelity_settings(cfg, 1);
  const auto options = optimizer_options(cfg);
  const auto ns = detail::sites(cfg, "3,6,25");
  std::vector<std::optional<BandwidthOptimum>> found(ns.size());
  std::vector<std::string> errors(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t i) {
    ChainParams q = p;
    q.n_sites = ns[i];
    try {
      found[i] = optfit::optimize_bandwidth(q, settings, options);
    } catch (const ConvergenceError& e) {
      errors[i] = e.what();
    }
  });
  Outcome out;
  out.table.columns = {"n_sites", "sigma_opt", "f_max", "evaluations"};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!found[i]) {
      out.status = kExitNonConvergence;
      out.diagnostics.push_back("N=" + std::to_string(ns[i]) + ": " + errors[i]);
      continue;
    }
    out.table.rows.push_back({Cell(static_cast<long long>(ns[i])),
                              Cell(found[i]->sigma_opt * cfg.gamma), Cell(found[i]->f_max),
                              Cell(static_cast<long long>(found[i]->evaluations))});
  }
  return out;
}

inline Outcome run_fit(const RunConfig& cfg) {
  if (cfg.input.empty()) throw InvalidArgument("fit needs --input");
  std::ifstream in(cfg.input);
  if (!in) throw InvalidArgument("cannot open input file '" + cfg.input + "'");
  const Table t = read_table(in);
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw InvalidArgument("input has no column '" + name + "'");
    return static_cast<std::size_t>(it - t.columns.begin());
  };
  const std::size_t xi = index_of(cfg.x_column), yi = index_of(cfg.column);
  std::optional<std::pair<double, double>> window;
  if (!cfg.range.empty()) {
    const auto ns = parse_sites(cfg.range);
    window = std::make_pair(double(*std::min_element(ns.begin(), ns.end())),
                            double(*std::max_element(ns.begin(), ns.end())));
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& row : t.rows) {
    const double x = cell_number(row[xi], cfg.x_column);
    if (window && (x < window->first || x > window->second)) continue;
    points.emplace_back(x, cell_number(row[yi], cfg.column));
  }
  const auto fit = optfit::fit_power_law(points);
  Outcome out;
  out.table.columns = {"column", "prefactor", "exponent", "residual", "n_points"};
  out.table.rows.push_back({Cell(cfg.column), Cell(fit.prefactor), Cell(fit.exponent),
                            Cell(fit.residual), Cell(static_cast<long long>(fit.n_points))});
  return out;
}

inline Outcome run_oracle_check(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "1");
  if (p.chi.is_infinite()) throw InvalidArgument("oracle-check needs a finite --chi");
  const GaussianPacket pk{cfg.omega0, detail::sigma(cfg, 0.1)};
  SimConfig sim;
  sim.dt = cfg.dt;
  sim.tolerance = cfg.tolerance;
  sim.n_freq = cfg.n_freq;
  const auto ns = detail::sites(cfg, "1,2,3");
  std::vector<TwoPhotonOracleResult> results(ns.size());
  std::vector<KernelComparison> comparisons(ns.size());
  parallel_for(ns.size(), detail::thread_count(cfg), [&](std::size_t i) {
    ChainParams q = p;
    q.n_sites = ns[i];
    results[i] = oracle::numeric_two_photon(oracle::build_chain_equations(q), pk, sim);
    comparisons[i] = oracle::compare_with_kernel(q, pk, results[i].samples, KernelKind::n_closed);
  });
  Outcome out;
  out.table.columns = {"n_sites",       "samples",   "max_relative_error", "max_pointwise_relative",
                       "dt_change",     "converged", "norm_defect",        "photon_number",
                       "within_tolerance"};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& r = results[i];
    const auto& c = comparisons[i];
    if (!r.converged) {
      out.status = kExitNonConvergence;
      out.diagnostics.push_back("N=" + std::to_string(ns[i]) + ": " + r.message);
    }
    out.table.rows.push_back({Cell(static_cast<long long>(ns[i])),
                              Cell(static_cast<long long>(c.n_samples)), Cell(c.max_relative_error),
                              Cell(c.max_pointwise_relative), Cell(r.max_change), Cell(r.converged),
                              Cell(r.fine.norm_defect), Cell(r.fine.photon_number),
                              Cell(c.max_relative_error <= cfg.tolerance)});
  }
  return out;
}

/// Overlap of the finite chain against the continuum prediction
/// integral |xi(w1) xi(w2)|^2 * continuum_kernel(w1, w2).
inline Outcome run_continuum_check(const RunConfig& cfg) {
  ChainParams p = detail::chain_params(cfg, "inf");
  const unsigned threads = detail::thread_count(cfg);
  const GaussianPacket pk{cfg.omega0, detail::sigma(cfg, 0.005)};
  Outcome out;
  out.table.columns = {"n_sites",       "overlap_re", "overlap_im", "prediction_re",
                       "prediction_im", "distance"};
  for (int n : detail::sites(cfg, "10,20,40,80")) {
    p.n_sites = n;
    const FrequencyGrid g = detail::grid(cfg, p, pk);
    const Complex ov = transport::chain_overlap(p, pk, g, threads);
    const auto in = transport::sample_input(pk, g, p.delta);
    Complex prediction{0.0, 0.0};
    for (int i = 0; i < g.n_points; ++i) {
      Complex row{0.0, 0.0};
      for (int j = 0; j < g.n_points; ++j) {
        row += g.weight(j) * std::norm(in.samples[j]) *
               kernel::continuum_kernel(p, g.point(i), g.point(j));
      }
      prediction += g.weight(i) * std::norm(in.samples[i]) * row;
    }
    out.table.rows.push_back({Cell(static_cast<long long>(n)), Cell(ov.real()), Cell(ov.imag()),
                              Cell(prediction.real()), Cell(prediction.imag()),
                              Cell(std::abs(ov - prediction))});
  }
  return out;
}

inline nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["subcommand"] = cfg.subcommand;
  j["gamma"] = cfg.gamma;
  j["delta"] = cfg.delta;
  j["chi"] = cfg.chi.empty() ? "default" : cfg.chi;
  j["sites"] = cfg.sites.empty() ? "default" : cfg.sites;
  if (cfg.sigma) j["sigma"] = *cfg.sigma;
  j["omega0"] = cfg.omega0;
  j["grid_points"] = cfg.grid_points;
  j["half_width"] = cfg.half_width;
  j["phi"] = cfg.phi;
  if (cfg.subcommand == "kernel-eval") {
    j["kind"] = cfg.kind;
    j["freqs"] = cfg.freqs;
  } else if (cfg.subcommand == "transport") {
    j["kind"] = cfg.kind;
    j["field"] = cfg.field;
  } else if (cfg.subcommand == "optimize" || cfg.subcommand == "sweep") {
    j["sigma_lo"] = cfg.sigma_lo;
    j["sigma_hi"] = cfg.sigma_hi;
    j["sigma_tol"] = cfg.sigma_tol;
    j["coarse_points"] = cfg.coarse_points;
    j["max_iterations"] = cfg.max_iterations;
  } else if (cfg.subcommand == "fit") {
    j["input"] = cfg.input;
    j["column"] = cfg.column;
    j["x_column"] = cfg.x_column;
    j["range"] = cfg.range;
  } else if (cfg.subcommand == "oracle-check") {
    j["dt"] = cfg.dt;
    j["tolerance"] = cfg.tolerance;
    j["n_freq"] = cfg.n_freq;
  }
  return j;
}

inline Outcome dispatch(const RunConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw InvalidArgument("--gamma must be > 0");
  if (cfg.subcommand == "kernel-eval") return run_kernel_eval(cfg);
  if (cfg.subcommand == "transport") return run_transport(cfg);
  if (cfg.subcommand == "fidelity") return run_fidelity(cfg);
  if (cfg.subcommand == "optimize") return run_optimize(cfg);
  if (cfg.subcommand == "sweep") return run_sweep(cfg);
  if (cfg.subcommand == "fit") return run_fit(cfg);
  if (cfg.subcommand == "oracle-check") return run_oracle_check(cfg);
  if (cfg.subcommand == "continuum-check") return run_continuum_check(cfg);
  throw InvalidArgument("unknown subcommand '" + cfg.subcommand + "'");
}

// ---------------------------------------------------------------------------
// Entry point

inline void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--gamma", cfg.gamma, "Decay rate used to rescale printed values");
  sub->add_option("--delta", cfg.delta, "Cavity resonance (units of gamma)");
  sub->add_option("--chi", cfg.chi, "Interaction strength (units of gamma) or 'inf'");
  sub->add_option("--sites", cfg.sites, "Chain lengths: 3,6,25 or 4-20");
  sub->add_option("--sigma", cfg.sigma, "Packet bandwidth (units of gamma)");
  sub->add_option("--omega0", cfg.omega0, "Packet carrier detuning (units of gamma)");
  sub->add_option("--grid-points", cfg.grid_points, "Frequency grid points");
  sub->add_option("--half-width", cfg.half_width, "Grid half width; 0 selects the default");
  sub->add_option("--phi", cfg.phi, "Target phase, e.g. pi or 1.2");
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--output,-o", cfg.output, "Write results to this file instead of stdout");
  sub->add_option("--threads", cfg.threads, "Worker threads (overrides SELFKERR_THREADS)");
}

inline void add_optimizer(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--sigma-lo", cfg.sigma_lo, "Lower end of the bandwidth bracket");
  sub->add_option("--sigma-hi", cfg.sigma_hi, "Upper end of the bandwidth bracket");
  sub->add_option("--sigma-tol", cfg.sigma_tol, "Bandwidth tolerance");
  sub->add_option("--coarse-points", cfg.coarse_points, "Coarse scan points");
  sub->add_option("--max-iter", cfg.max_iterations, "Golden-section iteration limit");
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Photon scattering off self-Kerr chains: kernels, transport, gate fidelity"};
  app.require_subcommand(1);

  auto* kernel_eval = app.add_subcommand("kernel-eval", "Evaluate a two-photon kernel");
  add_common(kernel_eval, cfg);
  kernel_eval->add_option("--kind", cfg.kind,
                          "one_site, two_site, n_sum, n_closed, cross or single_cavity");
  kernel_eval->add_option("--freqs", cfg.freqs, "w1,w2,nu1,nu2 (repeatable)")
      ->allow_extra_args(false);

  auto* transport_cmd = app.add_subcommand("transport", "Output wavepackets on a grid");
  add_common(transport_cmd, cfg);
  transport_cmd->add_option("--kind", cfg.kind, "Kernel used for the pair output");
  transport_cmd->add_option("--field", cfg.field, "pair, single or summary");

  auto* fidelity = app.add_subcommand("fidelity", "Gate fidelity at a fixed bandwidth");
  add_common(fidelity, cfg);

  auto* optimize = app.add_subcommand("optimize", "Optimal bandwidth per chain length");
  add_common(optimize, cfg);
  add_optimizer(optimize, cfg);

  auto* sweep = app.add_subcommand("sweep", "Optimal fidelity table over chain lengths");
  add_common(sweep, cfg);
  add_optimizer(sweep, cfg);

  auto* fit = app.add_subcommand("fit", "Power-law fit of a sweep table");
  add_common(fit, cfg);
  fit->add_option("--input,-i", cfg.input, "Sweep table (CSV or JSON)")->required();
  fit->add_option("--column", cfg.column, "Column to fit against n_sites");
  fit->add_option("--x-column", cfg.x_column, "Abscissa column");
  fit->add_option("--range", cfg.range, "Restrict n_sites, e.g. 4-20");

  auto* oracle_cmd = app.add_subcommand("oracle-check", "Time-domain check of the chain kernel");
  add_common(oracle_cmd, cfg);
  oracle_cmd->add_option("--dt", cfg.dt, "Time step (units of 1/gamma)");
  oracle_cmd->add_option("--tolerance", cfg.tolerance, "Relative tolerance");
  oracle_cmd->add_option("--n-freq", cfg.n_freq, "Output samples per axis");

  auto* continuum = app.add_subcommand("continuum-check", "Finite chains against the continuum limit");
  add_common(continuum, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  for (const auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  Outcome outcome;
  try {
    outcome = dispatch(cfg);
  } catch (const ConvergenceError& e) {
    err << "non-convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& d : outcome.diagnostics) err << "non-convergence: " << d << '\n';

  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "error: cannot write '" << cfg.output << "'\n";
      return 1;
    }
  }
  std::ostream& sink = cfg.output.empty() ? out : file;
  if (cfg.format == "json") write_json(sink, config_json(cfg), outcome.table);
  else write_csv(sink, outcome.table);
  return outcome.status;
}

}  // namespace selfkerr::cli
