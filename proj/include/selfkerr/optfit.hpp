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

// Bandwidth optimization of the gate fidelity, sweeps over chain length and
// log-log power-law fits.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "selfkerr/errors.hpp"
#include "selfkerr/kernel.hpp"
#include "selfkerr/parallel.hpp"
#include "selfkerr/transport.hpp"

namespace selfkerr {

struct FidelitySweepRecord {
  int n_sites = 0;
  double sigma_opt = 0.0;  ///< units of gamma
  double f_max = 0.0;
};

/// y = prefactor * x^exponent; residual is the RMS of the log residuals.
struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double residual = 0.0;
  int n_points = 0;
};

/// How a single fidelity F(sigma) is evaluated.
struct FidelitySettings {
  double phi = std::numbers::pi;
  double center_detuning = 0.0;
  int grid_points = 512;
  /// Grid half width; <= 0 selects max(8 sigma, 4 gamma / (2N)).
  double half_width = 0.0;
  unsigned threads = 1;
};

struct OptimizerOptions {
  double sigma_lo = 1e-3;  ///< units of gamma
  double sigma_hi = 0.5;   ///< units of gamma
  int coarse_points = 16;
  double sigma_tolerance = 1e-4;  ///< absolute, units of gamma
  int max_iterations = 200;
};

struct BandwidthOptimum {
  double sigma_opt = 0.0;
  double f_max = 0.0;
  int evaluations = 0;
};

struct SweepEntry {
  int n_sites = 0;
  std::optional<FidelitySweepRecord> record;
  std::string error;  ///< set when the optimizer failed for this N
};

namespace optfit {

inline FrequencyGrid fidelity_grid(const ChainParams& p, const GaussianPacket& packet,
                                   const FidelitySettings& settings) {
  FrequencyGrid grid = FrequencyGrid::for_packet(p, packet, settings.grid_points);
  if (settings.half_width > 0.0) grid.half_width = settings.half_width;
  return grid;
}

/// F(phi) for a Gaussian packet of bandwidth sigma through the chain.
inline double gate_fidelity(const ChainParams& p, double sigma, const FidelitySettings& settings) {
  const GaussianPacket packet{settings.center_detuning, sigma};
  const FrequencyGrid grid = fidelity_grid(p, packet, settings);
  const Complex ov = transport::chain_overlap(p, packet, grid, settings.threads);
  return transport::avg_gate_fidelity(ov, settings.phi);
}

/// Maximizes F over sigma: a log-spaced coarse scan picks the neighbourhood
/// of the best sample, then golden-section search narrows it to
/// sigma_tolerance. The returned maximum is never below any sampled point.
inline BandwidthOptimum optimize_bandwidth(const ChainParams& p, const FidelitySettings& settings,
                                           const OptimizerOptions& options = {}) {
  p.validate();
  const double lo_bound = options.sigma_lo * p.gamma;
  const double hi_bound = options.sigma_hi * p.gamma;
  const double tolerance = options.sigma_tolerance * p.gamma;
  if (!(lo_bound > 0.0) || !(hi_bound > lo_bound)) {
    throw InvalidArgument("bandwidth bracket must satisfy 0 < sigma_lo < sigma_hi");
  }
  if (options.coarse_points < 3) throw InvalidArgument("coarse scan needs >= 3 points");

  BandwidthOptimum best;
  best.f_max = -1.0;
  auto evaluate = [&](double sigma) {
    const double f = gate_fidelity(p, sigma, settings);
    ++best.evaluations;
    if (f > best.f_max) {
      best.f_max = f;
      best.sigma_opt = sigma;
    }
    return f;
  };

  const int n = options.coarse_points;
  std::vector<double> scan(n);
  int best_index = 0;
  double best_value = -1.0;
  for (int k = 0; k < n; ++k) {
    scan[k] = lo_bound * std::pow(hi_bound / lo_bound, double(k) / (n - 1));
    if (k == n - 1) scan[k] = hi_bound;
    const double f = evaluate(scan[k]);
    if (f > best_value) {
      best_value = f;
      best_index = k;
    }
  }

  double a = scan[std::max(0, best_index - 1)];
  double b = scan[std::min(n - 1, best_index + 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = evaluate(c), fd = evaluate(d);
  int iteration = 0;
  while (b - a > tolerance) {
    if (++iteration > options.max_iterations) {
      throw ConvergenceError("bandwidth search did not reach sigma tolerance " +
                             std::to_string(tolerance) + " within " +
                             std::to_string(options.max_iterations) + " iterations");
    }
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = evaluate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = evaluate(d);
    }
  }
  evaluate(0.5 * (a + b));
  return best;
}

/// One optimization per N; failures are recorded per entry and do not stop
/// the sweep. Entries come back sorted by N.
inline std::vector<SweepEntry> sweep_sites(const ChainParams& base, std::span<const int> sites,
                                           const FidelitySettings& settings,
                                           const OptimizerOptions& options = {},
                                           unsigned threads = 1) {
  if (sites.empty()) throw InvalidArgument("sweep needs at least one chain length");
  for (int n : sites) {
    if (n < 1) throw InvalidArgument("chain lengths must be positive");
  }
  std::vector<SweepEntry> entries(sites.size());
  FidelitySettings inner = settings;
  inner.threads = 1;
  parallel_for(sites.size(), threads, [&](std::size_t i) {
    ChainParams p = base;
    p.n_sites = sites[i];
    entries[i].n_sites = sites[i];
    try {
      const auto opt = optimize_bandwidth(p, inner, options);
      entries[i].record = FidelitySweepRecord{p.n_sites, opt.sigma_opt / p.gamma, opt.f_max};
    } catch (const Error& e) {
      entries[i].error = e.what();
    }
  });
  std::stable_sort(entries.begin(), entries.end(),
                   [](const SweepEntry& x, const SweepEntry& y) { return x.n_sites < y.n_sites; });
  return entries;
}

/// Least squares on (log x, log y).
inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("power-law fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw InvalidArgument("power-law fit needs positive x and y");
    }
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("power-law fit needs at least two distinct x");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  double ss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (my + fit.exponent * (std::log(x) - mx));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.n_points = static_cast<int>(points.size());
  return fit;
}

}  // namespace optfit
}  // namespace selfkerr
