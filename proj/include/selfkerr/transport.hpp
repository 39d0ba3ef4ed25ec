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

// Gaussian photon wavepackets through the one- and two-photon S matrices,
// the output overlap and the average CPHASE gate fidelity.
//
// Two-photon amplitudes use the full-plane convention: a pair state is
// (1/sqrt 2) * integral psi(w1, w2) a^dag(w1) a^dag(w2) |0> with psi
// symmetric and integral |psi|^2 = 1. The input pair is xi(w1) xi(w2) and
// the output is
//   psi(w1, w2) = t(w1) t(w2) xi(w1) xi(w2)
//               + (i/2) integral dnu C(w1, w2, nu, w1 + w2 - nu) xi(nu) xi(w1 + w2 - nu).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "selfkerr/errors.hpp"
#include "selfkerr/kernel.hpp"
#include "selfkerr/parallel.hpp"

namespace selfkerr {

/// Gaussian single-photon spectrum centred at resonance + center_detuning.
struct GaussianPacket {
  double center_detuning = 0.0;
  double bandwidth = 0.1;

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw InvalidArgument("packet bandwidth must be finite and > 0");
    }
    if (!std::isfinite(center_detuning)) {
      throw InvalidArgument("packet detuning must be finite");
    }
  }

  double carrier(double resonance) const { return resonance + center_detuning; }

  /// Analytic amplitude (2 pi sigma^2)^(-1/4) exp(-(w - wc)^2 / (4 sigma^2)).
  double amplitude(double w, double resonance) const {
    const double x = w - carrier(resonance);
    return std::pow(2.0 * std::numbers::pi * bandwidth * bandwidth, -0.25) *
           std::exp(-x * x / (4.0 * bandwidth * bandwidth));
  }
};

/// Uniform sampling of [center - half_width, center + half_width].
struct FrequencyGrid {
  double center = 0.0;
  double half_width = 1.0;
  int n_points = 512;

  static constexpr int kMinPoints = 64;

  void validate() const {
    if (n_points < kMinPoints) {
      throw InvalidArgument("frequency grid needs at least 64 points");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width) || !std::isfinite(center)) {
      throw InvalidArgument("frequency grid half width must be finite and > 0");
    }
  }

  double spacing() const { return 2.0 * half_width / (n_points - 1); }
  double lower() const { return center - half_width; }
  double point(int i) const { return lower() + i * spacing(); }

  /// Composite trapezoid weight of sample i.
  double weight(int i) const {
    return (i == 0 || i == n_points - 1) ? 0.5 * spacing() : spacing();
  }

  /// Centred on the packet carrier with half width max(8 sigma, 4 gamma / (2N)).
  static FrequencyGrid for_packet(const ChainParams& p, const GaussianPacket& packet,
                                  int n_points = 512) {
    FrequencyGrid g;
    g.center = packet.carrier(p.delta);
    g.half_width = std::max(8.0 * packet.bandwidth, 4.0 * p.gamma / (2.0 * p.n_sites));
    g.n_points = n_points;
    return g;
  }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

/// Single-photon spectral amplitude sampled on a grid.
struct SinglePhotonAmplitude {
  FrequencyGrid grid;
  std::vector<Complex> samples;

  double norm() const {
    double acc = 0.0;
    for (int i = 0; i < grid.n_points; ++i) acc += grid.weight(i) * std::norm(samples[i]);
    return acc;
  }
};

/// Symmetric two-photon amplitude on grid x grid, row-major.
struct TwoPhotonAmplitude {
  FrequencyGrid grid;
  std::vector<Complex> samples;

  Complex& operator()(int i, int j) { return samples[std::size_t(i) * grid.n_points + j]; }
  const Complex& operator()(int i, int j) const {
    return samples[std::size_t(i) * grid.n_points + j];
  }

  /// In-window trapezoid norm. Misses the Lorentzian tails of the
  /// interacting part that fall outside the grid.
  double norm() const {
    double acc = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
      double row = 0.0;
      for (int j = 0; j < grid.n_points; ++j) row += grid.weight(j) * std::norm((*this)(i, j));
      acc += grid.weight(i) * row;
    }
    return acc;
  }
};

struct TransportOptions {
  KernelKind kind = KernelKind::n_closed;
  unsigned threads = 1;
};

/// Pieces of the output pair norm: |S0 part|^2 + 2 Re <S0 part, T part> + |T part|^2.
struct NormBreakdown {
  double free_part = 0.0;
  double cross_term = 0.0;
  double interaction_part = 0.0;
  double total() const { return free_part + cross_term + interaction_part; }
};

namespace transport {

/// Normalized Gaussian samples; rescaled so the trapezoid norm is exactly 1.
inline SinglePhotonAmplitude sample_input(const GaussianPacket& packet,
                                          const FrequencyGrid& grid, double resonance = 0.0) {
  packet.validate();
  grid.validate();
  const double wc = packet.carrier(resonance);
  const double reach = 6.0 * packet.bandwidth;
  const double slack = 1e-9 * grid.spacing();
  if (grid.lower() > wc - reach + slack || grid.point(grid.n_points - 1) < wc + reach - slack) {
    throw InvalidArgument("frequency grid must cover the carrier +/- 6 sigma");
  }
  SinglePhotonAmplitude out{grid, std::vector<Complex>(grid.n_points)};
  for (int i = 0; i < grid.n_points; ++i) out.samples[i] = packet.amplitude(grid.point(i), resonance);
  const double scale = 1.0 / std::sqrt(out.norm());
  for (auto& s : out.samples) s *= scale;
  return out;
}

inline SinglePhotonAmplitude propagate_single(const ChainParams& p, const GaussianPacket& packet,
                                              const FrequencyGrid& grid) {
  p.validate();
  SinglePhotonAmplitude out = sample_input(packet, grid, p.delta);
  for (int i = 0; i < grid.n_points; ++i) {
    out.samples[i] *= kernel::single_photon_transmission(p, grid.point(i));
  }
  return out;
}

/// Direct quadrature of the pair output with the selected kernel. The
/// partner frequency w1 + w2 - nu always lands on the shared uniform grid.
inline TwoPhotonAmplitude propagate_two(const ChainParams& p, const GaussianPacket& packet,
                                        const FrequencyGrid& grid,
                                        const TransportOptions& options = {}) {
  p.validate();
  const SinglePhotonAmplitude in = sample_input(packet, grid, p.delta);
  const int m = grid.n_points;
  std::vector<Complex> t(m);
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) {
    t[i] = kernel::single_photon_transmission(p, grid.point(i));
    w[i] = grid.point(i);
  }
  TwoPhotonAmplitude out{grid, std::vector<Complex>(std::size_t(m) * m)};
  const Complex half_i(0.0, 0.5);
  parallel_for(std::size_t(m), options.threads, [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = i; j < m; ++j) {
      const int e = i + j;
      Complex integral{0.0, 0.0};
      for (int k = std::max(0, e - m + 1); k <= std::min(m - 1, e); ++k) {
        const Complex weight = grid.weight(k) * in.samples[k] * in.samples[e - k];
        if (weight == Complex{}) continue;
        integral += weight * kernel::kernel_value(options.kind, p, w[i], w[j], w[k], w[e - k]);
      }
      const Complex value = t[i] * t[j] * in.samples[i] * in.samples[j] + half_i * integral;
      out(i, j) = value;
      out(j, i) = value;
    }
  });
  return out;
}

/// F = integral conj(xi1(nu1) xi1(nu2)) psi(nu1, nu2).
inline Complex overlap(const SinglePhotonAmplitude& single, const TwoPhotonAmplitude& two) {
  if (!(single.grid == two.grid)) throw InvalidArgument("overlap: grids differ");
  const auto& g = single.grid;
  Complex acc{0.0, 0.0};
  for (int i = 0; i < g.n_points; ++i) {
    Complex row{0.0, 0.0};
    for (int j = 0; j < g.n_points; ++j) {
      row += g.weight(j) * std::conj(single.samples[j]) * two(i, j);
    }
    acc += g.weight(i) * std::conj(single.samples[i]) * row;
  }
  return acc;
}

/// Average CPHASE gate fidelity (6 + 3 Re(e^{i phi} F) + |F|^2) / 10.
inline double avg_gate_fidelity(Complex overlap_value, double phi) {
  return (6.0 + 3.0 * std::real(std::polar(1.0, phi) * overlap_value) +
          std::norm(overlap_value)) /
         10.0;
}

namespace detail {

// Site-sum factors f_j(x, y) = (G(x) G(y))^(N-j) (G(x)^(2j-1) + G(y)^(2j-1))
// for j = 1..N, from the angles of G(x) and G(y). The chain kernel is
// prefactor * sum_j f_j(w1, w2) f_j(nu1, nu2).
inline void site_factors(double angle_x, double angle_y, int n, Complex* out) {
  const Complex ax = std::polar(1.0, angle_x);
  const Complex ay = std::polar(1.0, angle_y);
  const Complex ratio = ax * std::conj(ay);
  Complex u = std::polar(1.0, (n - 1) * (angle_x + angle_y) + angle_x);
  Complex v = std::polar(1.0, (n - 1) * (angle_x + angle_y) + angle_y);
  for (int j = 0; j < n; ++j) {
    out[j] = u + v;
    u *= ratio;
    v *= std::conj(ratio);
  }
}

// Per energy line e (w_i + w_j = E_e), the site-resolved input integrals
// sum_k w_k xi_k xi_{e-k} f_j(k, e-k) / (Gamma_k Gamma_{e-k}).
struct EnergyLines {
  int m = 0;
  int n_sites = 0;
  std::vector<double> angle;
  std::vector<Complex> shift;
  std::vector<Complex> in;        // (2m - 1) x n_sites
  std::vector<Complex> response;  // per line: -gamma^2/(2 pi) * nonlinear response
};

inline EnergyLines build_energy_lines(const ChainParams& p, const SinglePhotonAmplitude& input,
                                      unsigned threads) {
  const auto& g = input.grid;
  EnergyLines lines;
  lines.m = g.n_points;
  lines.n_sites = p.n_sites;
  const int m = g.n_points, n = p.n_sites;
  lines.angle.resize(m);
  lines.shift.resize(m);
  for (int i = 0; i < m; ++i) {
    lines.angle[i] = kernel::phase_angle(p, g.point(i));
    lines.shift[i] = kernel::gamma_shift(p, g.point(i));
  }
  lines.in.assign(std::size_t(2 * m - 1) * n, Complex{});
  lines.response.resize(2 * m - 1);
  const bool inf = p.chi.is_infinite();
  parallel_for(std::size_t(2 * m - 1), threads, [&](std::size_t line) {
    const int e = static_cast<int>(line);
    const int lo = std::max(0, e - m + 1), hi = std::min(m - 1, e);
    lines.response[e] = -(p.gamma * p.gamma / (2.0 * std::numbers::pi)) *
                        kernel::detail::nonlinear_response(p, g.point(lo), g.point(e - lo), inf);
    std::vector<Complex> f(n);
    Complex* acc = &lines.in[std::size_t(e) * n];
    for (int k = lo; k <= hi; ++k) {
      const Complex weight = g.weight(k) * input.samples[k] * input.samples[e - k] /
                             (lines.shift[k] * lines.shift[e - k]);
      if (weight == Complex{}) continue;
      site_factors(lines.angle[k], lines.angle[e - k], n, f.data());
      for (int j = 0; j < n; ++j) acc[j] += weight * f[j];
    }
  });
  return lines;
}

inline void require_chain_kernel(const ChainParams& p) {
  p.validate();
}

}  // namespace detail

/// Overlap for the N-site chain kernel using the separable site-sum
/// structure along each energy line: O(N M^2) instead of O(M^3). Agrees with
/// overlap(propagate_single, propagate_two) on the same grid to rounding.
inline Complex chain_overlap(const ChainParams& p, const GaussianPacket& packet,
                             const FrequencyGrid& grid, unsigned threads = 1) {
  detail::require_chain_kernel(p);
  const SinglePhotonAmplitude input = sample_input(packet, grid, p.delta);
  const auto lines = detail::build_energy_lines(p, input, threads);
  const int m = grid.n_points, n = p.n_sites;
  std::vector<Complex> t(m);
  for (int i = 0; i < m; ++i) t[i] = kernel::single_photon_transmission(p, grid.point(i));

  std::vector<Complex> per_line(2 * m - 1);
  parallel_for(std::size_t(2 * m - 1), threads, [&](std::size_t line) {
    const int e = static_cast<int>(line);
    const int lo = std::max(0, e - m + 1), hi = std::min(m - 1, e);
    std::vector<Complex> f(n), out(n, Complex{});
    for (int i = lo; i <= hi; ++i) {
      const int j = e - i;
      const Complex weight = grid.weight(i) * grid.weight(j) *
                             std::conj(t[i] * t[j] * input.samples[i] * input.samples[j]) /
                             (lines.shift[i] * lines.shift[j]);
      if (weight == Complex{}) continue;
      detail::site_factors(lines.angle[i], lines.angle[j], n, f.data());
      for (int s = 0; s < n; ++s) out[s] += weight * f[s];
    }
    Complex sum{0.0, 0.0};
    const Complex* in = &lines.in[std::size_t(e) * n];
    for (int s = 0; s < n; ++s) sum += out[s] * in[s];
    per_line[e] = lines.response[e] * sum;
  });
  Complex interaction{0.0, 0.0};
  for (const auto& v : per_line) interaction += v;

  const double free_norm = input.norm();
  return free_norm * free_norm + Complex(0.0, 0.5) * interaction;
}

/// Pair output for the N-site chain kernel built from the site-sum
/// factorization; equals propagate_two with n_closed on the same grid.
inline TwoPhotonAmplitude chain_pair_amplitude(const ChainParams& p, const GaussianPacket& packet,
                                               const FrequencyGrid& grid, unsigned threads = 1) {
  detail::require_chain_kernel(p);
  const SinglePhotonAmplitude input = sample_input(packet, grid, p.delta);
  const auto lines = detail::build_energy_lines(p, input, threads);
  const int m = grid.n_points, n = p.n_sites;
  std::vector<Complex> t(m);
  for (int i = 0; i < m; ++i) t[i] = kernel::single_photon_transmission(p, grid.point(i));
  TwoPhotonAmplitude out{grid, std::vector<Complex>(std::size_t(m) * m)};
  const Complex half_i(0.0, 0.5);
  parallel_for(std::size_t(m), threads, [&](std::size_t row) {
    const int i = static_cast<int>(row);
    std::vector<Complex> f(n);
    for (int j = i; j < m; ++j) {
      const int e = i + j;
      detail::site_factors(lines.angle[i], lines.angle[j], n, f.data());
      const Complex* in = &lines.in[std::size_t(e) * n];
      Complex sum{0.0, 0.0};
      for (int s = 0; s < n; ++s) sum += f[s] * in[s];
      const Complex value = t[i] * t[j] * input.samples[i] * input.samples[j] +
                            half_i * lines.response[e] * sum / (lines.shift[i] * lines.shift[j]);
      out(i, j) = value;
      out(j, i) = value;
    }
  });
  return out;
}

/// Norm of the chain's output pair amplitude. The free part and the cross
/// term live on the packet grid; the interacting part is integrated along
/// each energy line over the whole real axis (u = E/2 + (gamma/2) tan theta,
/// midpoint rule in theta), so its Lorentzian tails are not truncated.
inline NormBreakdown two_photon_norm(const ChainParams& p, const GaussianPacket& packet,
                                     const FrequencyGrid& grid, unsigned threads = 1,
                                     int angle_points = 0) {
  detail::require_chain_kernel(p);
  const SinglePhotonAmplitude input = sample_input(packet, grid, p.delta);
  const auto lines = detail::build_energy_lines(p, input, threads);
  const int m = grid.n_points, n = p.n_sites;
  if (angle_points <= 0) angle_points = std::max(1024, 64 * n);

  const Complex ov = chain_overlap(p, packet, grid, threads);
  const double free_norm = input.norm();
  NormBreakdown result;
  result.free_part = free_norm * free_norm;
  result.cross_term = 2.0 * std::real(ov - result.free_part);

  std::vector<double> per_line(2 * m - 1, 0.0);
  const double h = grid.spacing();
  parallel_for(std::size_t(2 * m - 1), threads, [&](std::size_t line) {
    const int e = static_cast<int>(line);
    const Complex* in = &lines.in[std::size_t(e) * n];
    double in_scale = 0.0;
    for (int s = 0; s < n; ++s) in_scale = std::max(in_scale, std::abs(in[s]));
    if (in_scale == 0.0) return;
    const int lo = std::max(0, e - m + 1);
    const double energy = grid.point(lo) + grid.point(e - lo);
    std::vector<Complex> f(n);
    double acc = 0.0;
    const double dtheta = std::numbers::pi / angle_points;
    for (int a = 0; a < angle_points; ++a) {
      const double theta = -0.5 * std::numbers::pi + (a + 0.5) * dtheta;
      const double c = std::cos(theta);
      const double u = 0.5 * energy + 0.5 * p.gamma * std::tan(theta);
      const double jac = 0.5 * p.gamma / (c * c);
      detail::site_factors(kernel::phase_angle(p, u), kernel::phase_angle(p, energy - u), n,
                           f.data());
      Complex sum{0.0, 0.0};
      for (int s = 0; s < n; ++s) sum += f[s] * in[s];
      const Complex value = 0.5 * lines.response[e] * sum /
                            (kernel::gamma_shift(p, u) * kernel::gamma_shift(p, energy - u));
      acc += jac * dtheta * std::norm(value);
    }
    per_line[e] = h * acc;
  });
  for (double v : per_line) result.interaction_part += v;
  return result;
}

}  // namespace transport
}  // namespace selfkerr
