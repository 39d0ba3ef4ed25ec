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

// Independent numerical checks of the chain's S matrix, built only from the
// cascaded equations of motion:
//
//  * a frequency-domain solve of the one- and two-excitation matrix elements
//    that returns the kernel C at arbitrary frequencies;
//  * a time-domain simulation of two photons scattering off the chain, with
//    the input pair emitted by a virtual source cavity in front of it.
//
// Mode order follows the cascade: a_1, ..., a_N, b_N, ..., b_1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "selfkerr/errors.hpp"
#include "selfkerr/kernel.hpp"
#include "selfkerr/transport.hpp"

namespace selfkerr {

/// Linear drift, drive and nonlinear pairs of the chain's Heisenberg
/// equations: dc/dt = drift c + drive a_in - i chi (pair terms), and
/// a_out = output_row c + feedthrough a_in.
struct ChainEquations {
  int n_sites = 0;
  double gamma = 1.0;
  double delta = 0.0;
  double chi = 0.0;
  Eigen::MatrixXcd drift;
  Eigen::VectorXcd drive;
  std::vector<std::pair<int, int>> nonlinear_pairs;
  Eigen::RowVectorXcd output_row;
  double feedthrough = 1.0;

  int mode_count() const { return 2 * n_sites; }
  int a_index(int site) const { return site - 1; }
  int b_index(int site) const { return 2 * n_sites - site; }
  int partner(int mode) const { return 2 * n_sites - 1 - mode; }

  std::string mode_name(int mode) const {
    return mode < n_sites ? "a" + std::to_string(mode + 1)
                          : "b" + std::to_string(2 * n_sites - mode);
  }
};

/// One numerical estimate of C(w1, w2, nu1, nu2) with w1 + w2 = nu1 + nu2.
struct NumericSMatrixSample {
  double w1 = 0.0, w2 = 0.0, nu1 = 0.0, nu2 = 0.0;
  Complex value;
  double error_estimate = 0.0;
};

struct SimConfig {
  double dt = 0.01;          ///< units of 1/gamma
  double total_time = 0.0;   ///< <= 0 selects 12/sigma + (30 + 20 N)/gamma
  double lead_time = 0.0;    ///< <= 0 selects 6/sigma before the packet peak
  int n_freq = 25;           ///< output samples per axis
  double freq_half_width = 0.0;  ///< <= 0 selects 3 sigma around the carrier
  double tolerance = 1e-3;   ///< requested accuracy of the extracted samples
  double window = 1e-3;      ///< keep samples whose envelope is >= window * peak
  bool check_convergence = true;
};

/// Output of one time-domain run at a fixed step.
struct TimeDomainRun {
  double dt = 0.0;
  std::vector<double> freqs;      ///< output sample frequencies (per axis)
  Eigen::MatrixXcd amplitude;     ///< pair spectral amplitude on freqs x freqs
  double norm_defect = 0.0;       ///< |total probability - 1| at the end
  double photon_number = 0.0;     ///< photons in the output record
  double residual_excitation = 0.0;  ///< probability left in source + chain
  long steps = 0;
};

struct TwoPhotonOracleResult {
  TimeDomainRun coarse;
  TimeDomainRun fine;
  std::vector<NumericSMatrixSample> samples;
  bool converged = true;
  double max_change = 0.0;  ///< dt-halving change relative to the sample peak
  std::string message;
};

/// Comparison of numeric kernel samples with an analytic kernel.
struct KernelComparison {
  int n_samples = 0;
  double peak = 0.0;               ///< max |analytic|
  double max_abs_error = 0.0;
  double max_relative_error = 0.0;  ///< max_abs_error / peak
  double max_pointwise_relative = 0.0;  ///< over samples with |analytic| >= 0.1 peak
};

namespace oracle {

inline ChainEquations build_chain_equations(const ChainParams& p) {
  p.validate();
  if (p.chi.is_infinite()) {
    throw InvalidArgument("the equation-of-motion oracle needs a finite interaction strength");
  }
  ChainEquations eq;
  eq.n_sites = p.n_sites;
  eq.gamma = p.gamma;
  eq.delta = p.delta;
  eq.chi = p.chi.value();
  const int m = eq.mode_count();
  const double sg = std::sqrt(p.gamma);
  eq.drift = Eigen::MatrixXcd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    eq.drift(k, k) = Complex(-0.5 * p.gamma, -p.delta);
    for (int l = 0; l < k; ++l) eq.drift(k, l) = -p.gamma;
  }
  eq.drive = Eigen::VectorXcd::Constant(m, -sg);
  eq.output_row = Eigen::RowVectorXcd::Constant(m, sg);
  for (int site = 1; site <= p.n_sites; ++site) {
    eq.nonlinear_pairs.emplace_back(eq.a_index(site), eq.b_index(site));
  }
  return eq;
}

namespace detail {

inline Eigen::MatrixXcd identity(int m) { return Eigen::MatrixXcd::Identity(m, m); }

// Stationary one-excitation response u(w): <0|c_k(t)|w+> = e^{-iwt} u_k / sqrt(2 pi).
inline Eigen::VectorXcd one_excitation(const ChainEquations& eq, double w) {
  const Eigen::MatrixXcd a = eq.drift + Complex(0.0, w) * identity(eq.mode_count());
  return -a.partialPivLu().solve(eq.drive);
}

inline Complex transmission(const ChainEquations& eq, double w) {
  return eq.feedthrough + (eq.output_row * one_excitation(eq, w))(0);
}

// C from the matrix elements with w1 treated as the intermediate
// one-photon state; swapping w1 and w2 gives a second estimate.
inline Complex kernel_from_matrix_elements(const ChainEquations& eq, double w1, double w2,
                                           double nu1, double nu2) {
  const int m = eq.mode_count();
  const double energy = nu1 + nu2;
  const Eigen::VectorXcd u_in = one_excitation(eq, nu1) + one_excitation(eq, nu2);

  // Two-excitation amplitudes <0|c_k c_l|nu1 nu2+> = e^{-iEt} d_kl / (2 pi):
  // drift d + d drift^T + iE d - i chi [pair] d = -(drive u^T + u drive^T).
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(m * m, m * m);
  Eigen::VectorXcd rhs(m * m);
  auto idx = [m](int k, int l) { return k + m * l; };
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const int row = idx(k, l);
      for (int j = 0; j < m; ++j) {
        op(row, idx(j, l)) += eq.drift(k, j);
        op(row, idx(k, j)) += eq.drift(l, j);
      }
      op(row, row) += Complex(0.0, energy);
      if (eq.partner(k) == l) op(row, row) -= Complex(0.0, eq.chi);
      rhs(row) = -(eq.drive(k) * u_in(l) + u_in(k) * eq.drive(l));
    }
  }
  const Eigen::VectorXcd d = op.partialPivLu().solve(rhs);

  const Eigen::VectorXcd u_out = one_excitation(eq, w1);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m);
  for (const auto& [a, b] : eq.nonlinear_pairs) {
    g(a) = std::conj(u_out(b)) * d(idx(a, b));
    g(b) = std::conj(u_out(a)) * d(idx(b, a));
  }
  const Eigen::MatrixXcd resolvent = -(eq.drift + Complex(0.0, w2) * identity(m));
  const Eigen::VectorXcd f = resolvent.partialPivLu().solve(g);
  const Complex t1 = transmission(eq, w1);
  return -(eq.chi / (2.0 * std::numbers::pi)) * t1 * (eq.output_row * f)(0);
}

}  // namespace detail

/// Transmission t_w from the stationary one-excitation solution.
inline Complex numeric_single_photon(const ChainEquations& eq, double w) {
  return detail::transmission(eq, w);
}

/// Kernel C(w1, w2, nu1, nu2) from the two-excitation matrix elements.
/// Frequencies must conserve energy. The error estimate is the difference
/// between the two orderings of the output frequencies.
inline NumericSMatrixSample numeric_kernel_sample(const ChainEquations& eq, double w1, double w2,
                                                  double nu1, double nu2) {
  const double scale = std::max({1.0, std::abs(w1), std::abs(w2), std::abs(nu1), std::abs(nu2)});
  if (std::abs(w1 + w2 - nu1 - nu2) > 1e-12 * scale) {
    throw InvalidArgument("kernel samples need w1 + w2 = nu1 + nu2");
  }
  const Complex first = detail::kernel_from_matrix_elements(eq, w1, w2, nu1, nu2);
  const Complex second = detail::kernel_from_matrix_elements(eq, w2, w1, nu1, nu2);
  NumericSMatrixSample s{w1, w2, nu1, nu2, 0.5 * (first + second), 0.0};
  s.error_estimate = std::max(std::abs(first - second),
                              std::numeric_limits<double>::epsilon() * std::abs(s.value));
  if (s.error_estimate == 0.0) s.error_estimate = std::numeric_limits<double>::min();
  return s;
}

namespace detail {

// Virtual source cavity (mode 0) that releases the input pair into the
// Gaussian temporal mode xi(t) = (2 sigma^2/pi)^(1/4) e^{-sigma^2 t^2} e^{-i wc t},
// followed by the chain modes 1..2N.
class PairScatteringSim {
 public:
  PairScatteringSim(const ChainEquations& eq, const GaussianPacket& packet, const SimConfig& cfg,
                    double dt)
      : eq_(eq), sigma_(packet.bandwidth), carrier_(packet.carrier(eq.delta)), dt_(dt) {
    modes_ = eq.mode_count() + 1;
    lead_ = cfg.lead_time > 0.0 ? cfg.lead_time : 6.0 / sigma_;
    // The cascade of 2N cavities rings down as a polynomial times e^{-gamma t/2}.
    const double total = cfg.total_time > 0.0
                             ? cfg.total_time
                             : 12.0 / sigma_ + (30.0 + 20.0 * eq.n_sites) / eq.gamma;
    steps_ = static_cast<long>(std::ceil(total / dt_));
    t_start_ = -lead_;
    const double half = cfg.freq_half_width > 0.0 ? cfg.freq_half_width : 3.0 * sigma_;
    const int k = cfg.n_freq;
    freqs_.resize(k);
    for (int i = 0; i < k; ++i) {
      freqs_[i] = carrier_ - half + (k == 1 ? half : 2.0 * half * i / (k - 1));
    }
  }

  TimeDomainRun run() {
    const int m = modes_;
    const int k = static_cast<int>(freqs_.size());
    const long n_times = steps_ + 1;

    // Forward pass. The pair state (1/sqrt2) sum D_kl c_k^dag c_l^dag |0>
    // (D symmetric) is stepped explicitly; a first emission at s_n leaves the
    // one-excitation state v_n = sqrt2 D(s_n) l(s_n), whose later evolution
    // is the product of the stored step propagators.
    Eigen::MatrixXcd pair = Eigen::MatrixXcd::Zero(m, m);
    pair(0, 0) = std::polar(1.0, -2.0 * carrier_ * t_start_);
    Eigen::MatrixXcd born(m, n_times);
    Eigen::MatrixXcd rows(m, n_times);
    std::vector<Eigen::MatrixXcd> steps(steps_);
    Eigen::MatrixXcd spectra = Eigen::MatrixXcd::Zero(n_times, k);  // B_n(w)
    std::vector<double> emitted(n_times, 0.0);  // integral_{s_n} |A(s_n, t)|^2 dt

    for (long n = 0; n < n_times; ++n) {
      const double t = time(n);
      const Eigen::VectorXcd l = jump_row(t);
      rows.col(n) = l;
      born.col(n) = std::sqrt(2.0) * (pair * l);

      // Trapezoid half weight at t = s plus the endpoint correction
      // (h^2/12) f'(s); the full-weight part comes from the backward pass.
      const Complex a0 = (l.transpose() * born.col(n))(0);
      const Complex da0 = (jump_row_rate(t).transpose() * born.col(n))(0) +
                          (l.transpose() * (drift(t) * born.col(n)))(0);
      for (int q = 0; q < k; ++q) {
        const Complex phase = std::polar(1.0, freqs_[q] * t);
        const Complex f = a0 * phase;
        const Complex df = (da0 + Complex(0.0, freqs_[q]) * a0) * phase;
        spectra(n, q) += -0.5 * dt_ * f + dt_ * dt_ / 12.0 * df;
      }
      emitted[n] += -0.5 * dt_ * std::norm(a0) +
                    dt_ * dt_ / 12.0 * 2.0 * std::real(std::conj(a0) * da0);

      if (n == steps_) break;
      steps[n] = step_propagator(t);
      pair = step_pair(pair, t);
    }

    // Backward pass over the same discrete sums:
    //   W_n = dt l_n e^{i w t_n} + U_n^T W_{n+1}          -> B_n = v_n^T W_n
    //   G_n = dt conj(l_n) l_n^T + U_n^H G_{n+1} U_n      -> emitted = v_n^H G_n v_n
    //   H_n = U_n^H H_{n+1} U_n, H_end = I                -> live at the end
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(m, k);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(m, m);
    Eigen::RowVectorXcd phase(k);
    double single_live = 0.0;
    for (long n = steps_; n >= 0; --n) {
      if (n < steps_) {
        const Eigen::MatrixXcd& u = steps[n];
        w = (u.transpose() * w).eval();
        g = (u.adjoint() * g * u).eval();
        h = (u.adjoint() * h * u).eval();
      }
      const double t = time(n);
      for (int q = 0; q < k; ++q) phase(q) = std::polar(dt_, freqs_[q] * t);
      w.noalias() += rows.col(n) * phase;
      g.noalias() += dt_ * rows.col(n).conjugate() * rows.col(n).transpose();
      const auto v = born.col(n);
      spectra.row(n) += v.transpose() * w;
      emitted[n] += std::real((v.adjoint() * g * v)(0));
      single_live += dt_ * std::real((v.adjoint() * h * v)(0));
    }

    TimeDomainRun out;
    out.dt = dt_;
    out.steps = steps_;
    out.freqs = freqs_;
    // psi(w1, w2) = (1 / (2 pi sqrt 2)) sum_n dt [e^{i w1 s_n} B_n(w2) + e^{i w2 s_n} B_n(w1)]
    Eigen::MatrixXcd phases(n_times, k);
    for (long n = 0; n < n_times; ++n) {
      for (int q = 0; q < k; ++q) phases(n, q) = std::polar(dt_, freqs_[q] * time(n));
    }
    const Eigen::MatrixXcd half = phases.transpose() * spectra;
    out.amplitude = (half + half.transpose()) / (2.0 * std::numbers::pi * std::sqrt(2.0));

    double pair_record = 0.0;
    for (long n = 0; n < n_times; ++n) pair_record += dt_ * emitted[n];
    out.residual_excitation = pair.squaredNorm() + single_live;
    out.photon_number = 2.0 * pair_record + single_live;
    out.norm_defect = std::abs(pair.squaredNorm() + single_live + pair_record - 1.0);
    return out;
  }

 private:
  double time(long n) const { return t_start_ + n * dt_; }

  // Decay rate of the source chosen so it emits |xi(t)|^2:
  // g = |xi|^2 / (remaining probability).
  double source_rate(double t) const {
    const double x = std::sqrt(2.0) * sigma_ * t;
    const double density = std::sqrt(2.0 / std::numbers::pi) * sigma_ * std::exp(-x * x);
    const double remaining = 0.5 * std::erfc(x);
    if (remaining < 1e-300) return 0.0;
    return density / remaining;
  }

  Eigen::VectorXcd jump_row(double t) const {
    Eigen::VectorXcd l(modes_);
    l(0) = std::sqrt(source_rate(t));
    for (int k = 1; k < modes_; ++k) l(k) = eq_.output_row(k - 1);
    return l;
  }

  Eigen::VectorXcd jump_row_rate(double t) const {
    const double h = 1e-4 / sigma_;
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(modes_);
    r(0) = (std::sqrt(source_rate(t + h)) - std::sqrt(source_rate(t - h))) / (2.0 * h);
    return r;
  }

  // No-jump drift of the one-excitation amplitudes, source included.
  Eigen::MatrixXcd drift(double t) const {
    const double g = source_rate(t);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(modes_, modes_);
    a(0, 0) = Complex(-0.5 * g, -carrier_);
    const double sg = std::sqrt(g);
    for (int k = 1; k < modes_; ++k) {
      a(k, 0) = eq_.drive(k - 1) * sg;
      for (int l = 1; l < modes_; ++l) a(k, l) = eq_.drift(k - 1, l - 1);
    }
    return a;
  }

  Eigen::MatrixXcd pair_rhs(const Eigen::MatrixXcd& d, const Eigen::MatrixXcd& a) const {
    Eigen::MatrixXcd r = a * d + d * a.transpose();
    for (const auto& [x, y] : eq_.nonlinear_pairs) {
      r(x + 1, y + 1) -= Complex(0.0, eq_.chi) * d(x + 1, y + 1);
      r(y + 1, x + 1) -= Complex(0.0, eq_.chi) * d(y + 1, x + 1);
    }
    return r;
  }

  Eigen::MatrixXcd step_pair(const Eigen::MatrixXcd& d, double t) const {
    const Eigen::MatrixXcd a0 = drift(t), a1 = drift(t + 0.5 * dt_), a2 = drift(t + dt_);
    const Eigen::MatrixXcd k1 = pair_rhs(d, a0);
    const Eigen::MatrixXcd k2 = pair_rhs(d + 0.5 * dt_ * k1, a1);
    const Eigen::MatrixXcd k3 = pair_rhs(d + 0.5 * dt_ * k2, a1);
    const Eigen::MatrixXcd k4 = pair_rhs(d + dt_ * k3, a2);
    return d + (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Classical RK4 step of the linear one-excitation equation, as a matrix.
  Eigen::MatrixXcd step_propagator(double t) const {
    const Eigen::MatrixXcd a0 = drift(t), a1 = drift(t + 0.5 * dt_), a2 = drift(t + dt_);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(modes_, modes_);
    const Eigen::MatrixXcd k1 = a0;
    const Eigen::MatrixXcd k2 = a1 * (id + 0.5 * dt_ * k1);
    const Eigen::MatrixXcd k3 = a1 * (id + 0.5 * dt_ * k2);
    const Eigen::MatrixXcd k4 = a2 * (id + dt_ * k3);
    return id + (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  const ChainEquations& eq_;
  double sigma_;
  double carrier_;
  double dt_;
  int modes_ = 0;
  double lead_ = 0.0;
  double t_start_ = 0.0;
  long steps_ = 0;
  std::vector<double> freqs_;
};

inline double envelope(const GaussianPacket& packet, double resonance, double energy) {
  const double y = energy - 2.0 * packet.carrier(resonance);
  return std::exp(-y * y / (8.0 * packet.bandwidth * packet.bandwidth));
}

inline void check_oracle_inputs(const ChainEquations& eq, const GaussianPacket& packet,
                                const SimConfig& cfg) {
  packet.validate();
  if (eq.n_sites > 4) throw InvalidArgument("time-domain oracle is limited to N <= 4");
  if (packet.bandwidth > 0.2 * eq.gamma) {
    throw InvalidArgument("time-domain oracle needs packet bandwidth <= 0.2 gamma");
  }
  if (!(cfg.dt > 0.0)) throw InvalidArgument("time step must be > 0");
  if (cfg.n_freq < 1) throw InvalidArgument("need at least one output frequency");
}

}  // namespace detail

/// Runs the pair-scattering simulation at time step dt (units of 1/gamma).
inline TimeDomainRun simulate_two_photon(const ChainEquations& eq, const GaussianPacket& packet,
                                         const SimConfig& cfg, double dt) {
  detail::check_oracle_inputs(eq, packet, cfg);
  detail::PairScatteringSim sim(eq, packet, cfg, dt / eq.gamma);
  return sim.run();
}

/// Packet-averaged kernel: the analytic counterpart of an extracted sample,
/// integral C(w1, w2, nu, E - nu) rho_E(nu) dnu with rho_E the normalized
/// input envelope along the energy line E = w1 + w2.
inline Complex packet_averaged_kernel(const ChainParams& p, const GaussianPacket& packet,
                                      double w1, double w2, KernelKind kind = KernelKind::n_closed,
                                      int nodes = 2001) {
  const double energy = w1 + w2;
  const double sigma = packet.bandwidth;
  const double reach = 10.0 * sigma;
  const double h = 2.0 * reach / (nodes - 1);
  Complex acc{0.0, 0.0};
  for (int i = 0; i < nodes; ++i) {
    const double x = -reach + i * h;
    const double rho = std::exp(-x * x / (2.0 * sigma * sigma)) /
                       std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
    const double nu = 0.5 * energy + x;
    acc += h * rho * kernel::kernel_value(kind, p, w1, w2, nu, energy - nu);
  }
  return acc;
}

namespace detail {

// Removes t(w1) t(w2) xi(w1) xi(w2) and divides by (i/2) times the input
// envelope along the energy line.
inline std::vector<std::pair<Complex, std::pair<int, int>>> extract(
    const ChainEquations& eq, const GaussianPacket& packet, const SimConfig& cfg,
    const TimeDomainRun& run) {
  std::vector<std::pair<Complex, std::pair<int, int>>> out;
  const int k = static_cast<int>(run.freqs.size());
  const double peak = 1.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double w1 = run.freqs[i], w2 = run.freqs[j];
      const double env = envelope(packet, eq.delta, w1 + w2);
      if (env < cfg.window * peak) continue;
      const Complex free_part = transmission(eq, w1) * transmission(eq, w2) *
                                packet.amplitude(w1, eq.delta) * packet.amplitude(w2, eq.delta);
      const Complex value = (run.amplitude(i, j) - free_part) / (Complex(0.0, 0.5) * env);
      out.push_back({value, {i, j}});
    }
  }
  return out;
}

}  // namespace detail

/// Time-domain conjecture check: simulates at dt and dt/2, extracts
/// packet-averaged kernel samples (nu1 = nu2 = E/2 marks the envelope centre)
/// and flags non-convergence when halving dt moves them by more than
/// tolerance/4 of their peak.
inline TwoPhotonOracleResult numeric_two_photon(const ChainEquations& eq,
                                                const GaussianPacket& packet,
                                                const SimConfig& cfg = {}) {
  detail::check_oracle_inputs(eq, packet, cfg);
  TwoPhotonOracleResult result;
  result.coarse = simulate_two_photon(eq, packet, cfg, cfg.dt);
  const auto coarse = detail::extract(eq, packet, cfg, result.coarse);
  if (cfg.check_convergence) {
    result.fine = simulate_two_photon(eq, packet, cfg, 0.5 * cfg.dt);
  } else {
    result.fine = result.coarse;
  }
  const auto fine = detail::extract(eq, packet, cfg, result.fine);

  double peak = 0.0, change = 0.0;
  for (std::size_t s = 0; s < fine.size(); ++s) {
    peak = std::max(peak, std::abs(fine[s].first));
    change = std::max(change, std::abs(fine[s].first - coarse[s].first));
  }
  for (std::size_t s = 0; s < fine.size(); ++s) {
    const auto [i, j] = fine[s].second;
    NumericSMatrixSample sample;
    sample.w1 = result.fine.freqs[i];
    sample.w2 = result.fine.freqs[j];
    sample.nu1 = sample.nu2 = 0.5 * (sample.w1 + sample.w2);
    sample.value = fine[s].first;
    sample.error_estimate = std::max(std::abs(fine[s].first - coarse[s].first),
                                     std::numeric_limits<double>::epsilon() * peak);
    result.samples.push_back(sample);
  }
  result.max_change = peak > 0.0 ? change / peak : change;
  // Samples that vanish (chi = 0) have no meaningful relative change; an
  // absolute change below the numerical floor counts as converged.
  constexpr double kAbsoluteFloor = 1e-8;
  if (cfg.check_convergence && result.max_change > cfg.tolerance / 4.0 &&
      change > kAbsoluteFloor / (eq.gamma * eq.gamma)) {
    result.converged = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "halving dt changed extracted samples by %.3g of their peak "
                  "(tolerance/4 = %.3g)",
                  result.max_change, cfg.tolerance / 4.0);
    result.message = buf;
  }
  return result;
}

/// Compares packet-averaged samples with the analytic kernel averaged over
/// the same envelope.
inline KernelComparison compare_with_kernel(const ChainParams& p, const GaussianPacket& packet,
                                            const std::vector<NumericSMatrixSample>& samples,
                                            KernelKind kind = KernelKind::n_closed) {
  KernelComparison cmp;
  std::vector<Complex> analytic;
  analytic.reserve(samples.size());
  for (const auto& s : samples) {
    analytic.push_back(packet_averaged_kernel(p, packet, s.w1, s.w2, kind));
    cmp.peak = std::max(cmp.peak, std::abs(analytic.back()));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double err = std::abs(samples[i].value - analytic[i]);
    cmp.max_abs_error = std::max(cmp.max_abs_error, err);
    if (std::abs(analytic[i]) >= 0.1 * cmp.peak) {
      cmp.max_pointwise_relative =
          std::max(cmp.max_pointwise_relative, err / std::abs(analytic[i]));
    }
  }
  cmp.n_samples = static_cast<int>(samples.size());
  cmp.max_relative_error = cmp.peak > 0.0 ? cmp.max_abs_error / cmp.peak : cmp.max_abs_error;
  return cmp;
}

}  // namespace oracle
}  // namespace selfkerr
