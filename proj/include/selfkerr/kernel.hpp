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

// Closed-form one- and two-photon scattering quantities for a chain of
// cross-Kerr cavities closed by a mirror.
//
// Every two-photon kernel C(w1, w2, nu1, nu2) multiplies the
// energy-conserving delta d(w1 + w2 - nu1 - nu2) in the interacting part of
// the S matrix, S = S0 + i C d(...). Frequencies are absolute; the cavity
// resonance is ChainParams::delta.

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>

#include "selfkerr/errors.hpp"

namespace selfkerr {

using Complex = std::complex<double>;

/// Cross-Kerr interaction strength: a finite nonnegative rate or the
/// distinguished infinite value.
class KerrStrength {
 public:
  static KerrStrength infinite() noexcept { return KerrStrength(0.0, true); }

  static KerrStrength finite(double chi) {
    if (std::isinf(chi) && chi > 0) return infinite();
    if (!(chi >= 0.0)) {
      throw InvalidArgument("interaction strength must be >= 0 (got " +
                            std::to_string(chi) + ")");
    }
    return KerrStrength(chi, false);
  }

  /// Accepts "inf" / "infinity" (any case) or a decimal number.
  static KerrStrength parse(std::string_view text) {
    std::string lowered(text);
    for (auto& c : lowered) c = static_cast<char>(std::tolower(c));
    if (lowered == "inf" || lowered == "infinity" || lowered == "+inf") {
      return infinite();
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(lowered, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse interaction strength '" + lowered + "'");
    }
    if (used != lowered.size()) {
      throw InvalidArgument("cannot parse interaction strength '" + lowered + "'");
    }
    return finite(value);
  }

  bool is_infinite() const noexcept { return infinite_; }

  double value() const {
    if (infinite_) throw InvalidArgument("interaction strength is infinite");
    return value_;
  }

  std::string to_string() const {
    if (infinite_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend bool operator==(const KerrStrength&, const KerrStrength&) = default;

 private:
  KerrStrength(double v, bool inf) : value_(v), infinite_(inf) {}

  double value_;
  bool infinite_;
};

/// Physical parameters of the N-site chain.
struct ChainParams {
  double gamma = 1.0;  ///< cavity decay rate, > 0
  double delta = 0.0;  ///< cavity resonance frequency
  KerrStrength chi = KerrStrength::finite(1.0);
  int n_sites = 1;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InvalidArgument("gamma must be finite and > 0");
    }
    if (!std::isfinite(delta)) throw InvalidArgument("delta must be finite");
    if (n_sites < 1) throw InvalidArgument("n_sites must be >= 1");
  }
};

enum class KernelKind { one_site, two_site, n_sum, n_closed, cross_kerr, single_cavity };

inline std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::one_site: return "one_site";
    case KernelKind::two_site: return "two_site";
    case KernelKind::n_sum: return "n_sum";
    case KernelKind::n_closed: return "n_closed";
    case KernelKind::cross_kerr: return "cross";
    case KernelKind::single_cavity: return "single_cavity";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(std::string_view name) {
  for (auto kind : {KernelKind::one_site, KernelKind::two_site, KernelKind::n_sum,
                    KernelKind::n_closed, KernelKind::cross_kerr,
                    KernelKind::single_cavity}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "cross_kerr") return KernelKind::cross_kerr;
  throw InvalidArgument("unknown kernel kind '" + std::string(name) + "'");
}

namespace kernel {

/// Gamma(w) = gamma/2 + i (Delta - w).
inline Complex gamma_shift(const ChainParams& p, double w) {
  return {0.5 * p.gamma, p.delta - w};
}

/// Unit-modulus phase conj(Gamma(w)) / Gamma(w).
inline Complex phase_factor(const ChainParams& p, double w) {
  const Complex g = gamma_shift(p, w);
  return std::conj(g) / g;
}

/// Argument of phase_factor, in (-pi, pi].
inline double phase_angle(const ChainParams& p, double w) {
  return -2.0 * std::atan2(p.delta - w, 0.5 * p.gamma);
}

/// z^k for |z| = 1 by repeated squaring, projected back onto the unit circle.
template <class T>
std::complex<T> unit_power(std::complex<T> z, int k) {
  if (k < 0) return unit_power(std::conj(z), -k);
  std::complex<T> result{1, 0};
  while (k > 0) {
    if (k & 1) result *= z;
    k >>= 1;
    if (k > 0) {
      z *= z;
      z /= std::abs(z);
    }
  }
  return result / std::abs(result);
}

/// t_w = phase_factor(w)^(2N).
inline Complex single_photon_transmission(const ChainParams& p, double w) {
  return std::polar(1.0, 2.0 * p.n_sites * phase_angle(p, w));
}

namespace detail {

inline constexpr double kDegenerateThreshold = 1e-12;

// The phase algebra runs in extended precision: near-cancelling brackets
// would otherwise lose several digits relative to the final value.
using Wide = long double;
using WideComplex = std::complex<Wide>;

inline Wide wide_angle(const ChainParams& p, double w) {
  return -2.0L * std::atan2(static_cast<Wide>(p.delta) - static_cast<Wide>(w),
                            0.5L * static_cast<Wide>(p.gamma));
}

inline WideComplex wide_phase(const ChainParams& p, double w) {
  return std::polar<Wide>(1.0L, wide_angle(p, w));
}

inline Complex narrow(WideComplex z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// chi (1 + i chi / (Gamma(w1) + Gamma(w2)))^-1, or its chi -> inf limit
// -i (Gamma(w1) + Gamma(w2)).
inline Complex nonlinear_response(const ChainParams& p, double w1, double w2,
                                  bool infinite_limit) {
  const Complex s = gamma_shift(p, w1) + gamma_shift(p, w2);
  if (infinite_limit) return Complex(0.0, -1.0) * s;
  const double chi = p.chi.value();
  return chi / (1.0 + Complex(0.0, chi) / s);
}

inline Complex prefactor(const ChainParams& p, double w1, double w2, double n1, double n2,
                         bool infinite_limit) {
  const Complex denom = gamma_shift(p, n2) * gamma_shift(p, n1) * gamma_shift(p, w2) *
                        gamma_shift(p, w1);
  return -(p.gamma * p.gamma / (2.0 * std::numbers::pi)) *
         nonlinear_response(p, w1, w2, infinite_limit) / denom;
}

// (x^n - y^n) / (x - y) for x = e^{i alpha}, y = e^{i beta}, written as
// e^{i (n-1) m} sin(n d) / sin(d) with m, d the half sum and half difference.
// Below the threshold on |x - y| the removable singularity n x^(n-1) is used.
inline WideComplex geometric_bracket(Wide alpha, Wide beta, int n) {
  const Wide half_diff = 0.5L * (alpha - beta);
  const Wide half_sum = 0.5L * (alpha + beta);
  const Wide s = std::sin(half_diff);
  if (2.0L * std::abs(s) < kDegenerateThreshold) {
    return static_cast<Wide>(n) * std::polar<Wide>(1.0L, (n - 1) * alpha);
  }
  return std::polar<Wide>(std::sin(n * half_diff) / s, (n - 1) * half_sum);
}

inline void require_finite_chi(const ChainParams& p, const char* what) {
  if (p.chi.is_infinite()) {
    throw InvalidArgument(std::string(what) +
                          " needs a finite interaction strength; use kernel_infinite_chi");
  }
}

inline Complex one_site(const ChainParams& p, double w1, double w2, double n1, double n2,
                        bool inf) {
  const WideComplex numer = (wide_phase(p, n1) + wide_phase(p, n2)) *
                            (wide_phase(p, w1) + wide_phase(p, w2));
  return prefactor(p, w1, w2, n1, n2, inf) * narrow(numer);
}

inline Complex two_site(const ChainParams& p, double w1, double w2, double n1, double n2,
                        bool inf) {
  const WideComplex a1 = wide_phase(p, w1), a2 = wide_phase(p, w2);
  const WideComplex b1 = wide_phase(p, n1), b2 = wide_phase(p, n2);
  const WideComplex cubic = (b1 * b1 * b1 + b2 * b2 * b2) * (a1 * a1 * a1 + a2 * a2 * a2);
  const WideComplex product = b1 * b2 * a1 * a2 * (b1 + b2) * (a1 + a2);
  return prefactor(p, w1, w2, n1, n2, inf) * narrow(cubic + product);
}

// Summand j carries (G(w1) G(w2) G(nu1) G(nu2))^(N-j); the printed form
// repeats G(nu1) in that product, which breaks the exchange symmetry and the
// geometric-sum identity, so G(nu2) is used.
inline Complex n_sum(const ChainParams& p, double w1, double w2, double n1, double n2,
                     bool inf) {
  const int n = p.n_sites;
  const WideComplex a1 = wide_phase(p, w1), a2 = wide_phase(p, w2);
  const WideComplex b1 = wide_phase(p, n1), b2 = wide_phase(p, n2);
  const WideComplex all = a1 * a2 * b1 * b2;
  WideComplex sum{0.0L, 0.0L};
  for (int j = 1; j <= n; ++j) {
    const int k = 2 * j - 1;
    sum += unit_power(all, n - j) * (unit_power(a1, k) + unit_power(a2, k)) *
           (unit_power(b1, k) + unit_power(b2, k));
  }
  return prefactor(p, w1, w2, n1, n2, inf) * narrow(sum);
}

inline Complex n_closed(const ChainParams& p, double w1, double w2, double n1, double n2,
                        bool inf) {
  const int n = 2 * p.n_sites;
  const Wide tw1 = wide_angle(p, w1), tw2 = wide_angle(p, w2);
  const Wide tn1 = wide_angle(p, n1), tn2 = wide_angle(p, n2);
  const WideComplex bracket =
      geometric_bracket(tw2 + tn2, tw1 + tn1, n) + geometric_bracket(tw2 + tn1, tw1 + tn2, n);
  return prefactor(p, w1, w2, n1, n2, inf) * narrow(bracket);
}

inline Complex cross_kerr(const ChainParams& p, double w1, double w2, double n1, double n2,
                          bool inf) {
  const Wide tw1 = wide_angle(p, w1), tw2 = wide_angle(p, w2);
  const Wide tn1 = wide_angle(p, n1), tn2 = wide_angle(p, n2);
  return prefactor(p, w1, w2, n1, n2, inf) *
         narrow(geometric_bracket(tw2 + tn2, tw1 + tn1, p.n_sites));
}

// Both nu orderings share the prefactor; their brackets are added before
// rounding because the two terms can cancel by several orders of magnitude.
inline Complex cross_kerr_symmetrized(const ChainParams& p, double w1, double w2, double n1,
                                      double n2, bool inf) {
  const Wide tw1 = wide_angle(p, w1), tw2 = wide_angle(p, w2);
  const Wide tn1 = wide_angle(p, n1), tn2 = wide_angle(p, n2);
  const WideComplex bracket = geometric_bracket(tw2 + tn2, tw1 + tn1, p.n_sites) +
                              geometric_bracket(tw2 + tn1, tw1 + tn2, p.n_sites);
  return prefactor(p, w1, w2, n1, n2, inf) * narrow(bracket);
}

inline Complex single_cavity(const ChainParams& p, double w1, double w2, double n1,
                             double n2, bool inf) {
  return prefactor(p, w1, w2, n1, n2, inf);
}

inline Complex evaluate(KernelKind kind, const ChainParams& p, double w1, double w2,
                        double n1, double n2, bool inf) {
  switch (kind) {
    case KernelKind::one_site: return one_site(p, w1, w2, n1, n2, inf);
    case KernelKind::two_site: return two_site(p, w1, w2, n1, n2, inf);
    case KernelKind::n_sum: return n_sum(p, w1, w2, n1, n2, inf);
    case KernelKind::n_closed: return n_closed(p, w1, w2, n1, n2, inf);
    case KernelKind::cross_kerr: return cross_kerr(p, w1, w2, n1, n2, inf);
    case KernelKind::single_cavity: return single_cavity(p, w1, w2, n1, n2, inf);
  }
  throw InvalidArgument("unknown kernel kind");
}

}  // namespace detail

/// Single-site kernel; ignores p.n_sites.
inline Complex kernel_one_site(const ChainParams& p, double w1, double w2, double n1,
                               double n2) {
  detail::require_finite_chi(p, "kernel_one_site");
  return detail::one_site(p, w1, w2, n1, n2, false);
}

/// Two-site kernel; ignores p.n_sites.
inline Complex kernel_two_site(const ChainParams& p, double w1, double w2, double n1,
                               double n2) {
  detail::require_finite_chi(p, "kernel_two_site");
  return detail::two_site(p, w1, w2, n1, n2, false);
}

/// N-site kernel as an explicit sum over the interaction site.
inline Complex kernel_n_sum(const ChainParams& p, double w1, double w2, double n1,
                            double n2) {
  detail::require_finite_chi(p, "kernel_n_sum");
  return detail::n_sum(p, w1, w2, n1, n2, false);
}

/// N-site kernel with the site sum done in closed form, symmetrized in nu1, nu2.
inline Complex kernel_n_closed(const ChainParams& p, double w1, double w2, double n1,
                               double n2) {
  detail::require_finite_chi(p, "kernel_n_closed");
  return detail::n_closed(p, w1, w2, n1, n2, false);
}

/// Kernel of the counter-propagating cross-Kerr chain with p.n_sites sites.
/// Not symmetric under nu1 <-> nu2.
inline Complex kernel_cross_kerr(const ChainParams& p, double w1, double w2, double n1,
                                 double n2) {
  detail::require_finite_chi(p, "kernel_cross_kerr");
  return detail::cross_kerr(p, w1, w2, n1, n2, false);
}

/// kernel_cross_kerr(w1, w2, nu1, nu2) + kernel_cross_kerr(w1, w2, nu2, nu1),
/// summed in extended precision.
inline Complex kernel_cross_kerr_symmetrized(const ChainParams& p, double w1, double w2,
                                            double n1, double n2) {
  detail::require_finite_chi(p, "kernel_cross_kerr_symmetrized");
  return detail::cross_kerr_symmetrized(p, w1, w2, n1, n2, false);
}

/// Kernel of a single cavity holding a self-Kerr medium.
inline Complex kernel_single_cavity_reference(const ChainParams& p, double w1, double w2,
                                              double n1, double n2) {
  detail::require_finite_chi(p, "kernel_single_cavity_reference");
  return detail::single_cavity(p, w1, w2, n1, n2, false);
}

/// The selected kernel in the chi -> inf limit. p.chi is not consulted.
inline Complex kernel_infinite_chi(const ChainParams& p, double w1, double w2, double n1,
                                   double n2, KernelKind which) {
  return detail::evaluate(which, p, w1, w2, n1, n2, true);
}

/// Dispatches on p.chi: the finite formula or the chi -> inf limit.
inline Complex kernel_value(KernelKind kind, const ChainParams& p, double w1, double w2,
                            double n1, double n2) {
  return detail::evaluate(kind, p, w1, w2, n1, n2, p.chi.is_infinite());
}

/// Multiplier on the symmetrized product of deltas that the N -> inf chain
/// reduces to for narrow, near-resonant packets.
inline Complex continuum_kernel(const ChainParams& p, double w1, double w2) {
  const double g = p.gamma;
  const double mod2 = std::norm(gamma_shift(p, w1) * gamma_shift(p, w2));
  const Complex response = detail::nonlinear_response(p, w1, w2, p.chi.is_infinite());
  return 1.0 - Complex(0.0, g * g * g / 8.0) * response / mod2;
}

/// Phase 2 atan(chi / gamma) acquired by the two-photon component in the
/// continuum limit; pi for infinite chi.
inline double ideal_phase(KerrStrength chi, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be > 0");
  if (chi.is_infinite()) return std::numbers::pi;
  return 2.0 * std::atan(chi.value() / gamma);
}

}  // namespace kernel
}  // namespace selfkerr
