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


#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "selfkerr/transport.hpp"

namespace {

using selfkerr::ChainParams;
using selfkerr::Complex;
using selfkerr::FrequencyGrid;
using selfkerr::GaussianPacket;
using selfkerr::KerrStrength;
namespace transport = selfkerr::transport;

constexpr double kPi = std::numbers::pi;

ChainParams chain(int n, KerrStrength chi, double gamma = 1.0, double delta = 0.0) {
  ChainParams p;
  p.gamma = gamma;
  p.delta = delta;
  p.chi = chi;
  p.n_sites = n;
  return p;
}

GaussianPacket packet(double sigma, double detuning = 0.0) {
  GaussianPacket g;
  g.bandwidth = sigma;
  g.center_detuning = detuning;
  return g;
}

FrequencyGrid grid(double center, double half_width, int n) {
  FrequencyGrid g;
  g.center = center;
  g.half_width = half_width;
  g.n_points = n;
  return g;
}

TEST(SampleInput, NormalizedAndSymmetric) {
  const auto g = grid(0.0, 1.0, 512);
  const auto in = transport::sample_input(packet(0.1), g);
  EXPECT_NEAR(in.norm(), 1.0, 1e-14);
  for (int i = 0; i < g.n_points; ++i) {
    EXPECT_LE(std::abs(in.samples[i] - in.samples[g.n_points - 1 - i]),
              1e-13 * std::abs(in.samples[g.n_points / 2]));
  }
}

TEST(SampleInput, PeakValue) {
  const auto g = grid(0.3, 1.0, 513);
  const auto in = transport::sample_input(packet(0.1), g, 0.3);
  EXPECT_NEAR(in.samples[256].real(), std::pow(2.0 * kPi * 0.01, -0.25), 1e-12);
}

TEST(SampleInput, RejectsNarrowGrid) {
  EXPECT_THROW(transport::sample_input(packet(0.1), grid(0.0, 0.5, 128)),
               selfkerr::InvalidArgument);
  EXPECT_THROW(transport::sample_input(packet(0.1), grid(0.0, 1.0, 32)),
               selfkerr::InvalidArgument);
  EXPECT_THROW(transport::sample_input(packet(-0.1), grid(0.0, 1.0, 128)),
               selfkerr::InvalidArgument);
}

TEST(PropagateSingle, PreservesNorm) {
  for (int n : {1, 3, 17}) {
    const auto p = chain(n, KerrStrength::infinite(), 1.4, 0.2);
    const auto pk = packet(0.07, 0.1);
    const auto out = transport::propagate_single(p, pk, FrequencyGrid::for_packet(p, pk));
    EXPECT_NEAR(out.norm(), 1.0, 1e-14);
  }
}

TEST(PropagateSingle, HalfLinewidthDetuningFlipsSign) {
  const auto g = grid(0.0, 1.0, 401);
  ASSERT_NEAR(g.point(300), 0.5, 1e-15);
  const auto p = chain(1, KerrStrength::finite(1.0));
  const auto in = transport::sample_input(packet(0.15), g);
  const auto out = transport::propagate_single(p, packet(0.15), g);
  EXPECT_NEAR(std::abs(out.samples[300] + in.samples[300]), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.samples[200] - in.samples[200]), 0.0, 1e-15);
}

TEST(PropagateSingle, NarrowResonantPacketIsUnchanged) {
  const auto p = chain(4, KerrStrength::infinite());
  const auto pk = packet(1e-4);
  const auto g = grid(0.0, 1e-3, 129);
  const auto in = transport::sample_input(pk, g);
  const auto out = transport::propagate_single(p, pk, g);
  double diff = 0.0;
  for (int i = 0; i < g.n_points; ++i) diff = std::max(diff, std::abs(out.samples[i] - in.samples[i]));
  EXPECT_LT(diff / std::abs(in.samples[64]), 1e-2);
}

// Without interaction the pair leaves as a product of single-photon outputs,
// which pins every symmetrization and normalization factor.
TEST(Calibration, NoInteractionGivesUnitOverlap) {
  for (int n : {1, 5}) {
    for (double sigma : {0.05, 0.2}) {
      for (double gamma : {0.5, 2.0}) {
        const auto p = chain(n, KerrStrength::finite(0.0), gamma);
        const auto pk = packet(sigma);
        const auto g = FrequencyGrid::for_packet(p, pk, 64);
        const auto single = transport::propagate_single(p, pk, g);
        const auto two = transport::propagate_two(p, pk, g);
        const Complex ov = transport::overlap(single, two);
        EXPECT_NEAR(std::abs(ov - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(transport::chain_overlap(p, pk, g) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(two.norm(), 1.0, 1e-12);
      }
    }
  }
}

TEST(PropagateTwo, ExchangeSymmetric) {
  const auto p = chain(3, KerrStrength::finite(2.0));
  const auto pk = packet(0.1, 0.05);
  const auto g = FrequencyGrid::for_packet(p, pk, 96);
  const auto two = transport::propagate_two(p, pk, g, {selfkerr::KernelKind::n_closed, 2});
  for (int i = 0; i < g.n_points; ++i) {
    for (int j = 0; j < g.n_points; ++j) {
      EXPECT_LE(std::abs(two(i, j) - two(j, i)), 1e-12 * std::max(1.0, std::abs(two(i, j))));
    }
  }
}

TEST(PropagateTwo, SumAndClosedKernelsAgree) {
  const auto p = chain(4, KerrStrength::infinite());
  const auto pk = packet(0.06);
  const auto g = FrequencyGrid::for_packet(p, pk, 96);
  const auto a = transport::propagate_two(p, pk, g, {selfkerr::KernelKind::n_closed, 1});
  const auto b = transport::propagate_two(p, pk, g, {selfkerr::KernelKind::n_sum, 1});
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_LE(std::abs(a.samples[k] - b.samples[k]), 1e-11);
  }
}

TEST(Overlap, ProductStateGivesUnitOverlap) {
  const auto p = chain(2, KerrStrength::infinite());
  const auto pk = packet(0.1);
  const auto g = FrequencyGrid::for_packet(p, pk, 128);
  const auto single = transport::propagate_single(p, pk, g);
  selfkerr::TwoPhotonAmplitude product{g, std::vector<Complex>(128 * 128)};
  for (int i = 0; i < 128; ++i) {
    for (int j = 0; j < 128; ++j) product(i, j) = single.samples[i] * single.samples[j];
  }
  EXPECT_NEAR(std::abs(transport::overlap(single, product) - 1.0), 0.0, 1e-13);
}

TEST(Overlap, GridMismatchThrows) {
  const auto p = chain(1, KerrStrength::infinite());
  const auto pk = packet(0.1);
  const auto single = transport::propagate_single(p, pk, grid(0.0, 1.0, 64));
  const auto two = transport::propagate_two(p, pk, grid(0.0, 1.0, 65));
  EXPECT_THROW(transport::overlap(single, two), selfkerr::InvalidArgument);
}

TEST(Overlap, FactorizedMatchesDirectQuadrature) {
  for (auto chi : {KerrStrength::infinite(), KerrStrength::finite(0.7)}) {
    for (int n : {1, 3, 6}) {
      const auto p = chain(n, chi, 1.0, 0.1);
      const auto pk = packet(0.08, 0.02);
      const auto g = FrequencyGrid::for_packet(p, pk, 128);
      const Complex direct =
          transport::overlap(transport::propagate_single(p, pk, g), transport::propagate_two(p, pk, g));
      const Complex fast = transport::chain_overlap(p, pk, g, 3);
      EXPECT_LT(std::abs(fast - direct), 1e-12 * std::abs(direct));
      EXPECT_LE(std::abs(fast), 1.0 + 1e-6);
    }
  }
}

TEST(PropagateTwo, FactorizedPairAmplitudeMatchesDirect) {
  for (auto chi : {KerrStrength::infinite(), KerrStrength::finite(1.5)}) {
    const auto p = chain(3, chi, 1.0, -0.1);
    const auto pk = packet(0.07, 0.03);
    const auto g = FrequencyGrid::for_packet(p, pk, 80);
    const auto direct = transport::propagate_two(p, pk, g);
    const auto fast = transport::chain_pair_amplitude(p, pk, g, 2);
    double scale = 0.0;
    for (const auto& v : direct.samples) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < direct.samples.size(); ++k) {
      EXPECT_LE(std::abs(fast.samples[k] - direct.samples[k]), 1e-12 * scale);
    }
  }
}

TEST(Overlap, ThreadCountDoesNotChangeResult) {
  const auto p = chain(5, KerrStrength::infinite());
  const auto pk = packet(0.05);
  const auto g = FrequencyGrid::for_packet(p, pk);
  const Complex a = transport::chain_overlap(p, pk, g, 1);
  const Complex b = transport::chain_overlap(p, pk, g, 4);
  EXPECT_EQ(a, b);
  const auto na = transport::two_photon_norm(p, pk, g, 1);
  const auto nb = transport::two_photon_norm(p, pk, g, 3);
  EXPECT_EQ(na.total(), nb.total());
}

TEST(Overlap, ContinuumRegimeApproachesIdealPhase) {
  const auto p = chain(50, KerrStrength::infinite());
  const auto pk = packet(0.005);
  const Complex ov = transport::chain_overlap(p, pk, FrequencyGrid::for_packet(p, pk));
  EXPECT_LT(std::abs(ov + 1.0), 0.02);
}

TEST(Fidelity, FormulaExamples) {
  for (double phi : {0.0, 1.0, kPi}) {
    EXPECT_NEAR(transport::avg_gate_fidelity(std::polar(1.0, -phi), phi), 1.0, 1e-15);
    EXPECT_NEAR(transport::avg_gate_fidelity(Complex{}, phi), 0.6, 1e-15);
    EXPECT_NEAR(transport::avg_gate_fidelity(-std::polar(1.0, -phi), phi), 0.4, 1e-15);
  }
}

TEST(Norm, UnitarityAtDefaults) {
  const auto p = chain(3, KerrStrength::infinite());
  const auto pk = packet(0.05);
  const auto norm = transport::two_photon_norm(p, pk, FrequencyGrid::for_packet(p, pk));
  EXPECT_NEAR(norm.total(), 1.0, 1e-4);
  EXPECT_NEAR(norm.free_part, 1.0, 1e-14);
}

TEST(Norm, StableUnderGridRefinement) {
  const auto p = chain(3, KerrStrength::infinite());
  const auto pk = packet(0.05);
  for (int m : {128, 256, 512, 1024}) {
    const auto norm = transport::two_photon_norm(p, pk, FrequencyGrid::for_packet(p, pk, m));
    EXPECT_NEAR(norm.total(), 1.0, 1e-12);
  }
}

TEST(Norm, ImprovesUnderAngularRefinement) {
  const auto p = chain(3, KerrStrength::infinite());
  const auto pk = packet(0.05);
  const auto g = FrequencyGrid::for_packet(p, pk, 256);
  double previous = std::numeric_limits<double>::infinity();
  for (int a : {4, 8, 16}) {
    const double err = std::abs(transport::two_photon_norm(p, pk, g, 1, a).total() - 1.0);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-4);
}

TEST(Norm, InWindowNormConvergesToFullLine) {
  // The interacting part has Lorentzian tails, so the in-window grid norm
  // approaches the full-line value only as the window widens.
  const auto p = chain(1, KerrStrength::finite(1.0));
  const auto pk = packet(0.2);
  double previous = 1.0;
  for (double half : {2.0, 4.0, 8.0}) {
    const auto g = grid(0.0, half, static_cast<int>(32 * half) + 1);
    const double full = transport::two_photon_norm(p, pk, g).total();
    EXPECT_NEAR(full, 1.0, 1e-12);
    const double err = std::abs(transport::propagate_two(p, pk, g).norm() - full);
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 2e-3);
}

TEST(Fidelity, ConvergedUnderGridDoubling) {
  for (int n : {3, 6}) {
    const auto p = chain(n, KerrStrength::infinite());
    const auto pk = packet(n == 3 ? 0.08 : 0.046);
    const double f1 = transport::avg_gate_fidelity(
        transport::chain_overlap(p, pk, FrequencyGrid::for_packet(p, pk, 512)), kPi);
    const double f2 = transport::avg_gate_fidelity(
        transport::chain_overlap(p, pk, FrequencyGrid::for_packet(p, pk, 1024)), kPi);
    EXPECT_LT(std::abs(f1 - f2), 1e-5);
  }
}

}  // namespace
