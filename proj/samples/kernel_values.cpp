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


// Prints the closed-form chain kernel at a few frequency quadruples next to
// the site-by-site sum.

#include <cmath>
#include <cstdio>

#include "selfkerr/kernel.hpp"

int main() {
  using namespace selfkerr;
  ChainParams p;
  p.chi = KerrStrength::finite(1.0);

  const double quads[][4] = {{0.0, 0.0, 0.0, 0.0}, {0.2, -0.1, 0.05, 0.05}, {0.5, 0.3, 0.6, 0.2}};
  std::printf("%3s %28s %28s %10s\n", "N", "closed form", "site sum", "|diff|");
  for (int n : {1, 2, 4, 8}) {
    p.n_sites = n;
    for (const auto& q : quads) {
      const Complex closed = kernel::kernel_n_closed(p, q[0], q[1], q[2], q[3]);
      const Complex sum = kernel::kernel_n_sum(p, q[0], q[1], q[2], q[3]);
      std::printf("%3d %13.6e%+13.6ei %13.6e%+13.6ei %10.2e\n", n, closed.real(), closed.imag(),
                  sum.real(), sum.imag(), std::abs(closed - sum));
    }
  }

  p.n_sites = 3;
  const Complex inf = kernel::kernel_infinite_chi(p, 0.1, 0.0, 0.05, 0.05, KernelKind::n_closed);
  std::printf("\nN=3, chi=inf, (0.1, 0, 0.05, 0.05): %.9f%+.9fi\n", inf.real(), inf.imag());
  return 0;
}
