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


// Optimal packet bandwidth and CZ-type gate fidelity for a few chain lengths.

#include <cstdio>
#include <vector>

#include "selfkerr/optfit.hpp"

int main() {
  using namespace selfkerr;
  ChainParams base;
  base.chi = KerrStrength::infinite();
  FidelitySettings settings;
  const std::vector<int> sites = {2, 3, 6, 12};
  const auto entries = optfit::sweep_sites(base, sites, settings, {}, default_thread_count());

  std::printf("%4s %12s %12s %12s\n", "N", "sigma_opt", "F_max", "1 - F_max");
  for (const auto& e : entries) {
    if (!e.record) {
      std::printf("%4d  failed: %s\n", e.n_sites, e.error.c_str());
      continue;
    }
    std::printf("%4d %12.6f %12.8f %12.4e\n", e.n_sites, e.record->sigma_opt, e.record->f_max,
                1.0 - e.record->f_max);
  }
  return 0;
}
