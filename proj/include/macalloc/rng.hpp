// macalloc: power and subcarrier allocation for multi-carrier uplink NOMA
// Copyright (C) 2026 the macalloc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace macalloc {

/// Portable seeded RNG. mt19937_64 output is fully pinned by the standard, and
/// uniforms/normals are derived here by fixed arithmetic (no distribution
/// classes, whose streams are implementation-defined). Same seed gives the
/// same stream on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1]: top 53 bits of the 64-bit draw, shifted into (0,1].
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * (uniform() - 0x1.0p-53); }

    /// Standard normal via Box-Muller. Draws two uniforms per call and returns
    /// the cosine branch; pair() returns both branches.
    double normal() {
        auto [z0, z1] = normal_pair();
        (void)z1;
        return z0;
    }

    /// Two independent standard normals from one Box-Muller transform.
    std::pair<double, double> normal_pair() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny against 2^64 in every
        // use, and determinism matters more than the ~n/2^64 bias.
        return engine_() % n;
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace macalloc
