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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "macalloc/baselines.hpp"
#include "macalloc/channel.hpp"
#include "macalloc/minpmac.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>

using namespace macalloc;
using testutil::desk_scenario;
using testutil::explicit_channels;

TEST_CASE("orthogonal allocation meets every target") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 19));
    const RateVector targets(3, mbps_to_rate(50.0, ch.scenario()));
    const baselines::OmaResult res = baselines::oma_allocate(ch, targets);
    for (int i = 0; i < 3; ++i) CHECK(res.rates[i] >= targets[i] - 1e-9);
    CHECK(res.time_fraction > 0.0);
    CHECK(res.time_fraction <= 1.0);
    for (double p : res.alloc.p) CHECK(p >= 0.0);
}

TEST_CASE("single-user orthogonal allocation matches the scalar inverse") {
    // One user, one tone: r = t log2(1 + g^2 p / (t sigma2)) with full time use
    // t = 1 reduces to p = (2^r - 1) sigma2 / g^2.
    const ChannelSet ch = explicit_channels({{2.0}}, 1.0);
    const baselines::OmaResult res = baselines::oma_allocate(ch, {2.0});
    CHECK(res.time_fraction == doctest::Approx(1.0));
    CHECK(res.alloc.total_energy() == doctest::Approx(3.0 / 4.0).epsilon(1e-9));
}

TEST_CASE("heuristic NOMA meets targets with valid per-tone orders") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 23));
    const RateVector targets(3, mbps_to_rate(50.0, ch.scenario()));
    const baselines::NomaHeuristicResult res = baselines::noma_heuristic_allocate(ch, targets);
    for (int i = 0; i < 3; ++i) CHECK(res.rates[i] >= targets[i] - 1e-9);
    REQUIRE(static_cast<int>(res.orders.size()) == ch.tones());
    for (const DecodeOrder &order : res.orders) {
        DecodeOrder sorted = order;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == DecodeOrder{0, 1, 2});
    }
}

TEST_CASE("brute force recovers an enclosed grid point") {
    // Single user: the continuous optimum p = 3/4 lies on a grid that
    // includes it exactly, so the oracle must return it.
    const ChannelSet ch = explicit_channels({{2.0}}, 1.0);
    baselines::GridSpec grid;
    grid.levels = 5;
    grid.p_max = 3.0; // grid {0, 0.75, 1.5, 2.25, 3}
    const baselines::BruteForceResult res = baselines::brute_force_min_energy(ch, {2.0}, grid);
    REQUIRE(res.feasible);
    CHECK(res.objective == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.evaluated == 5);
}

TEST_CASE("brute force brackets the exact solver from above") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const ChannelSet ch = channel::generate_channels(desk_scenario(2, 1, 10.0, seed));
        const RateVector targets(2, mbps_to_rate(30.0, ch.scenario()));
        const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, {1.0, 1.0});
        double peak = 0.0;
        for (double p : sol.alloc.p) peak = std::max(peak, p);
        baselines::GridSpec grid;
        grid.levels = 200;
        grid.p_max = 2.0 * peak + 1e-9;
        const baselines::BruteForceResult res =
            baselines::brute_force_min_energy(ch, targets, grid);
        REQUIRE(res.feasible);
        CHECK(sol.objective <= res.objective + 1e-9);
        CHECK(res.objective <= sol.objective * 1.05);
    }
}

TEST_CASE("brute force reports infeasible grids") {
    const ChannelSet ch = explicit_channels({{1.0}}, 1.0);
    baselines::GridSpec grid;
    grid.levels = 3;
    grid.p_max = 0.5; // max rate log2(1.5) < 1
    const baselines::BruteForceResult res = baselines::brute_force_min_energy(ch, {1.0}, grid);
    CHECK_FALSE(res.feasible);
}

TEST_CASE("brute force refuses oversized grids") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(4, 2, 10.0, 2));
    baselines::GridSpec grid; // 4 users x 2 tones = 8 dimensions > 6
    CHECK_THROWS((void)baselines::brute_force_min_energy(
        ch, RateVector(4, 0.1), grid));
}

TEST_CASE("budgeted baselines spend within the budget") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 20.0, 31));
    const double budget = 2.0;
    const baselines::OmaResult oma = baselines::oma_max_rate(ch, budget);
    CHECK(oma.alloc.total_energy() <= budget + 1e-9);
    const baselines::NomaHeuristicResult noma = baselines::noma_heuristic_max_rate(ch, budget);
    CHECK(noma.alloc.total_energy() <= budget + 1e-9);
    double noma_sum = 0.0;
    for (double r : noma.rates) noma_sum += r;
    CHECK(noma_sum > 0.0);
}
