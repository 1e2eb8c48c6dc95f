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

#include <cmath>

using namespace macalloc;
using testutil::desk_scenario;
using testutil::explicit_channels;

TEST_CASE("single user, single tone: closed form power and dual") {
    // min p s.t. log2(1 + p) >= 1 has p* = 1 and stationarity gives
    // theta* = ln2 * (sigma2 + p*) = 2 ln 2.
    const ChannelSet ch = explicit_channels({{1.0}}, 1.0);
    const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, {1.0}, {1.0});
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sol.duals[0] == doctest::Approx(2.0 * M_LN2).epsilon(1e-8));
    CHECK(sol.achieved[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(sol.time_shared);
}

TEST_CASE("single user, two tones: water-filling equalizes the marginals") {
    const double g1 = 1.0, g2 = 2.0;
    const ChannelSet ch = explicit_channels({{g1, g2}}, 1.0);
    minpmac::SolveOptions opts;
    opts.rel_gap = 1e-8;
    const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, {3.0}, {1.0}, opts);
    const double p1 = sol.alloc.at(0, 0), p2 = sol.alloc.at(0, 1);
    CHECK(sol.achieved[0] == doctest::Approx(3.0).epsilon(1e-9));
    // Both tones active: water level 1/g^2 + p equal across tones. The
    // objective is flat to first order around the optimum, so the levels
    // only match to about the square root of the duality gap.
    REQUIRE(p1 > 0.0);
    REQUIRE(p2 > 0.0);
    CHECK(1.0 / (g1 * g1) + p1 == doctest::Approx(1.0 / (g2 * g2) + p2).epsilon(5e-4));
    // And the solver cannot beat the analytic water-filling energy.
    // log2((1+g1^2 p1)(1+g2^2 p2)) = 3 with equal water level w:
    // (g1^2 w)(g2^2 w) = 2^3 -> w = sqrt(8 / (g1^2 g2^2)).
    const double w = std::sqrt(8.0 / (g1 * g1 * g2 * g2));
    const double want = (w - 1.0 / (g1 * g1)) + (w - 1.0 / (g2 * g2));
    CHECK(sol.objective == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("symmetric two-user case needs time sharing at the midpoint") {
    const ChannelSet ch = explicit_channels({{1.0}, {1.0}}, 1.0);
    const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, {0.5, 0.5}, {1.0, 1.0});
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(sol.time_shared);
    CHECK(sol.orders.size() == 2);
    CHECK(std::abs(sol.duals[0] - sol.duals[1]) < 1e-4 * std::max(1.0, sol.duals[0]));
    double wsum = 0.0;
    for (double w : sol.order_weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.achieved[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.achieved[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("zero targets cost zero energy") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4));
    const minpmac::MinPmacSolution sol =
        minpmac::solve_min_energy(ch, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    CHECK(sol.objective == 0.0);
    CHECK(sol.alloc.total_energy() == 0.0);
    CHECK(sol.outer_iterations == 0);
}

TEST_CASE("a user with zero gain and positive target is infeasible") {
    const ChannelSet ch = explicit_channels({{1.0, 1.0}, {0.0, 0.0}}, 1.0);
    CHECK_THROWS_AS((void)minpmac::solve_min_energy(ch, {0.5, 0.5}, {1.0, 1.0}),
                    infeasible_error);
}

TEST_CASE("random instances verify end to end") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, seed));
        const Scenario &sc = ch.scenario();
        const RateVector targets(3, mbps_to_rate(50.0, sc));
        const minpmac::MinPmacSolution sol =
            minpmac::solve_min_energy(ch, targets, {1.0, 1.0, 1.0});
        const minpmac::VerifyReport rep = minpmac::verify_solution(ch, targets, sol, 1e-6);
        CHECK(rep.all_ok());
        CHECK(sol.rel_gap < 1e-4);
    }
}

TEST_CASE("optimal energy never exceeds the baselines") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 21));
    const RateVector targets(3, mbps_to_rate(60.0, ch.scenario()));
    const std::vector<double> ones(3, 1.0);
    const double opt = minpmac::solve_min_energy(ch, targets, ones).objective;
    CHECK(opt <= baselines::oma_allocate(ch, targets).alloc.total_energy() + 1e-9);
    CHECK(opt <= baselines::noma_heuristic_allocate(ch, targets).alloc.total_energy() + 1e-9);
}

TEST_CASE("energy weights steer the split") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(2, 2, 10.0, 33));
    const RateVector targets(2, mbps_to_rate(40.0, ch.scenario()));
    const minpmac::MinPmacSolution even = minpmac::solve_min_energy(ch, targets, {1.0, 1.0});
    const minpmac::MinPmacSolution skew = minpmac::solve_min_energy(ch, targets, {5.0, 1.0});
    // Pricing user 0 higher cannot increase the energy it is assigned.
    CHECK(skew.alloc.user_energy(0) <= even.alloc.user_energy(0) + 1e-6);
    // And the weighted objective is consistent with its own weights.
    CHECK(skew.objective ==
          doctest::Approx(5.0 * skew.alloc.user_energy(0) + skew.alloc.user_energy(1))
              .epsilon(1e-9));
}

TEST_CASE("per-tone power caps redistribute the water-filling") {
    // Free optimum for r = 3 over gains (1, 2) puts ~1.16 on the strong tone.
    // Capping at 1 pins that tone; the rest must come from the weak tone:
    // log2(1 + p1) = 3 - log2(5)  ->  p1 = 8/5 - 1 = 0.6 exactly.
    const ChannelSet ch = explicit_channels({{1.0, 2.0}}, 1.0);
    minpmac::SolveOptions opts;
    opts.rel_gap = 1e-8;
    opts.power_cap = 1.0;
    const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, {3.0}, {1.0}, opts);
    CHECK(sol.achieved[0] == doctest::Approx(3.0).epsilon(1e-9));
    for (double p : sol.alloc.p) CHECK(p <= opts.power_cap + 1e-9);
    CHECK(sol.alloc.at(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.alloc.at(0, 0) == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(1.6).epsilon(1e-6));

    minpmac::SolveOptions free_opts;
    free_opts.rel_gap = 1e-8;
    const double free_obj = minpmac::solve_min_energy(ch, {3.0}, {1.0}, free_opts).objective;
    CHECK(sol.objective >= free_obj - 1e-9);
}

TEST_CASE("solves are deterministic") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 90));
    const RateVector targets(3, mbps_to_rate(55.0, ch.scenario()));
    const std::vector<double> ones(3, 1.0);
    const minpmac::MinPmacSolution a = minpmac::solve_min_energy(ch, targets, ones);
    const minpmac::MinPmacSolution b = minpmac::solve_min_energy(ch, targets, ones);
    CHECK(a.objective == b.objective);
    CHECK(a.duals == b.duals);
    CHECK(a.alloc.p == b.alloc.p);
}

TEST_CASE("decode order follows ascending duals") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 77));
    const RateVector targets = {mbps_to_rate(30.0, ch.scenario()),
                                mbps_to_rate(60.0, ch.scenario()),
                                mbps_to_rate(45.0, ch.scenario())};
    const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, {1.0, 1.0, 1.0});
    // Flatten the clusters and check duals are nondecreasing along them.
    double prev = -1.0;
    for (const auto &cluster : sol.clusters) {
        double lo = 1e300, hi = -1e300;
        for (int u : cluster) {
            lo = std::min(lo, sol.duals[u]);
            hi = std::max(hi, sol.duals[u]);
        }
        CHECK(lo >= prev - 1e-4 * std::max(1.0, hi));
        prev = hi;
    }
}

TEST_CASE("budgeted sum-rate spends the budget and dominates baselines") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 4, 10.0, 42));
    const double budget = 2.0;
    const minpmac::BudgetResult best = minpmac::max_sum_rate(ch, budget);
    CHECK(best.alloc.total_energy() == doctest::Approx(budget).epsilon(1e-6));
    const baselines::OmaResult oma = baselines::oma_max_rate(ch, budget);
    const baselines::NomaHeuristicResult noma = baselines::noma_heuristic_max_rate(ch, budget);
    double oma_sum = 0.0, noma_sum = 0.0;
    for (double r : oma.rates) oma_sum += r;
    for (double r : noma.rates) noma_sum += r;
    CHECK(best.sum_rate >= oma_sum - 1e-9);
    CHECK(best.sum_rate >= noma_sum - 1e-9);

    const minpmac::BudgetResult more = minpmac::max_sum_rate(ch, 2.0 * budget);
    CHECK(more.sum_rate >= best.sum_rate - 1e-12);
}

TEST_CASE("verify_solution flags fabricated rate claims") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(2, 2, 10.0, 5));
    const RateVector targets(2, mbps_to_rate(40.0, ch.scenario()));
    minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, {1.0, 1.0});
    sol.achieved[0] += 0.5; // claim more than the powers support
    const minpmac::VerifyReport rep = minpmac::verify_solution(ch, targets, sol, 1e-6);
    CHECK_FALSE(rep.all_ok());
}
