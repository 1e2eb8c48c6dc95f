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

#include "macalloc/minpmac.hpp"
#include "macalloc/timeshare.hpp"

#include <cmath>

using namespace macalloc;

TEST_CASE("distinct duals give singleton clusters in ascending order") {
    const timeshare::Clusters c = minpmac::decode_order_from_duals({0.5, 1.2, 0.9}, 1e-4);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::vector<int>{0});
    CHECK(c[1] == std::vector<int>{2});
    CHECK(c[2] == std::vector<int>{1});
}

TEST_CASE("tied duals merge into one cluster") {
    const timeshare::Clusters c = minpmac::decode_order_from_duals({1.0, 1.0 + 1e-7, 2.0}, 1e-4);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == std::vector<int>{0, 1});
    CHECK(c[1] == std::vector<int>{2});
}

TEST_CASE("near-ties chain through adjacent gaps") {
    // Each adjacent gap is below tol even though the ends differ by more.
    const double tol = 1e-4;
    const timeshare::Clusters c =
        minpmac::decode_order_from_duals({1.0, 1.0 + 6e-5, 1.0 + 1.2e-4}, tol);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("candidate orders are the per-cluster permutation product") {
    const timeshare::Clusters clusters = {{2}, {0, 1}};
    const auto orders = timeshare::candidate_orders(clusters);
    REQUIRE(orders.size() == 2);
    CHECK(orders[0] == DecodeOrder{2, 0, 1});
    CHECK(orders[1] == DecodeOrder{2, 1, 0});
}

TEST_CASE("oversized cluster products are rejected") {
    timeshare::Clusters clusters = {{0, 1, 2, 3, 4, 5, 6}}; // 7! = 5040 > 720
    CHECK_THROWS(timeshare::candidate_orders(clusters));
}

TEST_CASE("midpoint targets need both vertices of a two-user exchange") {
    timeshare::TimeShareProblem prob;
    prob.orders = {{0, 1}, {1, 0}};
    prob.vertex_rates = {{0.2, 0.8}, {0.8, 0.2}};
    prob.targets = {0.5, 0.5};
    const timeshare::TimeShareSolution sol = timeshare::solve_timeshare(prob, 1e-9);
    CHECK(sol.support == 2);
    CHECK(sol.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.achieved[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.achieved[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("a vertex that already covers the targets wins with support one") {
    timeshare::TimeShareProblem prob;
    prob.orders = {{0, 1}, {1, 0}};
    prob.vertex_rates = {{0.6, 0.9}, {1.0, 0.1}};
    prob.targets = {0.5, 0.5};
    const timeshare::TimeShareSolution sol = timeshare::solve_timeshare(prob, 1e-9);
    CHECK(sol.support == 1);
    CHECK(sol.active[0] == 1);
    CHECK(sol.achieved[0] >= 0.5 - 1e-12);
    CHECK(sol.achieved[1] >= 0.5 - 1e-12);
}

TEST_CASE("weights are a convex combination") {
    timeshare::TimeShareProblem prob;
    prob.orders = {{0, 1}, {1, 0}};
    prob.vertex_rates = {{0.1, 0.9}, {0.9, 0.1}};
    prob.targets = {0.4, 0.6};
    const timeshare::TimeShareSolution sol = timeshare::solve_timeshare(prob, 1e-9);
    double sum = 0.0;
    for (double w : sol.weights) {
        CHECK(w >= -1e-15);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unreachable targets raise the separating certificate") {
    timeshare::TimeShareProblem prob;
    prob.orders = {{0, 1}, {1, 0}};
    prob.vertex_rates = {{0.2, 0.3}, {0.3, 0.2}};
    prob.targets = {0.5, 0.5};
    try {
        (void)timeshare::solve_timeshare(prob, 1e-9);
        FAIL("expected timeshare_infeasible");
    } catch (const timeshare::timeshare_infeasible &e) {
        REQUIRE(e.direction().size() == 2);
        // direction . r_th >= direction . R_j + margin for every vertex
        const auto &d = e.direction();
        const double dt = d[0] * 0.5 + d[1] * 0.5;
        for (const RateVector &r : prob.vertex_rates)
            CHECK(dt >= d[0] * r[0] + d[1] * r[1] + e.margin() - 1e-12);
        CHECK(e.margin() > 0.0);
    }
}

TEST_CASE("exact mode rejects forced overshoot") {
    timeshare::TimeShareProblem prob;
    prob.orders = {{0, 1}};
    prob.vertex_rates = {{0.8, 0.8}};
    prob.targets = {0.5, 0.5};
    CHECK_THROWS(timeshare::solve_timeshare(prob, 1e-9, timeshare::TargetMode::exact));
    const timeshare::TimeShareSolution relaxed = timeshare::solve_timeshare(prob, 1e-9);
    CHECK(relaxed.support == 1);
    CHECK(relaxed.surplus[0] == doctest::Approx(0.3).epsilon(1e-9));
}
