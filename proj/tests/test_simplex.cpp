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

#include "macalloc/simplex.hpp"

#include <cmath>

using namespace macalloc;

TEST_CASE("equality-form LP with a known optimum") {
    // min -x1 - 2 x2  s.t.  x1 + x2 + s = 4, x2 + t = 3, all >= 0.
    // Optimum x = (1, 3), objective -7.
    const std::vector<double> A = {1, 1, 1, 0, //
                                   0, 1, 0, 1};
    const std::vector<double> b = {4, 3};
    const std::vector<double> c = {-1, -2, 0, 0};
    const lp::LpResult res = lp::solve_lp(A, 2, 4, b, c);
    REQUIRE(res.status == lp::LpStatus::optimal);
    CHECK(res.objective == doctest::Approx(-7.0).epsilon(1e-12));
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.x[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("degenerate vertices terminate under Bland's rule") {
    // Two redundant-looking rows pinning the same vertex.
    const std::vector<double> A = {1, 1, 1, 0, //
                                   1, 1, 0, 1};
    const std::vector<double> b = {2, 2};
    const std::vector<double> c = {-1, -1, 0, 0};
    const lp::LpResult res = lp::solve_lp(A, 2, 4, b, c);
    REQUIRE(res.status == lp::LpStatus::optimal);
    CHECK(res.objective == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("infeasible systems return a separating certificate") {
    // x1 = 1 and x1 = 2 cannot both hold.
    const std::vector<double> A = {1, //
                                   1};
    const std::vector<double> b = {1, 2};
    const std::vector<double> c = {0};
    const lp::LpResult res = lp::solve_lp(A, 2, 1, b, c);
    REQUIRE(res.status == lp::LpStatus::infeasible);
    REQUIRE(res.duals.size() == 2);
    // y^T b > 0 and y^T A <= 0 certify emptiness.
    const double yb = res.duals[0] * 1.0 + res.duals[1] * 2.0;
    const double yA = res.duals[0] + res.duals[1];
    CHECK(yb > 1e-9);
    CHECK(yA <= 1e-9);
}

TEST_CASE("unbounded problems are flagged") {
    // min -x1  s.t.  x1 - x2 = 0: push both to infinity.
    const std::vector<double> A = {1, -1};
    const std::vector<double> b = {0};
    const std::vector<double> c = {-1, 0};
    const lp::LpResult res = lp::solve_lp(A, 1, 2, b, c);
    CHECK(res.status == lp::LpStatus::unbounded);
}

TEST_CASE("optimal duals price the constraints") {
    // min c x with optimum interior to no constraint: strong duality gives
    // c^T x* = y^T b for equality-form LPs.
    const std::vector<double> A = {2, 1, 1, 0, //
                                   1, 3, 0, 1};
    const std::vector<double> b = {8, 9};
    const std::vector<double> c = {-3, -5, 0, 0};
    const lp::LpResult res = lp::solve_lp(A, 2, 4, b, c);
    REQUIRE(res.status == lp::LpStatus::optimal);
    REQUIRE(res.duals.size() == 2);
    const double yb = res.duals[0] * b[0] + res.duals[1] * b[1];
    CHECK(yb == doctest::Approx(res.objective).epsilon(1e-9));
}

TEST_CASE("zero right-hand side admits the zero solution") {
    const std::vector<double> A = {1, 2, 3};
    const std::vector<double> b = {0};
    const std::vector<double> c = {1, 1, 1};
    const lp::LpResult res = lp::solve_lp(A, 1, 3, b, c);
    REQUIRE(res.status == lp::LpStatus::optimal);
    CHECK(res.objective == doctest::Approx(0.0));
    for (double v : res.x) CHECK(std::abs(v) < 1e-12);
}
