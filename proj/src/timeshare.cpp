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

#include "macalloc/timeshare.hpp"

#include "macalloc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace macalloc::timeshare {

namespace {

std::uint64_t factorial(std::size_t n) {
    std::uint64_t f = 1;
    for (std::size_t k = 2; k <= n; ++k) f *= k;
    return f;
}

/// Solve the mixture LP restricted to the candidate columns in `subset`.
/// allow_surplus: min sum_i s_i  s.t.  sum_j w_j R_ij - s_i = t_i, sum w = 1
/// exact:         feasibility     s.t.  sum_j w_j R_ij       = t_i, sum w = 1
/// Returns true and fills `weights` (indexed like `subset`) when feasible.
bool subset_mixture(const TimeShareProblem &problem, const std::vector<int> &subset,
                    TargetMode mode, double tol, std::vector<double> &weights) {
    const int users = static_cast<int>(problem.targets.size());
    const int k = static_cast<int>(subset.size());
    const bool surplus = mode == TargetMode::allow_surplus;
    const int cols = surplus ? k + users : k;
    const int rows = users + 1;

    std::vector<double> a(static_cast<std::size_t>(rows) * cols, 0.0);
    std::vector<double> b(rows, 0.0);
    std::vector<double> c(cols, 0.0);
    for (int i = 0; i < users; ++i) {
        for (int jj = 0; jj < k; ++jj)
            a[static_cast<std::size_t>(i) * cols + jj] = problem.vertex_rates[subset[jj]][i];
        if (surplus) {
            a[static_cast<std::size_t>(i) * cols + k + i] = -1.0;
            c[k + i] = 1.0;
        }
        b[i] = problem.targets[i];
    }
    for (int jj = 0; jj < k; ++jj) a[static_cast<std::size_t>(users) * cols + jj] = 1.0;
    b[users] = 1.0;

    const lp::LpResult res = lp::solve_lp(a, rows, cols, b, c);
    if (res.status != lp::LpStatus::optimal) return false;

    weights.assign(k, 0.0);
    for (int jj = 0; jj < k; ++jj) weights[jj] = std::max(0.0, res.x[jj]);
    // Near-identical vertex columns leave the basis ill-conditioned, and the
    // returned weights can miss the convexity row by far more than machine
    // precision. Renormalizing restores an exactly convex mixture; the
    // recheck below decides whether it still covers the targets.
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (!(wsum > 0.0)) return false;
    for (double &w : weights) w /= wsum;
    // In exact mode the LP already pins the rates; in surplus mode any
    // leftover objective is legitimate slack. Either way re-check that no
    // component fell short of its target.
    for (int i = 0; i < users; ++i) {
        double got = 0.0;
        for (int jj = 0; jj < k; ++jj) got += weights[jj] * problem.vertex_rates[subset[jj]][i];
        const double scale = std::max(1.0, std::abs(problem.targets[i]));
        if (got < problem.targets[i] - tol * scale) return false;
        if (!surplus && got > problem.targets[i] + tol * scale) return false;
    }
    return true;
}

/// Max-margin separating direction certifying infeasibility.
/// allow_surplus: maximize t s.t. lam >= 0, sum lam = 1,
///                lam.(targets - R_j) >= t for all j
/// exact: same with lam free (lam = u - v, sum(u + v) = 1).
std::pair<std::vector<double>, double> separating_direction(const TimeShareProblem &problem,
                                                            TargetMode mode) {
    const int users = static_cast<int>(problem.targets.size());
    const int n_orders = static_cast<int>(problem.orders.size());
    const bool signed_dir = mode == TargetMode::exact;
    const int lam_cols = signed_dir ? 2 * users : users;
    // columns: lam (or u,v), t+, t-, one slack per order
    const int cols = lam_cols + 2 + n_orders;
    const int rows = n_orders + 1;

    std::vector<double> a(static_cast<std::size_t>(rows) * cols, 0.0);
    std::vector<double> b(rows, 0.0);
    std::vector<double> c(cols, 0.0);
    for (int j = 0; j < n_orders; ++j) {
        double *row = a.data() + static_cast<std::size_t>(j) * cols;
        for (int i = 0; i < users; ++i) {
            const double d = problem.targets[i] - problem.vertex_rates[j][i];
            row[i] = d;
            if (signed_dir) row[users + i] = -d;
        }
        row[lam_cols] = -1.0;     // -t+
        row[lam_cols + 1] = 1.0;  // +t-
        row[lam_cols + 2 + j] = -1.0;
    }
    double *norm_row = a.data() + static_cast<std::size_t>(n_orders) * cols;
    for (int i = 0; i < lam_cols; ++i) norm_row[i] = 1.0;
    b[n_orders] = 1.0;
    c[lam_cols] = -1.0; // maximize t
    c[lam_cols + 1] = 1.0;

    const lp::LpResult res = lp::solve_lp(a, rows, cols, b, c);
    std::vector<double> lam(users, 0.0);
    if (res.status != lp::LpStatus::optimal) return {lam, 0.0};
    for (int i = 0; i < users; ++i) {
        lam[i] = res.x[i];
        if (signed_dir) lam[i] -= res.x[users + i];
    }
    return {lam, -res.objective};
}

} // namespace

std::vector<DecodeOrder> candidate_orders(const Clusters &clusters) {
    if (clusters.empty()) throw std::invalid_argument("candidate_orders: empty cluster list");
    std::uint64_t total = 1;
    std::size_t users = 0;
    for (const auto &cluster : clusters) {
        if (cluster.empty()) throw std::invalid_argument("candidate_orders: empty cluster");
        users += cluster.size();
        total *= factorial(cluster.size());
        if (total > 720)
            throw std::invalid_argument(
                "candidate_orders: more than 720 cluster-respecting orders; "
                "the dual clustering tolerance is likely too loose");
    }

    std::vector<std::vector<int>> sorted = clusters;
    for (auto &cluster : sorted) std::sort(cluster.begin(), cluster.end());
    {
        std::vector<int> seen;
        for (const auto &cluster : sorted) seen.insert(seen.end(), cluster.begin(), cluster.end());
        std::sort(seen.begin(), seen.end());
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (seen[i] != static_cast<int>(i))
                throw std::invalid_argument("candidate_orders: clusters must partition 0..N-1");
    }

    std::vector<DecodeOrder> out;
    out.reserve(total);
    // Odometer over per-cluster permutations, first cluster outermost.
    std::vector<std::vector<int>> perm = sorted;
    while (true) {
        DecodeOrder order;
        order.reserve(users);
        for (const auto &cluster : perm) order.insert(order.end(), cluster.begin(), cluster.end());
        out.push_back(std::move(order));
        int pos = static_cast<int>(perm.size()) - 1;
        while (pos >= 0 && !std::next_permutation(perm[pos].begin(), perm[pos].end())) --pos;
        if (pos < 0) break;
    }
    return out;
}

TimeShareSolution solve_timeshare(const TimeShareProblem &problem, double tol, TargetMode mode) {
    const int n_orders = static_cast<int>(problem.orders.size());
    const int users = static_cast<int>(problem.targets.size());
    if (n_orders == 0) throw std::invalid_argument("solve_timeshare: no candidate orders");
    if (static_cast<int>(problem.vertex_rates.size()) != n_orders)
        throw std::invalid_argument("solve_timeshare: orders and vertex_rates disagree");
    for (const auto &r : problem.vertex_rates)
        if (static_cast<int>(r.size()) != users)
            throw std::invalid_argument("solve_timeshare: vertex rate dimension mismatch");
    if (tol <= 0.0) throw std::invalid_argument("solve_timeshare: tol must be positive");

    // A feasible mixture hitting a point in R^users needs at most users+1
    // vertices, so deeper subsets are never required.
    const int max_support = std::min(n_orders, users + 1);

    // Candidate columns to enumerate over. Small candidate sets are searched
    // exhaustively; large ones are first narrowed to the support of one
    // feasible basic solution (any minimal-support subset of it stays
    // minimal over that restriction).
    std::vector<int> pool(n_orders);
    std::iota(pool.begin(), pool.end(), 0);
    if (n_orders > 24) {
        std::vector<double> w;
        if (!subset_mixture(problem, pool, mode, tol, w)) {
            auto [direction, margin] = separating_direction(problem, mode);
            std::ostringstream msg;
            msg << "solve_timeshare: targets unreachable by any mixture of " << n_orders
                << " candidate orders (separating margin " << margin << ")";
            throw timeshare_infeasible(msg.str(), std::move(direction), margin);
        }
        std::vector<int> basic;
        for (int j = 0; j < n_orders; ++j)
            if (w[j] > tol) basic.push_back(j);
        if (!basic.empty()) pool = std::move(basic);
    }

    const int pool_size = static_cast<int>(pool.size());
    for (int k = 1; k <= std::min(max_support, pool_size); ++k) {
        std::vector<int> pick(k);
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            std::vector<int> subset(k);
            for (int jj = 0; jj < k; ++jj) subset[jj] = pool[pick[jj]];
            std::vector<double> w;
            if (subset_mixture(problem, subset, mode, tol, w)) {
                TimeShareSolution sol;
                sol.weights.assign(n_orders, 0.0);
                sol.active.assign(n_orders, 0);
                for (int jj = 0; jj < k; ++jj) {
                    sol.weights[subset[jj]] = w[jj];
                    sol.active[subset[jj]] = 1;
                }
                sol.support = k;
                sol.achieved.assign(users, 0.0);
                for (int j = 0; j < n_orders; ++j)
                    for (int i = 0; i < users; ++i)
                        sol.achieved[i] += sol.weights[j] * problem.vertex_rates[j][i];
                sol.surplus.assign(users, 0.0);
                for (int i = 0; i < users; ++i) sol.surplus[i] = sol.achieved[i] - problem.targets[i];
                return sol;
            }
            // next k-combination of {0..pool_size-1} in lexicographic order
            int pos = k - 1;
            while (pos >= 0 && pick[pos] == pool_size - k + pos) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int q = pos + 1; q < k; ++q) pick[q] = pick[q - 1] + 1;
        }
    }

    auto [direction, margin] = separating_direction(problem, mode);
    std::ostringstream msg;
    msg << "solve_timeshare: targets unreachable by any mixture of " << n_orders
        << " candidate orders (separating margin " << margin << ")";
    throw timeshare_infeasible(msg.str(), std::move(direction), margin);
}

} // namespace macalloc::timeshare
