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

#include "macalloc/timeshare.hpp"
#include "macalloc/types.hpp"

#include <limits>

namespace macalloc::minpmac {

struct SolveOptions {
    /// Stop once (best primal objective - best dual bound) / max(1, primal)
    /// falls below this.
    double rel_gap = 1e-4;
    /// Feasibility slack on delivered rates, in bits per tone use.
    double rate_tol = 1e-6;
    /// Relative tolerance grouping numerically equal duals into one cluster.
    double cluster_tol = 1e-4;
    /// KKT residual target for the per-tone concave subproblems.
    double inner_tol = 1e-9;
    int max_outer = 5000;
    int max_inner = 500;
    /// Optional per-user per-tone power ceiling (W). Infinite by default.
    double power_cap = std::numeric_limits<double>::infinity();
};

/// Solution of one per-tone weighted trade-off: maximize
/// sum_i theta_i r_i - sum_i alpha_i p_i with rates at the polymatroid
/// vertex of the dual-descending order.
struct InnerToneResult {
    std::vector<double> powers; // per user, this tone
    RateVector rates;           // per user, this tone, at the vertex
    double objective = 0.0;
    int iterations = 0;
};

struct MinPmacSolution {
    PowerAllocation alloc;
    Duals duals;
    /// Decode sequence: clusters[0] decoded first; theta non-decreasing
    /// along the sequence, numerically equal duals grouped.
    timeshare::Clusters clusters;
    /// Time-sharing support: decoding orders with nonzero weight, all run at
    /// `alloc`. A single entry with weight 1 means no sharing is needed.
    std::vector<DecodeOrder> orders;
    std::vector<double> order_weights;
    RateVector achieved; // long-term average rates, bits/tone-use summed over tones
    double objective = 0.0;  // sum_i alpha_i E_i
    double dual_bound = 0.0; // certified lower bound on the objective
    double rel_gap = 0.0;
    int outer_iterations = 0;
    bool time_shared = false;
};

struct VerifyReport {
    bool rates_met = false; // D1
    double worst_rate_deficit = 0.0;
    bool polymatroid_ok = false; // D2
    double worst_polymatroid_violation = 0.0;
    bool powers_nonneg = false; // D3
    double worst_power = 0.0;
    bool comp_slack_ok = false; // theta_i (r_th_i - r_i) near zero
    double worst_comp_slack = 0.0;
    bool sic_consistent = false; // order mixture reproduces the achieved rates
    double worst_rate_mismatch = 0.0;
    bool needs_time_sharing = false;

    bool all_ok() const {
        return rates_met && polymatroid_ok && powers_nonneg && comp_slack_ok && sic_consistent;
    }
};

/// Maximize sum_i theta_i r_i - sum_i alpha_i p_i on one tone, rates taken at
/// the successive-decoding vertex induced by descending duals. Concave in the
/// powers; solved by projected gradient with backtracking. Users with a zero
/// dual receive zero power.
InnerToneResult inner_weighted_tradeoff(const ChannelSet &channels, const Duals &duals,
                                        const std::vector<double> &alpha, int tone,
                                        const SolveOptions &opts = {});

/// Minimize sum_i alpha_i E_i subject to per-user rate floors over the
/// multiple-access capacity region. Dual ascent on the rate constraints with
/// per-tone inner maximizations; primal recovery runs the time-sharing
/// solver over cluster-respecting decode orders.
MinPmacSolution solve_min_energy(const ChannelSet &channels, const RateVector &targets,
                                 const std::vector<double> &alpha, const SolveOptions &opts = {});

/// Group users into the decode sequence implied by the duals: ascending
/// theta, smallest decoded first; duals within cluster_tol * max(1, max
/// theta) of each other share a cluster. Ties inside a cluster keep user
/// index order.
timeshare::Clusters decode_order_from_duals(const Duals &duals, double cluster_tol);

/// Re-check a solution from first principles: rate floors, polymatroid
/// membership of the achieved rates, nonnegative powers, complementary
/// slackness, and that the declared order mixture actually delivers the
/// achieved rates under successive decoding at `alloc`.
VerifyReport verify_solution(const ChannelSet &channels, const RateVector &targets,
                             const MinPmacSolution &solution, double tol);

/// Best sum rate under a total transmit-energy budget shared by all users
/// and tones (bits/tone-use summed over tones). The budget is spent fully.
struct BudgetResult {
    PowerAllocation alloc;
    double sum_rate = 0.0;
    int iterations = 0;
};
BudgetResult max_sum_rate(const ChannelSet &channels, double total_energy,
                          const SolveOptions &opts = {});

} // namespace macalloc::minpmac
