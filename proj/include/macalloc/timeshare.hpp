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

#include "macalloc/types.hpp"

namespace macalloc::timeshare {

/// Ordered partition of the users: clusters[0] is decoded first. Users inside
/// one cluster carry (numerically) equal duals, so their internal order is
/// free.
using Clusters = std::vector<std::vector<int>>;

/// Candidate decoding orders plus the SIC vertex rates they achieve at one
/// shared power allocation.
struct TimeShareProblem {
    std::vector<DecodeOrder> orders;
    std::vector<RateVector> vertex_rates; // R_j, one per order
    RateVector targets;                   // r_th
};

struct TimeShareSolution {
    std::vector<double> weights; // w_j in [0,1], sum 1
    std::vector<char> active;    // y_j
    int support = 0;             // sum_j y_j, minimized
    RateVector achieved;         // sum_j w_j R_j
    RateVector surplus;          // achieved - targets
};

/// How constraint D5 is read: `exact` demands sum_j w_j R_j = r_th, the
/// default accepts componentwise surplus and minimizes its total.
enum class TargetMode { allow_surplus, exact };

/// Thrown when no mixture of the candidate vertices can reach the targets.
/// `direction` is a max-margin separating normal: direction . r_th exceeds
/// direction . R_j by at least `margin` for every candidate.
class timeshare_infeasible : public infeasible_error {
  public:
    timeshare_infeasible(const std::string &what, std::vector<double> direction, double margin)
        : infeasible_error(what), direction_(std::move(direction)), margin_(margin) {}
    const std::vector<double> &direction() const { return direction_; }
    double margin() const { return margin_; }

  private:
    std::vector<double> direction_;
    double margin_;
};

/// All cluster-respecting decode orders: the odometer over per-cluster
/// permutations (first cluster outermost, lexicographic within a cluster).
/// Guarded at prod_c |cluster_c|! <= 720; exceeding it suggests the cluster
/// tolerance grouped too aggressively.
std::vector<DecodeOrder> candidate_orders(const Clusters &clusters);

/// Pick time-sharing weights over the candidate orders achieving the targets
/// with as few active orders as possible. Support subsets are enumerated in
/// increasing cardinality (smallest first feasible wins; ties by enumeration
/// order) with an LP feasibility/surplus problem per subset.
TimeShareSolution solve_timeshare(const TimeShareProblem &problem, double tol,
                                  TargetMode mode = TargetMode::allow_surplus);

} // namespace macalloc::timeshare
