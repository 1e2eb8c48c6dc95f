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

namespace macalloc::capacity {

/// Per-user SIC rates for one decoding order (bits/tone-use summed over
/// tones). The user at position k subtracts everything already decoded and
/// treats positions k+1.. as noise:
///   r = log2 det(Z + sum_{k>=i} p g g^H) - log2 det(Z + sum_{k>=i+1} p g g^H)
RateVector sic_rates(const ChannelSet &channels, const PowerAllocation &alloc,
                     const DecodeOrder &order);

/// Same, restricted to a single tone.
RateVector sic_rates_tone(const ChannelSet &channels, const PowerAllocation &alloc,
                          const DecodeOrder &order, int tone);

/// sum_j log2 det((Z + sum_{i in subset} p_{i,j} g g^H) Z^-1). The polymatroid
/// rank of the user subset; monotone nondecreasing in every power.
double subset_capacity(const ChannelSet &channels, const PowerAllocation &alloc,
                       const std::vector<int> &subset);

struct PolymatroidCheck {
    bool ok = true;
    std::vector<int> worst_subset; // subset with the largest violation
    double worst_violation = 0.0;  // max over subsets of (sum r - capacity)
};

/// Check sum_{i in S} r_i <= subset_capacity(S) + tol for every nonempty
/// subset (2^N - 1 of them; guarded at N <= 20).
PolymatroidCheck check_polymatroid(const ChannelSet &channels, const PowerAllocation &alloc,
                                   const RateVector &rates, double tol);

/// Heuristic channel-gain NOMA rates: on each tone users are ranked by
/// descending ||g||^2 (ties by user index); rank k sees ranks k+1.. as
/// interference. Scalar receivers use the plain SINR ratio; multi-antenna
/// receivers use the matched-filter SINR with the interference covariance in
/// the denominator.
RateVector heuristic_sinr_rates(const ChannelSet &channels, const PowerAllocation &alloc);

/// Per-tone decode orders used by heuristic_sinr_rates (strongest first).
std::vector<DecodeOrder> heuristic_orders(const ChannelSet &channels);

/// Orthogonal rates: each tone belongs to exactly one user
/// (assignment[tone] = user); power on a foreign tone is a constraint error.
RateVector oma_rates(const ChannelSet &channels, const PowerAllocation &alloc,
                     const std::vector<int> &assignment);

/// All N! decode orders in lexicographic order. Guarded at N <= 8.
std::vector<DecodeOrder> enumerate_orders(int users);

} // namespace macalloc::capacity
