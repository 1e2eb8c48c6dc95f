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

#include <limits>

namespace macalloc::baselines {

/// Uniform power grid for the exhaustive oracle.
struct GridSpec {
    int levels = 2;     // points per (user, tone) dimension, includes 0 and p_max
    double p_max = 1.0; // W
};

struct BruteForceResult {
    bool feasible = false;
    PowerAllocation alloc;
    double objective = 0.0; // weighted energy at the argmin
    DecodeOrder order;      // a decoding order meeting the targets there
    std::uint64_t evaluated = 0;
};

/// Exhaustive minimum-energy search over the power grid; a grid point is
/// feasible when at least one of the N! decoding orders meets every target.
/// Ties keep the lowest linear grid index. Guarded at N*S <= 6 dimensions.
/// `weights` are the per-user energy weights (all ones when empty).
BruteForceResult brute_force_min_energy(const ChannelSet &channels, const RateVector &targets,
                                        const GridSpec &grid,
                                        const std::vector<double> &weights = {});

struct OmaResult {
    PowerAllocation alloc;       // average power per tone use
    std::vector<int> assignment; // tone -> owning user; all -1 in time-share mode
    RateVector rates;
    double time_fraction = 1.0; // 1/N when tones are time-shared (S < N)
};

/// Orthogonal baseline: tones partitioned round-robin, each user runs equal
/// power on its own tones, sized by bisection to just meet its target. With
/// fewer tones than users every user instead gets all tones for a 1/N time
/// slice. Throws when a target is unreachable under `power_cap`.
OmaResult oma_allocate(const ChannelSet &channels, const RateVector &targets,
                       double power_cap = std::numeric_limits<double>::infinity());

/// Orthogonal baseline at a fixed total energy budget: the budget splits
/// equally across users and each user water-fills its own tones.
OmaResult oma_max_rate(const ChannelSet &channels, double total_energy);

struct NomaHeuristicResult {
    PowerAllocation alloc;
    std::vector<DecodeOrder> orders; // per tone, strongest gain decoded first
    RateVector rates;
};

/// Gain-ordered NOMA baseline: each tone decodes in descending channel gain;
/// powers come from back-substitution, sizing the last-decoded user first and
/// walking earlier users against the then-fixed interference. Each user's
/// target is split evenly over its usable tones, so the result meets the
/// targets exactly under the heuristic SINR model.
NomaHeuristicResult noma_heuristic_allocate(const ChannelSet &channels, const RateVector &targets);

/// Gain-ordered NOMA at a fixed total energy budget: equal split across users
/// and tones, rates evaluated under the heuristic SINR model.
NomaHeuristicResult noma_heuristic_max_rate(const ChannelSet &channels, double total_energy);

} // namespace macalloc::baselines
