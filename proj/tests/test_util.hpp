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

#include "macalloc/channel.hpp"
#include "macalloc/types.hpp"

#include <vector>

namespace macalloc::testutil {

/// Small scenario with equal user distances, calibrated to a receive SNR.
inline Scenario desk_scenario(int users = 3, int tones = 4, double snr_db = 10.0,
                              std::uint64_t seed = 42, double distance_m = 3.0) {
    Scenario sc;
    sc.num_users = users;
    sc.num_subcarriers = tones;
    sc.user_distances.assign(users, distance_m);
    sc.target_receive_snr_db = snr_db;
    sc.has_target_snr = true;
    sc.seed = seed;
    return sc;
}

/// Channels built from explicit real scalar gains g[user][tone], unit noise
/// unless overridden. Keeps closed-form cases exact.
inline ChannelSet explicit_channels(const std::vector<std::vector<double>> &g,
                                    double sigma2 = 1.0) {
    const int users = static_cast<int>(g.size());
    const int tones = static_cast<int>(g.front().size());
    Scenario sc;
    sc.num_users = users;
    sc.num_subcarriers = tones;
    sc.rx_antennas = 1;
    sc.user_distances.assign(users, 1.0);
    sc.noise_variance = sigma2;
    std::vector<cdouble> gains;
    gains.reserve(static_cast<std::size_t>(users) * tones);
    for (int i = 0; i < users; ++i)
        for (int j = 0; j < tones; ++j) gains.emplace_back(g[i][j], 0.0);
    return ChannelSet(sc, std::move(gains), sigma2);
}

/// Uniform power allocation helper.
inline PowerAllocation flat_powers(int users, int tones, double p) {
    PowerAllocation alloc;
    alloc.users = users;
    alloc.tones = tones;
    alloc.p.assign(static_cast<std::size_t>(users) * tones, p);
    alloc.weights.assign(users, 1.0);
    return alloc;
}

} // namespace macalloc::testutil
