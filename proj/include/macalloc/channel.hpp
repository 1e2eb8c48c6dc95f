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

#include <iosfwd>
#include <string>

#include "macalloc/types.hpp"

namespace macalloc::channel {

/// Indoor LOS pathloss in dB:
///   PL(d) = 46.4 + 18.7 log10(d_m) + 20 log10(f_GHz / 5.0)
/// Monotone increasing in distance. Throws std::invalid_argument on
/// non-positive inputs.
double pathloss_db(double distance_m, double carrier_hz);

/// Draw a channel realization for the scenario: per-tone independent
/// circularly-symmetric complex Gaussian fading per receive antenna with unit
/// variance, scaled by the pathloss amplitude 10^(-PL/20). Deterministic for a
/// fixed scenario seed (see Rng for the pinned generator). If the scenario
/// carries a target receive SNR, the noise level is calibrated against it at
/// unit reference power.
ChannelSet generate_channels(const Scenario &scenario);

/// Set sigma^2 so that the receive SNR at `reference_power` per user per tone,
///   reference_power * mean_{i,j} ||g_{i,j}||^2 / sigma^2,
/// equals the target. Returns a new set with Z = sigma^2 I.
ChannelSet calibrate_noise(const ChannelSet &channels, double target_receive_snr_db,
                           double reference_power);

/// Channel file format "MACALLOC-CH v1" (see README for the full schema):
///   MACALLOC-CH v1
///   users N tones S rx L sigma2 <value>
///   [zint row-major 2*L*L reals, optional]
///   user tone re im [re im ...]   (one row per user/tone pair, 1-based ids)
/// Save/load round-trips are bit-exact: values are written with enough digits
/// to reproduce the double exactly.
void save_channels(const ChannelSet &channels, const std::string &path);
ChannelSet load_channels(const std::string &path);

void save_channels(const ChannelSet &channels, std::ostream &out);
ChannelSet load_channels(std::istream &in, const std::string &name = "<stream>");

} // namespace macalloc::channel
