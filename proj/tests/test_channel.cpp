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

#include "macalloc/channel.hpp"
#include "test_util.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace macalloc;
using testutil::desk_scenario;

TEST_CASE("pathloss reference points") {
    CHECK(channel::pathloss_db(1.0, 5.0e9) == doctest::Approx(46.4).epsilon(1e-12));
    CHECK(channel::pathloss_db(100.0, 5.0e9) == doctest::Approx(83.8).epsilon(1e-12));
    CHECK(channel::pathloss_db(3.0, 2.49e9) == doctest::Approx(49.26675431845204).epsilon(1e-12));
    CHECK(channel::pathloss_db(10.0, 2.49e9) == doctest::Approx(59.044586855194346).epsilon(1e-12));
}

TEST_CASE("pathloss grows with distance and carrier") {
    CHECK(channel::pathloss_db(5.0, 2.49e9) < channel::pathloss_db(50.0, 2.49e9));
    CHECK(channel::pathloss_db(5.0, 2.49e9) < channel::pathloss_db(5.0, 5.8e9));
}

TEST_CASE("generation is deterministic in the seed") {
    Scenario sc = desk_scenario();
    const ChannelSet a = channel::generate_channels(sc);
    const ChannelSet b = channel::generate_channels(sc);
    CHECK(a.raw_gains() == b.raw_gains());
    CHECK(a.sigma2() == b.sigma2());

    sc.seed = 43;
    const ChannelSet c = channel::generate_channels(sc);
    CHECK(a.raw_gains() != c.raw_gains());
}

TEST_CASE("pathloss shapes the mean gain ordering") {
    Scenario near = desk_scenario(2, 16, 10.0, 7, 2.0);
    near.has_target_snr = false;
    Scenario far = near;
    far.user_distances.assign(2, 40.0);
    const ChannelSet a = channel::generate_channels(near);
    const ChannelSet b = channel::generate_channels(far);
    CHECK(a.mean_gain_sq() > b.mean_gain_sq());
}

TEST_CASE("noise calibration hits the requested receive SNR") {
    Scenario sc = desk_scenario(3, 8, 0.0, 5);
    sc.has_target_snr = false;
    const ChannelSet raw = channel::generate_channels(sc);
    for (double snr_db : {-10.0, 0.0, 17.0}) {
        const ChannelSet cal = channel::calibrate_noise(raw, snr_db, 1.0);
        const double measured = 10.0 * std::log10(cal.mean_gain_sq() * 1.0 / cal.sigma2());
        CHECK(measured == doctest::Approx(snr_db).epsilon(1e-9));
    }
}

TEST_CASE("channel files round-trip bit exactly") {
    Scenario sc = desk_scenario(3, 4, 10.0, 42);
    const ChannelSet ch = channel::generate_channels(sc);
    const std::string path =
        (std::filesystem::temp_directory_path() / "macalloc_test_roundtrip.ch").string();
    channel::save_channels(ch, path);
    const ChannelSet back = channel::load_channels(path);
    CHECK(back.users() == ch.users());
    CHECK(back.tones() == ch.tones());
    CHECK(back.rx() == ch.rx());
    CHECK(back.sigma2() == ch.sigma2());
    CHECK(back.raw_gains() == ch.raw_gains());
    std::filesystem::remove(path);
}

TEST_CASE("stream save and load agree with the file form") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(2, 3, 5.0, 9));
    std::stringstream buf;
    channel::save_channels(ch, buf);
    const ChannelSet back = channel::load_channels(buf);
    CHECK(back.raw_gains() == ch.raw_gains());
    CHECK(back.sigma2() == ch.sigma2());
}

TEST_CASE("loading rejects malformed headers") {
    std::stringstream empty;
    CHECK_THROWS(channel::load_channels(empty));

    std::stringstream wrong_magic("NOT-A-CHANNEL v9\nusers 1 tones 1 rx 1 sigma2 1\n1 1 0 0\n");
    CHECK_THROWS(channel::load_channels(wrong_magic));

    std::stringstream truncated("MACALLOC-CH v1\nusers 2 tones 2 rx 1 sigma2 1\n1 1 0.5 0\n");
    CHECK_THROWS(channel::load_channels(truncated));
}

TEST_CASE("multi-antenna generation carries rx dimension") {
    Scenario sc = desk_scenario(4, 2, 10.0, 3);
    sc.rx_antennas = 2;
    CHECK(sc.rank_deficient());
    const ChannelSet ch = channel::generate_channels(sc);
    CHECK(ch.rx() == 2);
    CHECK(ch.gain(0, 0).size() == 2);
    CHECK(ch.raw_gains().size() == 4u * 2u * 2u);
}
