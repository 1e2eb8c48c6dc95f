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

#include "macalloc/bench.hpp"

#include <filesystem>
#include <fstream>

using namespace macalloc;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "macalloc_bench_test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("experiment files parse with defaults and overrides") {
    const auto path = scratch_dir() / "exp.json";
    {
        std::ofstream out(path);
        out << R"({
  "scenario": {"num_users": 2, "num_subcarriers": 3, "distance": 4.0},
  "methods": ["oma", "noma"],
  "snr_db": [0.0, 10.0],
  "seeds": {"base": 5, "count": 3},
  "mode": "fixed_budget",
  "energy_budget": 1.5,
  "rate_floor_mbps": 12.0,
  "output_dir": "somewhere"
})";
    }
    const bench::ExperimentConfig cfg = bench::load_experiment(path.string());
    CHECK(cfg.scenario.num_users == 2);
    CHECK(cfg.scenario.num_subcarriers == 3);
    CHECK(cfg.scenario.user_distances == std::vector<double>{4.0, 4.0});
    REQUIRE(cfg.methods.size() == 2);
    CHECK(cfg.methods[0] == bench::Method::oma);
    CHECK(cfg.snr_db == std::vector<double>{0.0, 10.0});
    CHECK(cfg.seeds == std::vector<std::uint64_t>{5, 6, 7});
    CHECK(cfg.mode == bench::ComparisonMode::fixed_budget);
    CHECK(cfg.energy_budget == 1.5);
    CHECK(cfg.rate_floor_mbps == 12.0);
    CHECK(cfg.output_dir == "somewhere");
}

TEST_CASE("malformed experiment files are rejected") {
    const auto path = scratch_dir() / "bad.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS((void)bench::load_experiment(path.string()));
}

TEST_CASE("sweep covers the full method x snr x seed grid") {
    bench::ExperimentConfig cfg;
    cfg.scenario.num_users = 2;
    cfg.scenario.num_subcarriers = 2;
    cfg.scenario.user_distances = {3.0, 3.0};
    cfg.methods = {bench::Method::minpmac, bench::Method::oma, bench::Method::noma};
    cfg.snr_db = {0.0, 10.0};
    cfg.seeds = {1, 2};
    cfg.mode = bench::ComparisonMode::fixed_budget;
    cfg.energy_budget = 1.0;
    const bench::SweepTable cells = bench::sweep_snr(cfg);
    REQUIRE(cells.size() == 3 * 2 * 2);
    for (const bench::SweepCell &c : cells) {
        CHECK(c.ok);
        CHECK(c.sum_rate_mbps > 0.0);
        CHECK(static_cast<int>(c.user_rates_mbps.size()) == 2);
    }
}

TEST_CASE("tables export and read back") {
    bench::Table t;
    t.columns = {"a", "b"};
    t.rows = {{"1", "x"}, {"2.5", "minpmac"}};
    const auto path = scratch_dir() / "table.csv";
    bench::export_results(t, path.string());
    const bench::Table back = bench::read_table(path.string());
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
}

TEST_CASE("field separators are sanitized on export") {
    bench::Table t;
    t.columns = {"a"};
    t.rows = {{"y,z"}};
    const auto path = scratch_dir() / "table_sanitized.csv";
    bench::export_results(t, path.string());
    const bench::Table back = bench::read_table(path.string());
    REQUIRE(back.rows.size() == 1);
    REQUIRE(back.rows[0].size() == 1);
    CHECK(back.rows[0][0] == "y;z");
}

TEST_CASE("plot scripts reference the data and columns") {
    bench::Table t;
    t.columns = {"snr_db", "sum_rate_mbps", "method"};
    t.rows = {{"0", "10", "oma"}, {"10", "20", "oma"}};
    const auto gp = scratch_dir() / "plot.gp";
    bench::emit_plot_script(t, gp.string(), "data.csv", "snr_db", "sum_rate_mbps", "method",
                            "receive SNR (dB)", "sum rate (Mbps)");
    std::ifstream in(gp);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("data.csv") != std::string::npos);
    CHECK(text.find("receive SNR (dB)") != std::string::npos);
    CHECK(text.find("oma") != std::string::npos);
}

TEST_CASE("manifests record config and summary") {
    bench::ExperimentConfig cfg;
    cfg.scenario.num_users = 2;
    cfg.scenario.num_subcarriers = 2;
    cfg.scenario.user_distances = {3.0, 3.0};
    cfg.seeds = {1};
    const auto path = scratch_dir() / "manifest.json";
    bench::write_manifest(cfg, {{"cells", 4.0}, {"failed", 0.0}}, path.string());
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"cells\"") != std::string::npos);
    CHECK(text.find("\"seeds\"") != std::string::npos);
}

TEST_CASE("outage counts floor violations and stays in range") {
    bench::ExperimentConfig cfg;
    cfg.scenario.num_users = 2;
    cfg.scenario.num_subcarriers = 2;
    cfg.scenario.user_distances = {3.0, 3.0};
    cfg.methods = {bench::Method::oma, bench::Method::noma};
    cfg.snr_db = {0.0, 20.0};
    cfg.seeds = {1, 2, 3};
    cfg.mode = bench::ComparisonMode::fixed_budget;
    cfg.energy_budget = 1.0;
    const bench::OutageTable table = bench::outage_curve(cfg, 5.0);
    REQUIRE(table.cells.size() == 2 * 2);
    for (const bench::OutageCell &c : table.cells) {
        CHECK(c.outage >= 0.0);
        CHECK(c.outage <= 1.0);
        CHECK(c.seeds == 3);
    }
    CHECK(table.failed_cells == 0);
}

TEST_CASE("timing rows cover the requested methods") {
    bench::ExperimentConfig cfg;
    cfg.scenario.num_users = 2;
    cfg.scenario.num_subcarriers = 2;
    cfg.scenario.user_distances = {3.0, 3.0};
    cfg.methods = {bench::Method::minpmac, bench::Method::oma};
    cfg.snr_db = {10.0};
    cfg.seeds = {1};
    cfg.mode = bench::ComparisonMode::fixed_target;
    cfg.targets_mbps = {20.0};
    const bench::TimingTable table = bench::timing_compare(cfg);
    REQUIRE(table.rows.size() == 2);
    for (const bench::TimingRow &r : table.rows) {
        CHECK(r.median_seconds > 0.0);
        CHECK(r.repetitions >= 20);
    }
    CHECK(table.drl_speedup == 0.0); // no drl row requested
}

TEST_CASE("method names round-trip") {
    for (bench::Method m : {bench::Method::minpmac, bench::Method::oma, bench::Method::noma,
                            bench::Method::brute, bench::Method::drl, bench::Method::timeshare}) {
        CHECK(bench::method_from_name(bench::method_name(m)) == m);
    }
    CHECK_THROWS((void)bench::method_from_name("nonsense"));
}
