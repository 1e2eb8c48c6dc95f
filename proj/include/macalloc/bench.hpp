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

#include "macalloc/drl.hpp"
#include "macalloc/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace macalloc::bench {

enum class Method { minpmac, timeshare, oma, noma, brute, drl };

std::string method_name(Method m);
Method method_from_name(const std::string &name);

/// Fixed-target compares energy needed to hit common rate targets;
/// fixed-budget compares sum rate reachable from a common total energy.
enum class ComparisonMode { fixed_target, fixed_budget };

struct ExperimentConfig {
    Scenario scenario; // geometry; the SNR grid overrides its target SNR per cell
    std::vector<Method> methods;
    std::vector<double> snr_db;
    std::vector<std::uint64_t> seeds; // shared across SNR points (common random numbers)
    ComparisonMode mode = ComparisonMode::fixed_budget;
    std::vector<double> targets_mbps; // fixed-target mode, one per user
    double energy_budget = 2.0;       // fixed-budget mode, total W over users and tones
    double rate_floor_mbps = 0.0;     // outage threshold
    bool fairness = true;             // DRL fairness reward on/off

    drl::EnvConfig drl_env; // scenario field is overwritten per cell
    drl::PpoConfig drl_ppo;
    int train_episodes = 80;
    std::string checkpoint; // optional pre-trained policy; empty trains in-process

    int brute_levels = 4;     // per-dimension grid for the oracle
    double brute_p_max = 0.0; // 0 picks a scale from the cell itself

    std::string output_dir = ".";

    void validate() const;
};

/// Parse the documented JSON experiment file.
ExperimentConfig load_experiment(const std::string &path);

struct SweepCell {
    Method method{};
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error; // per-cell failure, never fatal to the sweep
    double sum_rate_mbps = 0.0;
    RateVector user_rates_mbps;
    double energy = 0.0; // W actually spent
};
using SweepTable = std::vector<SweepCell>;

/// One cell per (method, SNR, seed), in that nesting order.
SweepTable sweep_snr(const ExperimentConfig &config);

struct OutageCell {
    Method method{};
    double snr_db = 0.0;
    int seeds = 0;
    double outage = 0.0; // fraction of seeds with min-user rate below the floor
};
struct OutageTable {
    std::vector<OutageCell> cells;
    /// Soft monotonicity check: entries describe any increase of outage with SNR.
    std::vector<std::string> monotonicity_violations;
    /// Cells whose solve failed outright; they count as outage events above.
    int failed_cells = 0;
};

OutageTable outage_curve(const ExperimentConfig &config, double rate_floor_mbps);

struct TimingRow {
    Method method{};
    double median_seconds = 0.0;
    int repetitions = 0;
};
struct TimingTable {
    std::vector<TimingRow> rows;
    /// minPMAC solve median / DRL decision median; 0 when either is absent.
    double drl_speedup = 0.0;
};

/// Median wall-clock per allocation decision, >= 20 timed repetitions after a
/// discarded warmup run, monotonic clock.
TimingTable timing_compare(const ExperimentConfig &config);

struct FairnessRow {
    bool fairness_on = false;
    double mean_sum_rate_mbps = 0.0;
    double rate_spread = 0.0; // mean of (max - min) / mean over seeds
    double mean_min_rate_mbps = 0.0;
    double outage = 0.0;
};
struct FairnessTable {
    FairnessRow with_fairness;
    FairnessRow without_fairness;
    int seeds = 0;
};

/// Trains one agent with the fairness reward and one without, then evaluates
/// both on common channel draws.
FairnessTable fairness_ablation(const ExperimentConfig &config);

/// String-valued table with a header row; the unit all exports pass through.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const Table &) const = default;
};

Table to_table(const SweepTable &t);
Table to_table(const OutageTable &t);
Table to_table(const TimingTable &t);
Table to_table(const FairnessTable &t);

/// Comma-separated export with a header row, bit-stable row order.
void export_results(const Table &table, const std::string &path);
Table read_table(const std::string &path);

/// Self-contained gnuplot program plotting y against x per group, reading the
/// data file by the given (relative) name.
void emit_plot_script(const Table &table, const std::string &script_path,
                      const std::string &data_file, const std::string &x_column,
                      const std::string &y_column, const std::string &group_column,
                      const std::string &xlabel, const std::string &ylabel);

/// Reproducibility record: config echo, seeds, versions, summary numbers.
void write_manifest(const ExperimentConfig &config,
                    const std::map<std::string, double> &summary, const std::string &path);

} // namespace macalloc::bench
