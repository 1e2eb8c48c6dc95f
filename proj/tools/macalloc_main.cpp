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

#include "macalloc/baselines.hpp"
#include "macalloc/bench.hpp"
#include "macalloc/channel.hpp"
#include "macalloc/drl.hpp"
#include "macalloc/minpmac.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using namespace macalloc;

std::vector<double> parse_list(const std::string &text, const std::string &what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception &) {
            throw std::invalid_argument(what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

std::vector<double> expand_per_user(std::vector<double> v, int users, const std::string &what) {
    if (static_cast<int>(v.size()) == users) return v;
    if (v.size() == 1) return std::vector<double>(users, v[0]);
    throw std::invalid_argument(what + ": expected 1 or " + std::to_string(users) + " values, got " +
                                std::to_string(v.size()));
}

void write_text(const std::string &path, const std::string &content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

json scenario_json(const Scenario &sc) {
    json j;
    j["users"] = sc.num_users;
    j["tones"] = sc.num_subcarriers;
    j["rx_antennas"] = sc.rx_antennas;
    j["bandwidth_hz"] = sc.bandwidth_hz;
    j["carrier_hz"] = sc.carrier_hz;
    j["distances_m"] = sc.user_distances;
    j["noise_variance"] = sc.noise_variance;
    if (sc.has_target_snr) j["target_receive_snr_db"] = sc.target_receive_snr_db;
    j["seed"] = sc.seed;
    return j;
}

json powers_json(const PowerAllocation &alloc) {
    json rows = json::array();
    for (int i = 0; i < alloc.users; ++i) {
        json row = json::array();
        for (int j = 0; j < alloc.tones; ++j) row.push_back(alloc.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json rates_json(const RateVector &bits, const Scenario &sc) {
    json j;
    j["bits_per_toneuse"] = bits;
    json mbps = json::array();
    for (double r : bits) mbps.push_back(rate_to_mbps(r, sc));
    j["mbps"] = std::move(mbps);
    return j;
}

// ---------------------------------------------------------------- channels

struct GenChannelsArgs {
    int users = 3;
    int tones = 4;
    int rx = 1;
    std::string dist = "3.0";
    double snr_db = 0.0;
    bool has_snr = false;
    double sigma2 = 1.0;
    double bandwidth_hz = 80.0e6;
    double carrier_hz = 2.49e9;
    std::uint64_t seed = 1;
    std::string out;
};

int run_gen_channels(const GenChannelsArgs &a) {
    Scenario sc;
    sc.num_users = a.users;
    sc.num_subcarriers = a.tones;
    sc.rx_antennas = a.rx;
    sc.user_distances = expand_per_user(parse_list(a.dist, "--dist"), a.users, "--dist");
    sc.noise_variance = a.sigma2;
    sc.bandwidth_hz = a.bandwidth_hz;
    sc.carrier_hz = a.carrier_hz;
    sc.seed = a.seed;
    if (a.has_snr) {
        sc.target_receive_snr_db = a.snr_db;
        sc.has_target_snr = true;
    }
    ChannelSet ch = channel::generate_channels(sc);
    channel::save_channels(ch, a.out);
    std::printf("wrote %s: %d users x %d tones x %d rx, sigma2=%.6g\n", a.out.c_str(), ch.users(),
                ch.tones(), ch.rx(), ch.sigma2());
    return 0;
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
    std::string channels;
    std::string rth_mbps;
    std::string alpha = "1";
    std::string out;
    double rel_gap = 1e-4;
    int max_outer = 5000;
    double power_cap = std::numeric_limits<double>::infinity();
};

int run_solve(const SolveArgs &a) {
    ChannelSet ch = channel::load_channels(a.channels);
    const Scenario &sc = ch.scenario();
    const std::vector<double> rth_mbps =
        expand_per_user(parse_list(a.rth_mbps, "--rth-mbps"), ch.users(), "--rth-mbps");
    const std::vector<double> alpha =
        expand_per_user(parse_list(a.alpha, "--alpha"), ch.users(), "--alpha");
    RateVector targets(ch.users());
    for (int i = 0; i < ch.users(); ++i) targets[i] = mbps_to_rate(rth_mbps[i], sc);

    minpmac::SolveOptions opts;
    opts.rel_gap = a.rel_gap;
    opts.max_outer = a.max_outer;
    opts.power_cap = a.power_cap;
    minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, alpha, opts);
    minpmac::VerifyReport rep = minpmac::verify_solution(ch, targets, sol, opts.rate_tol);

    json j;
    j["format"] = "macalloc-solution v1";
    j["scenario"] = scenario_json(sc);
    j["targets_mbps"] = rth_mbps;
    j["alpha"] = alpha;
    j["objective_w"] = sol.objective;
    j["dual_bound_w"] = sol.dual_bound;
    j["rel_gap"] = sol.rel_gap;
    j["outer_iterations"] = sol.outer_iterations;
    j["time_shared"] = sol.time_shared;
    j["powers_w"] = powers_json(sol.alloc);
    j["theta"] = sol.duals;
    j["clusters"] = sol.clusters;
    json orders = json::array();
    for (std::size_t k = 0; k < sol.orders.size(); ++k)
        orders.push_back({{"order", sol.orders[k]}, {"weight", sol.order_weights[k]}});
    j["orders"] = std::move(orders);
    j["achieved"] = rates_json(sol.achieved, sc);
    j["diagnostics"] = {{"all_ok", rep.all_ok()},
                        {"rates_met", rep.rates_met},
                        {"worst_rate_deficit", rep.worst_rate_deficit},
                        {"polymatroid_ok", rep.polymatroid_ok},
                        {"worst_polymatroid_violation", rep.worst_polymatroid_violation},
                        {"powers_nonneg", rep.powers_nonneg},
                        {"comp_slack_ok", rep.comp_slack_ok},
                        {"worst_comp_slack", rep.worst_comp_slack},
                        {"sic_consistent", rep.sic_consistent},
                        {"worst_rate_mismatch", rep.worst_rate_mismatch},
                        {"needs_time_sharing", rep.needs_time_sharing}};
    write_text(a.out, j.dump(2) + "\n");
    std::printf("objective %.9g W (gap %.3g, %d iterations, %s), wrote %s\n", sol.objective,
                sol.rel_gap, sol.outer_iterations, sol.time_shared ? "time-shared" : "one order",
                a.out.c_str());
    return 0;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
    std::string method;
    std::string channels;
    std::string rth_mbps;
    std::string out;
    int levels = 4;
    double p_max = 0.0;
};

int run_baseline(const BaselineArgs &a) {
    ChannelSet ch = channel::load_channels(a.channels);
    const Scenario &sc = ch.scenario();
    const std::vector<double> rth_mbps =
        expand_per_user(parse_list(a.rth_mbps, "--rth-mbps"), ch.users(), "--rth-mbps");
    RateVector targets(ch.users());
    for (int i = 0; i < ch.users(); ++i) targets[i] = mbps_to_rate(rth_mbps[i], sc);

    json j;
    j["format"] = "macalloc-baseline v1";
    j["method"] = a.method;
    j["scenario"] = scenario_json(sc);
    j["targets_mbps"] = rth_mbps;

    if (a.method == "oma") {
        baselines::OmaResult res = baselines::oma_allocate(ch, targets);
        j["powers_w"] = powers_json(res.alloc);
        j["tone_assignment"] = res.assignment;
        j["time_fraction"] = res.time_fraction;
        j["rates"] = rates_json(res.rates, sc);
        j["energy_w"] = res.alloc.total_energy();
    } else if (a.method == "noma") {
        baselines::NomaHeuristicResult res = baselines::noma_heuristic_allocate(ch, targets);
        j["powers_w"] = powers_json(res.alloc);
        j["orders_per_tone"] = res.orders;
        j["rates"] = rates_json(res.rates, sc);
        j["energy_w"] = res.alloc.total_energy();
    } else if (a.method == "brute") {
        baselines::GridSpec grid;
        grid.levels = a.levels;
        double p_max = a.p_max;
        if (p_max <= 0.0) {
            // Size the grid from the orthogonal baseline: it meets the same
            // targets, so twice its peak power per dimension brackets the
            // optimum comfortably.
            baselines::OmaResult oma = baselines::oma_allocate(ch, targets);
            double peak = 0.0;
            for (double v : oma.alloc.p) peak = std::max(peak, v);
            p_max = 2.0 * peak / oma.time_fraction;
        }
        grid.p_max = p_max;
        baselines::BruteForceResult res = baselines::brute_force_min_energy(ch, targets, grid);
        j["feasible"] = res.feasible;
        j["grid_levels"] = grid.levels;
        j["grid_p_max"] = grid.p_max;
        j["evaluated"] = res.evaluated;
        if (res.feasible) {
            j["powers_w"] = powers_json(res.alloc);
            j["objective_w"] = res.objective;
            j["order"] = res.order;
        }
    } else {
        throw std::invalid_argument("--method must be oma, noma or brute");
    }
    write_text(a.out, j.dump(2) + "\n");
    std::printf("%s baseline done, wrote %s\n", a.method.c_str(), a.out.c_str());
    return 0;
}

// ------------------------------------------------------------- train / eval

struct TrainArgs {
    std::string channels;
    int episodes = 200;
    int steps = 200;
    std::uint64_t seed = 1;
    std::string out;
    std::string curve; // defaults to out + ".curve.csv"
    double rmin_mbps = 100.0;
    double p_total = 1.0;
    double p_t = 0.5;
    int levels = 8;
    double w1 = 1.0, w2 = 1.0, w3 = 1.0, w4 = 1.0;
    int hidden = 64;
    double lr = 5e-4;
    double gamma = 0.98;
    int epochs = 4;
    int batch = 128;
    int horizon = 16;
    double entropy = 0.0;
};

void write_curve_csv(const std::vector<drl::EpisodeStats> &curve, const std::string &path) {
    std::ostringstream out;
    out << "episode,mean_reward,rate_term,efficiency_term,power_penalty,fairness_term,"
           "sum_rate_mbps,total_power_w\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
        out << buf;
    };
    for (const drl::EpisodeStats &e : curve) {
        out << e.episode << ',';
        put(e.mean_reward, ',');
        put(e.mean_rate, ',');
        put(e.mean_efficiency, ',');
        put(e.mean_power_penalty, ',');
        put(e.mean_fairness, ',');
        put(e.mean_sum_rate_mbps, ',');
        put(e.mean_total_power, '\n');
    }
    write_text(path, out.str());
}

int run_train(const TrainArgs &a) {
    ChannelSet ch = channel::load_channels(a.channels);
    drl::EnvConfig env;
    env.scenario = ch.scenario();
    env.fixed_channels = std::make_shared<ChannelSet>(ch);
    env.r_min_mbps = a.rmin_mbps;
    env.p_total = a.p_total;
    env.p_max = a.p_total;
    env.p_t = a.p_t;
    env.episode_steps = a.steps;
    env.levels = a.levels;
    env.w1 = a.w1;
    env.w2 = a.w2;
    env.w3 = a.w3;
    env.w4 = a.w4;

    drl::PpoConfig ppo;
    ppo.hidden = a.hidden;
    ppo.lr = a.lr;
    ppo.gamma = a.gamma;
    ppo.epochs = a.epochs;
    ppo.batch = a.batch;
    ppo.horizon = a.horizon;
    ppo.entropy_coef = a.entropy;

    drl::TrainResult res = drl::train(env, ppo, a.episodes, a.seed);
    drl::save_checkpoint(a.out, res.model, env, ppo, "macalloc train on " + a.channels);
    const std::string curve_path = a.curve.empty() ? a.out + ".curve.csv" : a.curve;
    write_curve_csv(res.curve, curve_path);

    const drl::EpisodeStats &last = res.curve.back();
    std::printf("trained %d episodes x %d steps: final mean reward %.4f, sum rate %.2f Mbps\n",
                a.episodes, a.steps, last.mean_reward, last.mean_sum_rate_mbps);
    std::printf("checkpoint %s (+.json sidecar), curve %s\n", a.out.c_str(), curve_path.c_str());
    return 0;
}

struct EvalArgs {
    std::string ckpt;
    std::string channels;
    std::string out;
    int episodes = 10;
    std::uint64_t seed = 1;
};

int run_eval(const EvalArgs &a) {
    drl::Checkpoint ckpt = drl::load_checkpoint(a.ckpt);
    ChannelSet ch = channel::load_channels(a.channels);
    if (ch.users() != ckpt.env.scenario.num_users ||
        ch.tones() != ckpt.env.scenario.num_subcarriers)
        throw std::invalid_argument("eval: channel file dimensions do not match the checkpoint");
    drl::EnvConfig env = ckpt.env;
    env.scenario = ch.scenario();
    env.fixed_channels = std::make_shared<ChannelSet>(ch);

    drl::EvalMetrics m = drl::evaluate(ckpt.model, env, a.episodes, a.seed);

    json j;
    j["format"] = "macalloc-eval v1";
    j["checkpoint"] = a.ckpt;
    j["channels"] = a.channels;
    j["episodes"] = m.episodes;
    j["mean_reward"] = m.mean_reward;
    j["mean_sum_rate_mbps"] = m.mean_sum_rate_mbps;
    j["mean_user_rates_mbps"] = m.mean_user_rates_mbps;
    j["mean_total_power_w"] = m.mean_total_power;
    j["seconds_per_decision"] = m.seconds_per_decision;
    j["optimality_ratio"] = m.optimality_ratio;
    write_text(a.out, j.dump(2) + "\n");
    std::printf("eval: reward %.4f, sum rate %.2f Mbps, %.2f us/decision, ratio %.3f, wrote %s\n",
                m.mean_reward, m.mean_sum_rate_mbps, m.seconds_per_decision * 1e6,
                m.optimality_ratio, a.out.c_str());
    return 0;
}

// ------------------------------------------------------------------- bench

std::string join_path(const std::string &dir, const std::string &name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

struct BenchArgs {
    std::string config;
    std::string out_dir; // empty keeps the config's choice
    double floor_mbps = -1.0;
};

bench::ExperimentConfig load_bench_config(const BenchArgs &a) {
    bench::ExperimentConfig cfg = bench::load_experiment(a.config);
    if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
    return cfg;
}

int run_sweep(const BenchArgs &a) {
    bench::ExperimentConfig cfg = load_bench_config(a);
    bench::SweepTable cells = bench::sweep_snr(cfg);
    bench::Table table = bench::to_table(cells);
    const std::string csv = join_path(cfg.output_dir, "sweep.csv");
    bench::export_results(table, csv);
    bench::emit_plot_script(table, join_path(cfg.output_dir, "sweep.gp"), "sweep.csv", "snr_db",
                            "sum_rate_mbps", "method", "receive SNR (dB)", "sum rate (Mbps)");

    int failed = 0;
    for (const bench::SweepCell &c : cells)
        if (!c.ok) ++failed;
    std::map<std::string, double> summary;
    summary["cells"] = static_cast<double>(cells.size());
    summary["failed_cells"] = failed;
    bench::write_manifest(cfg, summary, join_path(cfg.output_dir, "sweep_manifest.json"));

    std::printf("sweep: %zu cells, %d failed; wrote %s\n", cells.size(), failed, csv.c_str());
    if (failed > 0) {
        for (const bench::SweepCell &c : cells)
            if (!c.ok)
                std::fprintf(stderr, "  failed: %s snr=%g seed=%llu: %s\n",
                             bench::method_name(c.method).c_str(), c.snr_db,
                             static_cast<unsigned long long>(c.seed), c.error.c_str());
        return 1;
    }
    return 0;
}

int run_outage(const BenchArgs &a) {
    bench::ExperimentConfig cfg = load_bench_config(a);
    const double floor = a.floor_mbps >= 0.0 ? a.floor_mbps : cfg.rate_floor_mbps;
    bench::OutageTable table = bench::outage_curve(cfg, floor);
    bench::Table t = bench::to_table(table);
    const std::string csv = join_path(cfg.output_dir, "outage.csv");
    bench::export_results(t, csv);
    bench::emit_plot_script(t, join_path(cfg.output_dir, "outage.gp"), "outage.csv", "snr_db",
                            "outage", "method", "receive SNR (dB)", "outage probability");

    std::map<std::string, double> summary;
    summary["outage_floor_mbps"] = floor;
    summary["monotonicity_violations"] = static_cast<double>(table.monotonicity_violations.size());
    summary["failed_cells"] = table.failed_cells;
    bench::write_manifest(cfg, summary, join_path(cfg.output_dir, "outage_manifest.json"));

    for (const std::string &v : table.monotonicity_violations)
        std::fprintf(stderr, "  note: %s\n", v.c_str());
    std::printf("outage: %zu curve points at floor %.3g Mbps, %d failed cells; wrote %s\n",
                table.cells.size(), floor, table.failed_cells, csv.c_str());
    return table.failed_cells > 0 ? 1 : 0;
}

int run_timing(const BenchArgs &a) {
    bench::ExperimentConfig cfg = load_bench_config(a);
    bench::TimingTable table = bench::timing_compare(cfg);
    bench::Table t = bench::to_table(table);
    const std::string csv = join_path(cfg.output_dir, "timing.csv");
    bench::export_results(t, csv);

    // Bar chart; the generic grouped-line helper does not fit a categorical axis.
    std::ostringstream gp;
    gp << "set terminal pngcairo size 960,600\n"
       << "set output 'timing.png'\n"
       << "set datafile separator ','\n"
       << "set style fill solid 0.6\n"
       << "set boxwidth 0.6\n"
       << "set logscale y\n"
       << "set ylabel 'median seconds per decision'\n"
       << "plot 'timing.csv' skip 1 using 0:2:xtic(1) with boxes notitle\n";
    write_text(join_path(cfg.output_dir, "timing.gp"), gp.str());

    std::map<std::string, double> summary;
    for (const bench::TimingRow &r : table.rows)
        summary["median_seconds_" + bench::method_name(r.method)] = r.median_seconds;
    if (table.drl_speedup > 0.0) summary["drl_speedup"] = table.drl_speedup;
    bench::write_manifest(cfg, summary, join_path(cfg.output_dir, "timing_manifest.json"));

    std::printf("timing: %zu methods", table.rows.size());
    if (table.drl_speedup > 0.0) std::printf(", policy is %.1fx faster than the solver", table.drl_speedup);
    std::printf("; wrote %s\n", csv.c_str());
    return 0;
}

int run_fairness(const BenchArgs &a) {
    bench::ExperimentConfig cfg = load_bench_config(a);
    bench::FairnessTable table = bench::fairness_ablation(cfg);
    bench::Table t = bench::to_table(table);
    const std::string csv = join_path(cfg.output_dir, "fairness_ablation.csv");
    bench::export_results(t, csv);

    std::ostringstream gp;
    gp << "set terminal pngcairo size 960,600\n"
       << "set output 'fairness_ablation.png'\n"
       << "set datafile separator ','\n"
       << "set style fill solid 0.6\n"
       << "set boxwidth 0.6\n"
       << "set ylabel 'rate spread (max-min)/mean'\n"
       << "plot 'fairness_ablation.csv' skip 1 using 0:3:xtic(1) with boxes notitle\n";
    write_text(join_path(cfg.output_dir, "fairness_ablation.gp"), gp.str());

    std::map<std::string, double> summary;
    summary["with_fairness_spread"] = table.with_fairness.rate_spread;
    summary["without_fairness_spread"] = table.without_fairness.rate_spread;
    summary["with_fairness_sum_rate_mbps"] = table.with_fairness.mean_sum_rate_mbps;
    summary["without_fairness_sum_rate_mbps"] = table.without_fairness.mean_sum_rate_mbps;
    summary["with_fairness_outage"] = table.with_fairness.outage;
    summary["without_fairness_outage"] = table.without_fairness.outage;
    summary["seeds"] = table.seeds;
    bench::write_manifest(cfg, summary,
                          join_path(cfg.output_dir, "fairness_ablation_manifest.json"));

    std::printf("fairness ablation over %d seeds: spread %.4f with vs %.4f without; wrote %s\n",
                table.seeds, table.with_fairness.rate_spread, table.without_fairness.rate_spread,
                csv.c_str());
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"minimum-power multiple-access allocation toolkit"};
    app.require_subcommand(1);

    GenChannelsArgs gen;
    CLI::App *sub_gen = app.add_subcommand("gen-channels", "draw a channel realization file");
    sub_gen->add_option("--users", gen.users, "number of users")->check(CLI::PositiveNumber);
    sub_gen->add_option("--tones", gen.tones, "number of subcarriers")->check(CLI::PositiveNumber);
    sub_gen->add_option("--rx-antennas", gen.rx, "receive antennas")->check(CLI::PositiveNumber);
    sub_gen->add_option("--dist", gen.dist, "user distances in meters, comma separated");
    CLI::Option *snr_opt =
        sub_gen->add_option("--snr-db", gen.snr_db, "calibrate noise to this receive SNR");
    sub_gen->add_option("--sigma2", gen.sigma2, "noise variance when no SNR target is given");
    sub_gen->add_option("--bandwidth-hz", gen.bandwidth_hz, "system bandwidth");
    sub_gen->add_option("--carrier-hz", gen.carrier_hz, "carrier frequency");
    sub_gen->add_option("--seed", gen.seed, "random seed");
    sub_gen->add_option("--out", gen.out, "output channel file")->required();

    SolveArgs solve;
    CLI::App *sub_solve = app.add_subcommand("solve", "minimum-energy allocation for rate targets");
    sub_solve->add_option("--channels", solve.channels, "channel file")->required();
    sub_solve->add_option("--rth-mbps", solve.rth_mbps, "per-user rate targets in Mbps")
        ->required();
    sub_solve->add_option("--alpha", solve.alpha, "per-user energy weights");
    sub_solve->add_option("--out", solve.out, "solution JSON path")->required();
    sub_solve->add_option("--rel-gap", solve.rel_gap, "duality-gap stopping tolerance");
    sub_solve->add_option("--max-outer", solve.max_outer, "outer iteration cap");
    sub_solve->add_option("--power-cap", solve.power_cap, "per-user per-tone power ceiling (W)");

    BaselineArgs base;
    CLI::App *sub_base = app.add_subcommand("baseline", "reference allocators");
    sub_base->add_option("--method", base.method, "oma, noma or brute")->required();
    sub_base->add_option("--channels", base.channels, "channel file")->required();
    sub_base->add_option("--rth-mbps", base.rth_mbps, "per-user rate targets in Mbps")->required();
    sub_base->add_option("--out", base.out, "result JSON path")->required();
    sub_base->add_option("--levels", base.levels, "brute-force grid levels per dimension");
    sub_base->add_option("--p-max", base.p_max, "brute-force grid ceiling (W), 0 derives one");

    TrainArgs train;
    CLI::App *sub_train = app.add_subcommand("train", "train the allocation policy");
    sub_train->add_option("--channels", train.channels, "channel file")->required();
    sub_train->add_option("--episodes", train.episodes, "training episodes")
        ->check(CLI::PositiveNumber);
    sub_train->add_option("--steps", train.steps, "steps per episode")->check(CLI::PositiveNumber);
    sub_train->add_option("--seed", train.seed, "training seed");
    sub_train->add_option("--out", train.out, "checkpoint path")->required();
    sub_train->add_option("--curve", train.curve, "reward-curve CSV path");
    sub_train->add_option("--rmin-mbps", train.rmin_mbps, "sum-rate reference in the reward");
    sub_train->add_option("--p-total", train.p_total, "total power budget (W)");
    sub_train->add_option("--p-t", train.p_t, "peak per-user per-tone power (W)");
    sub_train->add_option("--levels", train.levels, "action levels per (user, tone)");
    sub_train->add_option("--w1", train.w1, "rate reward weight");
    sub_train->add_option("--w2", train.w2, "efficiency reward weight");
    sub_train->add_option("--w3", train.w3, "power penalty weight");
    sub_train->add_option("--w4", train.w4, "fairness reward weight");
    sub_train->add_option("--hidden", train.hidden, "hidden layer width");
    sub_train->add_option("--lr", train.lr, "learning rate");
    sub_train->add_option("--gamma", train.gamma, "discount factor");
    sub_train->add_option("--epochs", train.epochs, "update epochs per episode");
    sub_train->add_option("--batch", train.batch, "minibatch size");
    sub_train->add_option("--horizon", train.horizon, "n-step advantage horizon");
    sub_train->add_option("--entropy", train.entropy, "entropy bonus coefficient");

    EvalArgs eval;
    CLI::App *sub_eval = app.add_subcommand("eval", "evaluate a trained policy");
    sub_eval->add_option("--ckpt", eval.ckpt, "checkpoint path")->required();
    sub_eval->add_option("--channels", eval.channels, "channel file")->required();
    sub_eval->add_option("--out", eval.out, "metrics JSON path")->required();
    sub_eval->add_option("--episodes", eval.episodes, "evaluation episodes")
        ->check(CLI::PositiveNumber);
    sub_eval->add_option("--seed", eval.seed, "evaluation seed");

    BenchArgs sweep_args, outage_args, timing_args, fair_args;
    CLI::App *sub_sweep = app.add_subcommand("sweep", "method x SNR x seed rate comparison");
    sub_sweep->add_option("--config", sweep_args.config, "experiment JSON")->required();
    sub_sweep->add_option("--out-dir", sweep_args.out_dir, "override output directory");

    CLI::App *sub_outage = app.add_subcommand("outage", "outage probability versus SNR");
    sub_outage->add_option("--config", outage_args.config, "experiment JSON")->required();
    sub_outage->add_option("--out-dir", outage_args.out_dir, "override output directory");
    sub_outage->add_option("--floor-mbps", outage_args.floor_mbps,
                           "override the config's outage rate floor");

    CLI::App *sub_timing = app.add_subcommand("timing", "per-decision wall-clock comparison");
    sub_timing->add_option("--config", timing_args.config, "experiment JSON")->required();
    sub_timing->add_option("--out-dir", timing_args.out_dir, "override output directory");

    CLI::App *sub_fair =
        app.add_subcommand("fairness-ablation", "train with and without the fairness reward");
    sub_fair->add_option("--config", fair_args.config, "experiment JSON")->required();
    sub_fair->add_option("--out-dir", fair_args.out_dir, "override output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sub_gen->parsed()) {
            gen.has_snr = snr_opt->count() > 0;
            return run_gen_channels(gen);
        }
        if (sub_solve->parsed()) return run_solve(solve);
        if (sub_base->parsed()) return run_baseline(base);
        if (sub_train->parsed()) return run_train(train);
        if (sub_eval->parsed()) return run_eval(eval);
        if (sub_sweep->parsed()) return run_sweep(sweep_args);
        if (sub_outage->parsed()) return run_outage(outage_args);
        if (sub_timing->parsed()) return run_timing(timing_args);
        if (sub_fair->parsed()) return run_fairness(fair_args);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
