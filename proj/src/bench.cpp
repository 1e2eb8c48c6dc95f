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

#include "macalloc/bench.hpp"

#include "macalloc/baselines.hpp"
#include "macalloc/capacity.hpp"
#include "macalloc/channel.hpp"
#include "macalloc/minpmac.hpp"
#include "macalloc/timeshare.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>

namespace macalloc::bench {

using nlohmann::json;

std::string method_name(Method m) {
    switch (m) {
    case Method::minpmac: return "minpmac";
    case Method::timeshare: return "timeshare";
    case Method::oma: return "oma";
    case Method::noma: return "noma";
    case Method::brute: return "brute";
    case Method::drl: return "drl";
    }
    throw std::invalid_argument("method_name: unknown method");
}

Method method_from_name(const std::string &name) {
    if (name == "minpmac") return Method::minpmac;
    if (name == "timeshare") return Method::timeshare;
    if (name == "oma") return Method::oma;
    if (name == "noma") return Method::noma;
    if (name == "brute") return Method::brute;
    if (name == "drl") return Method::drl;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected minpmac, timeshare, oma, noma, brute or drl)");
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (methods.empty()) throw std::invalid_argument("experiment: method set must be nonempty");
    if (snr_db.empty()) throw std::invalid_argument("experiment: SNR grid must be nonempty");
    if (mode == ComparisonMode::fixed_target) {
        if (targets_mbps.empty())
            throw std::invalid_argument("experiment: fixed-target mode needs targets_mbps");
        if (targets_mbps.size() != 1 &&
            targets_mbps.size() != static_cast<std::size_t>(scenario.num_users))
            throw std::invalid_argument("experiment: targets_mbps needs 1 or num_users entries");
        for (double t : targets_mbps)
            if (!(t > 0.0)) throw std::invalid_argument("experiment: targets must be positive");
    } else if (!(energy_budget > 0.0)) {
        throw std::invalid_argument("experiment: energy budget must be positive");
    }
    if (rate_floor_mbps < 0.0)
        throw std::invalid_argument("experiment: rate floor must be non-negative");
    if (brute_levels < 2) throw std::invalid_argument("experiment: brute grid needs >= 2 levels");
    if (train_episodes < 0)
        throw std::invalid_argument("experiment: train_episodes must be non-negative");
    drl_ppo.validate();
    if (std::find(methods.begin(), methods.end(), Method::drl) != methods.end()) {
        drl::EnvConfig env = drl_env;
        env.scenario = scenario;
        env.fixed_channels.reset();
        env.validate();
    }
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median_snr(const std::vector<double> &grid) {
    std::vector<double> s = grid;
    std::sort(s.begin(), s.end());
    return s[s.size() / 2];
}

Scenario cell_scenario(const ExperimentConfig &cfg, double snr_db, std::uint64_t seed) {
    Scenario sc = cfg.scenario;
    sc.target_receive_snr_db = snr_db;
    sc.has_target_snr = true;
    sc.seed = seed;
    return sc;
}

RateVector cell_targets(const ExperimentConfig &cfg) {
    const int n = cfg.scenario.num_users;
    RateVector t(n);
    for (int i = 0; i < n; ++i) {
        const double mbps = cfg.targets_mbps.size() == 1 ? cfg.targets_mbps[0]
                                                         : cfg.targets_mbps[i];
        t[i] = mbps_to_rate(mbps, cfg.scenario);
    }
    return t;
}

struct PolicyHandle {
    drl::PpoModel model;
    drl::EnvConfig env;
};

/// Train (or load) the one policy a sweep needs. Training happens at the
/// median grid SNR so the agent sees a representative noise level.
PolicyHandle make_policy(const ExperimentConfig &cfg, bool fairness_on) {
    drl::EnvConfig env;
    if (!cfg.checkpoint.empty()) {
        drl::Checkpoint ck = drl::load_checkpoint(cfg.checkpoint);
        env = ck.env;
        env.scenario = cell_scenario(cfg, median_snr(cfg.snr_db), cfg.scenario.seed);
        env.fixed_channels.reset();
        if (!fairness_on) env.w4 = 0.0;
        if (ck.model.actor.input_dim() != env.observation_dim())
            throw std::invalid_argument("experiment: checkpoint dimensions do not match scenario");
        return {std::move(ck.model), std::move(env)};
    }
    env = cfg.drl_env;
    env.scenario = cell_scenario(cfg, median_snr(cfg.snr_db), cfg.scenario.seed);
    env.fixed_channels.reset();
    if (fairness_on) {
        if (env.w4 <= 0.0) env.w4 = 1.0;
    } else {
        env.w4 = 0.0;
    }
    const std::uint64_t train_seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    drl::TrainResult tr = drl::train(env, cfg.drl_ppo, cfg.train_episodes, train_seed);
    return {std::move(tr.model), std::move(env)};
}

/// Exhaustive sum-rate maximization on the power grid under a total-energy
/// budget (the joint capacity is decode-order invariant).
void brute_budget_cell(const ExperimentConfig &cfg, const ChannelSet &ch, SweepCell &cell) {
    const int n = ch.users(), s = ch.tones();
    const int dims = n * s;
    if (dims > 6)
        throw std::invalid_argument("brute: grid search limited to users*tones <= 6 dimensions");
    const double p_max = cfg.brute_p_max > 0.0 ? cfg.brute_p_max : cfg.energy_budget;
    const int levels = cfg.brute_levels;
    std::vector<double> grid(levels);
    for (int l = 0; l < levels; ++l) grid[l] = p_max * l / (levels - 1);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    PowerAllocation alloc(n, s), best_alloc(n, s);
    double best_cap = -1.0;
    std::vector<int> idx(dims, 0);
    while (true) {
        double total = 0.0;
        for (int d = 0; d < dims; ++d) {
            alloc.p[d] = grid[idx[d]];
            total += alloc.p[d];
        }
        if (total <= cfg.energy_budget + 1e-12) {
            const double cap = capacity::subset_capacity(ch, alloc, all);
            if (cap > best_cap) {
                best_cap = cap;
                best_alloc = alloc;
            }
        }
        int d = dims - 1;
        while (d >= 0 && idx[d] == levels - 1) idx[d--] = 0;
        if (d < 0) break;
        ++idx[d];
    }
    const DecodeOrder order = drl::dynamic_order(ch, best_alloc, RateVector(n, 1.0));
    const RateVector bits = capacity::sic_rates(ch, best_alloc, order);
    cell.user_rates_mbps.resize(n);
    for (int i = 0; i < n; ++i) {
        cell.user_rates_mbps[i] = rate_to_mbps(bits[i], ch.scenario());
        cell.sum_rate_mbps += cell.user_rates_mbps[i];
    }
    cell.energy = best_alloc.total_energy();
}

void fill_rates(SweepCell &cell, const RateVector &bits, const Scenario &sc) {
    cell.user_rates_mbps.resize(bits.size());
    cell.sum_rate_mbps = 0.0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        cell.user_rates_mbps[i] = rate_to_mbps(bits[i], sc);
        cell.sum_rate_mbps += cell.user_rates_mbps[i];
    }
}

SweepCell run_cell(const ExperimentConfig &cfg, Method m, double snr, std::uint64_t seed,
                   const PolicyHandle *policy) {
    SweepCell cell;
    cell.method = m;
    cell.snr_db = snr;
    cell.seed = seed;
    const Scenario sc = cell_scenario(cfg, snr, seed);
    try {
        const ChannelSet ch = channel::generate_channels(sc);
        const int n = sc.num_users;
        const std::vector<double> ones(n, 1.0);

        if (cfg.mode == ComparisonMode::fixed_target) {
            const RateVector targets = cell_targets(cfg);
            switch (m) {
            case Method::minpmac: {
                const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, ones);
                fill_rates(cell, sol.achieved, sc);
                cell.energy = sol.objective;
                break;
            }
            case Method::timeshare: {
                const minpmac::MinPmacSolution sol = minpmac::solve_min_energy(ch, targets, ones);
                timeshare::TimeShareProblem prob;
                prob.orders = timeshare::candidate_orders(sol.clusters);
                prob.vertex_rates.reserve(prob.orders.size());
                for (const auto &o : prob.orders)
                    prob.vertex_rates.push_back(capacity::sic_rates(ch, sol.alloc, o));
                prob.targets = targets;
                timeshare::TimeShareSolution ts;
                try {
                    ts = timeshare::solve_timeshare(prob, 1e-9, timeshare::TargetMode::exact);
                } catch (const timeshare::timeshare_infeasible &) {
                    ts = timeshare::solve_timeshare(prob, 1e-9,
                                                    timeshare::TargetMode::allow_surplus);
                }
                fill_rates(cell, ts.achieved, sc);
                cell.energy = sol.objective;
                break;
            }
            case Method::oma: {
                const baselines::OmaResult r = baselines::oma_allocate(ch, targets);
                fill_rates(cell, r.rates, sc);
                cell.energy = r.alloc.total_energy();
                break;
            }
            case Method::noma: {
                const baselines::NomaHeuristicResult r =
                    baselines::noma_heuristic_allocate(ch, targets);
                fill_rates(cell, r.rates, sc);
                cell.energy = r.alloc.total_energy();
                break;
            }
            case Method::brute: {
                baselines::GridSpec grid{cfg.brute_levels, cfg.brute_p_max};
                if (grid.p_max <= 0.0) {
                    const baselines::OmaResult o = baselines::oma_allocate(ch, targets);
                    double peak = 0.0;
                    for (double p : o.alloc.p) peak = std::max(peak, p);
                    grid.p_max = 2.0 * peak / o.time_fraction;
                }
                const baselines::BruteForceResult b =
                    baselines::brute_force_min_energy(ch, targets, grid);
                if (!b.feasible)
                    throw infeasible_error("brute: no grid point meets the targets");
                fill_rates(cell, capacity::sic_rates(ch, b.alloc, b.order), sc);
                cell.energy = b.objective;
                break;
            }
            case Method::drl:
                throw std::invalid_argument("drl cells run in fixed-budget mode only");
            }
        } else {
            const double budget = cfg.energy_budget;
            switch (m) {
            case Method::minpmac: {
                const minpmac::BudgetResult br = minpmac::max_sum_rate(ch, budget);
                const DecodeOrder order = drl::dynamic_order(ch, br.alloc, RateVector(n, 1.0));
                fill_rates(cell, capacity::sic_rates(ch, br.alloc, order), sc);
                cell.energy = br.alloc.total_energy();
                break;
            }
            case Method::timeshare: {
                // same powers, equal time share over every decode order
                const minpmac::BudgetResult br = minpmac::max_sum_rate(ch, budget);
                const auto orders = capacity::enumerate_orders(n);
                RateVector avg(n, 0.0);
                for (const auto &o : orders) {
                    const RateVector r = capacity::sic_rates(ch, br.alloc, o);
                    for (int i = 0; i < n; ++i) avg[i] += r[i] / orders.size();
                }
                fill_rates(cell, avg, sc);
                cell.energy = br.alloc.total_energy();
                break;
            }
            case Method::oma: {
                const baselines::OmaResult r = baselines::oma_max_rate(ch, budget);
                fill_rates(cell, r.rates, sc);
                cell.energy = r.alloc.total_energy();
                break;
            }
            case Method::noma: {
                const baselines::NomaHeuristicResult r =
                    baselines::noma_heuristic_max_rate(ch, budget);
                fill_rates(cell, r.rates, sc);
                cell.energy = r.alloc.total_energy();
                break;
            }
            case Method::brute:
                brute_budget_cell(cfg, ch, cell);
                break;
            case Method::drl: {
                if (!policy) throw std::logic_error("drl cell without a prepared policy");
                drl::EnvConfig env = policy->env;
                env.scenario = sc;
                env.fixed_channels = std::make_shared<ChannelSet>(ch);
                const drl::EvalMetrics metrics = drl::evaluate(policy->model, env, 1, seed);
                cell.user_rates_mbps = metrics.mean_user_rates_mbps;
                cell.sum_rate_mbps = metrics.mean_sum_rate_mbps;
                cell.energy = metrics.mean_total_power;
                break;
            }
            }
        }
        cell.ok = true;
    } catch (const std::exception &e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

} // namespace

SweepTable sweep_snr(const ExperimentConfig &config) {
    config.validate();
    std::optional<PolicyHandle> policy;
    if (!config.seeds.empty() &&
        std::find(config.methods.begin(), config.methods.end(), Method::drl) !=
            config.methods.end())
        policy = make_policy(config, config.fairness);
    SweepTable table;
    table.reserve(config.methods.size() * config.snr_db.size() * config.seeds.size());
    for (Method m : config.methods)
        for (double snr : config.snr_db)
            for (std::uint64_t seed : config.seeds)
                table.push_back(run_cell(config, m, snr, seed, policy ? &*policy : nullptr));
    return table;
}

OutageTable outage_curve(const ExperimentConfig &config, double rate_floor_mbps) {
    config.validate();
    if (config.seeds.empty()) throw std::invalid_argument("outage: need at least one seed");
    if (rate_floor_mbps < 0.0) throw std::invalid_argument("outage: floor must be non-negative");
    const SweepTable cells = sweep_snr(config);

    OutageTable out;
    for (const SweepCell &c : cells)
        if (!c.ok) ++out.failed_cells;
    for (Method m : config.methods) {
        for (double snr : config.snr_db) {
            OutageCell oc;
            oc.method = m;
            oc.snr_db = snr;
            int bad = 0;
            for (const SweepCell &c : cells) {
                if (c.method != m || c.snr_db != snr) continue;
                // a failed cell delivers nothing: treat its min rate as zero
                double min_rate = 0.0;
                if (c.ok && !c.user_rates_mbps.empty())
                    min_rate = *std::min_element(c.user_rates_mbps.begin(),
                                                 c.user_rates_mbps.end());
                if (min_rate < rate_floor_mbps) ++bad;
                ++oc.seeds;
            }
            oc.outage = oc.seeds > 0 ? static_cast<double>(bad) / oc.seeds : 0.0;
            out.cells.push_back(oc);
        }
    }

    for (Method m : config.methods) {
        std::vector<const OutageCell *> row;
        for (const OutageCell &c : out.cells)
            if (c.method == m) row.push_back(&c);
        std::sort(row.begin(), row.end(),
                  [](const OutageCell *a, const OutageCell *b) { return a->snr_db < b->snr_db; });
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (row[k]->outage > row[k - 1]->outage + 1e-12) {
                std::ostringstream msg;
                msg << method_name(m) << ": outage rises from " << row[k - 1]->outage << " at "
                    << row[k - 1]->snr_db << " dB to " << row[k]->outage << " at "
                    << row[k]->snr_db << " dB";
                out.monotonicity_violations.push_back(msg.str());
            }
        }
    }
    return out;
}

TimingTable timing_compare(const ExperimentConfig &config) {
    config.validate();
    const bool wants_drl =
        std::find(config.methods.begin(), config.methods.end(), Method::drl) !=
        config.methods.end();
    if (wants_drl && config.checkpoint.empty())
        throw std::invalid_argument("timing: drl timing needs a trained checkpoint");

    const std::uint64_t seed = config.seeds.empty() ? 1 : config.seeds.front();
    const Scenario sc = cell_scenario(config, median_snr(config.snr_db), seed);
    const ChannelSet ch = channel::generate_channels(sc);
    const int n = sc.num_users;
    const std::vector<double> ones(n, 1.0);
    const RateVector targets =
        config.mode == ComparisonMode::fixed_target ? cell_targets(config) : RateVector{};

    std::optional<PolicyHandle> policy;
    drl::EnvState drl_state = [&] {
        if (!wants_drl) {
            drl::EnvConfig tiny;
            tiny.scenario = sc;
            tiny.fixed_channels = std::make_shared<ChannelSet>(ch);
            return drl::env_reset(tiny, seed);
        }
        policy = make_policy(config, config.fairness);
        drl::EnvConfig env = policy->env;
        env.scenario = sc;
        env.fixed_channels = std::make_shared<ChannelSet>(ch);
        return drl::env_reset(env, seed);
    }();

    // one shared solve feeding the timeshare refinement timings
    minpmac::MinPmacSolution ts_base;
    if (std::find(config.methods.begin(), config.methods.end(), Method::timeshare) !=
        config.methods.end()) {
        ts_base = minpmac::solve_min_energy(
            ch, config.mode == ComparisonMode::fixed_target ? targets : RateVector(n, 0.5), ones);
    }

    TimingTable out;
    const int reps = 21;
    double minpmac_median = 0.0, drl_median = 0.0;
    for (Method m : config.methods) {
        std::function<void()> once;
        switch (m) {
        case Method::minpmac:
            once = [&] {
                if (config.mode == ComparisonMode::fixed_target)
                    (void)minpmac::solve_min_energy(ch, targets, ones);
                else
                    (void)minpmac::max_sum_rate(ch, config.energy_budget);
            };
            break;
        case Method::timeshare:
            once = [&] {
                timeshare::TimeShareProblem prob;
                prob.orders = timeshare::candidate_orders(ts_base.clusters);
                for (const auto &o : prob.orders)
                    prob.vertex_rates.push_back(capacity::sic_rates(ch, ts_base.alloc, o));
                prob.targets = ts_base.achieved;
                (void)timeshare::solve_timeshare(prob, 1e-9);
            };
            break;
        case Method::oma:
            once = [&] {
                if (config.mode == ComparisonMode::fixed_target)
                    (void)baselines::oma_allocate(ch, targets);
                else
                    (void)baselines::oma_max_rate(ch, config.energy_budget);
            };
            break;
        case Method::noma:
            once = [&] {
                if (config.mode == ComparisonMode::fixed_target)
                    (void)baselines::noma_heuristic_allocate(ch, targets);
                else
                    (void)baselines::noma_heuristic_max_rate(ch, config.energy_budget);
            };
            break;
        case Method::brute:
            once = [&] {
                SweepCell scratch;
                if (config.mode == ComparisonMode::fixed_target) {
                    baselines::GridSpec grid{config.brute_levels,
                                             config.brute_p_max > 0.0 ? config.brute_p_max : 1.0};
                    (void)baselines::brute_force_min_energy(ch, targets, grid);
                } else {
                    brute_budget_cell(config, ch, scratch);
                }
            };
            break;
        case Method::drl:
            once = [&] {
                const drl::PolicyEval ev =
                    drl::policy_forward(policy->model, drl_state.observation);
                (void)drl::greedy_action(ev, policy->model.heads(), policy->model.levels);
            };
            break;
        }
        once(); // warmup, untimed
        std::vector<double> times(reps);
        for (int r = 0; r < reps; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            once();
            const auto t1 = std::chrono::steady_clock::now();
            times[r] = std::chrono::duration<double>(t1 - t0).count();
        }
        std::nth_element(times.begin(), times.begin() + reps / 2, times.end());
        const double med = times[reps / 2];
        out.rows.push_back(TimingRow{m, med, reps});
        if (m == Method::minpmac) minpmac_median = med;
        if (m == Method::drl) drl_median = med;
    }
    if (minpmac_median > 0.0 && drl_median > 0.0)
        out.drl_speedup = minpmac_median / drl_median;
    return out;
}

FairnessTable fairness_ablation(const ExperimentConfig &config) {
    config.validate();
    if (config.seeds.empty()) throw std::invalid_argument("fairness ablation: need >= 1 seed");
    ExperimentConfig local = config;
    local.checkpoint.clear(); // the ablation trains both variants itself

    FairnessTable table;
    table.seeds = static_cast<int>(config.seeds.size());
    for (const bool fairness_on : {true, false}) {
        const PolicyHandle policy = make_policy(local, fairness_on);
        FairnessRow row;
        row.fairness_on = fairness_on;
        for (std::uint64_t seed : config.seeds) {
            const drl::EvalMetrics metrics = drl::evaluate(policy.model, policy.env, 1, seed);
            row.mean_sum_rate_mbps += metrics.mean_sum_rate_mbps;
            const auto [lo, hi] = std::minmax_element(metrics.mean_user_rates_mbps.begin(),
                                                      metrics.mean_user_rates_mbps.end());
            const double mean =
                metrics.mean_sum_rate_mbps / metrics.mean_user_rates_mbps.size();
            row.rate_spread += mean > 0.0 ? (*hi - *lo) / mean : 0.0;
            row.mean_min_rate_mbps += *lo;
            if (*lo < config.rate_floor_mbps) row.outage += 1.0;
        }
        const double inv = 1.0 / table.seeds;
        row.mean_sum_rate_mbps *= inv;
        row.rate_spread *= inv;
        row.mean_min_rate_mbps *= inv;
        row.outage *= inv;
        (fairness_on ? table.with_fairness : table.without_fairness) = row;
    }
    return table;
}

Table to_table(const SweepTable &t) {
    std::size_t n = 0;
    for (const SweepCell &c : t) n = std::max(n, c.user_rates_mbps.size());
    Table out;
    out.columns = {"method", "snr_db", "seed", "ok", "sum_rate_mbps", "energy_w"};
    for (std::size_t i = 0; i < n; ++i) out.columns.push_back("rate_u" + std::to_string(i + 1));
    out.columns.push_back("error");
    for (const SweepCell &c : t) {
        std::vector<std::string> row{method_name(c.method), fmt(c.snr_db),
                                     std::to_string(c.seed), c.ok ? "1" : "0",
                                     fmt(c.sum_rate_mbps), fmt(c.energy)};
        for (std::size_t i = 0; i < n; ++i)
            row.push_back(i < c.user_rates_mbps.size() ? fmt(c.user_rates_mbps[i]) : "");
        row.push_back(c.error);
        out.rows.push_back(std::move(row));
    }
    return out;
}

Table to_table(const OutageTable &t) {
    Table out;
    out.columns = {"method", "snr_db", "seeds", "outage"};
    for (const OutageCell &c : t.cells)
        out.rows.push_back({method_name(c.method), fmt(c.snr_db), std::to_string(c.seeds),
                            fmt(c.outage)});
    return out;
}

Table to_table(const TimingTable &t) {
    Table out;
    out.columns = {"method", "median_seconds", "repetitions"};
    for (const TimingRow &r : t.rows)
        out.rows.push_back({method_name(r.method), fmt(r.median_seconds),
                            std::to_string(r.repetitions)});
    return out;
}

Table to_table(const FairnessTable &t) {
    Table out;
    out.columns = {"fairness",           "mean_sum_rate_mbps", "rate_spread",
                   "mean_min_rate_mbps", "outage",             "seeds"};
    for (const FairnessRow *r : {&t.with_fairness, &t.without_fairness})
        out.rows.push_back({r->fairness_on ? "on" : "off", fmt(r->mean_sum_rate_mbps),
                            fmt(r->rate_spread), fmt(r->mean_min_rate_mbps), fmt(r->outage),
                            std::to_string(t.seeds)});
    return out;
}

namespace {

std::string sanitize(std::string field) {
    for (char &c : field)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return field;
}

} // namespace

void export_results(const Table &table, const std::string &path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path + ": cannot open for writing");
    for (std::size_t k = 0; k < table.columns.size(); ++k)
        os << (k ? "," : "") << sanitize(table.columns[k]);
    os << "\n";
    for (const auto &row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::invalid_argument(path + ": row width disagrees with header");
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << sanitize(row[k]);
        os << "\n";
    }
    if (!os) throw std::runtime_error(path + ": write failed");
}

Table read_table(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error(path + ": cannot open for reading");
    Table out;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (header) {
            out.columns = std::move(fields);
            header = false;
        } else {
            out.rows.push_back(std::move(fields));
        }
    }
    if (header) throw std::runtime_error(path + ": empty table file");
    return out;
}

void emit_plot_script(const Table &table, const std::string &script_path,
                      const std::string &data_file, const std::string &x_column,
                      const std::string &y_column, const std::string &group_column,
                      const std::string &xlabel, const std::string &ylabel) {
    auto col_index = [&](const std::string &name) {
        const auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end())
            throw std::invalid_argument("plot: no column named '" + name + "'");
        return static_cast<int>(it - table.columns.begin()) + 1; // gnuplot is 1-based
    };
    const int xc = col_index(x_column);
    const int yc = col_index(y_column);
    const int gc = group_column.empty() ? 0 : col_index(group_column);

    std::vector<std::string> groups;
    if (gc > 0)
        for (const auto &row : table.rows)
            if (std::find(groups.begin(), groups.end(), row[gc - 1]) == groups.end())
                groups.push_back(row[gc - 1]);

    std::string stem = script_path;
    const std::size_t slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const std::size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);

    std::ofstream os(script_path);
    if (!os) throw std::runtime_error(script_path + ": cannot open for writing");
    os << "# generated by macalloc bench; run with: gnuplot " << stem << ".gp\n"
       << "set datafile separator \",\"\n"
       << "set key outside right\n"
       << "set grid\n"
       << "set xlabel \"" << xlabel << "\"\n"
       << "set ylabel \"" << ylabel << "\"\n"
       << "set term pngcairo size 900,600\n"
       << "set output \"" << stem << ".png\"\n";
    if (gc == 0) {
        os << "plot \"" << data_file << "\" using " << xc << ":" << yc
           << " smooth unique with linespoints lw 2 pt 7 title \"" << y_column << "\"\n";
    } else {
        os << "plot \\\n";
        for (std::size_t k = 0; k < groups.size(); ++k) {
            os << "  \"" << data_file << "\" using (strcol(" << gc << ") eq \"" << groups[k]
               << "\" ? column(" << xc << ") : NaN):(column(" << yc
               << ")) smooth unique with linespoints lw 2 pt 7 title \"" << groups[k] << "\"";
            os << (k + 1 < groups.size() ? ", \\\n" : "\n");
        }
    }
    if (!os) throw std::runtime_error(script_path + ": write failed");
}

namespace {

json config_to_json(const ExperimentConfig &c) {
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(method_name(m));
    return json{
        {"scenario",
         {{"num_users", c.scenario.num_users},
          {"num_subcarriers", c.scenario.num_subcarriers},
          {"rx_antennas", c.scenario.rx_antennas},
          {"bandwidth_hz", c.scenario.bandwidth_hz},
          {"carrier_hz", c.scenario.carrier_hz},
          {"user_distances", c.scenario.user_distances},
          {"target_receive_snr_db", c.scenario.target_receive_snr_db},
          {"has_target_snr", c.scenario.has_target_snr},
          {"noise_variance", c.scenario.noise_variance},
          {"seed", c.scenario.seed}}},
        {"methods", methods},
        {"snr_db", c.snr_db},
        {"seeds", c.seeds},
        {"mode", c.mode == ComparisonMode::fixed_target ? "fixed_target" : "fixed_budget"},
        {"targets_mbps", c.targets_mbps},
        {"energy_budget", c.energy_budget},
        {"rate_floor_mbps", c.rate_floor_mbps},
        {"fairness", c.fairness},
        {"drl",
         {{"train_episodes", c.train_episodes},
          {"checkpoint", c.checkpoint},
          {"r_min_mbps", c.drl_env.r_min_mbps},
          {"p_total", c.drl_env.p_total},
          {"p_max", c.drl_env.p_max},
          {"p_t", c.drl_env.p_t},
          {"episode_steps", c.drl_env.episode_steps},
          {"levels", c.drl_env.levels},
          {"w1", c.drl_env.w1},
          {"w2", c.drl_env.w2},
          {"w3", c.drl_env.w3},
          {"w4", c.drl_env.w4},
          {"k_viol", c.drl_env.k_viol},
          {"redraw_each_episode", c.drl_env.redraw_each_episode},
          {"ppo",
           {{"lr", c.drl_ppo.lr},
            {"clip", c.drl_ppo.clip},
            {"gamma", c.drl_ppo.gamma},
            {"epochs", c.drl_ppo.epochs},
            {"batch", c.drl_ppo.batch},
            {"horizon", c.drl_ppo.horizon},
            {"hidden", c.drl_ppo.hidden},
            {"grad_clip", c.drl_ppo.grad_clip},
            {"entropy_coef", c.drl_ppo.entropy_coef}}}}},
        {"brute", {{"levels", c.brute_levels}, {"p_max", c.brute_p_max}}},
        {"output_dir", c.output_dir}};
}

} // namespace

ExperimentConfig load_experiment(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error(path + ": cannot open experiment file");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error &e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    ExperimentConfig c;
    if (j.contains("scenario")) {
        const json &s = j.at("scenario");
        c.scenario.num_users = s.value("num_users", c.scenario.num_users);
        c.scenario.num_subcarriers = s.value("num_subcarriers", c.scenario.num_subcarriers);
        c.scenario.rx_antennas = s.value("rx_antennas", c.scenario.rx_antennas);
        c.scenario.bandwidth_hz = s.value("bandwidth_hz", c.scenario.bandwidth_hz);
        c.scenario.carrier_hz = s.value("carrier_hz", c.scenario.carrier_hz);
        if (s.contains("user_distances"))
            c.scenario.user_distances = s.at("user_distances").get<std::vector<double>>();
        else if (s.contains("distance"))
            c.scenario.user_distances.assign(c.scenario.num_users, s.at("distance").get<double>());
        if (s.contains("target_receive_snr_db")) {
            c.scenario.target_receive_snr_db = s.at("target_receive_snr_db").get<double>();
            c.scenario.has_target_snr = true;
        }
        c.scenario.noise_variance = s.value("noise_variance", c.scenario.noise_variance);
        c.scenario.seed = s.value("seed", c.scenario.seed);
    }
    if (c.scenario.user_distances.empty())
        c.scenario.user_distances.assign(c.scenario.num_users, 3.0);

    if (j.contains("methods"))
        for (const auto &name : j.at("methods")) c.methods.push_back(method_from_name(name));
    else
        c.methods = {Method::minpmac, Method::oma, Method::noma};

    c.snr_db = j.value("snr_db", std::vector<double>{-50.0, -30.0, -10.0, 0.0, 10.0, 20.0});

    if (j.contains("seeds")) {
        const json &s = j.at("seeds");
        if (s.is_array()) {
            c.seeds = s.get<std::vector<std::uint64_t>>();
        } else {
            const std::uint64_t base = s.value("base", 1);
            const int count = s.at("count").get<int>();
            for (int k = 0; k < count; ++k) c.seeds.push_back(base + k);
        }
    } else {
        for (int k = 0; k < 10; ++k) c.seeds.push_back(1 + k);
    }

    const std::string mode = j.value("mode", std::string("fixed_budget"));
    if (mode == "fixed_target") c.mode = ComparisonMode::fixed_target;
    else if (mode == "fixed_budget") c.mode = ComparisonMode::fixed_budget;
    else throw std::runtime_error(path + ": mode must be fixed_target or fixed_budget");

    if (j.contains("targets_mbps")) {
        const json &t = j.at("targets_mbps");
        if (t.is_array()) c.targets_mbps = t.get<std::vector<double>>();
        else c.targets_mbps = {t.get<double>()};
    }
    c.energy_budget = j.value("energy_budget", c.energy_budget);
    c.rate_floor_mbps = j.value("rate_floor_mbps", c.rate_floor_mbps);
    c.fairness = j.value("fairness", c.fairness);

    if (j.contains("drl")) {
        const json &d = j.at("drl");
        c.train_episodes = d.value("train_episodes", c.train_episodes);
        c.checkpoint = d.value("checkpoint", c.checkpoint);
        c.drl_env.r_min_mbps = d.value("r_min_mbps", c.drl_env.r_min_mbps);
        c.drl_env.p_total = d.value("p_total", c.drl_env.p_total);
        c.drl_env.p_max = d.value("p_max", c.drl_env.p_max);
        c.drl_env.p_t = d.value("p_t", c.drl_env.p_t);
        c.drl_env.episode_steps = d.value("episode_steps", c.drl_env.episode_steps);
        c.drl_env.levels = d.value("levels", c.drl_env.levels);
        c.drl_env.w1 = d.value("w1", c.drl_env.w1);
        c.drl_env.w2 = d.value("w2", c.drl_env.w2);
        c.drl_env.w3 = d.value("w3", c.drl_env.w3);
        c.drl_env.w4 = d.value("w4", c.drl_env.w4);
        c.drl_env.k_viol = d.value("k_viol", c.drl_env.k_viol);
        c.drl_env.redraw_each_episode =
            d.value("redraw_each_episode", c.drl_env.redraw_each_episode);
        if (d.contains("ppo")) {
            const json &p = d.at("ppo");
            c.drl_ppo.lr = p.value("lr", c.drl_ppo.lr);
            c.drl_ppo.clip = p.value("clip", c.drl_ppo.clip);
            c.drl_ppo.gamma = p.value("gamma", c.drl_ppo.gamma);
            c.drl_ppo.epochs = p.value("epochs", c.drl_ppo.epochs);
            c.drl_ppo.batch = p.value("batch", c.drl_ppo.batch);
            c.drl_ppo.horizon = p.value("horizon", c.drl_ppo.horizon);
            c.drl_ppo.hidden = p.value("hidden", c.drl_ppo.hidden);
            c.drl_ppo.grad_clip = p.value("grad_clip", c.drl_ppo.grad_clip);
            c.drl_ppo.entropy_coef = p.value("entropy_coef", c.drl_ppo.entropy_coef);
        }
    }
    if (j.contains("brute")) {
        const json &b = j.at("brute");
        c.brute_levels = b.value("levels", c.brute_levels);
        c.brute_p_max = b.value("p_max", c.brute_p_max);
    }
    c.output_dir = j.value("output_dir", c.output_dir);

    c.validate();
    return c;
}

void write_manifest(const ExperimentConfig &config,
                    const std::map<std::string, double> &summary, const std::string &path) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

    json m{{"format", "macalloc-run-manifest v1"},
           {"created", stamp},
           {"library", "macalloc 0.1.0"},
           {"compiler", __VERSION__},
           {"config", config_to_json(config)},
           {"summary", summary}};
    std::ofstream os(path);
    if (!os) throw std::runtime_error(path + ": cannot open for writing");
    os << m.dump(2) << "\n";
    if (!os) throw std::runtime_error(path + ": write failed");
}

} // namespace macalloc::bench
