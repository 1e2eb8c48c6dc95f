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
#include "macalloc/channel.hpp"
#include "macalloc/drl.hpp"
#include "macalloc/minpmac.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace macalloc;

namespace {

std::vector<std::vector<double>> power_rows(const PowerAllocation &a) {
    std::vector<std::vector<double>> rows(a.users, std::vector<double>(a.tones));
    for (int i = 0; i < a.users; ++i)
        for (int j = 0; j < a.tones; ++j) rows[i][j] = a.at(i, j);
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "minimum-power multiple-access allocation core";

    py::register_exception<solver_error>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<infeasible_error>(m, "InfeasibleError", PyExc_ValueError);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("num_users", &Scenario::num_users)
        .def_readwrite("num_subcarriers", &Scenario::num_subcarriers)
        .def_readwrite("rx_antennas", &Scenario::rx_antennas)
        .def_readwrite("bandwidth_hz", &Scenario::bandwidth_hz)
        .def_readwrite("carrier_hz", &Scenario::carrier_hz)
        .def_readwrite("user_distances", &Scenario::user_distances)
        .def_readwrite("target_receive_snr_db", &Scenario::target_receive_snr_db)
        .def_readwrite("has_target_snr", &Scenario::has_target_snr)
        .def_readwrite("noise_variance", &Scenario::noise_variance)
        .def_readwrite("seed", &Scenario::seed);

    py::class_<ChannelSet>(m, "ChannelSet")
        .def_property_readonly("users", &ChannelSet::users)
        .def_property_readonly("tones", &ChannelSet::tones)
        .def_property_readonly("rx", &ChannelSet::rx)
        .def_property_readonly("sigma2", &ChannelSet::sigma2)
        .def_property_readonly("scenario", &ChannelSet::scenario)
        .def("gain_sq", &ChannelSet::gain_sq, py::arg("user"), py::arg("tone"));

    py::class_<PowerAllocation>(m, "PowerAllocation")
        .def_readonly("users", &PowerAllocation::users)
        .def_readonly("tones", &PowerAllocation::tones)
        .def_property_readonly("powers", &power_rows)
        .def("user_energy", &PowerAllocation::user_energy, py::arg("user"))
        .def("total_energy", &PowerAllocation::total_energy);

    m.def("generate_channels", &channel::generate_channels, py::arg("scenario"));
    m.def("save_channels",
          py::overload_cast<const ChannelSet &, const std::string &>(&channel::save_channels),
          py::arg("channels"), py::arg("path"));
    m.def("load_channels", py::overload_cast<const std::string &>(&channel::load_channels),
          py::arg("path"));
    m.def("pathloss_db", &channel::pathloss_db, py::arg("distance_m"), py::arg("carrier_hz"));

    m.def("rate_to_mbps", &rate_to_mbps, py::arg("bits_per_toneuse"), py::arg("scenario"));
    m.def("mbps_to_rate", &mbps_to_rate, py::arg("mbps"), py::arg("scenario"));

    py::class_<minpmac::SolveOptions>(m, "SolveOptions")
        .def(py::init<>())
        .def_readwrite("rel_gap", &minpmac::SolveOptions::rel_gap)
        .def_readwrite("rate_tol", &minpmac::SolveOptions::rate_tol)
        .def_readwrite("cluster_tol", &minpmac::SolveOptions::cluster_tol)
        .def_readwrite("max_outer", &minpmac::SolveOptions::max_outer)
        .def_readwrite("power_cap", &minpmac::SolveOptions::power_cap);

    py::class_<minpmac::MinPmacSolution>(m, "MinPmacSolution")
        .def_readonly("alloc", &minpmac::MinPmacSolution::alloc)
        .def_readonly("duals", &minpmac::MinPmacSolution::duals)
        .def_readonly("clusters", &minpmac::MinPmacSolution::clusters)
        .def_readonly("orders", &minpmac::MinPmacSolution::orders)
        .def_readonly("order_weights", &minpmac::MinPmacSolution::order_weights)
        .def_readonly("achieved", &minpmac::MinPmacSolution::achieved)
        .def_readonly("objective", &minpmac::MinPmacSolution::objective)
        .def_readonly("dual_bound", &minpmac::MinPmacSolution::dual_bound)
        .def_readonly("rel_gap", &minpmac::MinPmacSolution::rel_gap)
        .def_readonly("outer_iterations", &minpmac::MinPmacSolution::outer_iterations)
        .def_readonly("time_shared", &minpmac::MinPmacSolution::time_shared);

    py::class_<minpmac::VerifyReport>(m, "VerifyReport")
        .def_readonly("rates_met", &minpmac::VerifyReport::rates_met)
        .def_readonly("worst_rate_deficit", &minpmac::VerifyReport::worst_rate_deficit)
        .def_readonly("polymatroid_ok", &minpmac::VerifyReport::polymatroid_ok)
        .def_readonly("worst_polymatroid_violation",
                      &minpmac::VerifyReport::worst_polymatroid_violation)
        .def_readonly("powers_nonneg", &minpmac::VerifyReport::powers_nonneg)
        .def_readonly("comp_slack_ok", &minpmac::VerifyReport::comp_slack_ok)
        .def_readonly("sic_consistent", &minpmac::VerifyReport::sic_consistent)
        .def_readonly("needs_time_sharing", &minpmac::VerifyReport::needs_time_sharing)
        .def("all_ok", &minpmac::VerifyReport::all_ok);

    m.def(
        "solve_min_energy",
        [](const ChannelSet &ch, const RateVector &targets, std::vector<double> alpha,
           const minpmac::SolveOptions &opts) {
            if (alpha.empty()) alpha.assign(ch.users(), 1.0);
            return minpmac::solve_min_energy(ch, targets, alpha, opts);
        },
        py::arg("channels"), py::arg("targets"), py::arg("alpha") = std::vector<double>{},
        py::arg("options") = minpmac::SolveOptions{});
    m.def("verify_solution", &minpmac::verify_solution, py::arg("channels"), py::arg("targets"),
          py::arg("solution"), py::arg("tol") = 1e-6);

    py::class_<minpmac::BudgetResult>(m, "BudgetResult")
        .def_readonly("alloc", &minpmac::BudgetResult::alloc)
        .def_readonly("sum_rate", &minpmac::BudgetResult::sum_rate)
        .def_readonly("iterations", &minpmac::BudgetResult::iterations);
    m.def(
        "max_sum_rate",
        [](const ChannelSet &ch, double budget) { return minpmac::max_sum_rate(ch, budget); },
        py::arg("channels"), py::arg("total_energy"));

    py::class_<baselines::OmaResult>(m, "OmaResult")
        .def_readonly("alloc", &baselines::OmaResult::alloc)
        .def_readonly("assignment", &baselines::OmaResult::assignment)
        .def_readonly("rates", &baselines::OmaResult::rates)
        .def_readonly("time_fraction", &baselines::OmaResult::time_fraction);
    m.def(
        "oma_allocate",
        [](const ChannelSet &ch, const RateVector &targets) {
            return baselines::oma_allocate(ch, targets);
        },
        py::arg("channels"), py::arg("targets"));

    py::class_<baselines::NomaHeuristicResult>(m, "NomaHeuristicResult")
        .def_readonly("alloc", &baselines::NomaHeuristicResult::alloc)
        .def_readonly("orders", &baselines::NomaHeuristicResult::orders)
        .def_readonly("rates", &baselines::NomaHeuristicResult::rates);
    m.def("noma_heuristic_allocate", &baselines::noma_heuristic_allocate, py::arg("channels"),
          py::arg("targets"));

    py::class_<baselines::GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def_readwrite("levels", &baselines::GridSpec::levels)
        .def_readwrite("p_max", &baselines::GridSpec::p_max);
    py::class_<baselines::BruteForceResult>(m, "BruteForceResult")
        .def_readonly("feasible", &baselines::BruteForceResult::feasible)
        .def_readonly("alloc", &baselines::BruteForceResult::alloc)
        .def_readonly("objective", &baselines::BruteForceResult::objective)
        .def_readonly("order", &baselines::BruteForceResult::order)
        .def_readonly("evaluated", &baselines::BruteForceResult::evaluated);
    m.def(
        "brute_force_min_energy",
        [](const ChannelSet &ch, const RateVector &targets, const baselines::GridSpec &grid) {
            return baselines::brute_force_min_energy(ch, targets, grid);
        },
        py::arg("channels"), py::arg("targets"), py::arg("grid"));

    py::class_<drl::EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("scenario", &drl::EnvConfig::scenario)
        .def_readwrite("r_min_mbps", &drl::EnvConfig::r_min_mbps)
        .def_readwrite("p_total", &drl::EnvConfig::p_total)
        .def_readwrite("p_max", &drl::EnvConfig::p_max)
        .def_readwrite("p_t", &drl::EnvConfig::p_t)
        .def_readwrite("episode_steps", &drl::EnvConfig::episode_steps)
        .def_readwrite("levels", &drl::EnvConfig::levels)
        .def_readwrite("w1", &drl::EnvConfig::w1)
        .def_readwrite("w2", &drl::EnvConfig::w2)
        .def_readwrite("w3", &drl::EnvConfig::w3)
        .def_readwrite("w4", &drl::EnvConfig::w4)
        .def_readwrite("k_viol", &drl::EnvConfig::k_viol)
        .def_readwrite("redraw_each_episode", &drl::EnvConfig::redraw_each_episode)
        .def("set_fixed_channels",
             [](drl::EnvConfig &cfg, const ChannelSet &ch) {
                 cfg.fixed_channels = std::make_shared<ChannelSet>(ch);
                 cfg.scenario = ch.scenario();
             })
        .def("observation_dim", &drl::EnvConfig::observation_dim);

    py::class_<drl::PpoConfig>(m, "PpoConfig")
        .def(py::init<>())
        .def_readwrite("lr", &drl::PpoConfig::lr)
        .def_readwrite("clip", &drl::PpoConfig::clip)
        .def_readwrite("gamma", &drl::PpoConfig::gamma)
        .def_readwrite("epochs", &drl::PpoConfig::epochs)
        .def_readwrite("batch", &drl::PpoConfig::batch)
        .def_readwrite("horizon", &drl::PpoConfig::horizon)
        .def_readwrite("hidden", &drl::PpoConfig::hidden)
        .def_readwrite("grad_clip", &drl::PpoConfig::grad_clip)
        .def_readwrite("entropy_coef", &drl::PpoConfig::entropy_coef);

    py::class_<drl::EpisodeStats>(m, "EpisodeStats")
        .def_readonly("episode", &drl::EpisodeStats::episode)
        .def_readonly("mean_reward", &drl::EpisodeStats::mean_reward)
        .def_readonly("mean_rate", &drl::EpisodeStats::mean_rate)
        .def_readonly("mean_efficiency", &drl::EpisodeStats::mean_efficiency)
        .def_readonly("mean_power_penalty", &drl::EpisodeStats::mean_power_penalty)
        .def_readonly("mean_fairness", &drl::EpisodeStats::mean_fairness)
        .def_readonly("mean_sum_rate_mbps", &drl::EpisodeStats::mean_sum_rate_mbps)
        .def_readonly("mean_total_power", &drl::EpisodeStats::mean_total_power);

    py::class_<drl::EvalMetrics>(m, "EvalMetrics")
        .def_readonly("mean_reward", &drl::EvalMetrics::mean_reward)
        .def_readonly("mean_sum_rate_mbps", &drl::EvalMetrics::mean_sum_rate_mbps)
        .def_readonly("mean_user_rates_mbps", &drl::EvalMetrics::mean_user_rates_mbps)
        .def_readonly("mean_total_power", &drl::EvalMetrics::mean_total_power)
        .def_readonly("seconds_per_decision", &drl::EvalMetrics::seconds_per_decision)
        .def_readonly("optimality_ratio", &drl::EvalMetrics::optimality_ratio)
        .def_readonly("episodes", &drl::EvalMetrics::episodes);

    m.def(
        "train_policy",
        [](const drl::EnvConfig &env, const drl::PpoConfig &ppo, int episodes, std::uint64_t seed,
           const std::string &checkpoint_path) {
            drl::TrainResult res = drl::train(env, ppo, episodes, seed);
            if (!checkpoint_path.empty())
                drl::save_checkpoint(checkpoint_path, res.model, env, ppo, "python train");
            return res.curve;
        },
        py::arg("env"), py::arg("ppo"), py::arg("episodes"), py::arg("seed"),
        py::arg("checkpoint_path") = std::string{},
        "Train a policy; optionally save a checkpoint. Returns the reward curve.");
    m.def(
        "evaluate_policy",
        [](const std::string &checkpoint_path, int episodes, std::uint64_t seed,
           py::object channels) {
            drl::Checkpoint ckpt = drl::load_checkpoint(checkpoint_path);
            drl::EnvConfig env = ckpt.env;
            if (!channels.is_none()) {
                const auto &ch = channels.cast<const ChannelSet &>();
                env.scenario = ch.scenario();
                env.fixed_channels = std::make_shared<ChannelSet>(ch);
            }
            return drl::evaluate(ckpt.model, env, episodes, seed);
        },
        py::arg("checkpoint_path"), py::arg("episodes") = 10, py::arg("seed") = 1,
        py::arg("channels") = py::none(),
        "Evaluate a saved checkpoint, optionally on explicit channels.");
}
