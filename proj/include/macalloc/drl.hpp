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

#include "macalloc/mlp.hpp"
#include "macalloc/types.hpp"

#include <memory>
#include <string>

namespace macalloc::drl {

struct EnvConfig {
    Scenario scenario; // channel geometry for per-episode redraws
    double r_min_mbps = 100.0; // system rate floor in the rate reward
    double p_total = 1.0;      // W, denominator of the power penalty
    double p_max = 1.0;        // W, declared total power limit
    double p_t = 0.5;          // W, per-user per-tone grid ceiling
    int episode_steps = 200;   // T
    int levels = 8;            // quantized power levels per (user, tone)
    double w1 = 1.0, w2 = 1.0, w3 = 1.0, w4 = 1.0;
    double eps_denom = 1e-9;
    /// Optional additive rate-floor penalty (per violating user, scaled by
    /// 1/N). Zero keeps the plain four-term reward.
    double k_viol = 0.0;
    /// Redraw channels each episode (seed-derived); false reuses the reset draw.
    bool redraw_each_episode = true;
    /// Explicit channels (e.g. loaded from a file). When set, every episode
    /// uses them verbatim and `scenario` must carry matching dimensions.
    std::shared_ptr<const ChannelSet> fixed_channels;

    void validate() const;
    int observation_dim() const {
        return scenario.num_users + 1 + scenario.num_users * scenario.num_subcarriers;
    }
    int heads() const { return scenario.num_users * scenario.num_subcarriers; }
    /// Quantized power levels: zero, then a geometric ladder up to p_t.
    std::vector<double> power_levels() const;
};

/// One categorical choice per (user, tone), row-major by user.
struct ActionVector {
    std::vector<int> level;
};

struct EnvState {
    ChannelSet channels;
    PowerAllocation powers;
    RateVector rates_mbps;       // per user
    double total_power = 0.0;    // W
    DecodeOrder order;           // decode order used for the current rates
    int step_count = 0;
    std::uint64_t episode_seed = 0;
    /// Normalized observation: rates / r_min, total power / p_total, then
    /// per-(user,tone) powers / p_t.
    std::vector<double> observation;
};

struct RewardBreakdown {
    double rate = 0.0;
    double efficiency = 0.0;
    double power_penalty = 0.0;
    double fairness = 0.0;
    double floor_penalty = 0.0; // k_viol hook, zero by default
    double total = 0.0;         // rate + efficiency - power_penalty + fairness - floor_penalty
};

/// Fresh episode: channels drawn from (scenario, seed), powers and rates zero.
EnvState env_reset(const EnvConfig &config, std::uint64_t seed);

/// Decode order maximizing min_i rates_i / floor_i over all N! orders; ties
/// keep the lexicographically first order. Rates and floors share any unit.
DecodeOrder dynamic_order(const ChannelSet &channels, const PowerAllocation &powers,
                          const RateVector &floors);

/// Four-term step reward. Rates in Mbps, powers in W per user.
RewardBreakdown reward(const RateVector &rates_mbps, const std::vector<double> &user_powers,
                       const EnvConfig &config);

/// Apply an action: decode powers from the level grid, pick the dynamic
/// decode order, update rates and the observation, score the step.
RewardBreakdown env_step(const EnvConfig &config, EnvState &state, const ActionVector &action);

struct PpoConfig {
    double lr = 5e-4;
    double clip = 0.2;
    double gamma = 0.98;
    int epochs = 4; // passes over each rollout
    int batch = 128;
    int horizon = 16; // bootstrap span of the advantage estimate
    int hidden = 64;  // width of the two feature layers
    double grad_clip = 0.5;
    double entropy_coef = 0.0;

    void validate() const;
};

/// Actor-critic pair with factored categorical heads: the actor emits
/// heads * levels logits (levels-wide softmax per head); the critic emits one
/// value.
struct PpoModel {
    Mlp actor;
    Mlp critic;
    Adam actor_opt;
    Adam critic_opt;
    int users = 0, tones = 0, levels = 0;

    int heads() const { return users * tones; }
};

PpoModel make_model(int obs_dim, int users, int tones, int levels, const PpoConfig &config,
                    std::uint64_t seed);

struct PolicyEval {
    std::vector<double> probs; // heads * levels, softmax per head
    double value = 0.0;
};

PolicyEval policy_forward(const PpoModel &model, const std::vector<double> &observation);

ActionVector sample_action(const PolicyEval &eval, int heads, int levels, Rng &rng);
ActionVector greedy_action(const PolicyEval &eval, int heads, int levels);
double action_log_prob(const PolicyEval &eval, const ActionVector &action, int levels);

/// A_t = sum_{k<min(h, T-t)} gamma^k r_{t+k} + gamma^h V_{t+h} [if t+h < T] - V_t.
std::vector<double> advantage_nstep(const std::vector<double> &rewards,
                                    const std::vector<double> &values, double gamma, int horizon);

struct Sample {
    std::vector<double> observation;
    ActionVector action;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double value_target = 0.0;
};

struct UpdateStats {
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
};

/// Loss values and exact parameter gradients of the clipped surrogate and the
/// squared-error critic on one batch (no update). Exposed for gradient
/// verification.
struct LossGrads {
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    std::vector<double> actor_grad;
    std::vector<double> critic_grad;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
};
LossGrads ppo_losses(const PpoModel &model, const std::vector<Sample> &batch,
                     const PpoConfig &config);

/// Minibatch PPO epochs over the rollout; shuffling driven by `rng`.
UpdateStats ppo_update(PpoModel &model, const std::vector<Sample> &rollout,
                       const PpoConfig &config, Rng &rng);

struct EpisodeStats {
    int episode = 0;
    double mean_reward = 0.0;
    double mean_rate = 0.0;       // R_rate component
    double mean_efficiency = 0.0; // R_eff component
    double mean_power_penalty = 0.0;
    double mean_fairness = 0.0;
    double mean_sum_rate_mbps = 0.0;
    double mean_total_power = 0.0;
};

struct TrainResult {
    PpoModel model;
    std::vector<EpisodeStats> curve;
};

TrainResult train(const EnvConfig &env, const PpoConfig &ppo, int episodes, std::uint64_t seed);

struct EvalMetrics {
    double mean_reward = 0.0;
    double mean_sum_rate_mbps = 0.0;
    RateVector mean_user_rates_mbps;
    double mean_total_power = 0.0;
    double seconds_per_decision = 0.0;
    /// DRL sum rate / best possible sum rate at the DRL's own mean energy.
    double optimality_ratio = 0.0;
    int episodes = 0;
};

/// Greedy-policy evaluation over fresh channel draws seeded from `seed`.
EvalMetrics evaluate(const PpoModel &model, const EnvConfig &config, int episodes,
                     std::uint64_t seed);

/// Versioned binary container of named tensors (parameters and optimizer
/// moments) plus a human-readable sidecar at path + ".json".
void save_checkpoint(const std::string &path, const PpoModel &model, const EnvConfig &env,
                     const PpoConfig &ppo, const std::string &notes = {});
struct Checkpoint {
    PpoModel model;
    EnvConfig env;
    PpoConfig ppo;
};
Checkpoint load_checkpoint(const std::string &path);

} // namespace macalloc::drl
