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

#include "macalloc/drl.hpp"

#include "macalloc/capacity.hpp"
#include "macalloc/channel.hpp"
#include "macalloc/minpmac.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace macalloc::drl {

using nlohmann::json;

void EnvConfig::validate() const {
    scenario.validate();
    if (!(r_min_mbps > 0.0)) throw std::invalid_argument("EnvConfig: r_min_mbps must be positive");
    if (!(p_total > 0.0) || !(p_max > 0.0) || !(p_t > 0.0))
        throw std::invalid_argument("EnvConfig: power limits must be positive");
    if (levels < 2) throw std::invalid_argument("EnvConfig: need at least 2 power levels");
    if (episode_steps < 1) throw std::invalid_argument("EnvConfig: episode_steps must be >= 1");
    if (!(eps_denom > 0.0)) throw std::invalid_argument("EnvConfig: eps_denom must be positive");
    if (k_viol < 0.0) throw std::invalid_argument("EnvConfig: k_viol must be non-negative");
    if (fixed_channels && (fixed_channels->users() != scenario.num_users ||
                           fixed_channels->tones() != scenario.num_subcarriers))
        throw std::invalid_argument("EnvConfig: fixed channels disagree with scenario dimensions");
}

std::vector<double> EnvConfig::power_levels() const {
    // Zero plus a geometric ladder spanning three decades up to p_t.
    std::vector<double> lv(levels, 0.0);
    const int span = std::max(1, levels - 2);
    for (int k = 1; k < levels; ++k)
        lv[k] = p_t * std::pow(10.0, -3.0 * static_cast<double>(levels - 1 - k) / span);
    return lv;
}

namespace {

std::vector<double> build_observation(const EnvConfig &cfg, const RateVector &rates_mbps,
                                      double total_power, const PowerAllocation &powers) {
    const int n = cfg.scenario.num_users;
    const int s = cfg.scenario.num_subcarriers;
    std::vector<double> obs;
    obs.reserve(static_cast<std::size_t>(cfg.observation_dim()));
    for (int i = 0; i < n; ++i) obs.push_back(rates_mbps[i] / cfg.r_min_mbps);
    obs.push_back(total_power / cfg.p_total);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < s; ++j) obs.push_back(powers.at(i, j) / cfg.p_t);
    return obs;
}

} // namespace

EnvState env_reset(const EnvConfig &config, std::uint64_t seed) {
    config.validate();
    Scenario sc = config.scenario;
    sc.seed = seed;
    ChannelSet channels = config.fixed_channels ? *config.fixed_channels
                                                : channel::generate_channels(sc);
    const int n = sc.num_users;
    EnvState state{std::move(channels),
                   PowerAllocation(sc.num_users, sc.num_subcarriers),
                   RateVector(n, 0.0),
                   0.0,
                   DecodeOrder{},
                   0,
                   seed,
                   {}};
    state.order.resize(n);
    std::iota(state.order.begin(), state.order.end(), 0);
    state.observation = build_observation(config, state.rates_mbps, 0.0, state.powers);
    return state;
}

DecodeOrder dynamic_order(const ChannelSet &channels, const PowerAllocation &powers,
                          const RateVector &floors) {
    const int n = channels.users();
    if (static_cast<int>(floors.size()) != n)
        throw std::invalid_argument("dynamic_order: floor vector size mismatch");
    for (double f : floors)
        if (!(f > 0.0)) throw std::invalid_argument("dynamic_order: floors must be positive");
    const std::vector<DecodeOrder> orders = capacity::enumerate_orders(n);
    DecodeOrder best = orders.front();
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto &o : orders) {
        const RateVector r = capacity::sic_rates(channels, powers, o);
        double score = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) score = std::min(score, r[i] / floors[i]);
        if (score > best_score) {
            best_score = score;
            best = o;
        }
    }
    return best;
}

RewardBreakdown reward(const RateVector &rates_mbps, const std::vector<double> &user_powers,
                       const EnvConfig &config) {
    const int n = config.scenario.num_users;
    if (static_cast<int>(rates_mbps.size()) != n || static_cast<int>(user_powers.size()) != n)
        throw std::invalid_argument("reward: dimension mismatch");
    double sum_r = 0.0, sum_p = 0.0;
    for (double r : rates_mbps) {
        if (!(r >= 0.0)) throw std::invalid_argument("reward: rates must be non-negative");
        sum_r += r;
    }
    for (double p : user_powers) {
        if (!(p >= 0.0)) throw std::invalid_argument("reward: powers must be non-negative");
        sum_p += p;
    }

    RewardBreakdown rb;
    rb.rate = config.w1 * std::tanh(sum_r / config.r_min_mbps - 1.0);
    const double bits_per_second = sum_r * 1e6;
    rb.efficiency = config.w2 * std::tanh(bits_per_second / (sum_p + config.eps_denom) * 1e-6);
    rb.power_penalty = config.w3 * std::max(0.0, sum_p / config.p_total - 0.8);
    const double mean_r = sum_r / n;
    double dev = 0.0;
    for (double r : rates_mbps) dev += std::abs(r - mean_r);
    rb.fairness = config.w4 * (1.0 - dev / (mean_r * n + config.eps_denom));
    if (config.k_viol > 0.0) {
        int violations = 0;
        for (double r : rates_mbps)
            if (r < config.r_min_mbps) ++violations;
        rb.floor_penalty = config.k_viol * violations / n;
    }
    rb.total = rb.rate + rb.efficiency - rb.power_penalty + rb.fairness - rb.floor_penalty;
    return rb;
}

RewardBreakdown env_step(const EnvConfig &config, EnvState &state, const ActionVector &action) {
    const int n = config.scenario.num_users;
    const int s = config.scenario.num_subcarriers;
    if (static_cast<int>(action.level.size()) != n * s)
        throw std::invalid_argument("env_step: action dimension mismatch");
    const std::vector<double> grid = config.power_levels();
    for (int idx : action.level)
        if (idx < 0 || idx >= config.levels)
            throw std::invalid_argument("env_step: action index out of range");

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < s; ++j) state.powers.at(i, j) = grid[action.level[i * s + j]];

    const RateVector floors(n, mbps_to_rate(config.r_min_mbps, config.scenario));
    state.order = dynamic_order(state.channels, state.powers, floors);
    const RateVector bits = capacity::sic_rates(state.channels, state.powers, state.order);
    for (int i = 0; i < n; ++i) state.rates_mbps[i] = rate_to_mbps(bits[i], config.scenario);
    state.total_power = state.powers.total_energy();

    std::vector<double> user_powers(n, 0.0);
    for (int i = 0; i < n; ++i) user_powers[i] = state.powers.user_energy(i);
    const RewardBreakdown rb = reward(state.rates_mbps, user_powers, config);

    ++state.step_count;
    state.observation = build_observation(config, state.rates_mbps, state.total_power, state.powers);
    return rb;
}

void PpoConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("PpoConfig: lr must be positive");
    if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("PpoConfig: clip must be in (0,1)");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("PpoConfig: gamma must be in [0,1]");
    if (epochs < 1 || batch < 1 || horizon < 1 || hidden < 1)
        throw std::invalid_argument("PpoConfig: epochs, batch, horizon, hidden must be >= 1");
    if (grad_clip < 0.0) throw std::invalid_argument("PpoConfig: grad_clip must be non-negative");
    if (entropy_coef < 0.0) throw std::invalid_argument("PpoConfig: entropy_coef must be non-negative");
}

PpoModel make_model(int obs_dim, int users, int tones, int levels, const PpoConfig &config,
                    std::uint64_t seed) {
    config.validate();
    if (obs_dim < 1 || users < 1 || tones < 1 || levels < 2)
        throw std::invalid_argument("make_model: bad dimensions");
    Rng rng(seed ^ 0xA5C39E1BULL);
    Mlp actor({obs_dim, config.hidden, config.hidden, users * tones * levels}, rng);
    Mlp critic({obs_dim, config.hidden, config.hidden, 1}, rng);
    Adam aopt(actor.params().size(), config.lr);
    Adam copt(critic.params().size(), config.lr);
    return PpoModel{std::move(actor), std::move(critic), std::move(aopt), std::move(copt),
                    users, tones, levels};
}

PolicyEval policy_forward(const PpoModel &model, const std::vector<double> &observation) {
    if (static_cast<int>(observation.size()) != model.actor.input_dim())
        throw std::invalid_argument("policy_forward: observation dimension mismatch");
    PolicyEval ev;
    ev.probs = model.actor.forward(observation);
    const int heads = model.heads(), levels = model.levels;
    for (int h = 0; h < heads; ++h) {
        double *z = ev.probs.data() + static_cast<std::size_t>(h) * levels;
        double zmax = z[0];
        for (int k = 1; k < levels; ++k) zmax = std::max(zmax, z[k]);
        double sum = 0.0;
        for (int k = 0; k < levels; ++k) {
            z[k] = std::exp(z[k] - zmax);
            sum += z[k];
        }
        for (int k = 0; k < levels; ++k) z[k] /= sum;
    }
    ev.value = model.critic.forward(observation)[0];
    return ev;
}

ActionVector sample_action(const PolicyEval &eval, int heads, int levels, Rng &rng) {
    ActionVector act;
    act.level.resize(heads);
    for (int h = 0; h < heads; ++h) {
        const double *p = eval.probs.data() + static_cast<std::size_t>(h) * levels;
        const double u = rng.uniform();
        double cum = 0.0;
        int pick = levels - 1;
        for (int k = 0; k < levels; ++k) {
            cum += p[k];
            if (u <= cum) {
                pick = k;
                break;
            }
        }
        act.level[h] = pick;
    }
    return act;
}

ActionVector greedy_action(const PolicyEval &eval, int heads, int levels) {
    ActionVector act;
    act.level.resize(heads);
    for (int h = 0; h < heads; ++h) {
        const double *p = eval.probs.data() + static_cast<std::size_t>(h) * levels;
        act.level[h] = static_cast<int>(std::max_element(p, p + levels) - p);
    }
    return act;
}

double action_log_prob(const PolicyEval &eval, const ActionVector &action, int levels) {
    double lp = 0.0;
    for (std::size_t h = 0; h < action.level.size(); ++h)
        lp += std::log(std::max(eval.probs[h * levels + action.level[h]], 1e-300));
    return lp;
}

std::vector<double> advantage_nstep(const std::vector<double> &rewards,
                                    const std::vector<double> &values, double gamma, int horizon) {
    if (rewards.size() != values.size())
        throw std::invalid_argument("advantage_nstep: rewards and values must align");
    if (horizon < 1) throw std::invalid_argument("advantage_nstep: horizon must be >= 1");
    const int t_end = static_cast<int>(rewards.size());
    std::vector<double> adv(t_end, 0.0);
    for (int t = 0; t < t_end; ++t) {
        double acc = 0.0, disc = 1.0;
        int k = 0;
        for (; k < horizon && t + k < t_end; ++k) {
            acc += disc * rewards[t + k];
            disc *= gamma;
        }
        if (k == horizon && t + horizon < t_end) acc += disc * values[t + horizon];
        adv[t] = acc - values[t];
    }
    return adv;
}

LossGrads ppo_losses(const PpoModel &model, const std::vector<Sample> &batch,
                     const PpoConfig &config) {
    if (batch.empty()) throw std::invalid_argument("ppo_losses: empty batch");
    const int heads = model.heads(), levels = model.levels;
    LossGrads out;
    out.actor_grad.assign(model.actor.params().size(), 0.0);
    out.critic_grad.assign(model.critic.params().size(), 0.0);
    const double inv = 1.0 / static_cast<double>(batch.size());

    Mlp::Trace trace;
    for (const Sample &s : batch) {
        if (static_cast<int>(s.action.level.size()) != heads)
            throw std::invalid_argument("ppo_losses: action dimension mismatch");
        std::vector<double> logits = model.actor.forward(s.observation, trace);
        // softmax per head, in place
        std::vector<double> &probs = logits;
        double logp_new = 0.0;
        for (int h = 0; h < heads; ++h) {
            double *z = probs.data() + static_cast<std::size_t>(h) * levels;
            double zmax = z[0];
            for (int k = 1; k < levels; ++k) zmax = std::max(zmax, z[k]);
            double sum = 0.0;
            for (int k = 0; k < levels; ++k) {
                z[k] = std::exp(z[k] - zmax);
                sum += z[k];
            }
            for (int k = 0; k < levels; ++k) z[k] /= sum;
            logp_new += std::log(std::max(z[s.action.level[h]], 1e-300));
        }
        const double ratio = std::exp(logp_new - s.old_log_prob);
        const double unclipped = ratio * s.advantage;
        const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * s.advantage;
        out.actor_loss -= inv * std::min(unclipped, clipped);
        out.mean_ratio += inv * ratio;
        if (std::abs(ratio - 1.0) > config.clip) out.clip_fraction += inv;

        const double dcoef = unclipped <= clipped ? ratio * s.advantage : 0.0;
        std::vector<double> dlogits(static_cast<std::size_t>(heads) * levels, 0.0);
        for (int h = 0; h < heads; ++h) {
            const double *p = probs.data() + static_cast<std::size_t>(h) * levels;
            double *dz = dlogits.data() + static_cast<std::size_t>(h) * levels;
            for (int k = 0; k < levels; ++k) {
                const double onehot = k == s.action.level[h] ? 1.0 : 0.0;
                dz[k] = -inv * dcoef * (onehot - p[k]);
            }
            if (config.entropy_coef > 0.0) {
                double ent = 0.0;
                for (int k = 0; k < levels; ++k)
                    ent -= p[k] * std::log(std::max(p[k], 1e-300));
                out.actor_loss -= inv * config.entropy_coef * ent;
                for (int k = 0; k < levels; ++k)
                    dz[k] += inv * config.entropy_coef * p[k] *
                             (std::log(std::max(p[k], 1e-300)) + ent);
            }
        }
        model.actor.backward(trace, dlogits, out.actor_grad);

        const double v = model.critic.forward(s.observation, trace)[0];
        const double err = v - s.value_target;
        out.critic_loss += inv * err * err;
        model.critic.backward(trace, {2.0 * inv * err}, out.critic_grad);
    }
    if (!std::isfinite(out.actor_loss) || !std::isfinite(out.critic_loss)) {
        std::ostringstream msg;
        msg << "ppo_losses: non-finite loss (actor " << out.actor_loss << ", critic "
            << out.critic_loss << ") over " << batch.size() << " samples";
        throw solver_error(msg.str(), out.actor_loss);
    }
    return out;
}

UpdateStats ppo_update(PpoModel &model, const std::vector<Sample> &rollout,
                       const PpoConfig &config, Rng &rng) {
    config.validate();
    if (rollout.empty()) throw std::invalid_argument("ppo_update: empty rollout");
    const int batch = std::min<int>(config.batch, static_cast<int>(rollout.size()));

    UpdateStats agg;
    int chunks = 0;
    std::vector<int> perm(rollout.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<Sample> mini;
    for (int e = 0; e < config.epochs; ++e) {
        for (std::size_t k = perm.size(); k > 1; --k)
            std::swap(perm[k - 1], perm[rng.below(k)]);
        for (std::size_t start = 0; start < perm.size(); start += batch) {
            const std::size_t stop = std::min(perm.size(), start + batch);
            mini.assign(stop - start, Sample{});
            for (std::size_t k = start; k < stop; ++k) mini[k - start] = rollout[perm[k]];
            LossGrads lg = ppo_losses(model, mini, config);
            clip_grad_norm(lg.actor_grad, config.grad_clip);
            clip_grad_norm(lg.critic_grad, config.grad_clip);
            model.actor_opt.step(model.actor.params(), lg.actor_grad);
            model.critic_opt.step(model.critic.params(), lg.critic_grad);
            agg.actor_loss += lg.actor_loss;
            agg.critic_loss += lg.critic_loss;
            agg.mean_ratio += lg.mean_ratio;
            agg.clip_fraction += lg.clip_fraction;
            ++chunks;
        }
    }
    agg.actor_loss /= chunks;
    agg.critic_loss /= chunks;
    agg.mean_ratio /= chunks;
    agg.clip_fraction /= chunks;
    return agg;
}

TrainResult train(const EnvConfig &env, const PpoConfig &ppo, int episodes, std::uint64_t seed) {
    env.validate();
    ppo.validate();
    if (episodes < 0) throw std::invalid_argument("train: episodes must be non-negative");
    const int n = env.scenario.num_users;
    const int s = env.scenario.num_subcarriers;

    TrainResult result{make_model(env.observation_dim(), n, s, env.levels, ppo, seed), {}};
    Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);

    const int t_steps = env.episode_steps;
    std::vector<Sample> rollout(t_steps);
    std::vector<double> rewards(t_steps), values(t_steps);
    for (int ep = 0; ep < episodes; ++ep) {
        const std::uint64_t ep_seed =
            env.redraw_each_episode ? seed + 1000003ULL * static_cast<std::uint64_t>(ep + 1)
                                    : seed + 1000003ULL;
        EnvState state = env_reset(env, ep_seed);
        EpisodeStats stats;
        stats.episode = ep;
        for (int t = 0; t < t_steps; ++t) {
            const PolicyEval ev = policy_forward(result.model, state.observation);
            const ActionVector act = sample_action(ev, result.model.heads(), env.levels, rng);
            Sample &sample = rollout[t];
            sample.observation = state.observation;
            sample.action = act;
            sample.old_log_prob = action_log_prob(ev, act, env.levels);
            const RewardBreakdown rb = env_step(env, state, act);
            rewards[t] = rb.total;
            values[t] = ev.value;
            stats.mean_reward += rb.total;
            stats.mean_rate += rb.rate;
            stats.mean_efficiency += rb.efficiency;
            stats.mean_power_penalty += rb.power_penalty;
            stats.mean_fairness += rb.fairness;
            stats.mean_total_power += state.total_power;
            for (double r : state.rates_mbps) stats.mean_sum_rate_mbps += r;
        }
        const std::vector<double> adv = advantage_nstep(rewards, values, ppo.gamma, ppo.horizon);
        double mean = 0.0;
        for (double a : adv) mean += a;
        mean /= t_steps;
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / t_steps) + 1e-8;
        for (int t = 0; t < t_steps; ++t) {
            rollout[t].advantage = (adv[t] - mean) / sd;
            rollout[t].value_target = adv[t] + values[t];
        }
        ppo_update(result.model, rollout, ppo, rng);

        const double inv_t = 1.0 / t_steps;
        stats.mean_reward *= inv_t;
        stats.mean_rate *= inv_t;
        stats.mean_efficiency *= inv_t;
        stats.mean_power_penalty *= inv_t;
        stats.mean_fairness *= inv_t;
        stats.mean_sum_rate_mbps *= inv_t;
        stats.mean_total_power *= inv_t;
        result.curve.push_back(stats);
    }
    return result;
}

EvalMetrics evaluate(const PpoModel &model, const EnvConfig &config, int episodes,
                     std::uint64_t seed) {
    config.validate();
    if (episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
    if (model.actor.input_dim() != config.observation_dim())
        throw std::invalid_argument("evaluate: checkpoint and scenario dimensions disagree");
    const int n = config.scenario.num_users;

    EvalMetrics m;
    m.mean_user_rates_mbps.assign(n, 0.0);
    m.episodes = episodes;
    std::vector<double> decision_times;
    decision_times.reserve(static_cast<std::size_t>(episodes) * config.episode_steps);
    double ratio_sum = 0.0;

    for (int ep = 0; ep < episodes; ++ep) {
        EnvState state = env_reset(config, seed + 1000003ULL * static_cast<std::uint64_t>(ep + 1));
        double ep_sum_rate_bits = 0.0, ep_energy = 0.0;
        for (int t = 0; t < config.episode_steps; ++t) {
            const auto t0 = std::chrono::steady_clock::now();
            const PolicyEval ev = policy_forward(model, state.observation);
            const ActionVector act = greedy_action(ev, model.heads(), config.levels);
            const auto t1 = std::chrono::steady_clock::now();
            decision_times.push_back(std::chrono::duration<double>(t1 - t0).count());
            const RewardBreakdown rb = env_step(config, state, act);
            m.mean_reward += rb.total;
            m.mean_total_power += state.total_power;
            ep_energy += state.total_power;
            for (int i = 0; i < n; ++i) {
                m.mean_user_rates_mbps[i] += state.rates_mbps[i];
                m.mean_sum_rate_mbps += state.rates_mbps[i];
                ep_sum_rate_bits += mbps_to_rate(state.rates_mbps[i], config.scenario);
            }
        }
        ep_sum_rate_bits /= config.episode_steps;
        ep_energy /= config.episode_steps;
        if (ep_energy > 0.0) {
            const minpmac::BudgetResult opt = minpmac::max_sum_rate(state.channels, ep_energy);
            ratio_sum += opt.sum_rate > 0.0 ? ep_sum_rate_bits / opt.sum_rate : 0.0;
        }
    }
    const double steps = static_cast<double>(episodes) * config.episode_steps;
    m.mean_reward /= steps;
    m.mean_sum_rate_mbps /= steps;
    m.mean_total_power /= steps;
    for (double &r : m.mean_user_rates_mbps) r /= steps;
    std::nth_element(decision_times.begin(), decision_times.begin() + decision_times.size() / 2,
                     decision_times.end());
    m.seconds_per_decision = decision_times[decision_times.size() / 2];
    m.optimality_ratio = ratio_sum / episodes;
    return m;
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'C', 'K', 'P', 'T', '1', '\n'};

template <typename T> void put(std::ostream &os, T v) {
    os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T> T get(std::istream &is) {
    T v{};
    is.read(reinterpret_cast<char *>(&v), sizeof(T));
    return v;
}

void put_tensor(std::ostream &os, const std::string &name, const std::vector<double> &data) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(os, 1);
    put<std::uint64_t>(os, data.size());
    os.write(reinterpret_cast<const char *>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::pair<std::string, std::vector<double>> get_tensor(std::istream &is) {
    const auto name_len = get<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto ndim = get<std::uint32_t>(is);
    std::uint64_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) total *= get<std::uint64_t>(is);
    std::vector<double> data(total);
    is.read(reinterpret_cast<char *>(data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor " + name);
    return {std::move(name), std::move(data)};
}

json scenario_to_json(const Scenario &sc) {
    return json{{"num_users", sc.num_users},
                {"num_subcarriers", sc.num_subcarriers},
                {"rx_antennas", sc.rx_antennas},
                {"tx_antennas_per_user", sc.tx_antennas_per_user},
                {"bandwidth_hz", sc.bandwidth_hz},
                {"carrier_hz", sc.carrier_hz},
                {"user_distances", sc.user_distances},
                {"target_receive_snr_db", sc.target_receive_snr_db},
                {"has_target_snr", sc.has_target_snr},
                {"noise_variance", sc.noise_variance},
                {"seed", sc.seed}};
}

Scenario scenario_from_json(const json &j) {
    Scenario sc;
    sc.num_users = j.at("num_users").get<int>();
    sc.num_subcarriers = j.at("num_subcarriers").get<int>();
    sc.rx_antennas = j.at("rx_antennas").get<int>();
    sc.tx_antennas_per_user = j.at("tx_antennas_per_user").get<int>();
    sc.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    sc.carrier_hz = j.at("carrier_hz").get<double>();
    sc.user_distances = j.at("user_distances").get<std::vector<double>>();
    sc.target_receive_snr_db = j.at("target_receive_snr_db").get<double>();
    sc.has_target_snr = j.at("has_target_snr").get<bool>();
    sc.noise_variance = j.at("noise_variance").get<double>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    return sc;
}

} // namespace

void save_checkpoint(const std::string &path, const PpoModel &model, const EnvConfig &env,
                     const PpoConfig &ppo, const std::string &notes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, 7);
    put_tensor(os, "actor.params", model.actor.params());
    put_tensor(os, "critic.params", model.critic.params());
    put_tensor(os, "actor.adam_m", model.actor_opt.first_moment());
    put_tensor(os, "actor.adam_v", model.actor_opt.second_moment());
    put_tensor(os, "critic.adam_m", model.critic_opt.first_moment());
    put_tensor(os, "critic.adam_v", model.critic_opt.second_moment());
    put_tensor(os, "adam.steps",
               {static_cast<double>(model.actor_opt.steps_taken()),
                static_cast<double>(model.critic_opt.steps_taken())});
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);

    json meta{{"format", "MACKPT1"},
              {"users", model.users},
              {"tones", model.tones},
              {"levels", model.levels},
              {"obs_dim", model.actor.input_dim()},
              {"scenario", scenario_to_json(env.scenario)},
              {"env",
               {{"r_min_mbps", env.r_min_mbps},
                {"p_total", env.p_total},
                {"p_max", env.p_max},
                {"p_t", env.p_t},
                {"episode_steps", env.episode_steps},
                {"levels", env.levels},
                {"w1", env.w1},
                {"w2", env.w2},
                {"w3", env.w3},
                {"w4", env.w4},
                {"eps_denom", env.eps_denom},
                {"k_viol", env.k_viol},
                {"redraw_each_episode", env.redraw_each_episode}}},
              {"ppo",
               {{"lr", ppo.lr},
                {"clip", ppo.clip},
                {"gamma", ppo.gamma},
                {"epochs", ppo.epochs},
                {"batch", ppo.batch},
                {"horizon", ppo.horizon},
                {"hidden", ppo.hidden},
                {"grad_clip", ppo.grad_clip},
                {"entropy_coef", ppo.entropy_coef}}},
              {"notes", notes}};
    std::ofstream sidecar(path + ".json");
    if (!sidecar) throw std::runtime_error("checkpoint: cannot open " + path + ".json for writing");
    sidecar << meta.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string &path) {
    std::ifstream sidecar(path + ".json");
    if (!sidecar) throw std::runtime_error("checkpoint: missing sidecar " + path + ".json");
    json meta = json::parse(sidecar);

    EnvConfig env;
    env.scenario = scenario_from_json(meta.at("scenario"));
    const json &je = meta.at("env");
    env.r_min_mbps = je.at("r_min_mbps").get<double>();
    env.p_total = je.at("p_total").get<double>();
    env.p_max = je.at("p_max").get<double>();
    env.p_t = je.at("p_t").get<double>();
    env.episode_steps = je.at("episode_steps").get<int>();
    env.levels = je.at("levels").get<int>();
    env.w1 = je.at("w1").get<double>();
    env.w2 = je.at("w2").get<double>();
    env.w3 = je.at("w3").get<double>();
    env.w4 = je.at("w4").get<double>();
    env.eps_denom = je.at("eps_denom").get<double>();
    env.k_viol = je.at("k_viol").get<double>();
    env.redraw_each_episode = je.at("redraw_each_episode").get<bool>();

    PpoConfig ppo;
    const json &jp = meta.at("ppo");
    ppo.lr = jp.at("lr").get<double>();
    ppo.clip = jp.at("clip").get<double>();
    ppo.gamma = jp.at("gamma").get<double>();
    ppo.epochs = jp.at("epochs").get<int>();
    ppo.batch = jp.at("batch").get<int>();
    ppo.horizon = jp.at("horizon").get<int>();
    ppo.hidden = jp.at("hidden").get<int>();
    ppo.grad_clip = jp.at("grad_clip").get<double>();
    ppo.entropy_coef = jp.at("entropy_coef").get<double>();

    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const auto count = get<std::uint32_t>(is);

    Checkpoint ck{make_model(meta.at("obs_dim").get<int>(), meta.at("users").get<int>(),
                             meta.at("tones").get<int>(), meta.at("levels").get<int>(), ppo,
                             0),
                  env, ppo};
    for (std::uint32_t k = 0; k < count; ++k) {
        auto [name, data] = get_tensor(is);
        auto assign = [&](std::vector<double> &dst) {
            if (dst.size() != data.size())
                throw std::runtime_error("checkpoint: tensor size mismatch for " + name);
            dst = std::move(data);
        };
        if (name == "actor.params") assign(ck.model.actor.params());
        else if (name == "critic.params") assign(ck.model.critic.params());
        else if (name == "actor.adam_m") assign(ck.model.actor_opt.first_moment());
        else if (name == "actor.adam_v") assign(ck.model.actor_opt.second_moment());
        else if (name == "critic.adam_m") assign(ck.model.critic_opt.first_moment());
        else if (name == "critic.adam_v") assign(ck.model.critic_opt.second_moment());
        else if (name == "adam.steps") {
            if (data.size() != 2) throw std::runtime_error("checkpoint: bad adam.steps tensor");
            ck.model.actor_opt.set_steps_taken(static_cast<long>(data[0]));
            ck.model.critic_opt.set_steps_taken(static_cast<long>(data[1]));
        }
        // unknown tensors are skipped for forward compatibility
    }
    return ck;
}

} // namespace macalloc::drl
