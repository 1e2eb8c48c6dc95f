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

#include "macalloc/drl.hpp"
#include "macalloc/rng.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace macalloc;
using testutil::desk_scenario;

namespace {

drl::EnvConfig desk_env() {
    drl::EnvConfig cfg;
    cfg.scenario = desk_scenario();
    cfg.episode_steps = 25;
    return cfg;
}

} // namespace

TEST_CASE("reward crosses zero when the sum rate hits the floor") {
    drl::EnvConfig cfg = desk_env();
    cfg.r_min_mbps = 100.0;
    const RateVector rates = {50.0, 30.0, 20.0}; // sums to exactly r_min
    const std::vector<double> powers = {0.1, 0.1, 0.1};
    const drl::RewardBreakdown rb = drl::reward(rates, powers, cfg);
    CHECK(rb.rate == 0.0);
}

TEST_CASE("equal rates earn the full fairness weight") {
    drl::EnvConfig cfg = desk_env();
    cfg.w4 = 1.7;
    const drl::RewardBreakdown rb =
        drl::reward({40.0, 40.0, 40.0}, {0.2, 0.2, 0.2}, cfg);
    CHECK(rb.fairness == cfg.w4);
}

TEST_CASE("spending the whole budget costs a fifth of the power weight") {
    drl::EnvConfig cfg = desk_env();
    cfg.w3 = 2.5;
    cfg.p_total = 1.0;
    const drl::RewardBreakdown rb =
        drl::reward({40.0, 40.0, 40.0}, {0.5, 0.25, 0.25}, cfg);
    CHECK(rb.power_penalty == cfg.w3 * std::max(0.0, 1.0 - 0.8));
}

TEST_CASE("under-budget power draws no penalty") {
    drl::EnvConfig cfg = desk_env();
    const drl::RewardBreakdown rb = drl::reward({40.0, 40.0, 40.0}, {0.2, 0.2, 0.2}, cfg);
    CHECK(rb.power_penalty == 0.0);
    CHECK(rb.total ==
          doctest::Approx(rb.rate + rb.efficiency + rb.fairness).epsilon(1e-12));
}

TEST_CASE("the rate-floor hook charges per violating user") {
    drl::EnvConfig cfg = desk_env();
    cfg.r_min_mbps = 50.0;
    cfg.k_viol = 3.0;
    const drl::RewardBreakdown rb = drl::reward({60.0, 40.0, 20.0}, {0.1, 0.1, 0.1}, cfg);
    CHECK(rb.floor_penalty == doctest::Approx(3.0 * 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("observation layout and dimensions") {
    drl::EnvConfig cfg = desk_env();
    CHECK(cfg.observation_dim() == 3 + 1 + 12);
    const drl::EnvState st = drl::env_reset(cfg, 7);
    REQUIRE(static_cast<int>(st.observation.size()) == cfg.observation_dim());
    for (double v : st.observation) CHECK(v == 0.0); // fresh episode: nothing sent yet
}

TEST_CASE("power levels form a ladder from zero to the peak") {
    drl::EnvConfig cfg = desk_env();
    cfg.levels = 6;
    cfg.p_t = 0.5;
    const std::vector<double> levels = cfg.power_levels();
    REQUIRE(static_cast<int>(levels.size()) == cfg.levels);
    CHECK(levels.front() == 0.0);
    CHECK(levels.back() == doctest::Approx(cfg.p_t).epsilon(1e-12));
    for (std::size_t k = 1; k < levels.size(); ++k) CHECK(levels[k] > levels[k - 1]);
}

TEST_CASE("environment steps are deterministic per seed") {
    drl::EnvConfig cfg = desk_env();
    drl::EnvState a = drl::env_reset(cfg, 99);
    drl::EnvState b = drl::env_reset(cfg, 99);
    CHECK(a.channels.raw_gains() == b.channels.raw_gains());

    drl::ActionVector act;
    act.level.assign(cfg.heads(), 2);
    const drl::RewardBreakdown ra = drl::env_step(cfg, a, act);
    const drl::RewardBreakdown rb = drl::env_step(cfg, b, act);
    CHECK(ra.total == rb.total);
    CHECK(a.observation == b.observation);
    CHECK(a.total_power == doctest::Approx(b.total_power));

    const drl::EnvState c = drl::env_reset(cfg, 100);
    CHECK(a.channels.raw_gains() != c.channels.raw_gains());
}

TEST_CASE("n-step advantages match the hand calculation") {
    const std::vector<double> rewards = {1.0, 2.0, 3.0};
    const std::vector<double> values = {0.5, 1.0, 1.5};
    const std::vector<double> adv = drl::advantage_nstep(rewards, values, 0.9, 2);
    REQUIRE(adv.size() == 3);
    CHECK(adv[0] == doctest::Approx(3.515).epsilon(1e-12));
    CHECK(adv[1] == doctest::Approx(3.7).epsilon(1e-12));
    CHECK(adv[2] == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("action log probability sums the chosen head probabilities") {
    drl::PpoConfig ppo;
    ppo.hidden = 8;
    const drl::PpoModel model = drl::make_model(16, 3, 4, 4, ppo, 11);
    std::vector<double> obs(16, 0.3);
    const drl::PolicyEval ev = drl::policy_forward(model, obs);
    REQUIRE(static_cast<int>(ev.probs.size()) == 12 * 4);
    for (int h = 0; h < 12; ++h) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l) s += ev.probs[h * 4 + l];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
    drl::ActionVector act;
    act.level.assign(12, 1);
    double want = 0.0;
    for (int h = 0; h < 12; ++h) want += std::log(ev.probs[h * 4 + 1]);
    CHECK(drl::action_log_prob(ev, act, 4) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("sampled and greedy actions stay on the level grid") {
    drl::PpoConfig ppo;
    ppo.hidden = 8;
    const drl::PpoModel model = drl::make_model(16, 3, 4, 5, ppo, 4);
    const drl::PolicyEval ev = drl::policy_forward(model, std::vector<double>(16, 0.1));
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const drl::ActionVector act = drl::sample_action(ev, 12, 5, rng);
        REQUIRE(act.level.size() == 12);
        for (int lvl : act.level) {
            CHECK(lvl >= 0);
            CHECK(lvl < 5);
        }
    }
    const drl::ActionVector greedy = drl::greedy_action(ev, 12, 5);
    for (int h = 0; h < 12; ++h) {
        for (int l = 0; l < 5; ++l)
            CHECK(ev.probs[h * 5 + greedy.level[h]] >= ev.probs[h * 5 + l] - 1e-15);
    }
}

TEST_CASE("gradients of both losses match finite differences") {
    drl::PpoConfig ppo;
    ppo.hidden = 3;
    drl::PpoModel model = drl::make_model(2, 1, 1, 2, ppo, 21);
    REQUIRE(model.actor.param_count() <= 64);
    REQUIRE(model.critic.param_count() <= 64);

    Rng rng(33);
    std::vector<drl::Sample> batch(6);
    for (drl::Sample &s : batch) {
        s.observation = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        s.action.level = {static_cast<int>(rng.below(2))};
        const drl::PolicyEval ev = drl::policy_forward(model, s.observation);
        s.old_log_prob = drl::action_log_prob(ev, s.action, 2) + rng.uniform(-0.1, 0.1);
        s.advantage = rng.uniform(-1.0, 1.0);
        s.value_target = rng.uniform(-0.5, 0.5);
    }

    const drl::LossGrads lg = drl::ppo_losses(model, batch, ppo);
    const double h = 1e-6;
    auto check_grad = [&](drl::Mlp &net, const std::vector<double> &grad, bool actor) {
        for (int k = 0; k < net.param_count(); ++k) {
            const double keep = net.params()[k];
            net.params()[k] = keep + h;
            const drl::LossGrads up = drl::ppo_losses(model, batch, ppo);
            net.params()[k] = keep - h;
            const drl::LossGrads dn = drl::ppo_losses(model, batch, ppo);
            net.params()[k] = keep;
            const double fd = actor ? (up.actor_loss - dn.actor_loss) / (2.0 * h)
                                    : (up.critic_loss - dn.critic_loss) / (2.0 * h);
            const double an = grad[k];
            const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8});
            CHECK(rel < 1e-4);
        }
    };
    check_grad(model.actor, lg.actor_grad, true);
    check_grad(model.critic, lg.critic_grad, false);
}

TEST_CASE("ppo updates move the parameters") {
    drl::PpoConfig ppo;
    ppo.hidden = 4;
    ppo.batch = 8;
    drl::PpoModel model = drl::make_model(4, 1, 2, 3, ppo, 3);
    const std::vector<double> before = model.actor.params();

    Rng rng(9);
    std::vector<drl::Sample> rollout(16);
    for (drl::Sample &s : rollout) {
        s.observation = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
        s.action.level = {static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))};
        const drl::PolicyEval ev = drl::policy_forward(model, s.observation);
        s.old_log_prob = drl::action_log_prob(ev, s.action, 3);
        s.advantage = rng.uniform(-1.0, 1.0);
        s.value_target = rng.uniform();
    }
    const drl::UpdateStats stats = drl::ppo_update(model, rollout, ppo, rng);
    CHECK(model.actor.params() != before);
    CHECK(std::isfinite(stats.actor_loss));
    CHECK(std::isfinite(stats.critic_loss));
    CHECK(stats.mean_ratio == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("training runs and reports finite statistics") {
    drl::EnvConfig env = desk_env();
    env.episode_steps = 20;
    drl::PpoConfig ppo;
    ppo.hidden = 16;
    const drl::TrainResult res = drl::train(env, ppo, 4, 5);
    REQUIRE(res.curve.size() == 4);
    for (const drl::EpisodeStats &e : res.curve) {
        CHECK(std::isfinite(e.mean_reward));
        CHECK(e.mean_sum_rate_mbps >= 0.0);
        CHECK(e.mean_total_power >= 0.0);
    }
}

TEST_CASE("training is reproducible for a fixed seed") {
    drl::EnvConfig env = desk_env();
    env.episode_steps = 15;
    drl::PpoConfig ppo;
    ppo.hidden = 8;
    const drl::TrainResult a = drl::train(env, ppo, 3, 12);
    const drl::TrainResult b = drl::train(env, ppo, 3, 12);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i)
        CHECK(a.curve[i].mean_reward == b.curve[i].mean_reward);
    CHECK(a.model.actor.params() == b.model.actor.params());
}

TEST_CASE("checkpoints round-trip the model and configs") {
    drl::EnvConfig env = desk_env();
    env.episode_steps = 10;
    drl::PpoConfig ppo;
    ppo.hidden = 8;
    const drl::TrainResult res = drl::train(env, ppo, 2, 8);
    const std::string path =
        (std::filesystem::temp_directory_path() / "macalloc_test_ckpt.bin").string();
    drl::save_checkpoint(path, res.model, env, ppo, "round trip test");
    const drl::Checkpoint back = drl::load_checkpoint(path);
    CHECK(back.model.actor.params() == res.model.actor.params());
    CHECK(back.model.critic.params() == res.model.critic.params());
    CHECK(back.env.scenario.num_users == env.scenario.num_users);
    CHECK(back.env.r_min_mbps == env.r_min_mbps);
    CHECK(back.ppo.hidden == ppo.hidden);
    CHECK(std::filesystem::exists(path + ".json"));

    const drl::EvalMetrics ea = drl::evaluate(res.model, env, 2, 3);
    const drl::EvalMetrics eb = drl::evaluate(back.model, back.env, 2, 3);
    CHECK(ea.mean_reward == eb.mean_reward);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".json");
}

TEST_CASE("corrupt checkpoints are rejected") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "macalloc_test_bad_ckpt.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTAMAGIC\0\0\0";
    }
    CHECK_THROWS((void)drl::load_checkpoint(path));
    std::filesystem::remove(path);
}

TEST_CASE("dynamic order is a permutation that favors the floors") {
    const ChannelSet ch = channel::generate_channels(desk_scenario(3, 2, 10.0, 44));
    PowerAllocation alloc = testutil::flat_powers(3, 2, 0.3);
    const RateVector floors = {1.0, 1.0, 1.0};
    const DecodeOrder order = drl::dynamic_order(ch, alloc, floors);
    DecodeOrder sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == DecodeOrder{0, 1, 2});
}
