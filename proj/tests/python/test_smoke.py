# macalloc: power and subcarrier allocation for multi-carrier uplink NOMA
# Copyright (C) 2026 the macalloc authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import macalloc as ma


def desk_scenario(users=3, tones=4, snr_db=10.0, seed=42):
    sc = ma.Scenario()
    sc.num_users = users
    sc.num_subcarriers = tones
    sc.user_distances = [3.0] * users
    sc.target_receive_snr_db = snr_db
    sc.has_target_snr = True
    sc.seed = seed
    return sc


def test_channel_roundtrip(tmp_path):
    sc = desk_scenario()
    ch = ma.generate_channels(sc)
    path = str(tmp_path / "ch.txt")
    ma.save_channels(ch, path)
    back = ma.load_channels(path)
    assert back.users == ch.users and back.tones == ch.tones
    assert back.sigma2 == ch.sigma2
    for i in range(ch.users):
        for j in range(ch.tones):
            assert back.gain_sq(i, j) == ch.gain_sq(i, j)


def test_pathloss_reference_point():
    assert ma.pathloss_db(1.0, 5.0e9) == pytest.approx(46.4, abs=1e-12)


def test_solve_meets_targets_and_verifies():
    sc = desk_scenario()
    ch = ma.generate_channels(sc)
    targets = [ma.mbps_to_rate(60.0, sc)] * sc.num_users
    sol = ma.solve_min_energy(ch, targets)
    report = ma.verify_solution(ch, targets, sol, 1e-6)
    assert report.all_ok()
    assert sol.rel_gap < 1e-4
    for got, want in zip(sol.achieved, targets):
        assert got >= want - 1e-6


def test_solver_beats_baselines():
    sc = desk_scenario()
    ch = ma.generate_channels(sc)
    targets = [ma.mbps_to_rate(60.0, sc)] * sc.num_users
    opt = ma.solve_min_energy(ch, targets).objective
    oma = ma.oma_allocate(ch, targets).alloc.total_energy()
    noma = ma.noma_heuristic_allocate(ch, targets).alloc.total_energy()
    assert opt <= oma + 1e-9
    assert opt <= noma + 1e-9


def test_single_user_closed_form():
    sc = desk_scenario(users=1, tones=1, seed=3)
    sc.has_target_snr = False
    sc.noise_variance = 1.0
    ch = ma.generate_channels(sc)
    g = ch.gain_sq(0, 0)
    target = [1.0]  # bits per tone use
    sol = ma.solve_min_energy(ch, target)
    assert sol.objective == pytest.approx((2.0 - 1.0) / g, rel=1e-6)


def test_rate_unit_roundtrip():
    sc = desk_scenario()
    for mbps in (1.0, 60.0, 250.0):
        assert ma.rate_to_mbps(ma.mbps_to_rate(mbps, sc), sc) == pytest.approx(mbps, rel=1e-12)


def test_brute_force_brackets_solver():
    sc = desk_scenario(users=2, tones=1, snr_db=10.0, seed=11)
    ch = ma.generate_channels(sc)
    targets = [ma.mbps_to_rate(30.0, sc)] * 2
    sol = ma.solve_min_energy(ch, targets)
    grid = ma.GridSpec()
    grid.levels = 120
    grid.p_max = 2.0 * max(max(row) for row in sol.alloc.powers) + 1e-12
    brute = ma.brute_force_min_energy(ch, targets, grid)
    assert brute.feasible
    assert sol.objective <= brute.objective + 1e-9
    assert brute.objective <= sol.objective * 1.10


def test_train_and_evaluate_policy(tmp_path):
    sc = desk_scenario()
    env = ma.EnvConfig()
    env.scenario = sc
    env.episode_steps = 40
    ppo = ma.PpoConfig()
    ckpt = str(tmp_path / "policy.ckpt")
    curve = ma.train_policy(env, ppo, episodes=5, seed=2, checkpoint_path=ckpt)
    assert len(curve) == 5
    assert all(math.isfinite(e.mean_reward) for e in curve)
    metrics = ma.evaluate_policy(ckpt, episodes=2, seed=77)
    assert metrics.episodes == 2
    assert metrics.mean_sum_rate_mbps > 0.0
    ch = ma.generate_channels(desk_scenario(seed=123))
    pinned = ma.evaluate_policy(ckpt, episodes=2, seed=77, channels=ch)
    assert pinned.mean_sum_rate_mbps > 0.0
