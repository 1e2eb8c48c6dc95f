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

"""Minimum-power multiple-access allocation: solver, baselines, and policy."""

import os as _os

# Let an in-tree CMake build provide the extension without installing the
# wheel: cmake -B build -DMACALLOC_BUILD_PYTHON=ON leaves _core in
# build/bindings. Installed copies never have that directory next to them.
_intree = _os.path.normpath(
    _os.path.join(_os.path.dirname(_os.path.abspath(__file__)), "..", "..", "build", "bindings")
)
if _os.path.isdir(_intree):
    __path__.append(_intree)
del _os, _intree

from ._core import (
    BruteForceResult,
    BudgetResult,
    ChannelSet,
    EnvConfig,
    EpisodeStats,
    EvalMetrics,
    GridSpec,
    InfeasibleError,
    MinPmacSolution,
    NomaHeuristicResult,
    OmaResult,
    PowerAllocation,
    PpoConfig,
    Scenario,
    SolveOptions,
    SolverError,
    VerifyReport,
    brute_force_min_energy,
    evaluate_policy,
    generate_channels,
    load_channels,
    max_sum_rate,
    mbps_to_rate,
    noma_heuristic_allocate,
    oma_allocate,
    pathloss_db,
    rate_to_mbps,
    save_channels,
    solve_min_energy,
    train_policy,
    verify_solution,
)

__all__ = [
    "BruteForceResult",
    "BudgetResult",
    "ChannelSet",
    "EnvConfig",
    "EpisodeStats",
    "EvalMetrics",
    "GridSpec",
    "InfeasibleError",
    "MinPmacSolution",
    "NomaHeuristicResult",
    "OmaResult",
    "PowerAllocation",
    "PpoConfig",
    "Scenario",
    "SolveOptions",
    "SolverError",
    "VerifyReport",
    "brute_force_min_energy",
    "evaluate_policy",
    "generate_channels",
    "load_channels",
    "max_sum_rate",
    "mbps_to_rate",
    "noma_heuristic_allocate",
    "oma_allocate",
    "pathloss_db",
    "rate_to_mbps",
    "save_channels",
    "solve_min_energy",
    "train_policy",
    "verify_solution",
]

__version__ = "0.1.0"
