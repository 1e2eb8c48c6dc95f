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

#include <vector>

namespace macalloc::lp {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// Simplex multipliers of the equality rows at termination. For an
    /// infeasible problem these are the phase-1 duals: y with y^T A <= 0
    /// componentwise and y^T b > 0, certifying that Ax = b, x >= 0 is empty.
    std::vector<double> duals;
};

/// Dense two-phase primal simplex for
///   min c^T x  s.t.  A x = b,  x >= 0.
/// A is row-major (rows x cols). Bland's rule, so it cannot cycle. Sized for
/// the small problems this project produces (tens of rows, hundreds of
/// columns).
LpResult solve_lp(const std::vector<double> &A, int rows, int cols,
                  const std::vector<double> &b, const std::vector<double> &c,
                  double tol = 1e-11);

} // namespace macalloc::lp
