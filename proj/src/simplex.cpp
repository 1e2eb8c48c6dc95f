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

#include "macalloc/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace macalloc::lp {

namespace {

// Full-tableau simplex state. Columns: n structural + m artificial, plus rhs.
struct Tableau {
    int m, n, width; // width = n + m + 1
    std::vector<double> t; // (m rows) x width
    std::vector<double> obj; // reduced-cost row, width entries
    std::vector<int> basis; // basis[row] = column index

    double &at(int r, int c) { return t[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return t[static_cast<std::size_t>(r) * width + c]; }

    void pivot(int row, int col, double tol) {
        const double piv = at(row, col);
        for (int c = 0; c < width; ++c) at(row, c) /= piv;
        at(row, col) = 1.0;
        for (int r = 0; r < m; ++r) {
            if (r == row) continue;
            const double factor = at(r, col);
            if (std::abs(factor) <= tol) {
                at(r, col) = 0.0;
                continue;
            }
            for (int c = 0; c < width; ++c) at(r, c) -= factor * at(row, c);
            at(r, col) = 0.0;
        }
        const double ofactor = obj[col];
        if (std::abs(ofactor) > 0.0) {
            for (int c = 0; c < width; ++c) obj[c] -= ofactor * at(row, c);
            obj[col] = 0.0;
        }
        basis[row] = col;
    }

    enum class Step { optimal, pivoted, unbounded };

    // Entering rule: lowest-index eligible column (Bland). Leaving rule:
    // lexicographic ratio test over [rhs, reference block]. The reference
    // block (columns n..n+m-1) starts as the identity, so scaled rows never
    // tie completely and degenerate vertices cannot cycle; comparisons are
    // exact on purpose. allow(col) filters candidate entering columns.
    template <typename Allow>
    Step step(double tol, Allow &&allow) {
        int enter = -1;
        for (int c = 0; c < n + m; ++c) {
            if (!allow(c)) continue;
            if (obj[c] < -tol) {
                enter = c;
                break;
            }
        }
        if (enter < 0) return Step::optimal;

        int leave = -1;
        for (int r = 0; r < m; ++r) {
            const double a = at(r, enter);
            if (a <= tol) continue;
            if (leave < 0) {
                leave = r;
                continue;
            }
            const double al = at(leave, enter);
            int verdict = 0; // > 0 replaces the leader with row r
            const double r0 = at(r, width - 1) / a;
            const double l0 = at(leave, width - 1) / al;
            if (r0 != l0) {
                verdict = r0 < l0 ? 1 : -1;
            } else {
                for (int c = n; c < n + m; ++c) {
                    const double rv = at(r, c) / a;
                    const double lv = at(leave, c) / al;
                    if (rv != lv) {
                        verdict = rv < lv ? 1 : -1;
                        break;
                    }
                }
            }
            if (verdict > 0 || (verdict == 0 && basis[r] < basis[leave])) leave = r;
        }
        if (leave < 0) return Step::unbounded;
        pivot(leave, enter, tol);
        return Step::pivoted;
    }
};

} // namespace

LpResult solve_lp(const std::vector<double> &A, int rows, int cols,
                  const std::vector<double> &b, const std::vector<double> &c,
                  double tol) {
    if (static_cast<int>(A.size()) != rows * cols || static_cast<int>(b.size()) != rows ||
        static_cast<int>(c.size()) != cols)
        throw std::invalid_argument("lp: inconsistent dimensions");

    Tableau tab;
    tab.m = rows;
    tab.n = cols;
    tab.width = cols + rows + 1;
    tab.t.assign(static_cast<std::size_t>(rows) * tab.width, 0.0);
    tab.obj.assign(tab.width, 0.0);
    tab.basis.resize(rows);

    for (int r = 0; r < rows; ++r) {
        const double sign = (b[r] < 0.0) ? -1.0 : 1.0; // keep rhs nonnegative
        for (int cidx = 0; cidx < cols; ++cidx)
            tab.at(r, cidx) = sign * A[static_cast<std::size_t>(r) * cols + cidx];
        tab.at(r, cols + r) = 1.0;
        tab.at(r, tab.width - 1) = sign * b[r];
        tab.basis[r] = cols + r;
    }

    // Phase 1: minimize the artificial sum. Reduced costs start as the negated
    // column sums (artificial basis has unit costs).
    for (int cidx = 0; cidx < tab.width; ++cidx) {
        double s = 0.0;
        for (int r = 0; r < rows; ++r) s += tab.at(r, cidx);
        tab.obj[cidx] = (cidx >= cols && cidx < cols + rows) ? 0.0 : -s;
    }

    const long max_iters = 20000L + 200L * (rows + cols);
    long iters = 0;
    auto run = [&](auto &&allow) {
        Tableau::Step s;
        while ((s = tab.step(tol, allow)) == Tableau::Step::pivoted) {
            if (++iters > max_iters) throw std::runtime_error("lp: iteration cap exceeded");
        }
        return s;
    };

    run([](int) { return true; }); // phase 1 is always bounded below by 0

    double phase1 = -tab.obj[tab.width - 1];
    LpResult result;
    result.duals.assign(rows, 0.0);
    if (phase1 > 1e3 * tol * (1.0 + std::abs(phase1))) {
        // Infeasible. Phase-1 duals: y_i = 1 - reduced_cost(artificial i),
        // mapped back through the row sign flips.
        result.status = LpStatus::infeasible;
        for (int r = 0; r < rows; ++r) {
            const double y = 1.0 - tab.obj[cols + r];
            result.duals[r] = (b[r] < 0.0 ? -y : y);
        }
        result.objective = phase1;
        return result;
    }

    // Drive leftover artificials out of the basis; a row where no structural
    // column can pivot is redundant and its artificial stays basic at zero.
    for (int r = 0; r < rows; ++r) {
        if (tab.basis[r] < cols) continue;
        for (int cidx = 0; cidx < cols; ++cidx) {
            if (std::abs(tab.at(r, cidx)) > 1e3 * tol) {
                tab.pivot(r, cidx, tol);
                break;
            }
        }
    }

    // Phase 2 objective: rebuild reduced costs for the true costs.
    for (int cidx = 0; cidx < tab.width; ++cidx) tab.obj[cidx] = (cidx < cols) ? c[cidx] : 0.0;
    for (int r = 0; r < rows; ++r) {
        const int bi = tab.basis[r];
        if (bi >= cols) continue;
        const double cb = c[bi];
        if (cb == 0.0) continue;
        for (int cidx = 0; cidx < tab.width; ++cidx) tab.obj[cidx] -= cb * tab.at(r, cidx);
    }

    if (run([&](int cidx) { return cidx < cols; }) == Tableau::Step::unbounded) {
        result.status = LpStatus::unbounded;
        return result;
    }

    result.status = LpStatus::optimal;
    result.x.assign(cols, 0.0);
    for (int r = 0; r < rows; ++r)
        if (tab.basis[r] < cols) result.x[tab.basis[r]] = tab.at(r, tab.width - 1);
    result.objective = 0.0;
    for (int cidx = 0; cidx < cols; ++cidx) result.objective += c[cidx] * result.x[cidx];
    for (int r = 0; r < rows; ++r) {
        const double y = -tab.obj[cols + r];
        result.duals[r] = (b[r] < 0.0 ? -y : y);
    }
    return result;
}

} // namespace macalloc::lp
