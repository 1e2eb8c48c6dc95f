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

#include "macalloc/capacity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace macalloc::baselines {

namespace {

/// Single-user rate on one tone at power p: log2 det((Z + p g g^H) Z^-1),
/// which collapses to log2(1 + p |g|^2 / sigma^2) for one receive antenna.
double single_tone_rate(const ChannelSet &ch, int user, int tone, double p) {
    if (p <= 0.0) return 0.0;
    if (ch.rx() == 1) return std::log2(1.0 + p * ch.gain_sq(user, tone) / ch.sigma2());
    const auto g = ch.gain(user, tone);
    const Eigen::VectorXcd gv = g;
    const Eigen::LLT<Eigen::MatrixXcd> llt(ch.noise_cov());
    return std::log2(1.0 + p * gv.dot(llt.solve(gv)).real());
}

void check_targets(const ChannelSet &ch, const RateVector &targets) {
    if (static_cast<int>(targets.size()) != ch.users())
        throw std::invalid_argument("baselines: target vector size mismatch");
    for (double r : targets)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("baselines: targets must be finite and non-negative");
}

} // namespace

BruteForceResult brute_force_min_energy(const ChannelSet &channels, const RateVector &targets,
                                        const GridSpec &grid, const std::vector<double> &weights) {
    check_targets(channels, targets);
    if (grid.levels < 2) throw std::invalid_argument("brute_force_min_energy: need >= 2 grid levels");
    if (!(grid.p_max > 0.0)) throw std::invalid_argument("brute_force_min_energy: p_max must be positive");
    const int n = channels.users();
    const int s = channels.tones();
    const int dims = n * s;
    if (dims > 6)
        throw std::invalid_argument(
            "brute_force_min_energy: refusing a grid with more than 6 power dimensions");
    std::vector<double> alpha = weights.empty() ? std::vector<double>(n, 1.0) : weights;
    if (static_cast<int>(alpha.size()) != n)
        throw std::invalid_argument("brute_force_min_energy: weight vector size mismatch");

    std::vector<double> level(grid.levels);
    for (int l = 0; l < grid.levels; ++l)
        level[l] = grid.p_max * static_cast<double>(l) / (grid.levels - 1);

    const std::vector<DecodeOrder> orders = capacity::enumerate_orders(n);

    BruteForceResult best;
    best.alloc = PowerAllocation(n, s);
    best.alloc.weights = alpha;
    double best_obj = std::numeric_limits<double>::infinity();

    std::vector<int> idx(dims, 0);
    PowerAllocation point(n, s);
    point.weights = alpha;
    std::uint64_t evaluated = 0;
    while (true) {
        ++evaluated;
        double obj = 0.0;
        for (int d = 0; d < dims; ++d) obj += alpha[d / s] * level[idx[d]];
        if (obj < best_obj) {
            for (int d = 0; d < dims; ++d) point.p[d] = level[idx[d]];
            for (const auto &o : orders) {
                const RateVector r = capacity::sic_rates(channels, point, o);
                bool ok = true;
                for (int i = 0; i < n; ++i)
                    if (r[i] < targets[i] - 1e-12) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    best_obj = obj;
                    best.feasible = true;
                    best.alloc.p = point.p;
                    best.order = o;
                    break;
                }
            }
        }
        int d = dims - 1;
        while (d >= 0 && idx[d] == grid.levels - 1) idx[d--] = 0;
        if (d < 0) break;
        ++idx[d];
    }
    best.evaluated = evaluated;
    best.objective = best.feasible ? best_obj : 0.0;
    return best;
}

OmaResult oma_allocate(const ChannelSet &channels, const RateVector &targets, double power_cap) {
    check_targets(channels, targets);
    if (!(power_cap > 0.0)) throw std::invalid_argument("oma_allocate: power cap must be positive");
    const int n = channels.users();
    const int s = channels.tones();

    OmaResult out;
    out.alloc = PowerAllocation(n, s);
    out.rates.assign(n, 0.0);
    const bool shared = s < n;
    out.time_fraction = shared ? 1.0 / n : 1.0;
    out.assignment.assign(s, -1);
    if (!shared)
        for (int j = 0; j < s; ++j) out.assignment[j] = j % n;

    for (int i = 0; i < n; ++i) {
        std::vector<int> own;
        for (int j = 0; j < s; ++j)
            if ((shared || out.assignment[j] == i) && channels.gain_sq(i, j) > 0.0)
                own.push_back(j);
        if (targets[i] <= 0.0) continue;
        if (own.empty()) {
            std::ostringstream msg;
            msg << "oma_allocate: user " << i + 1 << " has no usable tone for its rate target";
            throw infeasible_error(msg.str());
        }
        auto rate_at = [&](double p) {
            double r = 0.0;
            for (int j : own) r += single_tone_rate(channels, i, j, p);
            return out.time_fraction * r;
        };
        if (rate_at(power_cap) < targets[i]) {
            std::ostringstream msg;
            msg << "oma_allocate: target of user " << i + 1 << " unreachable under the power cap";
            throw infeasible_error(msg.str());
        }
        double lo = 0.0, hi = std::isfinite(power_cap) ? power_cap : 1.0;
        if (!std::isfinite(power_cap))
            while (rate_at(hi) < targets[i]) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (rate_at(mid) >= targets[i] ? hi : lo) = mid;
        }
        for (int j : own) out.alloc.at(i, j) = out.time_fraction * hi; // average power per tone use
        out.rates[i] = rate_at(hi);
    }
    return out;
}

OmaResult oma_max_rate(const ChannelSet &channels, double total_energy) {
    if (!(total_energy >= 0.0) || !std::isfinite(total_energy))
        throw std::invalid_argument("oma_max_rate: energy budget must be finite and non-negative");
    const int n = channels.users();
    const int s = channels.tones();

    OmaResult out;
    out.alloc = PowerAllocation(n, s);
    out.rates.assign(n, 0.0);
    const bool shared = s < n;
    out.time_fraction = shared ? 1.0 / n : 1.0;
    out.assignment.assign(s, -1);
    if (!shared)
        for (int j = 0; j < s; ++j) out.assignment[j] = j % n;
    if (total_energy == 0.0) return out;

    const double budget = total_energy / n;
    for (int i = 0; i < n; ++i) {
        std::vector<int> own;
        for (int j = 0; j < s; ++j)
            if ((shared || out.assignment[j] == i) && channels.gain_sq(i, j) > 0.0)
                own.push_back(j);
        if (own.empty()) continue;
        // Water-filling over the user's tones: p_j = max(0, mu - n_j) with
        // n_j the per-tone inverse normalized gain; mu found by bisection on
        // the energy balance. Average energy spent is time_fraction * p.
        std::vector<double> floor_j;
        floor_j.reserve(own.size());
        for (int j : own) {
            double gain = channels.gain_sq(i, j) / channels.sigma2();
            if (channels.rx() > 1) {
                const Eigen::VectorXcd gv = channels.gain(i, j);
                const Eigen::LLT<Eigen::MatrixXcd> llt(channels.noise_cov());
                gain = gv.dot(llt.solve(gv)).real();
            }
            floor_j.push_back(1.0 / gain);
        }
        const double spend = budget / out.time_fraction; // instantaneous power while active
        auto used = [&](double mu) {
            double u = 0.0;
            for (double f : floor_j) u += std::max(0.0, mu - f);
            return u;
        };
        double lo = *std::min_element(floor_j.begin(), floor_j.end());
        double hi = lo + spend + 1.0;
        while (used(hi) < spend) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (used(mid) >= spend ? hi : lo) = mid;
        }
        std::vector<double> p(own.size());
        double total = 0.0;
        for (std::size_t k = 0; k < own.size(); ++k) {
            p[k] = std::max(0.0, hi - floor_j[k]);
            total += p[k];
        }
        const double renorm = total > 0.0 ? spend / total : 0.0;
        for (std::size_t k = 0; k < own.size(); ++k) {
            p[k] *= renorm;
            out.alloc.at(i, own[k]) = out.time_fraction * p[k];
            out.rates[i] += out.time_fraction * std::log2(1.0 + p[k] / floor_j[k]);
        }
    }
    return out;
}

NomaHeuristicResult noma_heuristic_allocate(const ChannelSet &channels, const RateVector &targets) {
    check_targets(channels, targets);
    const int n = channels.users();
    const int s = channels.tones();

    NomaHeuristicResult out;
    out.alloc = PowerAllocation(n, s);
    out.orders = capacity::heuristic_orders(channels);
    out.rates.assign(n, 0.0);

    // Per-user per-tone rate shares over tones with a live channel.
    std::vector<std::vector<double>> share(n, std::vector<double>(s, 0.0));
    for (int i = 0; i < n; ++i) {
        if (targets[i] <= 0.0) continue;
        int live = 0;
        for (int j = 0; j < s; ++j)
            if (channels.gain_sq(i, j) > 0.0) ++live;
        if (live == 0) {
            std::ostringstream msg;
            msg << "noma_heuristic_allocate: user " << i + 1
                << " has a zero channel on every tone but a positive rate target";
            throw infeasible_error(msg.str());
        }
        for (int j = 0; j < s; ++j)
            if (channels.gain_sq(i, j) > 0.0) share[i][j] = targets[i] / live;
    }

    for (int j = 0; j < s; ++j) {
        const DecodeOrder &order = out.orders[j];
        if (channels.rx() == 1) {
            double interference = channels.sigma2();
            for (int k = n - 1; k >= 0; --k) {
                const int u = order[k];
                const double need = share[u][j];
                if (need <= 0.0) continue;
                const double snr = std::exp2(need) - 1.0;
                const double p = snr * interference / channels.gain_sq(u, j);
                out.alloc.at(u, j) = p;
                interference += p * channels.gain_sq(u, j);
            }
        } else {
            Eigen::MatrixXcd cov = channels.noise_cov();
            for (int k = n - 1; k >= 0; --k) {
                const int u = order[k];
                const double need = share[u][j];
                if (need <= 0.0) continue;
                const auto g = channels.gain(u, j);
                const Eigen::VectorXcd gv = g;
                const double gsq = gv.squaredNorm();
                const double denom = gv.dot(cov * gv).real();
                const double snr = std::exp2(need) - 1.0;
                const double p = snr * denom / (gsq * gsq);
                out.alloc.at(u, j) = p;
                cov.noalias() += p * (gv * gv.adjoint());
            }
        }
    }
    out.rates = capacity::heuristic_sinr_rates(channels, out.alloc);
    return out;
}

NomaHeuristicResult noma_heuristic_max_rate(const ChannelSet &channels, double total_energy) {
    if (!(total_energy >= 0.0) || !std::isfinite(total_energy))
        throw std::invalid_argument("noma_heuristic_max_rate: energy budget must be finite and non-negative");
    const int n = channels.users();
    const int s = channels.tones();
    NomaHeuristicResult out;
    out.alloc = PowerAllocation(n, s);
    out.orders = capacity::heuristic_orders(channels);
    const double per_entry = total_energy / (static_cast<double>(n) * s);
    for (double &v : out.alloc.p) v = per_entry;
    out.rates = capacity::heuristic_sinr_rates(channels, out.alloc);
    return out;
}

} // namespace macalloc::baselines
