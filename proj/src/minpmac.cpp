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

#include "macalloc/minpmac.hpp"

#include "macalloc/capacity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace macalloc::minpmac {

namespace {

constexpr double kLog2e = 1.4426950408889634074; // 1 / ln 2
constexpr double kInf = std::numeric_limits<double>::infinity();

double log2det_hpd(const Eigen::MatrixXcd &a) {
    Eigen::LLT<Eigen::MatrixXcd> llt(a);
    if (llt.info() != Eigen::Success)
        throw solver_error("minpmac: covariance lost positive definiteness", 0.0);
    double ld = 0.0;
    const auto &l = llt.matrixLLT();
    for (int k = 0; k < a.rows(); ++k) ld += std::log2(l(k, k).real());
    return 2.0 * ld;
}

/// One tone's inner maximization, phrased in normalized powers q_k =
/// p_k * ||g_k||^2 so the curvature is set by the noise floor rather than by
/// the channel-gain spread.
struct ToneProblem {
    const ChannelSet *ch = nullptr;
    int tone = 0;
    std::vector<int> seq;          // active users, duals descending
    std::vector<double> dtheta;    // dtheta[k] = theta(seq[k]) - theta(seq[k+1]); last gets theta itself
    std::vector<double> gsq;       // ||g||^2 per seq entry, all > 0
    std::vector<double> alpha_q;   // alpha / ||g||^2 per seq entry
    std::vector<double> cap_q;     // power cap * ||g||^2 per seq entry
    double sigma2_eff = 1.0;       // scalar path noise floor

    int size() const { return static_cast<int>(seq.size()); }
    bool scalar() const { return ch->rx() == 1; }

    /// Objective value and per-position vertex rates at normalized powers q.
    double eval(const std::vector<double> &q, std::vector<double> *rates) const {
        const int m = size();
        if (rates) rates->assign(m, 0.0);
        double value = 0.0;
        if (scalar()) {
            double t = sigma2_eff;
            double prev = 0.0;
            for (int k = 0; k < m; ++k) {
                t += q[k];
                const double c = std::log2(t) - std::log2(sigma2_eff);
                if (rates) (*rates)[k] = c - prev;
                value += dtheta[k] * c;
                prev = c;
            }
        } else {
            Eigen::MatrixXcd a = ch->noise_cov();
            const double ld0 = ch->log2det_noise();
            double prev = 0.0;
            for (int k = 0; k < m; ++k) {
                const auto g = ch->gain(seq[k], tone);
                a.noalias() += (q[k] / gsq[k]) * (g * g.adjoint());
                const double c = log2det_hpd(a) - ld0;
                if (rates) (*rates)[k] = c - prev;
                value += dtheta[k] * c;
                prev = c;
            }
        }
        for (int k = 0; k < m; ++k) value -= alpha_q[k] * q[k];
        return value;
    }

    /// Gradient of eval with respect to q.
    void grad(const std::vector<double> &q, std::vector<double> &out) const {
        const int m = size();
        out.assign(m, 0.0);
        if (scalar()) {
            std::vector<double> t(m);
            double acc = sigma2_eff;
            for (int k = 0; k < m; ++k) {
                acc += q[k];
                t[k] = acc;
            }
            double suffix = 0.0;
            for (int k = m - 1; k >= 0; --k) {
                suffix += dtheta[k] / t[k];
                out[k] = kLog2e * suffix - alpha_q[k];
            }
        } else {
            std::vector<Eigen::LLT<Eigen::MatrixXcd>> llts;
            llts.reserve(m);
            Eigen::MatrixXcd a = ch->noise_cov();
            for (int k = 0; k < m; ++k) {
                const auto g = ch->gain(seq[k], tone);
                a.noalias() += (q[k] / gsq[k]) * (g * g.adjoint());
                llts.emplace_back(a);
                if (llts.back().info() != Eigen::Success)
                    throw solver_error("minpmac: covariance lost positive definiteness", 0.0);
            }
            for (int k = 0; k < m; ++k) {
                const auto g = ch->gain(seq[k], tone);
                const Eigen::VectorXcd ghat = g / std::sqrt(gsq[k]);
                double s = 0.0;
                for (int mm = k; mm < m; ++mm) {
                    if (dtheta[mm] == 0.0) continue;
                    s += dtheta[mm] * ghat.dot(llts[mm].solve(ghat)).real();
                }
                out[k] = kLog2e * s - alpha_q[k];
            }
        }
    }
};

double kkt_residual(const std::vector<double> &q, const std::vector<double> &g,
                    const std::vector<double> &cap) {
    double r = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        double rk;
        if (q[k] <= 0.0)
            rk = std::max(0.0, g[k]);
        else if (q[k] >= cap[k])
            rk = std::max(0.0, -g[k]);
        else
            rk = std::abs(g[k]);
        r = std::max(r, rk);
    }
    return r;
}

struct ToneSolve {
    std::vector<double> q;     // normalized powers per seq position
    std::vector<double> rates; // vertex rates per seq position
    double value = 0.0;
    int iterations = 0;
};

/// Exact scalar-channel solution. In prefix coordinates T_k = sigma2 +
/// sum_{j<=k} q_j the objective separates per coordinate,
///   sum_k dtheta_k log2(T_k) - b_k T_k   with b_k = a_k - a_{k+1},
/// subject only to the chain sigma2 <= T_1 <= ... <= T_m, so
/// pool-adjacent-violators gives the argmax in closed form. This also covers
/// (nearly) tied duals, where the q-space problem is flat along the split
/// direction and gradient ascent cannot settle.
ToneSolve pav_tone(const ToneProblem &tp) {
    const int m = tp.size();
    struct Block {
        int lo, hi;
        double d, c, t; // sum of dtheta, sum of b, unconstrained argmax
    };
    auto argmax = [](double d, double c) {
        if (c <= 0.0) return d > 0.0 || c < 0.0 ? kInf : 0.0;
        return d / (c * M_LN2);
    };
    std::vector<Block> stack;
    stack.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double b = k + 1 < m ? tp.alpha_q[k] - tp.alpha_q[k + 1] : tp.alpha_q[k];
        stack.push_back({k, k, tp.dtheta[k], b, argmax(tp.dtheta[k], b)});
        while (stack.size() > 1 && stack[stack.size() - 2].t > stack.back().t) {
            Block top = stack.back();
            stack.pop_back();
            Block &prev = stack.back();
            prev.hi = top.hi;
            prev.d += top.d;
            prev.c += top.c;
            prev.t = argmax(prev.d, prev.c);
        }
    }

    ToneSolve out;
    out.q.assign(m, 0.0);
    double t_prev = tp.sigma2_eff;
    for (const Block &blk : stack) {
        const double t = std::max(blk.t, t_prev);
        out.q[blk.lo] = t - t_prev;
        t_prev = t;
    }
    out.value = tp.eval(out.q, &out.rates);
    return out;
}

/// Projected gradient ascent with backtracking on the concave tone objective.
ToneSolve solve_tone(const ToneProblem &tp, std::vector<double> q, const SolveOptions &opts,
                     double theta_scale) {
    const int m = tp.size();
    ToneSolve out;
    if (m == 0) return out;
    if (tp.scalar() &&
        std::all_of(tp.cap_q.begin(), tp.cap_q.end(), [](double c) { return c == kInf; }))
        return pav_tone(tp);
    for (int k = 0; k < m; ++k) q[k] = std::clamp(q[k], 0.0, tp.cap_q[k]);

    const double tol = opts.inner_tol * std::max(1.0, theta_scale);
    std::vector<double> g(m), cand(m), gc(m), rates;
    double f = tp.eval(q, nullptr);
    tp.grad(q, g);
    double step = 1.0;
    int it = 0;
    for (; it < opts.max_inner; ++it) {
        if (kkt_residual(q, g, tp.cap_q) <= tol) break;
        bool accepted = false;
        for (int bt = 0; bt < 70; ++bt) {
            double lin = 0.0;
            bool moved = false;
            for (int k = 0; k < m; ++k) {
                cand[k] = std::clamp(q[k] + step * g[k], 0.0, tp.cap_q[k]);
                lin += g[k] * (cand[k] - q[k]);
                moved = moved || cand[k] != q[k];
            }
            if (!moved) break;
            const double fc = tp.eval(cand, nullptr);
            if (fc >= f + 1e-4 * lin) {
                q.swap(cand);
                f = fc;
                tp.grad(q, g);
                step = std::min(step * 1.3, 1e15);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // stalled at machine precision
    }
    const double residual = kkt_residual(q, g, tp.cap_q);
    if (residual > std::max(tol, 1e-7 * std::max(1.0, theta_scale))) {
        std::ostringstream msg;
        msg << "inner tone solve did not reach stationarity on tone " << tp.tone
            << " (KKT residual " << residual << " after " << it << " iterations)";
        throw solver_error(msg.str(), residual);
    }
    out.q = std::move(q);
    out.value = tp.eval(out.q, &rates);
    out.rates = std::move(rates);
    out.iterations = it;
    return out;
}

/// Build the sorted-tone view for one tone given duals and weights.
ToneProblem make_tone_problem(const ChannelSet &ch, const Duals &theta,
                              const std::vector<double> &alpha, int tone,
                              const SolveOptions &opts) {
    ToneProblem tp;
    tp.ch = &ch;
    tp.tone = tone;
    tp.sigma2_eff =
        ch.white_noise() ? ch.sigma2() : std::exp2(ch.log2det_noise() / ch.rx());
    std::vector<int> idx;
    for (int i = 0; i < ch.users(); ++i)
        if (theta[i] > 0.0 && ch.gain_sq(i, tone) > 0.0) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (theta[a] != theta[b]) return theta[a] > theta[b];
        return a < b;
    });
    const int m = static_cast<int>(idx.size());
    tp.seq = std::move(idx);
    tp.dtheta.resize(m);
    tp.gsq.resize(m);
    tp.alpha_q.resize(m);
    tp.cap_q.resize(m);
    for (int k = 0; k < m; ++k) {
        const int u = tp.seq[k];
        tp.dtheta[k] = k + 1 < m ? theta[u] - theta[tp.seq[k + 1]] : theta[u];
        tp.gsq[k] = tp.ch->gain_sq(u, tone);
        tp.alpha_q[k] = alpha[u] / tp.gsq[k];
        tp.cap_q[k] = std::isfinite(opts.power_cap) ? opts.power_cap * tp.gsq[k] : kInf;
    }
    return tp;
}

void validate_common(const ChannelSet &ch, const Duals &theta, const std::vector<double> &alpha) {
    if (static_cast<int>(theta.size()) != ch.users())
        throw std::invalid_argument("minpmac: dual vector size mismatch");
    if (static_cast<int>(alpha.size()) != ch.users())
        throw std::invalid_argument("minpmac: weight vector size mismatch");
    for (double t : theta)
        if (!(t >= 0.0)) throw std::invalid_argument("minpmac: duals must be non-negative");
    for (double a : alpha)
        if (!(a > 0.0)) throw std::invalid_argument("minpmac: weights must be positive");
}

/// Everything needed to turn dual iterates into a feasible primal point.
struct Restored {
    PowerAllocation alloc;
    std::vector<DecodeOrder> orders;
    std::vector<double> weights;
    RateVector achieved;
    double objective = 0.0;
    Duals theta;
    timeshare::Clusters clusters;
};

timeshare::Clusters clusters_guarded(const Duals &theta, double cluster_tol) {
    double tol = cluster_tol;
    for (int attempt = 0; attempt < 14; ++attempt) {
        timeshare::Clusters c = decode_order_from_duals(theta, tol);
        std::uint64_t count = 1;
        bool fits = true;
        for (const auto &cl : c) {
            for (std::size_t k = 2; k <= cl.size(); ++k) count *= k;
            if (count > 720) {
                fits = false;
                break;
            }
        }
        if (fits) return c;
        tol *= 0.1;
    }
    // all-singleton fallback: strictly sorted, one order
    timeshare::Clusters singles;
    std::vector<int> idx(theta.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (theta[a] != theta[b]) return theta[a] < theta[b];
        return a < b;
    });
    for (int u : idx) singles.push_back({u});
    return singles;
}

PowerAllocation to_alloc(const ChannelSet &ch, const std::vector<double> &flat,
                         const std::vector<double> &alpha) {
    PowerAllocation a(ch.users(), ch.tones());
    a.p = flat;
    a.weights = alpha;
    return a;
}

/// Try to meet the targets by time-sharing candidate orders at `alloc`
/// scaled by s. Returns the mixture on success.
std::optional<Restored> mixture_at_scale(const ChannelSet &ch, const RateVector &targets,
                                         const std::vector<DecodeOrder> &orders,
                                         const PowerAllocation &base, double s, double power_cap,
                                         const Duals &theta, const timeshare::Clusters &clusters) {
    PowerAllocation scaled = base;
    if (s != 1.0)
        for (double &v : scaled.p) v *= s;
    if (std::isfinite(power_cap))
        for (double &v : scaled.p) v = std::min(v, power_cap);
    timeshare::TimeShareProblem prob;
    prob.orders = orders;
    prob.targets = targets;
    prob.vertex_rates.reserve(orders.size());
    for (const auto &o : orders) prob.vertex_rates.push_back(capacity::sic_rates(ch, scaled, o));
    try {
        timeshare::TimeShareSolution ts = timeshare::solve_timeshare(prob, 1e-9);
        Restored r;
        r.alloc = std::move(scaled);
        for (std::size_t j = 0; j < orders.size(); ++j) {
            if (!ts.active[j]) continue;
            r.orders.push_back(orders[j]);
            r.weights.push_back(ts.weights[j]);
        }
        r.achieved = ts.achieved;
        r.objective = r.alloc.weighted_energy();
        r.theta = theta;
        r.clusters = clusters;
        return r;
    } catch (const timeshare::timeshare_infeasible &) {
        return std::nullopt;
    }
}

/// Primal recovery: cluster-respecting orders at the candidate powers, then
/// optional uniform scaling (down to trim surplus, up to repair deficits).
std::optional<Restored> try_restore(const ChannelSet &ch, const RateVector &targets,
                                    const std::vector<double> &alpha, const Duals &theta,
                                    const std::vector<double> &p_flat, const SolveOptions &opts,
                                    bool allow_rescale) {
    const int n = ch.users();
    timeshare::Clusters clusters = clusters_guarded(theta, opts.cluster_tol);
    std::vector<DecodeOrder> orders = timeshare::candidate_orders(clusters);
    PowerAllocation base = to_alloc(ch, p_flat, alpha);

    auto direct = mixture_at_scale(ch, targets, orders, base, 1.0, opts.power_cap, theta, clusters);
    if (direct && !allow_rescale) return direct;

    if (direct) {
        // Feasible as-is; trim any uniform surplus to tighten the objective.
        double lo = 0.0, hi = 1.0;
        std::optional<Restored> best = direct;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto probe = mixture_at_scale(ch, targets, orders, base, mid, opts.power_cap, theta, clusters);
            if (probe) {
                best = std::move(probe);
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return best;
    }

    if (!allow_rescale) return std::nullopt;

    // Cluster orders were not enough. Retry with every order when that is
    // affordable; the convex hull of all vertices spans the full region.
    if (n <= 6) {
        std::vector<DecodeOrder> all = capacity::enumerate_orders(n);
        if (all.size() > orders.size()) {
            orders = std::move(all);
            auto again = mixture_at_scale(ch, targets, orders, base, 1.0, opts.power_cap, theta, clusters);
            if (again) return again;
        }
    }

    // Uniform scale-up with floored powers: every subset capacity grows
    // without bound, so some finite scale reaches the targets.
    double energy = 0.0;
    for (double v : base.p) energy += v;
    const double floor_p = 1e-9 * (1.0 + energy);
    for (int i = 0; i < n; ++i) {
        if (targets[i] <= 0.0) continue;
        for (int j = 0; j < ch.tones(); ++j)
            if (ch.gain_sq(i, j) > 0.0) base.at(i, j) = std::max(base.at(i, j), floor_p);
    }

    double hi = 2.0;
    std::optional<Restored> found;
    for (int d = 0; d < 60 && !found; ++d, hi *= 2.0)
        found = mixture_at_scale(ch, targets, orders, base, hi, opts.power_cap, theta, clusters);
    if (!found) return std::nullopt;
    double lo = 1.0;
    double s_hi = hi / 2.0;
    for (int it = 0; it < 55; ++it) {
        const double mid = 0.5 * (lo + s_hi);
        auto probe = mixture_at_scale(ch, targets, orders, base, mid, opts.power_cap, theta, clusters);
        if (probe) {
            found = std::move(probe);
            s_hi = mid;
        } else {
            lo = mid;
        }
    }
    return found;
}

} // namespace

timeshare::Clusters decode_order_from_duals(const Duals &duals, double cluster_tol) {
    if (duals.empty()) throw std::invalid_argument("decode_order_from_duals: empty duals");
    if (!(cluster_tol >= 0.0))
        throw std::invalid_argument("decode_order_from_duals: cluster_tol must be non-negative");
    for (double t : duals)
        if (!(t >= 0.0))
            throw std::invalid_argument("decode_order_from_duals: duals must be non-negative");
    std::vector<int> idx(duals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (duals[a] != duals[b]) return duals[a] < duals[b];
        return a < b;
    });
    const double span = cluster_tol * std::max(1.0, *std::max_element(duals.begin(), duals.end()));
    timeshare::Clusters clusters;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k == 0 || duals[idx[k]] - duals[idx[k - 1]] > span)
            clusters.emplace_back();
        clusters.back().push_back(idx[k]);
    }
    return clusters;
}

InnerToneResult inner_weighted_tradeoff(const ChannelSet &channels, const Duals &duals,
                                        const std::vector<double> &alpha, int tone,
                                        const SolveOptions &opts) {
    validate_common(channels, duals, alpha);
    if (tone < 0 || tone >= channels.tones())
        throw std::invalid_argument("inner_weighted_tradeoff: tone out of range");

    ToneProblem tp = make_tone_problem(channels, duals, alpha, tone, opts);
    const double theta_scale =
        duals.empty() ? 0.0 : *std::max_element(duals.begin(), duals.end());

    // Closed-form single-user seed per coordinate.
    std::vector<double> q0(tp.size(), 0.0);
    for (int k = 0; k < tp.size(); ++k) {
        const double th = duals[tp.seq[k]];
        q0[k] = std::clamp(th / (tp.alpha_q[k] * M_LN2) - tp.sigma2_eff, 0.0, tp.cap_q[k]);
    }
    ToneSolve ts = solve_tone(tp, std::move(q0), opts, theta_scale);

    InnerToneResult out;
    out.powers.assign(channels.users(), 0.0);
    out.rates.assign(channels.users(), 0.0);
    out.objective = ts.value;
    out.iterations = ts.iterations;
    for (int k = 0; k < tp.size(); ++k) {
        out.powers[tp.seq[k]] = ts.q[k] / tp.gsq[k];
        out.rates[tp.seq[k]] = ts.rates[k];
    }
    return out;
}

MinPmacSolution solve_min_energy(const ChannelSet &channels, const RateVector &targets,
                                 const std::vector<double> &alpha, const SolveOptions &opts) {
    const int n = channels.users();
    const int s = channels.tones();
    if (static_cast<int>(targets.size()) != n)
        throw std::invalid_argument("solve_min_energy: target vector size mismatch");
    for (double r : targets)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("solve_min_energy: targets must be finite and non-negative");
    Duals zero(n, 0.0);
    validate_common(channels, zero, alpha);
    if (!(opts.rel_gap > 0.0) || !(opts.rate_tol > 0.0))
        throw std::invalid_argument("solve_min_energy: tolerances must be positive");

    MinPmacSolution sol;
    sol.alloc = PowerAllocation(n, s);
    sol.alloc.weights = alpha;
    sol.duals.assign(n, 0.0);

    const bool all_zero = std::all_of(targets.begin(), targets.end(), [](double r) { return r == 0.0; });
    if (all_zero) {
        sol.clusters = decode_order_from_duals(sol.duals, opts.cluster_tol);
        DecodeOrder identity(n);
        std::iota(identity.begin(), identity.end(), 0);
        sol.orders = {identity};
        sol.order_weights = {1.0};
        sol.achieved.assign(n, 0.0);
        return sol;
    }

    for (int i = 0; i < n; ++i) {
        if (targets[i] <= 0.0) continue;
        double total = 0.0;
        for (int j = 0; j < s; ++j) total += channels.gain_sq(i, j);
        if (total == 0.0) {
            std::ostringstream msg;
            msg << "solve_min_energy: user " << i + 1
                << " has a zero channel on every tone but a positive rate target";
            throw infeasible_error(msg.str());
        }
    }
    if (std::isfinite(opts.power_cap)) {
        // The region is largest with every power at the cap; if the targets
        // sit outside that polymatroid no allocation can reach them.
        PowerAllocation full(n, s);
        for (double &v : full.p) v = opts.power_cap;
        capacity::PolymatroidCheck pc = capacity::check_polymatroid(channels, full, targets, 1e-12);
        if (!pc.ok) {
            std::ostringstream msg;
            msg << "solve_min_energy: targets exceed the capacity region at the power cap "
                << "(worst subset short by " << pc.worst_violation << " bits)";
            throw infeasible_error(msg.str());
        }
    }

    const double sigma2_eff =
        channels.white_noise() ? channels.sigma2() : std::exp2(channels.log2det_noise() / channels.rx());

    Duals theta(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (targets[i] <= 0.0) continue;
        double gbest = 0.0;
        for (int j = 0; j < s; ++j) gbest = std::max(gbest, channels.gain_sq(i, j));
        theta[i] = std::clamp(alpha[i] / gbest * sigma2_eff * std::exp2(targets[i] / s) * M_LN2,
                              1e-9, 1e9);
    }

    // Ring buffers for iterate averaging.
    const int window = 100;
    std::vector<Duals> theta_hist;
    std::vector<std::vector<double>> p_hist;
    theta_hist.reserve(window);
    p_hist.reserve(window);
    int hist_next = 0;

    std::vector<double> p_cur(static_cast<std::size_t>(n) * s, 0.0);
    double lb = -kInf;
    double raw_best = -kInf;
    Duals theta_lb = theta;
    std::optional<Restored> best;
    double beta = 1.0;
    int since_improve = 0;
    int t = 0;
    const int restore_every = 10;
    std::vector<double> dir(n, 0.0);
    const double step_scale0 = std::max(1.0, *std::max_element(theta.begin(), theta.end()));

    auto consider = [&](std::optional<Restored> cand) {
        if (!cand) return;
        if (!best || cand->objective < best->objective) best = std::move(cand);
    };

    // Dual value at an arbitrary multiplier point; every theta >= 0 yields a
    // valid lower bound, so averaged iterates can tighten the gap even while
    // the raw iterates oscillate around a kink. Also reports the maximizing
    // powers and rates, which feed restoration and the Newton polish.
    auto dual_at = [&](const Duals &th, std::vector<double> *p_out, RateVector *rate_out) {
        if (p_out) p_out->assign(static_cast<std::size_t>(n) * s, 0.0);
        if (rate_out) rate_out->assign(n, 0.0);
        double inner = 0.0;
        const double theta_scale = *std::max_element(th.begin(), th.end());
        for (int j = 0; j < s; ++j) {
            ToneProblem tp = make_tone_problem(channels, th, alpha, j, opts);
            std::vector<double> q0(tp.size());
            for (int k = 0; k < tp.size(); ++k)
                q0[k] = std::clamp(th[tp.seq[k]] / (tp.alpha_q[k] * M_LN2) - tp.sigma2_eff, 0.0,
                                   tp.cap_q[k]);
            ToneSolve tsol = solve_tone(tp, std::move(q0), opts, theta_scale);
            inner += tsol.value;
            for (int k = 0; k < tp.size(); ++k) {
                if (p_out)
                    (*p_out)[static_cast<std::size_t>(tp.seq[k]) * s + j] = tsol.q[k] / tp.gsq[k];
                if (rate_out) (*rate_out)[tp.seq[k]] += tsol.rates[k];
            }
        }
        double d = -inner;
        for (int i = 0; i < n; ++i) d += th[i] * targets[i];
        return d;
    };

    // Damped Newton polish on the dual around a trial point. Where the
    // optimum has separated duals the map theta -> rate is smooth, so a few
    // steps on targets - rate(theta) collapse both bounds; at a tie the
    // finite-difference system is garbage and every step is rejected, which
    // costs nothing but the attempt.
    auto newton_polish = [&](Duals th) {
        for (int round = 0; round < 3; ++round) {
            std::vector<double> p_th;
            RateVector rate_th;
            const double d0 = dual_at(th, &p_th, &rate_th);
            if (d0 > lb) {
                lb = d0;
                theta_lb = th;
            }
            consider(try_restore(channels, targets, alpha, th, p_th, opts, true));
            double theta_max_cur = 1.0;
            for (double v : th) theta_max_cur = std::max(theta_max_cur, v);
            Eigen::VectorXd resid(n);
            for (int i = 0; i < n; ++i) resid(i) = targets[i] - rate_th[i];
            if (resid.lpNorm<Eigen::Infinity>() <= 1e-12 * theta_max_cur) break;
            const double h = 1e-6 * theta_max_cur;
            Eigen::MatrixXd jac(n, n);
            for (int i = 0; i < n; ++i) {
                Duals th_p = th;
                th_p[i] += h;
                RateVector rate_p;
                dual_at(th_p, nullptr, &rate_p);
                for (int k = 0; k < n; ++k) jac(k, i) = (rate_p[k] - rate_th[k]) / h;
            }
            jac = 0.5 * (jac + jac.transpose()).eval();
            const double ridge = 1e-10 * (1.0 + jac.trace() / n);
            Eigen::VectorXd delta =
                (jac + ridge * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(resid);
            if (!delta.allFinite()) break;
            const double cap = 0.5 * (1.0 + theta_max_cur);
            if (delta.norm() > cap) delta *= cap / delta.norm();
            bool accepted = false;
            for (int damp = 0; damp < 4 && !accepted; ++damp) {
                Duals th_new = th;
                for (int i = 0; i < n; ++i)
                    th_new[i] = std::max(0.0, th[i] + delta(i));
                const double d1 = dual_at(th_new, nullptr, nullptr);
                if (d1 > d0) {
                    th = std::move(th_new);
                    accepted = true;
                } else {
                    delta *= 0.5;
                }
            }
            if (!accepted) break;
        }
    };

    for (; t < opts.max_outer; ++t) {
        // Inner maximization tone by tone, warm-started from the last primal.
        double inner_value = 0.0;
        RateVector rate(n, 0.0);
        for (int j = 0; j < s; ++j) {
            ToneProblem tp = make_tone_problem(channels, theta, alpha, j, opts);
            std::vector<double> q0(tp.size());
            for (int k = 0; k < tp.size(); ++k) {
                const double warm = p_cur[static_cast<std::size_t>(tp.seq[k]) * s + j] * tp.gsq[k];
                q0[k] = warm > 0.0
                            ? warm
                            : std::clamp(theta[tp.seq[k]] / (tp.alpha_q[k] * M_LN2) - tp.sigma2_eff,
                                         0.0, tp.cap_q[k]);
            }
            const double theta_scale = *std::max_element(theta.begin(), theta.end());
            ToneSolve tsol = solve_tone(tp, std::move(q0), opts, theta_scale);
            inner_value += tsol.value;
            for (int k = 0; k < tp.size(); ++k) {
                p_cur[static_cast<std::size_t>(tp.seq[k]) * s + j] = tsol.q[k] / tp.gsq[k];
                rate[tp.seq[k]] += tsol.rates[k];
            }
            for (int i = 0; i < n; ++i)
                if (theta[i] == 0.0 || channels.gain_sq(i, j) == 0.0)
                    p_cur[static_cast<std::size_t>(i) * s + j] = 0.0;
        }

        double dual_value = -inner_value;
        for (int i = 0; i < n; ++i) dual_value += theta[i] * targets[i];
        if (dual_value > lb) {
            lb = dual_value;
            theta_lb = theta;
        }
        if (dual_value > raw_best) {
            raw_best = dual_value;
            since_improve = 0;
            beta = std::min(1.0, beta * 1.15);
        } else if (++since_improve > 30) {
            beta = std::max(0.05, beta * 0.5);
            since_improve = 0;
        }

        if (static_cast<int>(theta_hist.size()) < window) {
            theta_hist.push_back(theta);
            p_hist.push_back(p_cur);
        } else {
            theta_hist[hist_next] = theta;
            p_hist[hist_next] = p_cur;
            hist_next = (hist_next + 1) % window;
        }

        // Cheap feasibility: the current vertex already meets the targets.
        bool vertex_feasible = true;
        for (int i = 0; i < n; ++i)
            if (rate[i] < targets[i] - 1e-12) {
                vertex_feasible = false;
                break;
            }
        if (vertex_feasible)
            consider(try_restore(channels, targets, alpha, theta, p_cur, opts, false));

        if (t % restore_every == 0 || t + 1 == opts.max_outer) {
            Duals theta_avg(n, 0.0);
            std::vector<double> p_avg(p_cur.size(), 0.0);
            for (const auto &th : theta_hist)
                for (int i = 0; i < n; ++i) theta_avg[i] += th[i];
            for (const auto &pp : p_hist)
                for (std::size_t k = 0; k < pp.size(); ++k) p_avg[k] += pp[k];
            const double inv = 1.0 / static_cast<double>(theta_hist.size());
            for (double &v : theta_avg) v *= inv;
            for (double &v : p_avg) v *= inv;
            consider(try_restore(channels, targets, alpha, theta_avg, p_avg, opts, true));
            if (t > 0) consider(try_restore(channels, targets, alpha, theta, p_cur, opts, false));
            try {
                newton_polish(theta_avg);
            } catch (const solver_error &) {
                // A failed bonus evaluation just forfeits the tighter bound.
            }
        }

        const double ub = best ? best->objective : kInf;
        const double gap = (ub - lb) / std::max(1.0, std::abs(ub));
        if (best && gap <= opts.rel_gap) {
            ++t;
            break;
        }

        // Dual ascent step on the rate constraints. Consecutive subgradients
        // zig-zag across the kinks that tied duals create, so deflect the
        // direction when it opposes the previous one.
        double sg_norm2 = 0.0;
        double cross = 0.0;
        double dir_norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sg = targets[i] - rate[i];
            sg_norm2 += sg * sg;
            cross += dir[i] * sg;
            dir_norm2 += dir[i] * dir[i];
        }
        if (sg_norm2 == 0.0) continue; // exact vertex hit; restoration closes the gap
        const double gamma = dir_norm2 > 0.0 && cross < 0.0 ? -1.5 * cross / dir_norm2 : 0.0;
        dir_norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            dir[i] = (targets[i] - rate[i]) + gamma * dir[i];
            dir_norm2 += dir[i] * dir[i];
        }
        if (dir_norm2 < 1e-30 * sg_norm2) {
            for (int i = 0; i < n; ++i) dir[i] = targets[i] - rate[i];
            dir_norm2 = sg_norm2;
        }
        double step;
        if (best) {
            step = beta * std::max(ub - dual_value, 1e-12 * std::max(1.0, std::abs(ub))) / dir_norm2;
        } else {
            step = step_scale0 / ((1.0 + static_cast<double>(t)) * std::sqrt(dir_norm2));
        }
        // A wild upper bound from an early rescue must not sling the iterate.
        double theta_max_cur = 0.0;
        for (double th : theta) theta_max_cur = std::max(theta_max_cur, th);
        const double disp_cap = 0.5 * (1.0 + theta_max_cur);
        const double disp = step * std::sqrt(dir_norm2);
        if (disp > disp_cap) step = disp_cap / std::sqrt(dir_norm2);
        for (int i = 0; i < n; ++i) theta[i] = std::max(0.0, theta[i] + step * dir[i]);
    }

    if (!best) {
        // Never found a feasible primal: force the guaranteed scale-up path
        // from the best dual iterate.
        Duals theta_avg = theta_lb;
        consider(try_restore(channels, targets, alpha, theta_avg, p_cur, opts, true));
    }
    if (!best)
        throw solver_error("solve_min_energy: failed to recover a feasible allocation", kInf);

    const double gap = (best->objective - lb) / std::max(1.0, std::abs(best->objective));
    if (gap > opts.rel_gap && t >= opts.max_outer) {
        std::ostringstream msg;
        msg << "solve_min_energy: outer iteration cap " << opts.max_outer
            << " reached with relative gap " << gap << " (objective " << best->objective
            << ", dual bound " << lb << ")";
        throw solver_error(msg.str(), gap);
    }

    sol.alloc = best->alloc;
    sol.alloc.weights = alpha;
    sol.duals = best->theta;
    sol.clusters = best->clusters;
    sol.orders = best->orders;
    sol.order_weights = best->weights;
    sol.achieved = best->achieved;
    sol.objective = best->objective;
    sol.dual_bound = lb;
    sol.rel_gap = gap;
    sol.outer_iterations = t;
    sol.time_shared = sol.orders.size() > 1;
    return sol;
}

VerifyReport verify_solution(const ChannelSet &channels, const RateVector &targets,
                             const MinPmacSolution &solution, double tol) {
    const int n = channels.users();
    VerifyReport rep;
    if (static_cast<int>(targets.size()) != n || static_cast<int>(solution.achieved.size()) != n)
        throw std::invalid_argument("verify_solution: dimension mismatch");

    double deficit = 0.0;
    for (int i = 0; i < n; ++i) deficit = std::max(deficit, targets[i] - solution.achieved[i]);
    rep.worst_rate_deficit = deficit;
    rep.rates_met = deficit <= tol;

    capacity::PolymatroidCheck pc =
        capacity::check_polymatroid(channels, solution.alloc, solution.achieved, tol);
    rep.polymatroid_ok = pc.ok;
    rep.worst_polymatroid_violation = std::max(0.0, pc.worst_violation);

    double pmin = 0.0;
    for (double v : solution.alloc.p) pmin = std::min(pmin, v);
    rep.worst_power = pmin;
    rep.powers_nonneg = pmin >= -tol;

    double theta_max = 0.0;
    for (double th : solution.duals) theta_max = std::max(theta_max, th);
    double cs = 0.0;
    for (int i = 0; i < n; ++i)
        cs = std::max(cs, solution.duals[i] * std::abs(solution.achieved[i] - targets[i]));
    rep.worst_comp_slack = cs;
    double target_max = 0.0;
    for (double r : targets) target_max = std::max(target_max, r);
    // Rate surplus on a priced user is bounded by the duality gap the solve
    // stopped at, so the gap joins the user tolerance in the threshold.
    const double slack_tol = tol + std::max(0.0, solution.rel_gap);
    rep.comp_slack_ok = cs <= slack_tol * (1.0 + theta_max) * (1.0 + target_max);

    if (solution.orders.empty() || solution.orders.size() != solution.order_weights.size()) {
        rep.sic_consistent = false;
        rep.worst_rate_mismatch = kInf;
        return rep;
    }
    double wsum = 0.0;
    RateVector mix(n, 0.0);
    for (std::size_t j = 0; j < solution.orders.size(); ++j) {
        const RateVector rj = capacity::sic_rates(channels, solution.alloc, solution.orders[j]);
        for (int i = 0; i < n; ++i) mix[i] += solution.order_weights[j] * rj[i];
        wsum += solution.order_weights[j];
    }
    double mismatch = std::abs(wsum - 1.0);
    double achieved_max = 0.0;
    for (double r : solution.achieved) achieved_max = std::max(achieved_max, r);
    for (int i = 0; i < n; ++i)
        mismatch = std::max(mismatch, std::abs(mix[i] - solution.achieved[i]));
    rep.worst_rate_mismatch = mismatch;
    rep.sic_consistent = mismatch <= tol * (1.0 + achieved_max);
    int active = 0;
    for (double w : solution.order_weights)
        if (w > 1e-12) ++active;
    rep.needs_time_sharing = active > 1;
    return rep;
}

BudgetResult max_sum_rate(const ChannelSet &channels, double total_energy,
                          const SolveOptions &opts) {
    const int n = channels.users();
    const int s = channels.tones();
    if (!(total_energy >= 0.0) || !std::isfinite(total_energy))
        throw std::invalid_argument("max_sum_rate: energy budget must be finite and non-negative");

    BudgetResult out;
    out.alloc = PowerAllocation(n, s);
    if (total_energy == 0.0) return out;

    // Work on the entries with a live channel; dead entries stay at zero.
    std::vector<std::pair<int, int>> live;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < s; ++j)
            if (channels.gain_sq(i, j) > 0.0) live.emplace_back(i, j);
    if (live.empty()) throw infeasible_error("max_sum_rate: every channel entry is zero");
    const int m = static_cast<int>(live.size());

    const double sigma2_eff =
        channels.white_noise() ? channels.sigma2() : std::exp2(channels.log2det_noise() / channels.rx());

    auto objective = [&](const std::vector<double> &x) {
        PowerAllocation a(n, s);
        for (int k = 0; k < m; ++k) a.at(live[k].first, live[k].second) = x[k];
        std::vector<int> everyone(n);
        std::iota(everyone.begin(), everyone.end(), 0);
        return capacity::subset_capacity(channels, a, everyone);
    };
    auto gradient = [&](const std::vector<double> &x, std::vector<double> &g) {
        g.assign(m, 0.0);
        if (channels.rx() == 1) {
            std::vector<double> t(s, sigma2_eff);
            for (int k = 0; k < m; ++k)
                t[live[k].second] += x[k] * channels.gain_sq(live[k].first, live[k].second);
            for (int k = 0; k < m; ++k)
                g[k] = kLog2e * channels.gain_sq(live[k].first, live[k].second) / t[live[k].second];
        } else {
            for (int j = 0; j < s; ++j) {
                Eigen::MatrixXcd a = channels.noise_cov();
                for (int k = 0; k < m; ++k)
                    if (live[k].second == j) {
                        const auto gv = channels.gain(live[k].first, j);
                        a.noalias() += x[k] * (gv * gv.adjoint());
                    }
                Eigen::LLT<Eigen::MatrixXcd> llt(a);
                for (int k = 0; k < m; ++k)
                    if (live[k].second == j) {
                        const auto gv = channels.gain(live[k].first, j);
                        const Eigen::VectorXcd gvc = gv;
                        g[k] = kLog2e * gvc.dot(llt.solve(gvc)).real();
                    }
            }
        }
    };
    // Euclidean projection onto the scaled simplex sum x = e, x >= 0.
    auto project = [&](std::vector<double> v) {
        std::vector<double> u = v;
        std::sort(u.begin(), u.end(), std::greater<>());
        double css = 0.0, tau = 0.0;
        int rho = 0;
        for (int k = 0; k < m; ++k) {
            css += u[k];
            const double cand = (css - total_energy) / (k + 1);
            if (u[k] - cand > 0.0) {
                rho = k + 1;
                tau = cand;
            }
        }
        (void)rho;
        for (double &x : v) x = std::max(0.0, x - tau);
        return v;
    };

    std::vector<double> x(m, total_energy / m), g(m), cand;
    double f = objective(x);
    gradient(x, g);
    double step = 1.0;
    int it = 0;
    const int cap = std::max(2000, opts.max_inner);
    for (; it < cap; ++it) {
        bool accepted = false;
        double moved = 0.0;
        for (int bt = 0; bt < 70; ++bt) {
            std::vector<double> y(m);
            for (int k = 0; k < m; ++k) y[k] = x[k] + step * g[k];
            cand = project(std::move(y));
            double lin = 0.0;
            moved = 0.0;
            for (int k = 0; k < m; ++k) {
                lin += g[k] * (cand[k] - x[k]);
                moved += std::abs(cand[k] - x[k]);
            }
            if (moved == 0.0) break;
            const double fc = objective(cand);
            if (fc >= f + 1e-4 * lin) {
                x.swap(cand);
                f = fc;
                gradient(x, g);
                step = std::min(step * 1.3, 1e12);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (moved <= 1e-14 * total_energy) break;
    }
    for (int k = 0; k < m; ++k) out.alloc.at(live[k].first, live[k].second) = x[k];
    out.sum_rate = f;
    out.iterations = it;
    return out;
}

} // namespace macalloc::minpmac
