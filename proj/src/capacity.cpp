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

#include "macalloc/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

namespace macalloc::capacity {

namespace {

double log2det_hpd(const Eigen::MatrixXcd &A) {
    Eigen::LLT<Eigen::MatrixXcd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("log2det: matrix is not positive definite");
    double acc = 0.0;
    for (int k = 0; k < A.rows(); ++k)
        acc += 2.0 * std::log2(llt.matrixL()(k, k).real());
    return acc;
}

} // namespace

RateVector sic_rates_tone(const ChannelSet &channels, const PowerAllocation &alloc,
                          const DecodeOrder &order, int tone) {
    const int N = channels.users();
    RateVector rates(N, 0.0);

    if (channels.rx() == 1 && channels.white_noise()) {
        // Scalar fast path: cumulative received power from the back of the order.
        double tail = channels.sigma2();
        double prev_log = std::log2(tail);
        for (int pos = N - 1; pos >= 0; --pos) {
            const int u = order[pos];
            tail += alloc.at(u, tone) * channels.gain_sq(u, tone);
            const double cur_log = std::log2(tail);
            rates[u] += cur_log - prev_log;
            prev_log = cur_log;
        }
        return rates;
    }

    Eigen::MatrixXcd acc = channels.noise_cov();
    double prev_log = channels.log2det_noise();
    for (int pos = N - 1; pos >= 0; --pos) {
        const int u = order[pos];
        const double p = alloc.at(u, tone);
        if (p > 0.0) acc.noalias() += p * channels.gain(u, tone) * channels.gain(u, tone).adjoint();
        const double cur_log = log2det_hpd(acc);
        rates[u] += cur_log - prev_log;
        prev_log = cur_log;
    }
    return rates;
}

RateVector sic_rates(const ChannelSet &channels, const PowerAllocation &alloc,
                     const DecodeOrder &order) {
    alloc.validate(channels);
    validate_order(order, channels.users());
    RateVector total(channels.users(), 0.0);
    for (int j = 0; j < channels.tones(); ++j) {
        RateVector per_tone = sic_rates_tone(channels, alloc, order, j);
        for (int i = 0; i < channels.users(); ++i) total[i] += per_tone[i];
    }
    // Rounding in the telescoping differences can leave tiny negatives.
    for (double &r : total) r = std::max(r, 0.0);
    return total;
}

double subset_capacity(const ChannelSet &channels, const PowerAllocation &alloc,
                       const std::vector<int> &subset) {
    alloc.validate(channels);
    if (subset.empty()) throw std::invalid_argument("subset_capacity: subset must be nonempty");
    for (int u : subset)
        if (u < 0 || u >= channels.users())
            throw std::invalid_argument("subset_capacity: user index out of range");

    double total = 0.0;
    if (channels.rx() == 1 && channels.white_noise()) {
        const double s2 = channels.sigma2();
        for (int j = 0; j < channels.tones(); ++j) {
            double acc = s2;
            for (int u : subset) acc += alloc.at(u, j) * channels.gain_sq(u, j);
            total += std::log2(acc / s2);
        }
        return total;
    }
    for (int j = 0; j < channels.tones(); ++j) {
        Eigen::MatrixXcd acc = channels.noise_cov();
        for (int u : subset) {
            const double p = alloc.at(u, j);
            if (p > 0.0) acc.noalias() += p * channels.gain(u, j) * channels.gain(u, j).adjoint();
        }
        total += log2det_hpd(acc) - channels.log2det_noise();
    }
    return total;
}

PolymatroidCheck check_polymatroid(const ChannelSet &channels, const PowerAllocation &alloc,
                                   const RateVector &rates, double tol) {
    const int N = channels.users();
    if (N > 20) throw std::invalid_argument("check_polymatroid: guarded at N <= 20");
    if (static_cast<int>(rates.size()) != N)
        throw std::invalid_argument("check_polymatroid: rate vector size mismatch");

    PolymatroidCheck result;
    for (unsigned mask = 1; mask < (1u << N); ++mask) {
        std::vector<int> subset;
        double rate_sum = 0.0;
        for (int i = 0; i < N; ++i)
            if (mask & (1u << i)) {
                subset.push_back(i);
                rate_sum += rates[i];
            }
        const double violation = rate_sum - subset_capacity(channels, alloc, subset);
        if (violation > result.worst_violation || result.worst_subset.empty()) {
            result.worst_violation = violation;
            result.worst_subset = subset;
        }
        if (violation > tol) result.ok = false;
    }
    return result;
}

std::vector<DecodeOrder> heuristic_orders(const ChannelSet &channels) {
    const int N = channels.users();
    std::vector<DecodeOrder> orders(channels.tones());
    for (int j = 0; j < channels.tones(); ++j) {
        DecodeOrder order(N);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return channels.gain_sq(a, j) > channels.gain_sq(b, j);
        });
        orders[j] = std::move(order);
    }
    return orders;
}

RateVector heuristic_sinr_rates(const ChannelSet &channels, const PowerAllocation &alloc) {
    alloc.validate(channels);
    const int N = channels.users();
    const int L = channels.rx();
    RateVector rates(N, 0.0);
    const auto orders = heuristic_orders(channels);

    for (int j = 0; j < channels.tones(); ++j) {
        const DecodeOrder &order = orders[j];
        for (int pos = 0; pos < N; ++pos) {
            const int u = order[pos];
            const double p = alloc.at(u, j);
            if (L == 1 && channels.white_noise()) {
                double denom = channels.sigma2();
                for (int later = pos + 1; later < N; ++later)
                    denom += alloc.at(order[later], j) * channels.gain_sq(order[later], j);
                rates[u] += std::log2(1.0 + p * channels.gain_sq(u, j) / denom);
            } else {
                // Matched filter on u's channel; undecoded users enter the
                // covariance of the denominator.
                Eigen::MatrixXcd cov = channels.noise_cov();
                for (int later = pos + 1; later < N; ++later) {
                    const int v = order[later];
                    const double pv = alloc.at(v, j);
                    if (pv > 0.0)
                        cov.noalias() += pv * channels.gain(v, j) * channels.gain(v, j).adjoint();
                }
                const Eigen::VectorXcd g = channels.gain(u, j);
                const double gsq = g.squaredNorm();
                const double signal = p * gsq * gsq;
                const double noise = (g.adjoint() * cov * g)(0, 0).real();
                rates[u] += std::log2(1.0 + (noise > 0.0 ? signal / noise : 0.0));
            }
        }
    }
    return rates;
}

RateVector oma_rates(const ChannelSet &channels, const PowerAllocation &alloc,
                     const std::vector<int> &assignment) {
    alloc.validate(channels);
    const int N = channels.users(), S = channels.tones();
    if (static_cast<int>(assignment.size()) != S)
        throw std::invalid_argument("oma_rates: assignment must cover every tone");
    for (int owner : assignment)
        if (owner < 0 || owner >= N)
            throw std::invalid_argument("oma_rates: assignment user index out of range");
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < S; ++j)
            if (assignment[j] != i && alloc.at(i, j) > 0.0)
                throw std::invalid_argument("oma_rates: power placed on a tone not assigned to the user");

    RateVector rates(N, 0.0);
    for (int j = 0; j < S; ++j) {
        const int u = assignment[j];
        const double p = alloc.at(u, j);
        if (channels.rx() == 1 && channels.white_noise()) {
            rates[u] += std::log2(1.0 + p * channels.gain_sq(u, j) / channels.sigma2());
        } else {
            Eigen::MatrixXcd acc = channels.noise_cov();
            if (p > 0.0) acc.noalias() += p * channels.gain(u, j) * channels.gain(u, j).adjoint();
            rates[u] += log2det_hpd(acc) - channels.log2det_noise();
        }
    }
    return rates;
}

std::vector<DecodeOrder> enumerate_orders(int users) {
    if (users < 1) throw std::invalid_argument("enumerate_orders: need at least one user");
    if (users > 8) throw std::invalid_argument("enumerate_orders: guarded at N <= 8");
    DecodeOrder order(users);
    std::iota(order.begin(), order.end(), 0);
    std::vector<DecodeOrder> all;
    do {
        all.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    return all;
}

} // namespace macalloc::capacity
