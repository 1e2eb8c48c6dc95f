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

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace macalloc {

using cdouble = std::complex<double>;

/// Thrown when an iterative solver fails to reach its tolerance within the
/// iteration cap. Carries the residual reached at the final iterate.
class solver_error : public std::runtime_error {
  public:
    solver_error(const std::string &what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

/// Thrown when rate targets cannot be met under the given channels/caps.
class infeasible_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scenario definition: geometry, dimensions and radio parameters from which
/// channel realizations are generated.
struct Scenario {
    int num_users = 3;
    int num_subcarriers = 4;
    int rx_antennas = 1;
    int tx_antennas_per_user = 1; // solver paths assume 1
    double bandwidth_hz = 80.0e6;
    double carrier_hz = 2.49e9;
    std::vector<double> user_distances; // meters, one per user
    double target_receive_snr_db = 0.0;
    bool has_target_snr = false;
    double noise_variance = 1.0; // sigma^2, W per receive dimension
    std::uint64_t seed = 1;

    /// Total transmit antennas exceed receive antennas: the stacked channel
    /// matrix cannot have full column rank.
    bool rank_deficient() const {
        return num_users * tx_antennas_per_user > rx_antennas;
    }

    void validate() const;
};

/// Immutable per-user, per-subcarrier receive-channel vectors plus the noise
/// auto-correlation matrix. Safe to share across threads once built.
class ChannelSet {
  public:
    ChannelSet(Scenario scenario, std::vector<cdouble> gains, double sigma2);
    ChannelSet(Scenario scenario, std::vector<cdouble> gains, double sigma2,
               Eigen::MatrixXcd noise_cov);

    int users() const { return scenario_.num_users; }
    int tones() const { return scenario_.num_subcarriers; }
    int rx() const { return scenario_.rx_antennas; }
    double sigma2() const { return sigma2_; }
    bool white_noise() const { return white_noise_; }
    const Scenario &scenario() const { return scenario_; }
    const Eigen::MatrixXcd &noise_cov() const { return noise_cov_; }
    double log2det_noise() const { return log2det_noise_; }

    /// Channel vector of user i on tone j (length rx()).
    Eigen::Map<const Eigen::VectorXcd> gain(int user, int tone) const {
        return {gains_.data() + (static_cast<std::size_t>(user) * tones() + tone) * rx(),
                rx()};
    }
    /// ||g_{i,j}||^2
    double gain_sq(int user, int tone) const { return gain(user, tone).squaredNorm(); }
    /// Mean of ||g_{i,j}||^2 over all users and tones.
    double mean_gain_sq() const;

    const std::vector<cdouble> &raw_gains() const { return gains_; }

    /// Copy with a new white-noise level sigma2 (Z = sigma2 * I).
    ChannelSet with_sigma2(double sigma2) const;

  private:
    void check_invariants() const;

    Scenario scenario_;
    std::vector<cdouble> gains_; // [(user * tones + tone) * rx + antenna]
    double sigma2_;
    bool white_noise_;
    Eigen::MatrixXcd noise_cov_;
    double log2det_noise_;
};

/// Non-negative per-user per-subcarrier transmit powers, plus the per-user
/// objective weights of the energy minimization.
struct PowerAllocation {
    int users = 0;
    int tones = 0;
    std::vector<double> p;       // [user * tones + tone], W
    std::vector<double> weights; // alpha_i, defaults to 1

    PowerAllocation() = default;
    PowerAllocation(int users_, int tones_)
        : users(users_), tones(tones_),
          p(static_cast<std::size_t>(users_) * tones_, 0.0),
          weights(users_, 1.0) {}

    double &at(int user, int tone) { return p[static_cast<std::size_t>(user) * tones + tone]; }
    double at(int user, int tone) const { return p[static_cast<std::size_t>(user) * tones + tone]; }

    /// E_i = sum_j p_{i,j}
    double user_energy(int user) const {
        double e = 0.0;
        for (int j = 0; j < tones; ++j) e += at(user, j);
        return e;
    }
    /// sum_i alpha_i * E_i
    double weighted_energy() const {
        double e = 0.0;
        for (int i = 0; i < users; ++i) e += weights[i] * user_energy(i);
        return e;
    }
    double total_energy() const {
        double e = 0.0;
        for (double v : p) e += v;
        return e;
    }

    void validate(const ChannelSet &channels) const;
};

/// SIC decoding order: order[k] is the user decoded at position k (position 0
/// is decoded first). One order applies uniformly to all tones.
using DecodeOrder = std::vector<int>;

void validate_order(const DecodeOrder &order, int users);

/// Per-user rates. Unit is bits per tone-use aggregated over tones; the
/// B/S Mbps conversion is applied only at reporting boundaries.
using RateVector = std::vector<double>;

/// Lagrange multipliers of the per-user rate constraints.
using Duals = std::vector<double>;

/// rate [bits/tone-use summed over tones] -> Mbps given scenario bandwidth.
inline double rate_to_mbps(double bits_per_toneuse, const Scenario &sc) {
    return bits_per_toneuse * sc.bandwidth_hz / sc.num_subcarriers / 1.0e6;
}
inline double mbps_to_rate(double mbps, const Scenario &sc) {
    return mbps * 1.0e6 * sc.num_subcarriers / sc.bandwidth_hz;
}

} // namespace macalloc
