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

#include "macalloc/channel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "macalloc/rng.hpp"

namespace macalloc {

void Scenario::validate() const {
    if (num_users < 1) throw std::invalid_argument("scenario: num_users must be >= 1");
    if (num_subcarriers < 1) throw std::invalid_argument("scenario: num_subcarriers must be >= 1");
    if (rx_antennas < 1) throw std::invalid_argument("scenario: rx_antennas must be >= 1");
    if (tx_antennas_per_user != 1)
        throw std::invalid_argument("scenario: only one transmit antenna per user is supported");
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("scenario: bandwidth must be positive");
    if (carrier_hz <= 0.0) throw std::invalid_argument("scenario: carrier must be positive");
    if (noise_variance <= 0.0) throw std::invalid_argument("scenario: sigma^2 must be positive");
    if (static_cast<int>(user_distances.size()) != num_users)
        throw std::invalid_argument("scenario: need one distance per user");
    for (double d : user_distances)
        if (!(d > 0.0)) throw std::invalid_argument("scenario: distances must be positive");
}

ChannelSet::ChannelSet(Scenario scenario, std::vector<cdouble> gains, double sigma2)
    : scenario_(std::move(scenario)), gains_(std::move(gains)), sigma2_(sigma2),
      white_noise_(true),
      noise_cov_(Eigen::MatrixXcd::Identity(scenario_.rx_antennas, scenario_.rx_antennas) * sigma2) {
    scenario_.noise_variance = sigma2;
    log2det_noise_ = scenario_.rx_antennas * std::log2(sigma2);
    check_invariants();
}

ChannelSet::ChannelSet(Scenario scenario, std::vector<cdouble> gains, double sigma2,
                       Eigen::MatrixXcd noise_cov)
    : scenario_(std::move(scenario)), gains_(std::move(gains)), sigma2_(sigma2),
      white_noise_(false), noise_cov_(std::move(noise_cov)) {
    scenario_.noise_variance = sigma2;
    const int L = scenario_.rx_antennas;
    if (noise_cov_.rows() != L || noise_cov_.cols() != L)
        throw std::invalid_argument("channel set: noise covariance must be rx x rx");
    if ((noise_cov_ - noise_cov_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * noise_cov_.cwiseAbs().maxCoeff())
        throw std::invalid_argument("channel set: noise covariance must be Hermitian");
    Eigen::LLT<Eigen::MatrixXcd> llt(noise_cov_);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("channel set: noise covariance must be positive definite");
    log2det_noise_ = 0.0;
    for (int k = 0; k < L; ++k)
        log2det_noise_ += 2.0 * std::log2(llt.matrixL()(k, k).real());
    check_invariants();
}

void ChannelSet::check_invariants() const {
    scenario_.validate();
    const std::size_t expected = static_cast<std::size_t>(scenario_.num_users) *
                                 scenario_.num_subcarriers * scenario_.rx_antennas;
    if (gains_.size() != expected)
        throw std::invalid_argument("channel set: gain array size does not match dimensions");
    if (!(sigma2_ > 0.0)) throw std::invalid_argument("channel set: sigma^2 must be positive");
    for (const cdouble &g : gains_)
        if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
            throw std::invalid_argument("channel set: gains must be finite");
}

double ChannelSet::mean_gain_sq() const {
    double acc = 0.0;
    for (const cdouble &g : gains_) acc += std::norm(g);
    return acc / (static_cast<double>(users()) * tones());
}

ChannelSet ChannelSet::with_sigma2(double sigma2) const {
    return {scenario_, gains_, sigma2};
}

void PowerAllocation::validate(const ChannelSet &channels) const {
    if (users != channels.users() || tones != channels.tones())
        throw std::invalid_argument("power allocation dimensions do not match channel set");
    if (p.size() != static_cast<std::size_t>(users) * tones)
        throw std::invalid_argument("power allocation: wrong array size");
    if (static_cast<int>(weights.size()) != users)
        throw std::invalid_argument("power allocation: need one weight per user");
    for (double v : p)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("power allocation: powers must be finite and >= 0");
}

void validate_order(const DecodeOrder &order, int users) {
    if (static_cast<int>(order.size()) != users)
        throw std::invalid_argument("decode order must cover every user exactly once");
    std::vector<char> seen(users, 0);
    for (int u : order) {
        if (u < 0 || u >= users || seen[u])
            throw std::invalid_argument("decode order is not a permutation of the users");
        seen[u] = 1;
    }
}

namespace channel {

double pathloss_db(double distance_m, double carrier_hz) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("pathloss: distance must be positive");
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("pathloss: carrier must be positive");
    return 46.4 + 18.7 * std::log10(distance_m) + 20.0 * std::log10(carrier_hz / 1.0e9 / 5.0);
}

ChannelSet generate_channels(const Scenario &scenario) {
    scenario.validate();
    const int N = scenario.num_users, S = scenario.num_subcarriers, L = scenario.rx_antennas;

    Rng rng(scenario.seed);
    std::vector<cdouble> gains(static_cast<std::size_t>(N) * S * L);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < N; ++i) {
        const double pl = pathloss_db(scenario.user_distances[i], scenario.carrier_hz);
        const double amp = std::pow(10.0, -pl / 20.0);
        for (int j = 0; j < S; ++j) {
            for (int a = 0; a < L; ++a) {
                auto [zr, zi] = rng.normal_pair();
                gains[(static_cast<std::size_t>(i) * S + j) * L + a] =
                    amp * inv_sqrt2 * cdouble(zr, zi);
            }
        }
    }

    ChannelSet set(scenario, std::move(gains), scenario.noise_variance);
    if (scenario.has_target_snr)
        return calibrate_noise(set, scenario.target_receive_snr_db, 1.0);
    return set;
}

ChannelSet calibrate_noise(const ChannelSet &channels, double target_receive_snr_db,
                           double reference_power) {
    if (!(reference_power > 0.0))
        throw std::invalid_argument("calibrate_noise: reference power must be positive");
    const double mean_sq = channels.mean_gain_sq();
    if (!(mean_sq > 0.0))
        throw std::invalid_argument("calibrate_noise: degenerate all-zero channels");
    const double snr_lin = std::pow(10.0, target_receive_snr_db / 10.0);
    double sigma2 = reference_power * mean_sq / snr_lin;
    ChannelSet out = channels.with_sigma2(sigma2);
    Scenario sc = out.scenario();
    sc.target_receive_snr_db = target_receive_snr_db;
    sc.has_target_snr = true;
    return {sc, out.raw_gains(), sigma2};
}

namespace {

[[noreturn]] void parse_fail(const std::string &name, int line, const std::string &msg) {
    std::ostringstream os;
    os << name << ":" << line << ": " << msg;
    throw std::runtime_error(os.str());
}

double parse_real(std::istringstream &row, const std::string &name, int line,
                  const char *field) {
    double v;
    if (!(row >> v)) parse_fail(name, line, std::string("missing or malformed field '") + field + "'");
    if (!std::isfinite(v)) parse_fail(name, line, std::string("non-finite value in field '") + field + "'");
    return v;
}

} // namespace

void save_channels(const ChannelSet &channels, std::ostream &out) {
    out.precision(17);
    out << "MACALLOC-CH v1\n";
    out << "users " << channels.users() << " tones " << channels.tones() << " rx "
        << channels.rx() << " sigma2 " << channels.sigma2() << "\n";
    if (!channels.white_noise()) {
        out << "zint";
        const auto &Z = channels.noise_cov();
        for (int r = 0; r < channels.rx(); ++r)
            for (int c = 0; c < channels.rx(); ++c)
                out << " " << Z(r, c).real() << " " << Z(r, c).imag();
        out << "\n";
    }
    for (int i = 0; i < channels.users(); ++i) {
        for (int j = 0; j < channels.tones(); ++j) {
            out << (i + 1) << " " << (j + 1);
            auto g = channels.gain(i, j);
            for (int a = 0; a < channels.rx(); ++a)
                out << " " << g(a).real() << " " << g(a).imag();
            out << "\n";
        }
    }
}

void save_channels(const ChannelSet &channels, const std::string &path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    save_channels(channels, f);
    if (!f) throw std::runtime_error("write failed: " + path);
}

ChannelSet load_channels(std::istream &in, const std::string &name) {
    std::string line;
    int lineno = 1;
    if (!std::getline(in, line) || line != "MACALLOC-CH v1")
        parse_fail(name, lineno, "expected magic line 'MACALLOC-CH v1'");

    ++lineno;
    if (!std::getline(in, line)) parse_fail(name, lineno, "missing header line");
    std::istringstream header(line);
    std::string kw;
    int N = 0, S = 0, L = 0;
    double sigma2 = 0.0;
    if (!(header >> kw) || kw != "users" || !(header >> N)) parse_fail(name, lineno, "expected 'users N'");
    if (!(header >> kw) || kw != "tones" || !(header >> S)) parse_fail(name, lineno, "expected 'tones S'");
    if (!(header >> kw) || kw != "rx" || !(header >> L)) parse_fail(name, lineno, "expected 'rx L'");
    if (!(header >> kw) || kw != "sigma2" || !(header >> sigma2))
        parse_fail(name, lineno, "expected 'sigma2 <value>'");
    if (N < 1 || S < 1 || L < 1) parse_fail(name, lineno, "header dimensions must be >= 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) parse_fail(name, lineno, "sigma2 must be positive and finite");

    bool have_zint = false;
    Eigen::MatrixXcd Z;
    std::vector<cdouble> gains(static_cast<std::size_t>(N) * S * L,
                               cdouble(std::numeric_limits<double>::quiet_NaN(), 0.0));
    std::vector<char> seen(static_cast<std::size_t>(N) * S, 0);

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        if (line.rfind("zint", 0) == 0) {
            std::string tag;
            row >> tag;
            Z.resize(L, L);
            for (int r = 0; r < L; ++r)
                for (int c = 0; c < L; ++c) {
                    double re = parse_real(row, name, lineno, "zint.re");
                    double im = parse_real(row, name, lineno, "zint.im");
                    Z(r, c) = cdouble(re, im);
                }
            have_zint = true;
            continue;
        }
        int user = 0, tone = 0;
        if (!(row >> user >> tone)) parse_fail(name, lineno, "expected 'user tone' indices");
        if (user < 1 || user > N) parse_fail(name, lineno, "user index out of range 1..N");
        if (tone < 1 || tone > S) parse_fail(name, lineno, "tone index out of range 1..S");
        const std::size_t cell = static_cast<std::size_t>(user - 1) * S + (tone - 1);
        if (seen[cell]) parse_fail(name, lineno, "duplicate row for this user/tone pair");
        seen[cell] = 1;
        for (int a = 0; a < L; ++a) {
            std::string fre = "gain[" + std::to_string(a) + "].re";
            std::string fim = "gain[" + std::to_string(a) + "].im";
            double re = parse_real(row, name, lineno, fre.c_str());
            double im = parse_real(row, name, lineno, fim.c_str());
            gains[cell * L + a] = cdouble(re, im);
        }
        double extra;
        if (row >> extra) parse_fail(name, lineno, "trailing values beyond rx antenna count");
    }

    for (int i = 0; i < N; ++i)
        for (int j = 0; j < S; ++j)
            if (!seen[static_cast<std::size_t>(i) * S + j]) {
                std::ostringstream os;
                os << name << ": header declares users " << N << " x tones " << S
                   << " but row for user " << (i + 1) << " tone " << (j + 1) << " is missing";
                throw std::runtime_error(os.str());
            }

    Scenario sc;
    sc.num_users = N;
    sc.num_subcarriers = S;
    sc.rx_antennas = L;
    sc.noise_variance = sigma2;
    sc.user_distances.assign(N, 1.0); // geometry is not stored in the file
    if (have_zint) return {sc, std::move(gains), sigma2, std::move(Z)};
    return {sc, std::move(gains), sigma2};
}

ChannelSet load_channels(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return load_channels(f, path);
}

} // namespace channel
} // namespace macalloc
