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

#include "macalloc/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace macalloc::drl {

Mlp::Mlp(std::vector<int> sizes, Rng &rng) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
    for (int s : sizes_)
        if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weight_off_.push_back(total);
        total += static_cast<std::size_t>(sizes_[l]) * sizes_[l + 1];
        bias_off_.push_back(total);
        total += sizes_[l + 1];
    }
    params_.assign(total, 0.0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const int fan_in = sizes_[l], fan_out = sizes_[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        double *w = params_.data() + weight_off_[l];
        for (int k = 0; k < fan_in * fan_out; ++k) w[k] = limit * (2.0 * rng.uniform() - 1.0);
    }
}

std::vector<double> Mlp::forward(const std::vector<double> &x) const {
    Trace trace;
    return forward(x, trace);
}

std::vector<double> Mlp::forward(const std::vector<double> &x, Trace &trace) const {
    if (static_cast<int>(x.size()) != sizes_.front())
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    trace.act.assign(sizes_.size(), {});
    trace.act[0] = x;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const int rows = sizes_[l + 1], cols = sizes_[l];
        const double *w = params_.data() + weight_off_[l];
        const double *b = params_.data() + bias_off_[l];
        const std::vector<double> &in = trace.act[l];
        std::vector<double> out(rows);
        for (int r = 0; r < rows; ++r) {
            double acc = b[r];
            const double *wr = w + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) acc += wr[c] * in[c];
            out[r] = l + 2 < sizes_.size() ? std::tanh(acc) : acc;
        }
        trace.act[l + 1] = std::move(out);
    }
    return trace.act.back();
}

void Mlp::backward(const Trace &trace, const std::vector<double> &dout,
                   std::vector<double> &grad) const {
    if (grad.size() != params_.size())
        throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");
    if (static_cast<int>(dout.size()) != sizes_.back())
        throw std::invalid_argument("Mlp::backward: output gradient dimension mismatch");
    std::vector<double> delta = dout; // dLoss/d(pre-activation) of the current layer
    for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
        const int rows = sizes_[l + 1], cols = sizes_[l];
        // Output layer is linear; hidden layers need the tanh derivative.
        if (l + 2 < sizes_.size())
            for (int r = 0; r < rows; ++r)
                delta[r] *= 1.0 - trace.act[l + 1][r] * trace.act[l + 1][r];
        const std::vector<double> &in = trace.act[l];
        double *gw = grad.data() + weight_off_[l];
        double *gb = grad.data() + bias_off_[l];
        for (int r = 0; r < rows; ++r) {
            double *gwr = gw + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) gwr[c] += delta[r] * in[c];
            gb[r] += delta[r];
        }
        if (l == 0) break;
        const double *w = params_.data() + weight_off_[l];
        std::vector<double> prev(cols, 0.0);
        for (int r = 0; r < rows; ++r) {
            const double *wr = w + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) prev[c] += wr[c] * delta[r];
        }
        delta = std::move(prev);
    }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
    if (!(lr > 0.0)) throw std::invalid_argument("Adam: learning rate must be positive");
}

void Adam::step(std::vector<double> &params, const std::vector<double> &grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw std::invalid_argument("Adam::step: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
        params[k] -= lr_ * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + eps_);
    }
}

void clip_grad_norm(std::vector<double> &grad, double max_norm) {
    if (!(max_norm > 0.0)) return;
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    if (norm <= max_norm) return;
    const double scale = max_norm / norm;
    for (double &g : grad) g *= scale;
}

} // namespace macalloc::drl
