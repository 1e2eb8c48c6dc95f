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

#include "macalloc/rng.hpp"

#include <cstddef>
#include <vector>

namespace macalloc::drl {

/// Dense feed-forward network: tanh on hidden layers, linear output, all
/// parameters in one flat vector (per layer: row-major weights, then biases).
/// Weights start Glorot-uniform from the supplied generator, biases at zero.
class Mlp {
  public:
    Mlp(std::vector<int> sizes, Rng &rng);

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int param_count() const { return static_cast<int>(params_.size()); }
    std::vector<double> &params() { return params_; }
    const std::vector<double> &params() const { return params_; }
    const std::vector<int> &sizes() const { return sizes_; }

    /// Post-activation values per layer, kept for backprop.
    struct Trace {
        std::vector<std::vector<double>> act; // act[0] = input, act.back() = output
    };

    std::vector<double> forward(const std::vector<double> &x) const;
    std::vector<double> forward(const std::vector<double> &x, Trace &trace) const;

    /// Accumulate dLoss/dparams into `grad` (length param_count) given
    /// dLoss/doutput for the forward pass recorded in `trace`.
    void backward(const Trace &trace, const std::vector<double> &dout,
                  std::vector<double> &grad) const;

  private:
    std::vector<int> sizes_;
    std::vector<double> params_;
    std::vector<std::size_t> weight_off_, bias_off_;
};

/// Adaptive-moment first-order optimizer (minimization convention).
class Adam {
  public:
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(std::vector<double> &params, const std::vector<double> &grad);
    const std::vector<double> &first_moment() const { return m_; }
    const std::vector<double> &second_moment() const { return v_; }
    std::vector<double> &first_moment() { return m_; }
    std::vector<double> &second_moment() { return v_; }
    long steps_taken() const { return t_; }
    void set_steps_taken(long t) { t_ = t; }

  private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

/// Scale `grad` in place so its L2 norm is at most `max_norm`.
void clip_grad_norm(std::vector<double> &grad, double max_norm);

} // namespace macalloc::drl
