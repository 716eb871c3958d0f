// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simcse/encoder.hpp"

namespace simcse {

struct AdamWOptions {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    void validate() const;
};

/// One bias-corrected AdamW update of a flat parameter block at step `t` (1-based):
/// theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta). When
/// `decay` is false the weight-decay term is skipped.
void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                  std::int64_t t, const AdamWOptions& options, bool decay = true);

/// AdamW over a fixed list of named parameters. Parameters without a gradient
/// at step time are left untouched, moments included.
class AdamW {
public:
    AdamW(std::vector<NamedParam> params, AdamWOptions options);

    void step();
    void zero_grad();

    std::int64_t steps() const { return step_; }
    const AdamWOptions& options() const { return options_; }
    const std::vector<NamedParam>& params() const { return params_; }
    std::span<const double> first_moment(std::size_t i) const { return m_[i]; }
    std::span<const double> second_moment(std::size_t i) const { return v_[i]; }

private:
    std::vector<NamedParam> params_;
    AdamWOptions options_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::int64_t step_ = 0;
};

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(const std::vector<NamedParam>& params, double max_norm);

}  // namespace simcse
