// SPDX-License-Identifier: Apache-2.0
#include "simcse/adamw.hpp"

#include <cmath>

#include "simcse/error.hpp"

namespace simcse {

void AdamWOptions::validate() const {
    if (!(lr > 0.0)) throw ConfigError("optim.lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("optim.beta1 must lie in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("optim.beta2 must lie in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("optim.eps must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("optim.weight_decay must be non-negative");
}

void adamw_update(std::span<double> theta, std::span<const double> grad, std::span<double> m, std::span<double> v,
                  std::int64_t t, const AdamWOptions& o, bool decay) {
    if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
        throw ShapeError("adamw_update: parameter, gradient and moment sizes differ");
    }
    if (t < 1) throw ConfigError("adamw_update: step count starts at 1");
    const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
    const double wd = decay ? o.weight_decay : 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
        v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= o.lr * (m_hat / (std::sqrt(v_hat) + o.eps) + wd * theta[i]);
    }
}

AdamW::AdamW(std::vector<NamedParam> params, AdamWOptions options)
    : params_(std::move(params)), options_(options) {
    options_.validate();
    for (const auto& p : params_) {
        m_.emplace_back(p.tensor.numel(), 0.0);
        v_.emplace_back(p.tensor.numel(), 0.0);
    }
}

void AdamW::step() {
    ++step_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p.tensor.has_grad()) continue;
        adamw_update(p.tensor.mutable_data(), p.tensor.grad(), m_[i], v_[i], step_, options_, p.decay);
    }
}

void AdamW::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

double clip_grad_norm(const std::vector<NamedParam>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params) {
        if (!p.tensor.has_grad()) continue;
        for (double g : p.tensor.grad()) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double factor = max_norm / norm;
        for (const auto& p : params) {
            if (!p.tensor.has_grad()) continue;
            Tensor t = p.tensor;
            for (auto& g : t.mutable_grad()) g *= factor;
        }
    }
    return norm;
}

}  // namespace simcse
