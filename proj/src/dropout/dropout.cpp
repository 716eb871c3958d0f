// SPDX-License-Identifier: Apache-2.0
#include "simcse/dropout.hpp"

#include <cmath>

#include "simcse/error.hpp"
#include "simcse/ops.hpp"

namespace simcse {

std::string to_string(DropoutKind kind) {
    switch (kind) {
        case DropoutKind::standard: return "standard";
        case DropoutKind::curriculum: return "curriculum";
        case DropoutKind::adaptive: return "adaptive";
    }
    return "standard";
}

DropoutKind parse_dropout_kind(std::string_view name) {
    if (name == "standard") return DropoutKind::standard;
    if (name == "curriculum") return DropoutKind::curriculum;
    if (name == "adaptive") return DropoutKind::adaptive;
    throw ConfigError("unknown dropout kind '" + std::string(name) + "' (expected standard, curriculum or adaptive)");
}

DropoutPolicy DropoutPolicy::standard(double p) {
    DropoutPolicy policy;
    policy.kind = DropoutKind::standard;
    policy.p = p;
    return policy;
}

DropoutPolicy DropoutPolicy::curriculum_policy(double p_target, double gamma, std::int64_t total_steps) {
    DropoutPolicy policy;
    policy.kind = DropoutKind::curriculum;
    policy.p = p_target;
    policy.curriculum = CurriculumSchedule{gamma, total_steps};
    return policy;
}

DropoutPolicy DropoutPolicy::adaptive_policy(double alpha, double beta) {
    DropoutPolicy policy;
    policy.kind = DropoutKind::adaptive;
    policy.p = 0.0;
    policy.adaptive = StandoutInit{alpha, beta};
    return policy;
}

void DropoutPolicy::validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout.p must lie in [0,1), got " + std::to_string(p));
    if (curriculum.has_value() != (kind == DropoutKind::curriculum)) {
        throw ConfigError("curriculum schedule must be present exactly when dropout.kind is curriculum");
    }
    if (adaptive.has_value() != (kind == DropoutKind::adaptive)) {
        throw ConfigError("standout parameters must be present exactly when dropout.kind is adaptive");
    }
    if (curriculum) {
        if (!(curriculum->gamma > 0.0)) throw ConfigError("dropout.gamma must be positive");
        if (curriculum->total_steps <= 0) throw ConfigError("dropout.total_steps must be positive");
    }
    if (adaptive && !(std::isfinite(adaptive->alpha) && std::isfinite(adaptive->beta))) {
        throw ConfigError("dropout.alpha and dropout.beta must be finite");
    }
}

Tensor standard_dropout(const Tensor& x, double p, Mode mode, Rng& rng, MaskRecord* record) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0,1)");
    if (mode == Mode::eval || p == 0.0) {
        if (record) {
            record->mask.assign(x.numel(), 1);
            record->keep_prob.assign(x.numel(), 1.0);
        }
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> mask(x.numel());
    for (auto& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
    if (record) {
        record->mask.resize(mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i) record->mask[i] = mask[i] != 0.0 ? 1 : 0;
        record->keep_prob.assign(mask.size(), 1.0 - p);
    }
    return ops::mul(x, Tensor::from(x.shape(), std::move(mask)));
}

double curriculum_rate(std::int64_t step, const DropoutPolicy& policy) {
    if (!policy.curriculum) throw ConfigError("curriculum_rate: policy has no curriculum schedule");
    if (step < 0) throw ConfigError("curriculum_rate: step must be non-negative");
    const auto& c = *policy.curriculum;
    return policy.p * (1.0 - std::exp(-c.gamma * static_cast<double>(step) / static_cast<double>(c.total_steps)));
}

Tensor curriculum_dropout(const Tensor& x, std::int64_t step, const DropoutPolicy& policy, Mode mode, Rng& rng,
                          MaskRecord* record) {
    if (record) record->step = step;
    return standard_dropout(x, curriculum_rate(step, policy), mode, rng, record);
}

Tensor adaptive_dropout(const Tensor& x, const Tensor& activations, const Tensor& alpha, const Tensor& beta, Mode mode,
                        Rng& rng, MaskRecord* record) {
    if (x.shape() != activations.shape()) {
        throw ShapeError("adaptive_dropout: input " + shape_to_string(x.shape()) + " and activations " +
                         shape_to_string(activations.shape()) + " differ");
    }
    const Tensor keep = ops::sigmoid(ops::shift_by(ops::scale_by(activations, alpha), beta));
    if (record) record->keep_prob.assign(keep.data().begin(), keep.data().end());
    if (mode == Mode::eval) {
        if (record) record->mask.assign(x.numel(), 1);
        return ops::mul(x, keep);
    }
    std::vector<double> sample(x.numel());
    for (std::size_t i = 0; i < sample.size(); ++i) sample[i] = rng.uniform() < keep[i] ? 1.0 : 0.0;
    if (record) {
        record->mask.resize(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) record->mask[i] = sample[i] != 0.0 ? 1 : 0;
    }
    const Tensor mask = ops::straight_through(Tensor::from(x.shape(), std::move(sample)), keep);
    return ops::mul(x, mask);
}

Tensor apply_dropout(const Tensor& x, const DropoutPolicy& policy, const StandoutGate* gate, Mode mode,
                     std::int64_t step, Rng& rng, MaskRecord* record) {
    if (record) record->step = step;
    switch (policy.kind) {
        case DropoutKind::standard: return standard_dropout(x, policy.p, mode, rng, record);
        case DropoutKind::curriculum: return curriculum_dropout(x, step, policy, mode, rng, record);
        case DropoutKind::adaptive:
            if (!gate || !gate->alpha.defined() || !gate->beta.defined()) {
                throw ConfigError("adaptive dropout requires standout gate parameters");
            }
            return adaptive_dropout(x, x, gate->alpha, gate->beta, mode, rng, record);
    }
    return x;
}

}  // namespace simcse
