// SPDX-License-Identifier: Apache-2.0
// Finite-difference gradient checks over every differentiable op and over a
// tiny end-to-end encoder. Shared by the unit tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "simcse/dropout.hpp"
#include "simcse/encoder.hpp"
#include "simcse/gradcheck.hpp"
#include "simcse/objectives.hpp"
#include "simcse/ops.hpp"

namespace simcse::gradsuite {

// Two error measures per check: the symmetric relative error of
// simcse::relative_error, and |a - n| / max(1, |n|).
struct Errors {
    double relative = 0.0;
    double scaled = 0.0;

    void add(double analytic, double numeric) {
        relative = std::max(relative, relative_error(analytic, numeric));
        scaled = std::max(scaled, std::fabs(analytic - numeric) / std::max(1.0, std::fabs(numeric)));
    }
    double worst() const { return std::max(relative, scaled); }
};

struct OpResult {
    std::string name;
    Errors errors;
};

using Inputs = std::vector<Tensor>;
using OpFn = std::function<Tensor(const Inputs&)>;

/// Compares backward() against central differences for loss = sum(op(x) * W)
/// with a fixed random W, over every input that requires grad.
inline Errors check_op(Inputs inputs, const OpFn& op, Rng& rng) {
    Tensor weights;
    {
        NoGradGuard no_grad;
        const Tensor probe = op(inputs);
        weights = oracle::random_tensor(probe.shape(), rng, false);
    }
    auto loss = [&] { return ops::sum(ops::mul(op(inputs), weights)); };
    for (auto& x : inputs) x.zero_grad();
    backward(loss());
    Errors errors;
    for (auto& x : inputs) {
        if (!x.requires_grad()) continue;
        const std::vector<double> analytic = x.has_grad() ? std::vector<double>(x.grad().begin(), x.grad().end())
                                                          : std::vector<double>(x.numel(), 0.0);
        const auto numeric = finite_diff_grad_inplace([&] { return loss().item(); }, x);
        for (std::size_t i = 0; i < numeric.size(); ++i) errors.add(analytic[i], numeric[i]);
    }
    return errors;
}

inline std::size_t dim(Rng& rng, std::size_t lo = 2, std::size_t hi = 4) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

/// One randomized trial over the whole op catalogue.
inline std::vector<OpResult> run_op_trial(Rng& rng) {
    using oracle::random_tensor;
    std::vector<OpResult> out;
    auto run = [&](const std::string& name, Inputs inputs, const OpFn& fn) {
        out.push_back({name, check_op(std::move(inputs), fn, rng)});
    };
    const std::size_t b = dim(rng), m = dim(rng), n = dim(rng), k = dim(rng);

    run("add", {random_tensor({m, n}, rng), random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::add(x[0], x[1]); });
    run("sub", {random_tensor({m, n}, rng), random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::sub(x[0], x[1]); });
    run("mul", {random_tensor({m, n}, rng), random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::mul(x[0], x[1]); });
    run("neg", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::neg(x[0]); });
    run("scale", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::scale(x[0], -1.7); });
    run("add_scalar", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::add_scalar(x[0], 0.3); });
    run("scale_by", {random_tensor({m, n}, rng), random_tensor({}, rng)},
        [](const Inputs& x) { return ops::scale_by(x[0], x[1]); });
    run("shift_by", {random_tensor({m, n}, rng), random_tensor({}, rng)},
        [](const Inputs& x) { return ops::shift_by(x[0], x[1]); });
    run("add_bias", {random_tensor({b, m, n}, rng), random_tensor({n}, rng)},
        [](const Inputs& x) { return ops::add_bias(x[0], x[1]); });
    run("matmul", {random_tensor({m, k}, rng), random_tensor({k, n}, rng)},
        [](const Inputs& x) { return ops::matmul(x[0], x[1]); });
    run("bmm", {random_tensor({b, m, k}, rng), random_tensor({b, k, n}, rng)},
        [](const Inputs& x) { return ops::bmm(x[0], x[1]); });
    run("transpose_last", {random_tensor({b, m, n}, rng)}, [](const Inputs& x) { return ops::transpose_last(x[0]); });
    run("reshape", {random_tensor({m, n}, rng)}, [m, n](const Inputs& x) { return ops::reshape(x[0], {n, m}); });
    run("permute", {random_tensor({b, m, n}, rng)}, [](const Inputs& x) { return ops::permute(x[0], {2, 0, 1}); });
    run("softmax", {random_tensor({m, n}, rng, true, -3, 3)}, [](const Inputs& x) { return ops::softmax(x[0]); });
    run("log_softmax", {random_tensor({m, n}, rng, true, -3, 3)}, [](const Inputs& x) { return ops::log_softmax(x[0]); });
    run("layer_norm", {random_tensor({b, m, n + 2}, rng, true, -2, 2), random_tensor({n + 2}, rng), random_tensor({n + 2}, rng)},
        [](const Inputs& x) { return ops::layer_norm(x[0], x[1], x[2], 1e-12); });
    run("gelu", {random_tensor({m, n}, rng, true, -3, 3)}, [](const Inputs& x) { return ops::gelu(x[0]); });
    run("tanh", {random_tensor({m, n}, rng, true, -2, 2)}, [](const Inputs& x) { return ops::tanh(x[0]); });
    run("sigmoid", {random_tensor({m, n}, rng, true, -4, 4)}, [](const Inputs& x) { return ops::sigmoid(x[0]); });
    run("exp", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::exp(x[0]); });
    run("log", {random_tensor({m, n}, rng, true, 0.5, 2.0)}, [](const Inputs& x) { return ops::log(x[0]); });
    run("abs", {oracle::away_from_zero({m, n}, rng)}, [](const Inputs& x) { return ops::abs(x[0]); });
    run("square", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::square(x[0]); });
    run("sum", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::sum(x[0]); });
    run("mean", {random_tensor({m, n}, rng)}, [](const Inputs& x) { return ops::mean(x[0]); });
    run("sum_last", {random_tensor({b, m, n}, rng)}, [](const Inputs& x) { return ops::sum_last(x[0]); });
    {
        std::vector<std::int32_t> ids(k + 2);
        for (auto& id : ids) id = static_cast<std::int32_t>(rng.below(m));
        run("gather_rows", {random_tensor({m, n}, rng)}, [ids](const Inputs& x) { return ops::gather_rows(x[0], ids); });
    }
    {
        const std::size_t t = rng.below(m);
        run("select_position", {random_tensor({b, m, n}, rng)},
            [t](const Inputs& x) { return ops::select_position(x[0], t); });
    }
    {
        std::vector<std::size_t> idx(m);
        for (auto& i : idx) i = rng.below(n);
        run("pick", {random_tensor({m, n}, rng)}, [idx](const Inputs& x) { return ops::pick(x[0], idx); });
    }
    run("concat_last", {random_tensor({b, m, n}, rng), random_tensor({b, m, k}, rng)},
        [](const Inputs& x) { return ops::concat_last({x[0], x[1]}); });
    {
        std::vector<double> mask(b * m, 0.0);
        for (std::size_t i = 0; i < b; ++i) {
            const std::size_t len = 1 + rng.below(m);
            for (std::size_t t = 0; t < len; ++t) mask[i * m + t] = 1.0;
        }
        run("masked_mean", {random_tensor({b, m, n}, rng)}, [mask](const Inputs& x) { return ops::masked_mean(x[0], mask); });
    }
    run("l2_normalize_rows", {oracle::away_from_zero({m, n}, rng)},
        [](const Inputs& x) { return ops::l2_normalize_rows(x[0]); });
    // Heads and objectives.
    HeadParams heads;
    heads.sts_weight = random_tensor({2 * n, 1}, rng);
    heads.sts_bias = random_tensor({1}, rng);
    heads.cross_attn = random_tensor({n, n}, rng);
    heads.para_weight = random_tensor({4 * n, 1}, rng);
    heads.para_bias = random_tensor({1}, rng);
    heads.sst_weight = random_tensor({n, kSentimentClasses}, rng);
    heads.sst_bias = random_tensor({kSentimentClasses}, rng);
    run("cosine", {oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng)},
        [](const Inputs& x) { return cosine(x[0], x[1]); });
    for (auto kind : {SimilarityHeadKind::sum_linear, SimilarityHeadKind::cos_scale, SimilarityHeadKind::cos_sigmoid,
                      SimilarityHeadKind::cos_sigmoid_scaled, SimilarityHeadKind::cross_attention}) {
        run("sts_score/" + to_string(kind),
            {oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng), heads.sts_weight,
             heads.sts_bias, heads.cross_attn},
            [kind](const Inputs& x) {
                HeadParams h;
                h.sts_weight = x[2];
                h.sts_bias = x[3];
                h.cross_attn = x[4];
                return sts_score(x[0], x[1], kind, h);
            });
    }
    run("paraphrase_logit", {oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng), heads.para_weight, heads.para_bias},
        [](const Inputs& x) {
            HeadParams h;
            h.para_weight = x[2];
            h.para_bias = x[3];
            return paraphrase_logit(x[0], x[1], h, ParaphraseFeatures::interaction);
        });
    run("sst_logits", {random_tensor({m, n}, rng), heads.sst_weight, heads.sst_bias}, [](const Inputs& x) {
        HeadParams h;
        h.sst_weight = x[1];
        h.sst_bias = x[2];
        return sst_logits(x[0], h);
    });
    {
        const Tensor targets = random_tensor({m, n}, rng, false, 0.0, 1.0);
        run("bce_loss", {random_tensor({m, n}, rng, true, -3, 3)},
            [targets](const Inputs& x) { return bce_loss(x[0], targets); });
        const Tensor goal = random_tensor({m}, rng, false, 0.0, 5.0);
        run("mse_loss", {random_tensor({m}, rng, true, 0.0, 5.0)}, [goal](const Inputs& x) { return mse_loss(x[0], goal); });
        std::vector<std::size_t> labels(m);
        for (auto& l : labels) l = rng.below(n);
        run("cross_entropy_loss", {random_tensor({m, n}, rng, true, -3, 3)},
            [labels](const Inputs& x) { return cross_entropy_loss(x[0], labels); });
    }
    const double tau = 0.05 + 0.5 * rng.uniform();
    run("unsup_simcse_loss", {oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng)},
        [tau](const Inputs& x) { return unsup_simcse_loss(x[0], x[1], tau); });
    run("sup_simcse_loss",
        {oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng), oracle::away_from_zero({m, n}, rng)},
        [tau](const Inputs& x) { return sup_simcse_loss(x[0], x[1], x[2], tau); });
    run("adaptive_dropout(eval)", {random_tensor({m, n}, rng), random_tensor({}, rng), random_tensor({}, rng)},
        [](const Inputs& x) {
            static Rng unused(0);
            return adaptive_dropout(x[0], x[0], x[1], x[2], Mode::eval, unused);
        });
    return out;
}

/// The straight-through op has a piecewise-constant forward, so finite
/// differences see zero slope. Its contract is that the upstream gradient
/// reaches `probs` unchanged; returns the largest deviation from that.
inline double straight_through_deviation(Rng& rng) {
    const std::size_t m = dim(rng), n = dim(rng);
    Tensor sample = Tensor::zeros({m, n});
    for (auto& v : sample.mutable_data()) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const Tensor probs = oracle::random_tensor({m, n}, rng, true, 0.1, 0.9);
    const Tensor weights = oracle::random_tensor({m, n}, rng, false);
    const Tensor out = ops::straight_through(sample, probs);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.numel(); ++i) worst = std::max(worst, std::fabs(out[i] - sample[i]));
    backward(ops::sum(ops::mul(out, weights)));
    for (std::size_t i = 0; i < probs.numel(); ++i) worst = std::max(worst, std::fabs(probs.grad()[i] - weights[i]));
    return worst;
}

struct EndToEndResult {
    Errors errors;
    std::size_t coordinates = 0;
};

/// Tiny 2-layer encoder; every trial draws weights, tokens, pooling and dropout
/// regime, then checks `samples` random parameter coordinates. Train-mode
/// passes reseed the mask generator per call so the masks stay fixed.
inline EndToEndResult run_encoder_trial(std::uint64_t trial_seed, std::size_t samples = 48) {
    Rng rng(trial_seed);
    EncoderConfig cfg;
    cfg.vocab_size = 12;
    cfg.hidden_dim = 8;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.ffn_dim = 16;
    cfg.max_seq_len = 6;
    cfg.pooling = rng.below(2) == 0 ? Pooling::cls_tanh : Pooling::mean;
    Mode mode = Mode::train;
    switch (rng.below(3)) {
        case 0: cfg.dropout = DropoutPolicy::standard(0.2); break;
        case 1: cfg.dropout = DropoutPolicy::curriculum_policy(0.3, 5.0, 10); break;
        default:
            cfg.dropout = DropoutPolicy::adaptive_policy(0.5 + rng.uniform(), rng.normal(0.0, 0.5));
            mode = Mode::eval;
            break;
    }
    Rng init_rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
    EncoderParams params = init_encoder(cfg, init_rng);
    // Larger-than-default weights give the check non-trivial curvature.
    for (auto& p : named_parameters(params)) {
        if (p.name.find("gate") != std::string::npos) continue;
        Tensor t = p.tensor;
        for (auto& v : t.mutable_data()) v += rng.normal(0.0, 0.3);
    }

    TokenBatch tokens;
    tokens.batch = 2;
    tokens.seq_len = 5;
    for (std::size_t i = 0; i < tokens.batch; ++i) {
        const std::size_t len = 3 + rng.below(3);
        for (std::size_t t = 0; t < tokens.seq_len; ++t) {
            const bool real = t < len;
            tokens.ids.push_back(real ? static_cast<std::int32_t>(rng.below(cfg.vocab_size)) : 0);
            tokens.mask.push_back(real ? 1 : 0);
        }
    }
    const Tensor weights = oracle::random_tensor({tokens.batch, cfg.hidden_dim}, rng, false);
    const std::uint64_t mask_seed = rng.next_u64();
    auto loss = [&] {
        Rng mask_rng(mask_seed);
        const ForwardContext ctx{mode, 3, &mask_rng};
        return ops::sum(ops::mul(encode(tokens, params, cfg, ctx).pooled, weights));
    };

    auto named = named_parameters(params);
    for (auto& p : named) p.tensor.zero_grad();
    backward(loss());

    EndToEndResult result;
    for (std::size_t s = 0; s < samples; ++s) {
        auto& p = named[rng.below(named.size())];
        const std::size_t idx = rng.below(p.tensor.numel());
        const double analytic = p.tensor.has_grad() ? p.tensor.grad()[idx] : 0.0;
        const double numeric = finite_diff_at([&] { return loss().item(); }, p.tensor, idx);
        result.errors.add(analytic, numeric);
        ++result.coordinates;
    }
    return result;
}

}  // namespace simcse::gradsuite
