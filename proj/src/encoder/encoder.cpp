// SPDX-License-Identifier: Apache-2.0
#include "simcse/encoder.hpp"

#include <cmath>
#include <limits>

#include "simcse/error.hpp"
#include "simcse/ops.hpp"

namespace simcse {

std::string to_string(Pooling pooling) { return pooling == Pooling::mean ? "mean" : "cls_tanh"; }

Pooling parse_pooling(std::string_view name) {
    if (name == "cls_tanh") return Pooling::cls_tanh;
    if (name == "mean") return Pooling::mean;
    throw ConfigError("unknown pooling '" + std::string(name) + "' (expected cls_tanh or mean)");
}

void EncoderConfig::validate() const {
    if (vocab_size == 0) throw ConfigError("encoder.vocab_size must be positive");
    if (hidden_dim == 0 || num_layers == 0 || num_heads == 0 || ffn_dim == 0) {
        throw ConfigError("encoder dimensions must be positive");
    }
    if (hidden_dim % num_heads != 0) {
        throw ConfigError("encoder.hidden_dim (" + std::to_string(hidden_dim) + ") must be divisible by num_heads (" +
                          std::to_string(num_heads) + ")");
    }
    if (max_seq_len < 2) throw ConfigError("encoder.max_seq_len must be at least 2");
    if (!(layer_norm_eps > 0.0)) throw ConfigError("encoder.layer_norm_eps must be positive");
    dropout.validate();
}

namespace {

Tensor normal_tensor(Shape shape, Rng& rng) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.normal(0.0, 0.02);
    return Tensor::from(std::move(shape), std::move(v), true);
}

Tensor zeros_param(Shape shape) { return Tensor::zeros(std::move(shape), true); }
Tensor ones_param(Shape shape) { return Tensor::full(std::move(shape), 1.0, true); }

std::size_t dropout_sites(const EncoderConfig& config) { return 1 + 2 * config.num_layers; }

}  // namespace

EncoderParams init_encoder(const EncoderConfig& config, Rng& rng) {
    config.validate();
    const std::size_t d = config.hidden_dim, f = config.ffn_dim;
    EncoderParams p;
    p.token_embeddings = normal_tensor({config.vocab_size, d}, rng);
    p.position_embeddings = normal_tensor({config.max_seq_len, d}, rng);
    p.embed_ln_gamma = ones_param({d});
    p.embed_ln_beta = zeros_param({d});
    for (std::size_t l = 0; l < config.num_layers; ++l) {
        LayerParams layer;
        layer.wq = normal_tensor({d, d}, rng);
        layer.bq = zeros_param({d});
        layer.wk = normal_tensor({d, d}, rng);
        layer.bk = zeros_param({d});
        layer.wv = normal_tensor({d, d}, rng);
        layer.bv = zeros_param({d});
        layer.wo = normal_tensor({d, d}, rng);
        layer.bo = zeros_param({d});
        layer.attn_ln_gamma = ones_param({d});
        layer.attn_ln_beta = zeros_param({d});
        layer.ffn_w1 = normal_tensor({d, f}, rng);
        layer.ffn_b1 = zeros_param({f});
        layer.ffn_w2 = normal_tensor({f, d}, rng);
        layer.ffn_b2 = zeros_param({d});
        layer.ffn_ln_gamma = ones_param({d});
        layer.ffn_ln_beta = zeros_param({d});
        p.layers.push_back(std::move(layer));
    }
    p.pooler_weight = normal_tensor({d, d}, rng);
    p.pooler_bias = zeros_param({d});
    sync_dropout_gates(p, config);
    return p;
}

void sync_dropout_gates(EncoderParams& params, const EncoderConfig& config) {
    if (config.dropout.kind != DropoutKind::adaptive) {
        params.gates.clear();
        return;
    }
    const auto init = config.dropout.adaptive.value_or(StandoutInit{});
    if (params.gates.size() == dropout_sites(config)) return;
    params.gates.clear();
    for (std::size_t i = 0; i < dropout_sites(config); ++i) {
        params.gates.push_back({Tensor::scalar(init.alpha, true), Tensor::scalar(init.beta, true)});
    }
}

std::vector<NamedParam> named_parameters(const EncoderParams& p) {
    std::vector<NamedParam> out;
    out.push_back({"embeddings.token", p.token_embeddings, true});
    out.push_back({"embeddings.position", p.position_embeddings, true});
    out.push_back({"embeddings.ln.gamma", p.embed_ln_gamma, false});
    out.push_back({"embeddings.ln.beta", p.embed_ln_beta, false});
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& L = p.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        out.push_back({pre + "attn.q.weight", L.wq, true});
        out.push_back({pre + "attn.q.bias", L.bq, false});
        out.push_back({pre + "attn.k.weight", L.wk, true});
        out.push_back({pre + "attn.k.bias", L.bk, false});
        out.push_back({pre + "attn.v.weight", L.wv, true});
        out.push_back({pre + "attn.v.bias", L.bv, false});
        out.push_back({pre + "attn.out.weight", L.wo, true});
        out.push_back({pre + "attn.out.bias", L.bo, false});
        out.push_back({pre + "attn.ln.gamma", L.attn_ln_gamma, false});
        out.push_back({pre + "attn.ln.beta", L.attn_ln_beta, false});
        out.push_back({pre + "ffn.in.weight", L.ffn_w1, true});
        out.push_back({pre + "ffn.in.bias", L.ffn_b1, false});
        out.push_back({pre + "ffn.out.weight", L.ffn_w2, true});
        out.push_back({pre + "ffn.out.bias", L.ffn_b2, false});
        out.push_back({pre + "ffn.ln.gamma", L.ffn_ln_gamma, false});
        out.push_back({pre + "ffn.ln.beta", L.ffn_ln_beta, false});
    }
    out.push_back({"pooler.weight", p.pooler_weight, true});
    out.push_back({"pooler.bias", p.pooler_bias, false});
    for (std::size_t i = 0; i < p.gates.size(); ++i) {
        out.push_back({"dropout.gate" + std::to_string(i) + ".alpha", p.gates[i].alpha, false});
        out.push_back({"dropout.gate" + std::to_string(i) + ".beta", p.gates[i].beta, false});
    }
    return out;
}

std::size_t parameter_count(const EncoderParams& params) {
    std::size_t n = 0;
    for (const auto& p : named_parameters(params)) n += p.tensor.numel();
    return n;
}

namespace {

void check_batch(const TokenBatch& tokens, const EncoderConfig& config) {
    if (tokens.batch == 0 || tokens.seq_len == 0) throw ShapeError("empty token batch");
    if (tokens.ids.size() != tokens.batch * tokens.seq_len || tokens.mask.size() != tokens.ids.size()) {
        throw ShapeError("token batch ids/mask do not match [" + std::to_string(tokens.batch) + "," +
                         std::to_string(tokens.seq_len) + "]");
    }
    if (tokens.seq_len > config.max_seq_len) {
        throw ShapeError("sequence length " + std::to_string(tokens.seq_len) + " exceeds max_seq_len " +
                         std::to_string(config.max_seq_len));
    }
}

Rng& require_rng(const ForwardContext& ctx) {
    if (!ctx.rng) throw ConfigError("train-mode forward pass needs a random generator");
    return *ctx.rng;
}

Tensor dropout_site(const Tensor& x, const EncoderConfig& config, const ForwardContext& ctx, const StandoutGate* gate) {
    if (ctx.mode == Mode::eval && config.dropout.kind != DropoutKind::adaptive) return x;
    static Rng unused_rng(0);
    Rng& rng = ctx.mode == Mode::train ? require_rng(ctx) : unused_rng;
    return apply_dropout(x, config.dropout, gate, ctx.mode, ctx.step, rng);
}

const StandoutGate* gate_at(const EncoderParams& params, std::size_t site) {
    return site < params.gates.size() ? &params.gates[site] : nullptr;
}

}  // namespace

Tensor embed(const TokenBatch& tokens, const EncoderParams& params, const EncoderConfig& config,
             const ForwardContext& ctx) {
    check_batch(tokens, config);
    const std::size_t b = tokens.batch, t = tokens.seq_len, d = config.hidden_dim;
    std::vector<std::int32_t> positions(b * t);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < t; ++j) positions[i * t + j] = static_cast<std::int32_t>(j);
    Tensor summed = ops::add(ops::gather_rows(params.token_embeddings, tokens.ids),
                             ops::gather_rows(params.position_embeddings, positions));
    Tensor normed = ops::layer_norm(summed, params.embed_ln_gamma, params.embed_ln_beta, config.layer_norm_eps);
    Tensor dropped = dropout_site(normed, config, ctx, gate_at(params, 0));
    return ops::reshape(dropped, {b, t, d});
}

namespace {

// [B*T, d] -> [B*H, T, dh]
Tensor split_heads(const Tensor& x, std::size_t b, std::size_t t, std::size_t h, std::size_t dh) {
    return ops::reshape(ops::permute(ops::reshape(x, {b, t, h, dh}), {0, 2, 1, 3}), {b * h, t, dh});
}

// [B*H, T, dh] -> [B*T, d]
Tensor merge_heads(const Tensor& x, std::size_t b, std::size_t t, std::size_t h, std::size_t dh) {
    return ops::reshape(ops::permute(ops::reshape(x, {b, h, t, dh}), {0, 2, 1, 3}), {b * t, h * dh});
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) { return ops::add_bias(ops::matmul(x, w), bias); }

}  // namespace

Tensor multi_head_attention(const Tensor& hidden, std::span<const std::uint8_t> mask, const LayerParams& layer,
                            const EncoderConfig& config, const ForwardContext& ctx, const StandoutGate* gate,
                            Tensor* attention) {
    if (hidden.rank() != 3 || hidden.dim(2) != config.hidden_dim) {
        throw ShapeError("multi_head_attention: hidden states " + shape_to_string(hidden.shape()) +
                         " do not match hidden_dim " + std::to_string(config.hidden_dim));
    }
    const std::size_t b = hidden.dim(0), t = hidden.dim(1), d = config.hidden_dim;
    const std::size_t h = config.num_heads, dh = config.head_dim();
    if (mask.size() != b * t) throw ShapeError("multi_head_attention: mask size does not match batch");

    const Tensor x = ops::reshape(hidden, {b * t, d});
    const Tensor q = split_heads(linear(x, layer.wq, layer.bq), b, t, h, dh);
    const Tensor k = split_heads(linear(x, layer.wk, layer.bk), b, t, h, dh);
    const Tensor v = split_heads(linear(x, layer.wv, layer.bv), b, t, h, dh);

    Tensor scores = ops::scale(ops::bmm(q, ops::transpose_last(k)), 1.0 / std::sqrt(static_cast<double>(dh)));
    std::vector<double> key_bias(b * h * t * t, 0.0);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t hi = 0; hi < h; ++hi)
            for (std::size_t qi = 0; qi < t; ++qi)
                for (std::size_t ki = 0; ki < t; ++ki)
                    if (!mask[bi * t + ki]) key_bias[((bi * h + hi) * t + qi) * t + ki] = neg_inf;
    const Tensor probs = ops::softmax(ops::add(scores, Tensor::from({b * h, t, t}, std::move(key_bias))));
    if (attention) *attention = probs;

    const Tensor context = merge_heads(ops::bmm(probs, v), b, t, h, dh);
    Tensor projected = linear(context, layer.wo, layer.bo);
    projected = dropout_site(projected, config, ctx, gate);
    const Tensor out = ops::layer_norm(ops::add(x, projected), layer.attn_ln_gamma, layer.attn_ln_beta,
                                       config.layer_norm_eps);
    return ops::reshape(out, {b, t, d});
}

Tensor feed_forward(const Tensor& hidden, const LayerParams& layer, const EncoderConfig& config,
                    const ForwardContext& ctx, const StandoutGate* gate) {
    const std::size_t b = hidden.dim(0), t = hidden.dim(1), d = config.hidden_dim;
    const Tensor x = ops::reshape(hidden, {b * t, d});
    Tensor inner = ops::gelu(linear(x, layer.ffn_w1, layer.ffn_b1));
    Tensor out = linear(inner, layer.ffn_w2, layer.ffn_b2);
    out = dropout_site(out, config, ctx, gate);
    return ops::reshape(ops::layer_norm(ops::add(x, out), layer.ffn_ln_gamma, layer.ffn_ln_beta, config.layer_norm_eps),
                        {b, t, d});
}

EncoderOutput encode(const TokenBatch& tokens, const EncoderParams& params, const EncoderConfig& config,
                     const ForwardContext& ctx) {
    if (params.layers.size() != config.num_layers) throw ShapeError("encoder parameters do not match num_layers");
    Tensor hidden = embed(tokens, params, config, ctx);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        hidden = multi_head_attention(hidden, tokens.mask, params.layers[l], config, ctx, gate_at(params, 1 + 2 * l));
        hidden = feed_forward(hidden, params.layers[l], config, ctx, gate_at(params, 2 + 2 * l));
    }
    EncoderOutput out;
    out.sequence = hidden;
    if (config.pooling == Pooling::cls_tanh) {
        const Tensor cls = ops::select_position(hidden, 0);
        out.pooled = ops::tanh(linear(cls, params.pooler_weight, params.pooler_bias));
    } else {
        std::vector<double> weights(tokens.mask.begin(), tokens.mask.end());
        out.pooled = ops::masked_mean(hidden, weights);
    }
    return out;
}

}  // namespace simcse
