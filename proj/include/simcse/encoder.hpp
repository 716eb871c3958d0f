// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "simcse/dropout.hpp"
#include "simcse/rng.hpp"
#include "simcse/tensor.hpp"

namespace simcse {

enum class Pooling { cls_tanh, mean };

std::string to_string(Pooling pooling);
Pooling parse_pooling(std::string_view name);

/// Architecture of the miniature BERT encoder. Defaults are the toy
/// configuration; vocab_size comes from the vocabulary.
struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t hidden_dim = 32;
    std::size_t num_layers = 4;
    std::size_t num_heads = 4;
    std::size_t ffn_dim = 128;
    std::size_t max_seq_len = 64;
    double layer_norm_eps = 1e-12;
    DropoutPolicy dropout = DropoutPolicy::standard(0.3);
    Pooling pooling = Pooling::cls_tanh;

    void validate() const;
    std::size_t head_dim() const { return hidden_dim / num_heads; }
};

struct LayerParams {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor attn_ln_gamma, attn_ln_beta;
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor ffn_ln_gamma, ffn_ln_beta;
};

struct EncoderParams {
    Tensor token_embeddings;     // [vocab, d]
    Tensor position_embeddings;  // [max_seq_len, d]
    Tensor embed_ln_gamma, embed_ln_beta;
    std::vector<LayerParams> layers;
    Tensor pooler_weight, pooler_bias;
    // One standout gate per dropout site (embeddings, then attention and FFN of
    // each layer); empty unless the dropout policy is adaptive.
    std::vector<StandoutGate> gates;
};

// A trainable tensor with its stable name and whether weight decay applies.
struct NamedParam {
    std::string name;
    Tensor tensor;
    bool decay = true;
};

/// Weights ~ N(0, 0.02), biases zero, layer-norm gamma 1 and beta 0.
EncoderParams init_encoder(const EncoderConfig& config, Rng& rng);

/// Adds or removes standout gates so the parameter set matches `config.dropout`.
void sync_dropout_gates(EncoderParams& params, const EncoderConfig& config);

std::vector<NamedParam> named_parameters(const EncoderParams& params);
std::size_t parameter_count(const EncoderParams& params);

// Padded token ids and attention mask, both [batch, seq_len] row-major.
struct TokenBatch {
    std::size_t batch = 0;
    std::size_t seq_len = 0;
    std::vector<std::int32_t> ids;
    std::vector<std::uint8_t> mask;
};

// Per-call dropout state: mode, training step for schedules, and mask source.
struct ForwardContext {
    Mode mode = Mode::eval;
    std::int64_t step = 0;
    Rng* rng = nullptr;
};

/// Token + position embeddings, layer-norm, dropout -> [B,T,d].
Tensor embed(const TokenBatch& tokens, const EncoderParams& params, const EncoderConfig& config,
             const ForwardContext& ctx);

/// Scaled dot-product self-attention over H heads with masked keys at -inf,
/// output projection, dropout, residual add and layer-norm. When `attention` is
/// given it receives the probabilities, shape [B*H, T, T].
Tensor multi_head_attention(const Tensor& hidden, std::span<const std::uint8_t> mask, const LayerParams& layer,
                            const EncoderConfig& config, const ForwardContext& ctx, const StandoutGate* gate = nullptr,
                            Tensor* attention = nullptr);

/// GELU feed-forward block with dropout, residual add and layer-norm.
Tensor feed_forward(const Tensor& hidden, const LayerParams& layer, const EncoderConfig& config,
                    const ForwardContext& ctx, const StandoutGate* gate = nullptr);

struct EncoderOutput {
    Tensor sequence;  // [B,T,d]
    Tensor pooled;    // [B,d]
};

EncoderOutput encode(const TokenBatch& tokens, const EncoderParams& params, const EncoderConfig& config,
                     const ForwardContext& ctx);

}  // namespace simcse
