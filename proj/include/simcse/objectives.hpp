// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simcse/encoder.hpp"
#include "simcse/rng.hpp"
#include "simcse/tensor.hpp"

namespace simcse {

// The five similarity heads compared for STS.
enum class SimilarityHeadKind { sum_linear, cos_scale, cos_sigmoid, cos_sigmoid_scaled, cross_attention };

// Feature map fed to the paraphrase classifier.
enum class ParaphraseFeatures {
    interaction,  // [a; b; |a-b|; a*b]
    concat,       // [a; b]
};

enum class SstLoss { bce, cross_entropy };

std::string to_string(SimilarityHeadKind kind);
SimilarityHeadKind parse_similarity_head(std::string_view name);
std::string to_string(ParaphraseFeatures features);
ParaphraseFeatures parse_paraphrase_features(std::string_view name);
std::string to_string(SstLoss loss);
SstLoss parse_sst_loss(std::string_view name);

struct HeadConfig {
    SimilarityHeadKind sts_head = SimilarityHeadKind::cos_sigmoid;
    ParaphraseFeatures paraphrase_features = ParaphraseFeatures::interaction;
};

constexpr std::size_t kSentimentClasses = 5;

struct HeadParams {
    Tensor sst_weight, sst_bias;    // [d,5], [5]
    Tensor para_weight, para_bias;  // [4d,1] or [2d,1], [1]
    Tensor sts_weight, sts_bias;    // [2d,1], [1]
    Tensor cross_attn;              // [d,d]
};

HeadParams init_heads(std::size_t hidden_dim, const HeadConfig& config, Rng& rng);
void reinit_sst_head(HeadParams& heads, std::size_t hidden_dim, Rng& rng);
void reinit_paraphrase_head(HeadParams& heads, std::size_t hidden_dim, const HeadConfig& config, Rng& rng);
void reinit_sts_head(HeadParams& heads, std::size_t hidden_dim, Rng& rng);

std::vector<NamedParam> named_parameters(const HeadParams& heads);
std::vector<NamedParam> sst_head_parameters(const HeadParams& heads);
std::vector<NamedParam> paraphrase_head_parameters(const HeadParams& heads);
/// Parameters the selected STS head actually uses (none for the cosine heads).
std::vector<NamedParam> sts_head_parameters(const HeadParams& heads, SimilarityHeadKind kind);

/// [B,d] -> [B,5] unnormalized class scores.
Tensor sst_logits(const Tensor& pooled, const HeadParams& heads);
/// [B,d] x [B,d] -> [B] paraphrase logit.
Tensor paraphrase_logit(const Tensor& a, const Tensor& b, const HeadParams& heads, ParaphraseFeatures features);
/// [B,d] x [B,d] -> [B] similarity on the 0..5 score scale (sum_linear is unbounded).
Tensor sts_score(const Tensor& a, const Tensor& b, SimilarityHeadKind kind, const HeadParams& heads);

/// Row-wise cosine similarity [B,d] x [B,d] -> [B]; NumericError on zero rows.
Tensor cosine(const Tensor& a, const Tensor& b);
double cosine(std::span<const double> a, std::span<const double> b);

/// Mean of max(z,0) - z t + log(1 + exp(-|z|)); targets must lie in [0,1].
Tensor bce_loss(const Tensor& logits, const Tensor& targets);
Tensor mse_loss(const Tensor& pred, const Tensor& target);
/// Mean softmax cross-entropy of [N,C] logits against class indices.
Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels);

/// In-batch InfoNCE with cosine similarity and temperature tau; needs N >= 2.
Tensor unsup_simcse_loss(const Tensor& h, const Tensor& h_plus, double tau);
/// InfoNCE whose denominator also holds every in-batch hard negative.
Tensor sup_simcse_loss(const Tensor& h, const Tensor& h_plus, const Tensor& h_minus, double tau);

}  // namespace simcse
