// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "simcse/error.hpp"
#include "simcse/objectives.hpp"
#include "simcse/ops.hpp"

namespace simcse {

std::string to_string(SimilarityHeadKind kind) {
    switch (kind) {
        case SimilarityHeadKind::sum_linear: return "sum_linear";
        case SimilarityHeadKind::cos_scale: return "cos_scale";
        case SimilarityHeadKind::cos_sigmoid: return "cos_sigmoid";
        case SimilarityHeadKind::cos_sigmoid_scaled: return "cos_sigmoid_scaled";
        case SimilarityHeadKind::cross_attention: return "cross_attention";
    }
    return "cos_sigmoid";
}

SimilarityHeadKind parse_similarity_head(std::string_view name) {
    for (auto kind : {SimilarityHeadKind::sum_linear, SimilarityHeadKind::cos_scale, SimilarityHeadKind::cos_sigmoid,
                      SimilarityHeadKind::cos_sigmoid_scaled, SimilarityHeadKind::cross_attention}) {
        if (name == to_string(kind)) return kind;
    }
    throw ConfigError("unknown sts.head '" + std::string(name) +
                      "' (expected sum_linear, cos_scale, cos_sigmoid, cos_sigmoid_scaled or cross_attention)");
}

std::string to_string(ParaphraseFeatures features) {
    return features == ParaphraseFeatures::concat ? "concat" : "interaction";
}

ParaphraseFeatures parse_paraphrase_features(std::string_view name) {
    if (name == "interaction") return ParaphraseFeatures::interaction;
    if (name == "concat") return ParaphraseFeatures::concat;
    throw ConfigError("unknown paraphrase.features '" + std::string(name) + "' (expected interaction or concat)");
}

std::string to_string(SstLoss loss) { return loss == SstLoss::cross_entropy ? "cross_entropy" : "bce"; }

SstLoss parse_sst_loss(std::string_view name) {
    if (name == "bce") return SstLoss::bce;
    if (name == "cross_entropy") return SstLoss::cross_entropy;
    throw ConfigError("unknown train.sst_loss '" + std::string(name) + "' (expected bce or cross_entropy)");
}

namespace {

Tensor normal_param(Shape shape, Rng& rng) {
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = rng.normal(0.0, 0.02);
    return Tensor::from(std::move(shape), std::move(v), true);
}

std::size_t paraphrase_width(std::size_t d, ParaphraseFeatures features) {
    return features == ParaphraseFeatures::interaction ? 4 * d : 2 * d;
}

}  // namespace

void reinit_sst_head(HeadParams& heads, std::size_t d, Rng& rng) {
    heads.sst_weight = normal_param({d, kSentimentClasses}, rng);
    heads.sst_bias = Tensor::zeros({kSentimentClasses}, true);
}

void reinit_paraphrase_head(HeadParams& heads, std::size_t d, const HeadConfig& config, Rng& rng) {
    heads.para_weight = normal_param({paraphrase_width(d, config.paraphrase_features), 1}, rng);
    heads.para_bias = Tensor::zeros({1}, true);
}

void reinit_sts_head(HeadParams& heads, std::size_t d, Rng& rng) {
    heads.sts_weight = normal_param({2 * d, 1}, rng);
    heads.sts_bias = Tensor::zeros({1}, true);
    heads.cross_attn = normal_param({d, d}, rng);
}

HeadParams init_heads(std::size_t hidden_dim, const HeadConfig& config, Rng& rng) {
    HeadParams heads;
    reinit_sst_head(heads, hidden_dim, rng);
    reinit_paraphrase_head(heads, hidden_dim, config, rng);
    reinit_sts_head(heads, hidden_dim, rng);
    return heads;
}

std::vector<NamedParam> sst_head_parameters(const HeadParams& h) {
    return {{"head.sst.weight", h.sst_weight, true}, {"head.sst.bias", h.sst_bias, false}};
}

std::vector<NamedParam> paraphrase_head_parameters(const HeadParams& h) {
    return {{"head.para.weight", h.para_weight, true}, {"head.para.bias", h.para_bias, false}};
}

std::vector<NamedParam> sts_head_parameters(const HeadParams& h, SimilarityHeadKind kind) {
    if (kind == SimilarityHeadKind::sum_linear) {
        return {{"head.sts.weight", h.sts_weight, true}, {"head.sts.bias", h.sts_bias, false}};
    }
    if (kind == SimilarityHeadKind::cross_attention) return {{"head.sts.cross_attn", h.cross_attn, true}};
    return {};
}

std::vector<NamedParam> named_parameters(const HeadParams& h) {
    auto out = sst_head_parameters(h);
    for (auto& p : paraphrase_head_parameters(h)) out.push_back(std::move(p));
    out.push_back({"head.sts.weight", h.sts_weight, true});
    out.push_back({"head.sts.bias", h.sts_bias, false});
    out.push_back({"head.sts.cross_attn", h.cross_attn, true});
    return out;
}

Tensor sst_logits(const Tensor& pooled, const HeadParams& heads) {
    return ops::add_bias(ops::matmul(pooled, heads.sst_weight), heads.sst_bias);
}

Tensor paraphrase_logit(const Tensor& a, const Tensor& b, const HeadParams& heads, ParaphraseFeatures features) {
    if (a.shape() != b.shape()) {
        throw ShapeError("paraphrase_logit: embeddings " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + " differ");
    }
    const Tensor feats = features == ParaphraseFeatures::interaction
                             ? ops::concat_last({a, b, ops::abs(ops::sub(a, b)), ops::mul(a, b)})
                             : ops::concat_last({a, b});
    const Tensor logit = ops::add_bias(ops::matmul(feats, heads.para_weight), heads.para_bias);
    return ops::reshape(logit, {a.dim(0)});
}

Tensor cosine(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape() || a.rank() != 2) {
        throw ShapeError("cosine: expected two [B,d] tensors, got " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    return ops::sum_last(ops::mul(ops::l2_normalize_rows(a), ops::l2_normalize_rows(b)));
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("cosine: vector lengths differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("cosine similarity of a zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Tensor sts_score(const Tensor& a, const Tensor& b, SimilarityHeadKind kind, const HeadParams& heads) {
    if (a.shape() != b.shape() || a.rank() != 2) {
        throw ShapeError("sts_score: expected two [B,d] tensors, got " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    switch (kind) {
        case SimilarityHeadKind::sum_linear: {
            const Tensor out = ops::add_bias(ops::matmul(ops::concat_last({a, b}), heads.sts_weight), heads.sts_bias);
            return ops::reshape(out, {a.dim(0)});
        }
        case SimilarityHeadKind::cos_scale: return ops::scale(ops::add_scalar(cosine(a, b), 1.0), 2.5);
        case SimilarityHeadKind::cos_sigmoid: return ops::scale(ops::sigmoid(cosine(a, b)), 5.0);
        case SimilarityHeadKind::cos_sigmoid_scaled: return ops::scale(ops::sigmoid(ops::scale(cosine(a, b), 5.0)), 5.0);
        case SimilarityHeadKind::cross_attention: {
            const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(a.dim(1)));
            const Tensor bilinear = ops::sum_last(ops::mul(ops::matmul(a, heads.cross_attn), b));
            return ops::scale(ops::sigmoid(ops::scale(bilinear, inv_sqrt_d)), 5.0);
        }
    }
    throw ConfigError("unhandled similarity head");
}

}  // namespace simcse
