// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>

#include "simcse/error.hpp"
#include "simcse/objectives.hpp"
#include "simcse/ops.hpp"

namespace simcse {

Tensor bce_loss(const Tensor& logits, const Tensor& targets) {
    if (logits.numel() != targets.numel()) {
        throw ShapeError("bce_loss: logits " + shape_to_string(logits.shape()) + " vs targets " +
                         shape_to_string(targets.shape()));
    }
    const std::size_t n = logits.numel();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = logits[i], t = targets[i];
        if (!(t >= 0.0 && t <= 1.0)) throw DataError("bce_loss: target " + std::to_string(t) + " outside [0,1]");
        total += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
    }
    return make_result({}, {total / static_cast<double>(n)}, {logits, targets}, [logits, targets, n](std::span<const double> g) {
        if (!logits.requires_grad()) return;
        Tensor z = logits;
        auto gz = z.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
            const double v = logits[i];
            const double s = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
            gz[i] += g[0] * (s - targets[i]) / static_cast<double>(n);
        }
    });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape()) {
        throw ShapeError("mse_loss: prediction " + shape_to_string(pred.shape()) + " vs target " +
                         shape_to_string(target.shape()));
    }
    return ops::mean(ops::square(ops::sub(pred, target)));
}

Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels) {
    return ops::neg(ops::mean(ops::pick(ops::log_softmax(logits), labels)));
}

namespace {

void check_pair(const Tensor& h, const Tensor& other, const char* what) {
    if (h.rank() != 2 || other.shape() != h.shape()) {
        throw ShapeError(std::string("simcse loss: ") + what + " " + shape_to_string(other.shape()) +
                         " does not match anchors " + shape_to_string(h.shape()));
    }
}

// [N,M] cosine similarity matrix divided by tau.
Tensor scaled_similarity(const Tensor& h, const Tensor& others, double tau) {
    return ops::scale(ops::matmul(ops::l2_normalize_rows(h), ops::transpose_last(ops::l2_normalize_rows(others))),
                      1.0 / tau);
}

}  // namespace

Tensor unsup_simcse_loss(const Tensor& h, const Tensor& h_plus, double tau) {
    check_pair(h, h_plus, "positives");
    if (!(tau > 0.0)) throw ConfigError("temperature tau must be positive");
    const std::size_t n = h.dim(0);
    if (n < 2) throw ConfigError("unsupervised SimCSE needs at least 2 sentences per batch (no in-batch negatives)");
    std::vector<std::size_t> diag(n);
    std::iota(diag.begin(), diag.end(), std::size_t{0});
    return cross_entropy_loss(scaled_similarity(h, h_plus, tau), diag);
}

Tensor sup_simcse_loss(const Tensor& h, const Tensor& h_plus, const Tensor& h_minus, double tau) {
    check_pair(h, h_plus, "positives");
    check_pair(h, h_minus, "hard negatives");
    if (!(tau > 0.0)) throw ConfigError("temperature tau must be positive");
    const std::size_t n = h.dim(0);
    std::vector<std::size_t> diag(n);
    std::iota(diag.begin(), diag.end(), std::size_t{0});
    const Tensor logits = ops::concat_last({scaled_similarity(h, h_plus, tau), scaled_similarity(h, h_minus, tau)});
    return cross_entropy_loss(logits, diag);
}

}  // namespace simcse
