// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace simcse {

/// Fraction of positions where prediction equals label.
double accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Pearson product-moment correlation. Throws NumericError when either input is
/// constant (the correlation is undefined).
double pearson(std::span<const double> x, std::span<const double> y);

/// Equal-width histogram over [lo, hi] with the last bin closed. Values outside
/// the range are clamped into the end bins.
std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins, double lo = 0.0, double hi = 5.0);

/// Joint histogram of gold versus predicted similarity scores.
struct Heatmap {
    std::size_t bins = 6;
    double lo = 0.0;
    double hi = 5.0;
    std::vector<std::size_t> counts;  // [true_bin * bins + pred_bin]
    std::size_t clamped = 0;          // pairs with a score moved into range

    std::size_t at(std::size_t true_bin, std::size_t pred_bin) const { return counts[true_bin * bins + pred_bin]; }
    std::size_t total() const;
    std::vector<std::size_t> true_marginal() const;
    std::vector<std::size_t> pred_marginal() const;
    /// Rows are gold bins, columns predicted bins; header cells are "lo:hi" edges.
    std::string to_csv() const;
};

Heatmap similarity_heatmap(std::span<const double> true_scores, std::span<const double> pred_scores,
                           std::size_t bins = 6);

}  // namespace simcse
