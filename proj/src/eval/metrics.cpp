// SPDX-License-Identifier: Apache-2.0
#include "simcse/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "simcse/error.hpp"
#include "simcse/format.hpp"

namespace simcse {

double accuracy(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw ShapeError("accuracy: prediction and label counts differ");
    if (predictions.empty()) throw DataError("accuracy: no examples");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("pearson: input lengths differ");
    if (x.size() < 2) throw DataError("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericError("pearson correlation undefined: an input has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::size_t bin_of(double v, std::size_t bins, double lo, double hi) {
    const double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    if (!(t > 0.0)) return 0;
    return std::min(bins - 1, static_cast<std::size_t>(t));
}

bool out_of_range(double v, double lo, double hi) { return !(v >= lo && v <= hi); }

}  // namespace

std::vector<std::size_t> histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw ConfigError("histogram: need bins >= 1 and hi > lo");
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) ++counts[bin_of(v, bins, lo, hi)];
    return counts;
}

std::size_t Heatmap::total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

std::vector<std::size_t> Heatmap::true_marginal() const {
    std::vector<std::size_t> m(bins, 0);
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j) m[i] += at(i, j);
    return m;
}

std::vector<std::size_t> Heatmap::pred_marginal() const {
    std::vector<std::size_t> m(bins, 0);
    for (std::size_t i = 0; i < bins; ++i)
        for (std::size_t j = 0; j < bins; ++j) m[j] += at(i, j);
    return m;
}

std::string Heatmap::to_csv() const {
    auto edge = [&](std::size_t k) {
        const double w = (hi - lo) / static_cast<double>(bins);
        return format_fixed(lo + w * static_cast<double>(k), 3) + ":" +
               format_fixed(k + 1 == bins ? hi : lo + w * static_cast<double>(k + 1), 3);
    };
    std::string csv = "true\\pred";
    for (std::size_t j = 0; j < bins; ++j) csv += "," + edge(j);
    csv += "\n";
    for (std::size_t i = 0; i < bins; ++i) {
        csv += edge(i);
        for (std::size_t j = 0; j < bins; ++j) csv += "," + std::to_string(at(i, j));
        csv += "\n";
    }
    return csv;
}

Heatmap similarity_heatmap(std::span<const double> true_scores, std::span<const double> pred_scores, std::size_t bins) {
    if (true_scores.size() != pred_scores.size()) throw ShapeError("similarity_heatmap: input lengths differ");
    if (bins == 0) throw ConfigError("similarity_heatmap: bins must be positive");
    Heatmap h;
    h.bins = bins;
    h.counts.assign(bins * bins, 0);
    for (std::size_t i = 0; i < true_scores.size(); ++i) {
        if (out_of_range(true_scores[i], h.lo, h.hi) || out_of_range(pred_scores[i], h.lo, h.hi)) ++h.clamped;
        ++h.counts[bin_of(true_scores[i], bins, h.lo, h.hi) * bins + bin_of(pred_scores[i], bins, h.lo, h.hi)];
    }
    return h;
}

}  // namespace simcse
