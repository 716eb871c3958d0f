// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <numeric>

#include "simcse/data.hpp"
#include "simcse/error.hpp"

namespace simcse {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

TokenBatch pad_batch(const std::vector<std::vector<std::int32_t>>& rows, std::size_t max_seq_len) {
    TokenBatch batch;
    batch.batch = rows.size();
    for (const auto& r : rows) batch.seq_len = std::max(batch.seq_len, r.size());
    batch.seq_len = std::min(batch.seq_len, max_seq_len);
    batch.ids.assign(batch.batch * batch.seq_len, kPadId);
    batch.mask.assign(batch.batch * batch.seq_len, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t len = std::min(rows[i].size(), batch.seq_len);
        for (std::size_t j = 0; j < len; ++j) {
            batch.ids[i * batch.seq_len + j] = rows[i][j];
            batch.mask[i * batch.seq_len + j] = 1;
        }
    }
    return batch;
}

namespace {

std::vector<std::size_t> batch_order(std::size_t n, Rng* rng, bool shuffle) {
    if (!shuffle) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        return order;
    }
    if (!rng) throw ConfigError("shuffled batching needs a random generator");
    return shuffled_indices(n, *rng);
}

}  // namespace

std::vector<Batch> make_batches(std::span<const Example> examples, std::size_t batch_size, const Vocab& vocab,
                                std::size_t max_seq_len, Rng* rng, bool shuffle) {
    if (batch_size == 0) throw ConfigError("batch size must be at least 1");
    if (examples.empty()) return {};
    const Schema schema = schema_of(examples.front());
    for (const auto& e : examples) {
        if (schema_of(e) != schema) throw DataError("make_batches: examples mix schemas");
    }
    const auto order = batch_order(examples.size(), rng, shuffle);
    auto tok = [&](const std::string& s) { return tokenize(s, vocab, max_seq_len); };

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<std::vector<std::int32_t>> a, b, c;
        std::vector<int> labels;
        std::vector<double> targets;
        for (std::size_t k = start; k < end; ++k) {
            std::visit(
                [&](const auto& e) {
                    using T = std::decay_t<decltype(e)>;
                    if constexpr (std::is_same_v<T, Classification>) {
                        a.push_back(tok(e.text));
                        labels.push_back(e.label);
                    } else if constexpr (std::is_same_v<T, PairLabeled>) {
                        a.push_back(tok(e.text_a));
                        b.push_back(tok(e.text_b));
                        targets.push_back(static_cast<double>(e.label));
                    } else if constexpr (std::is_same_v<T, PairScored>) {
                        a.push_back(tok(e.text_a));
                        b.push_back(tok(e.text_b));
                        targets.push_back(e.score);
                    } else {
                        a.push_back(tok(e.anchor));
                        b.push_back(tok(e.positive));
                        c.push_back(tok(e.negative));
                    }
                },
                examples[order[k]]);
        }
        switch (schema) {
            case Schema::classification:
                batches.emplace_back(SentenceBatch{pad_batch(a, max_seq_len), std::move(labels)});
                break;
            case Schema::pair_labeled:
            case Schema::pair_scored:
                batches.emplace_back(PairBatch{pad_batch(a, max_seq_len), pad_batch(b, max_seq_len), std::move(targets)});
                break;
            case Schema::triplet:
                batches.emplace_back(TripletBatch{pad_batch(a, max_seq_len), pad_batch(b, max_seq_len), pad_batch(c, max_seq_len)});
                break;
        }
    }
    return batches;
}

std::vector<TokenBatch> make_sentence_batches(std::span<const std::string> sentences, std::size_t batch_size,
                                              const Vocab& vocab, std::size_t max_seq_len, Rng* rng, bool shuffle) {
    if (batch_size == 0) throw ConfigError("batch size must be at least 1");
    const auto order = batch_order(sentences.size(), rng, shuffle);
    std::vector<TokenBatch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<std::vector<std::int32_t>> rows;
        for (std::size_t k = start; k < end; ++k) rows.push_back(tokenize(sentences[order[k]], vocab, max_seq_len));
        batches.push_back(pad_batch(rows, max_seq_len));
    }
    return batches;
}

}  // namespace simcse
