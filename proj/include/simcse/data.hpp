// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "simcse/encoder.hpp"
#include "simcse/rng.hpp"

namespace simcse {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kClsId = 1;
inline constexpr std::int32_t kSepId = 2;
inline constexpr std::int32_t kUnkId = 3;
inline constexpr std::int32_t kReservedTokens = 4;

/// Word-level vocabulary. Ids 0..3 are [PAD], [CLS], [SEP], [UNK]; corpus words
/// follow in descending frequency, ties broken lexicographically.
class Vocab {
public:
    Vocab();

    static Vocab build(std::span<const std::string> sentences, std::size_t min_count = 1);
    /// Token list indexed by id, reserved tokens first.
    static Vocab from_tokens(std::vector<std::string> tokens);

    std::int32_t id(std::string_view token) const;
    const std::string& token(std::int32_t id) const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    /// Vocab file: one token per line; the line index (from 0) is the id.
    void save(const std::filesystem::path& path) const;
    static Vocab load(const std::filesystem::path& path);

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::int32_t> index_;
};

/// Lowercases and splits on whitespace; every punctuation character becomes its
/// own word.
std::vector<std::string> split_words(std::string_view text);

/// [CLS] words... [SEP], unknown words mapped to [UNK], truncated so the result
/// holds at most max_seq_len ids (the final [SEP] is kept).
std::vector<std::int32_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_seq_len);

enum class Schema { classification, pair_labeled, pair_scored, triplet };

std::string to_string(Schema schema);
Schema parse_schema(std::string_view name);

struct Classification {
    std::string text;
    int label = 0;  // 0..4

    friend bool operator==(const Classification&, const Classification&) = default;
};

struct PairLabeled {
    std::string text_a;
    std::string text_b;
    int label = 0;  // 0 or 1

    friend bool operator==(const PairLabeled&, const PairLabeled&) = default;
};

struct PairScored {
    std::string text_a;
    std::string text_b;
    double score = 0.0;  // 0..5

    friend bool operator==(const PairScored&, const PairScored&) = default;
};

struct Triplet {
    std::string anchor;
    std::string positive;
    std::string negative;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

using Example = std::variant<Classification, PairLabeled, PairScored, Triplet>;

Schema schema_of(const Example& example);
/// Throws DataError when the example's label, score or sentences are invalid.
void validate_example(const Example& example);
/// Every sentence of the examples, deduplicated in order of first appearance.
std::vector<std::string> sentence_pool(std::span<const Example> examples);

struct LoadOptions {
    bool strict = true;  // false: skip malformed rows, reporting them in `skipped`
};

/// Loads a UTF-8 TSV with a header row. Columns per schema:
///   classification: id, sentence, label
///   pair_labeled:   id, sentence1, sentence2, is_duplicate
///   pair_scored:    id, sentence1, sentence2, similarity
///   triplet:        sent0, sent1, hard_neg
/// Fields may be double-quoted (embedded tabs, quotes doubled).
std::vector<Example> load_tsv(const std::filesystem::path& path, Schema schema, const LoadOptions& options = {},
                              std::vector<std::string>* skipped = nullptr);
std::vector<Example> parse_tsv(std::istream& in, Schema schema, const LoadOptions& options = {},
                               std::vector<std::string>* skipped = nullptr, const std::string& source = "<stream>");

void write_tsv(std::ostream& out, std::span<const Example> examples, Schema schema);
void write_tsv(const std::filesystem::path& path, std::span<const Example> examples, Schema schema);

/// Double-quotes a field holding tabs, quotes or line breaks.
std::string quote_tsv_field(std::string_view field);

/// Splits one TSV line into fields, honoring double-quoted fields.
std::vector<std::string> split_tsv_line(std::string_view line);

/// Pads id rows to the longest row (capped at max_seq_len) with [PAD] and mask 0.
TokenBatch pad_batch(const std::vector<std::vector<std::int32_t>>& rows, std::size_t max_seq_len);

struct SentenceBatch {
    TokenBatch tokens;
    std::vector<int> labels;
};

struct PairBatch {
    TokenBatch first;
    TokenBatch second;
    std::vector<double> targets;  // 0/1 labels or 0..5 scores
};

struct TripletBatch {
    TokenBatch anchor;
    TokenBatch positive;
    TokenBatch negative;
};

using Batch = std::variant<SentenceBatch, PairBatch, TripletBatch>;

/// Optional Fisher-Yates shuffle with `rng`, then contiguous chunks of
/// `batch_size` (the last one may be short). All examples must share a schema.
std::vector<Batch> make_batches(std::span<const Example> examples, std::size_t batch_size, const Vocab& vocab,
                                std::size_t max_seq_len, Rng* rng, bool shuffle);

/// Batches of bare sentences (unsupervised contrastive training, embedding).
std::vector<TokenBatch> make_sentence_batches(std::span<const std::string> sentences, std::size_t batch_size,
                                              const Vocab& vocab, std::size_t max_seq_len, Rng* rng, bool shuffle);

/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

/// Templated toy data with known ground truth:
///   classification: five classes, each marked by its own sentiment words;
///   pair_labeled:   duplicates share a topic and differ by a synonym swap;
///   pair_scored:    five-slot sentences, score = number of shared slot words;
///   triplet:        positive = synonym paraphrase, negative = contradicting
///                   sentence about another subject.
std::vector<Example> synth_toy_corpus(Schema kind, std::size_t size, Rng& rng);

}  // namespace simcse
