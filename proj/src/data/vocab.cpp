// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "simcse/data.hpp"
#include "simcse/error.hpp"

namespace simcse {

namespace {
const std::vector<std::string> kReserved = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
}

Vocab::Vocab() : tokens_(kReserved) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kReserved.size() || !std::equal(kReserved.begin(), kReserved.end(), tokens.begin())) {
        throw DataError("vocabulary must start with [PAD], [CLS], [SEP], [UNK]");
    }
    Vocab v;
    v.tokens_ = std::move(tokens);
    v.index_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        if (!v.index_.emplace(v.tokens_[i], static_cast<std::int32_t>(i)).second) {
            throw DataError("duplicate vocabulary token '" + v.tokens_[i] + "'");
        }
    }
    return v;
}

Vocab Vocab::build(std::span<const std::string> sentences, std::size_t min_count) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : sentences)
        for (auto& w : split_words(s)) ++counts[w];
    std::vector<std::pair<std::string, std::size_t>> entries;
    for (auto& [word, count] : counts) {
        if (count >= min_count && std::find(kReserved.begin(), kReserved.end(), word) == kReserved.end()) {
            entries.emplace_back(word, count);
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> tokens = kReserved;
    for (auto& e : entries) tokens.push_back(e.first);
    return from_tokens(std::move(tokens));
}

std::int32_t Vocab::id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw DataError("token id out of range");
    return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file " + path.string());
    for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return from_tokens(std::move(tokens));
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) words.push_back(std::move(current));
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (c < 128 && std::ispunct(c)) {
            flush();
            words.emplace_back(1, ch);
        } else {
            current.push_back(static_cast<char>(c < 128 ? std::tolower(c) : c));
        }
    }
    flush();
    return words;
}

std::vector<std::int32_t> tokenize(std::string_view text, const Vocab& vocab, std::size_t max_seq_len) {
    if (max_seq_len < 2) throw ConfigError("max_seq_len must be at least 2");
    const auto words = split_words(text);
    const std::size_t keep = std::min(words.size(), max_seq_len - 2);
    std::vector<std::int32_t> ids;
    ids.reserve(keep + 2);
    ids.push_back(kClsId);
    for (std::size_t i = 0; i < keep; ++i) ids.push_back(vocab.id(words[i]));
    ids.push_back(kSepId);
    return ids;
}

}  // namespace simcse
