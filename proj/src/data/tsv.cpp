// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "simcse/data.hpp"
#include "simcse/error.hpp"
#include "simcse/format.hpp"

namespace simcse {

std::string to_string(Schema schema) {
    switch (schema) {
        case Schema::classification: return "classification";
        case Schema::pair_labeled: return "pair_labeled";
        case Schema::pair_scored: return "pair_scored";
        case Schema::triplet: return "triplet";
    }
    return "classification";
}

Schema parse_schema(std::string_view name) {
    for (auto s : {Schema::classification, Schema::pair_labeled, Schema::pair_scored, Schema::triplet}) {
        if (name == to_string(s)) return s;
    }
    throw ConfigError("unknown data kind '" + std::string(name) +
                      "' (expected classification, pair_labeled, pair_scored or triplet)");
}

Schema schema_of(const Example& example) {
    return std::visit(
        [](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Classification>) return Schema::classification;
            else if constexpr (std::is_same_v<T, PairLabeled>) return Schema::pair_labeled;
            else if constexpr (std::is_same_v<T, PairScored>) return Schema::pair_scored;
            else return Schema::triplet;
        },
        example);
}

namespace {

void require_text(const std::string& s, const char* column) {
    if (split_words(s).empty()) throw DataError(std::string("empty sentence in column ") + column);
}

}  // namespace

void validate_example(const Example& example) {
    std::visit(
        [](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Classification>) {
                require_text(e.text, "sentence");
                if (e.label < 0 || e.label > 4) throw DataError("label " + std::to_string(e.label) + " outside 0..4");
            } else if constexpr (std::is_same_v<T, PairLabeled>) {
                require_text(e.text_a, "sentence1");
                require_text(e.text_b, "sentence2");
                if (e.label != 0 && e.label != 1) throw DataError("is_duplicate " + std::to_string(e.label) + " not 0 or 1");
            } else if constexpr (std::is_same_v<T, PairScored>) {
                require_text(e.text_a, "sentence1");
                require_text(e.text_b, "sentence2");
                if (!(e.score >= 0.0 && e.score <= 5.0)) throw DataError("similarity " + format_double(e.score) + " outside [0,5]");
            } else {
                require_text(e.anchor, "sent0");
                require_text(e.positive, "sent1");
                require_text(e.negative, "hard_neg");
            }
        },
        example);
}

std::vector<std::string> sentence_pool(std::span<const Example> examples) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    auto add = [&](const std::string& s) {
        if (seen.insert(s).second) out.push_back(s);
    };
    for (const auto& ex : examples) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, Classification>) {
                    add(e.text);
                } else if constexpr (std::is_same_v<T, Triplet>) {
                    add(e.anchor);
                    add(e.positive);
                    add(e.negative);
                } else {
                    add(e.text_a);
                    add(e.text_b);
                }
            },
            ex);
    }
    return out;
}

std::vector<std::string> split_tsv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool at_start = true;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '\t') {
            fields.push_back(std::move(field));
            field.clear();
            at_start = true;
            continue;
        } else if (c == '"' && at_start) {
            quoted = true;
        } else {
            field.push_back(c);
        }
        at_start = false;
    }
    fields.push_back(std::move(field));
    return fields;
}

namespace {

const std::vector<std::string>& header_for(Schema schema) {
    static const std::vector<std::string> cls = {"id", "sentence", "label"};
    static const std::vector<std::string> pl = {"id", "sentence1", "sentence2", "is_duplicate"};
    static const std::vector<std::string> ps = {"id", "sentence1", "sentence2", "similarity"};
    static const std::vector<std::string> tr = {"sent0", "sent1", "hard_neg"};
    switch (schema) {
        case Schema::classification: return cls;
        case Schema::pair_labeled: return pl;
        case Schema::pair_scored: return ps;
        case Schema::triplet: return tr;
    }
    return cls;
}

int parse_int(const std::string& s, const char* column) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw DataError(std::string("column ") + column + ": '" + s + "' is not an integer");
    }
    return value;
}

double parse_double(const std::string& s, const char* column) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(value)) {
        throw DataError(std::string("column ") + column + ": '" + s + "' is not a finite number");
    }
    return value;
}

Example parse_row(const std::vector<std::string>& f, Schema schema) {
    Example ex;
    switch (schema) {
        case Schema::classification: ex = Classification{f[1], parse_int(f[2], "label")}; break;
        case Schema::pair_labeled: ex = PairLabeled{f[1], f[2], parse_int(f[3], "is_duplicate")}; break;
        case Schema::pair_scored: ex = PairScored{f[1], f[2], parse_double(f[3], "similarity")}; break;
        case Schema::triplet: ex = Triplet{f[0], f[1], f[2]}; break;
    }
    validate_example(ex);
    return ex;
}

}  // namespace

std::vector<Example> parse_tsv(std::istream& in, Schema schema, const LoadOptions& options,
                               std::vector<std::string>* skipped, const std::string& source) {
    const auto& header = header_for(schema);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError(source + ": missing header row");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_tsv_line(line) != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ", ") + h;
        throw DataError(source + ": header does not match " + to_string(schema) + " schema (" + expected + ")");
    }
    std::vector<Example> examples;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            const auto fields = split_tsv_line(line);
            if (fields.size() != header.size()) {
                throw DataError("expected " + std::to_string(header.size()) + " columns, found " +
                                std::to_string(fields.size()));
            }
            examples.push_back(parse_row(fields, schema));
        } catch (const DataError& e) {
            const std::string msg = source + ":" + std::to_string(line_no) + ": " + e.what();
            if (options.strict) throw DataError(msg);
            if (skipped) skipped->push_back(msg);
        }
    }
    return examples;
}

std::vector<Example> load_tsv(const std::filesystem::path& path, Schema schema, const LoadOptions& options,
                              std::vector<std::string>* skipped) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file " + path.string());
    return parse_tsv(in, schema, options, skipped, path.string());
}

std::string quote_tsv_field(std::string_view s) {
    if (s.find_first_of("\t\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    return out + "\"";
}

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << '\t';
        out << quote_tsv_field(fields[i]);
    }
    out << '\n';
}

}  // namespace

void write_tsv(std::ostream& out, std::span<const Example> examples, Schema schema) {
    write_row(out, header_for(schema));
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (schema_of(examples[i]) != schema) throw DataError("write_tsv: example does not match " + to_string(schema));
        const std::string id = std::to_string(i);
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, Classification>) write_row(out, {id, e.text, std::to_string(e.label)});
                else if constexpr (std::is_same_v<T, PairLabeled>) write_row(out, {id, e.text_a, e.text_b, std::to_string(e.label)});
                else if constexpr (std::is_same_v<T, PairScored>) write_row(out, {id, e.text_a, e.text_b, format_double(e.score)});
                else write_row(out, {e.anchor, e.positive, e.negative});
            },
            examples[i]);
    }
}

void write_tsv(const std::filesystem::path& path, std::span<const Example> examples, Schema schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write data file " + path.string());
    write_tsv(out, examples, schema);
}

}  // namespace simcse
