// SPDX-License-Identifier: Apache-2.0
#include "simcse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <zlib.h>

#include "simcse/error.hpp"
#include "simcse/rng.hpp"

namespace simcse {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using json = nlohmann::json;

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::baseline: return "baseline";
        case Stage::unsup_simcse: return "unsup_simcse";
        case Stage::sup_simcse: return "sup_simcse";
        case Stage::two_tier: return "two_tier";
        case Stage::transfer: return "transfer";
    }
    return "baseline";
}

Stage parse_stage(std::string_view name) {
    for (Stage s : {Stage::baseline, Stage::unsup_simcse, Stage::sup_simcse, Stage::two_tier, Stage::transfer}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown stage '" + std::string(name) + "'");
}

Model init_model(const Vocab& vocab, EncoderConfig encoder, const HeadConfig& heads, std::uint64_t seed) {
    encoder.vocab_size = vocab.size();
    encoder.validate();
    Model m{vocab, encoder, heads, {}, {}};
    Rng encoder_rng = Rng::for_stream(seed, "encoder-init");
    Rng head_rng = Rng::for_stream(seed, "head-init");
    m.params = init_encoder(encoder, encoder_rng);
    m.heads = init_heads(encoder.hidden_dim, heads, head_rng);
    return m;
}

std::vector<NamedParam> all_parameters(const Model& model) {
    auto out = named_parameters(model.params);
    for (auto& p : named_parameters(model.heads)) out.push_back(std::move(p));
    return out;
}

void copy_weights(const Model& src, Model& dst) {
    const auto from = all_parameters(src);
    const auto to = all_parameters(dst);
    if (from.size() != to.size()) throw ShapeError("copy_weights: parameter sets differ in size");
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (from[i].name != to[i].name || from[i].tensor.shape() != to[i].tensor.shape()) {
            throw ShapeError("copy_weights: parameter '" + from[i].name + "' does not match '" + to[i].name + "'");
        }
        Tensor target = to[i].tensor;
        auto dst_values = target.mutable_data();
        const auto src_values = from[i].tensor.data();
        std::copy(src_values.begin(), src_values.end(), dst_values.begin());
    }
}

Model clone_model(const Model& model) {
    Model copy = init_model(model.vocab, model.encoder, model.heads_config, 0);
    copy_weights(model, copy);
    return copy;
}

std::string params_hash(const Model& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& p : all_parameters(model)) {
        h = fnv1a64(p.name, h);
        const auto values = p.tensor.data();
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(values.data()), values.size_bytes()), h);
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'C', 'F', '1'};

json policy_to_json(const DropoutPolicy& p) {
    json j = {{"kind", to_string(p.kind)}, {"p", p.p}};
    if (p.curriculum) j["curriculum"] = {{"gamma", p.curriculum->gamma}, {"total_steps", p.curriculum->total_steps}};
    if (p.adaptive) j["adaptive"] = {{"alpha", p.adaptive->alpha}, {"beta", p.adaptive->beta}};
    return j;
}

DropoutPolicy policy_from_json(const json& j) {
    DropoutPolicy p;
    p.kind = parse_dropout_kind(j.at("kind").get<std::string>());
    p.p = j.at("p").get<double>();
    if (j.contains("curriculum")) {
        p.curriculum = CurriculumSchedule{j["curriculum"].at("gamma").get<double>(),
                                          j["curriculum"].at("total_steps").get<std::int64_t>()};
    }
    if (j.contains("adaptive")) {
        p.adaptive = StandoutInit{j["adaptive"].at("alpha").get<double>(), j["adaptive"].at("beta").get<double>()};
    }
    return p;
}

json encoder_to_json(const EncoderConfig& c) {
    return {{"vocab_size", c.vocab_size},   {"hidden_dim", c.hidden_dim},         {"num_layers", c.num_layers},
            {"num_heads", c.num_heads},     {"ffn_dim", c.ffn_dim},               {"max_seq_len", c.max_seq_len},
            {"layer_norm_eps", c.layer_norm_eps}, {"dropout", policy_to_json(c.dropout)},
            {"pooling", to_string(c.pooling)}};
}

EncoderConfig encoder_from_json(const json& j) {
    EncoderConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
    c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
    c.layer_norm_eps = j.at("layer_norm_eps").get<double>();
    c.dropout = policy_from_json(j.at("dropout"));
    c.pooling = parse_pooling(j.at("pooling").get<std::string>());
    return c;
}

json history_to_json(const std::vector<EpochRecord>& history) {
    json out = json::array();
    for (const auto& e : history) {
        out.push_back({{"stage", e.stage},
                       {"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"dev", e.dev},
                       {"selection", e.selection},
                       {"has_dev", e.has_dev}});
    }
    return out;
}

std::vector<EpochRecord> history_from_json(const json& j) {
    std::vector<EpochRecord> out;
    for (const auto& e : j) {
        out.push_back({e.at("stage").get<std::string>(), e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                       e.at("dev").get<std::map<std::string, double>>(), e.at("selection").get<double>(),
                       e.at("has_dev").get<bool>()});
    }
    return out;
}

json stages_to_json(const std::vector<StageRecord>& stages) {
    json out = json::array();
    for (const auto& s : stages) {
        out.push_back({{"name", s.name},
                       {"init_hash", s.init_hash},
                       {"final_hash", s.final_hash},
                       {"task", s.task},
                       {"metric", s.metric},
                       {"value", s.value},
                       {"n", s.n}});
    }
    return out;
}

std::vector<StageRecord> stages_from_json(const json& j) {
    std::vector<StageRecord> out;
    for (const auto& s : j) {
        out.push_back({s.at("name").get<std::string>(), s.at("init_hash").get<std::string>(),
                       s.at("final_hash").get<std::string>(), s.at("task").get<std::string>(),
                       s.at("metric").get<std::string>(), s.at("value").get<double>(), s.at("n").get<std::size_t>()});
    }
    return out;
}

void put_u32(std::string& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
    std::uint32_t v = 0;
    std::memcpy(&v, bytes.data() + offset, 4);
    return v;
}

std::uint32_t crc32_of(std::string_view body) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks to stay within range.
    constexpr std::size_t kChunk = 1u << 30;
    for (std::size_t off = 0; off < body.size(); off += kChunk) {
        const std::size_t len = std::min(kChunk, body.size() - off);
        crc = crc32(crc, reinterpret_cast<const Bytef*>(body.data() + off), static_cast<uInt>(len));
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const auto params = all_parameters(ck.model);
    json manifest = json::array();
    std::string body;
    for (const auto& p : params) {
        const auto values = p.tensor.data();
        manifest.push_back({{"name", p.name}, {"dtype", "f64"}, {"shape", p.tensor.shape()}, {"offset", body.size()}});
        body.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
    }
    const json header = {
        {"format_version", kCheckpointVersion},
        {"encoder", encoder_to_json(ck.model.encoder)},
        {"heads",
         {{"sts_head", to_string(ck.model.heads_config.sts_head)},
          {"paraphrase_features", to_string(ck.model.heads_config.paraphrase_features)}}},
        {"vocab", ck.model.vocab.tokens()},
        {"stage", to_string(ck.stage)},
        {"trained_tasks", ck.trained_tasks},
        {"history", history_to_json(ck.history)},
        {"stages", stages_to_json(ck.stages)},
        {"arrays", manifest},
        {"body_bytes", body.size()},
    };
    const std::string header_text = header.dump();
    std::string out(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out += header_text;
    out += body;
    put_u32(out, crc32_of(body));
    return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes, const std::string& source) {
    auto fail = [&](const std::string& why) { return IntegrityError("checkpoint " + source + ": " + why); };
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw fail("bad magic bytes (not an SCF1 file)");
    const std::size_t header_len = get_u32(bytes, 4);
    if (bytes.size() < 8 + header_len) throw fail("truncated header");
    json header;
    try {
        header = json::parse(bytes.substr(8, header_len));
    } catch (const json::exception& e) {
        throw fail(std::string("unreadable header: ") + e.what());
    }
    try {
        const auto version = header.at("format_version").get<std::uint32_t>();
        if (version != kCheckpointVersion) {
            throw fail("format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
        }
        const auto body_bytes = header.at("body_bytes").get<std::size_t>();
        const std::size_t body_start = 8 + header_len;
        if (bytes.size() < body_start + body_bytes + 4) throw fail("truncated body");
        if (bytes.size() != body_start + body_bytes + 4) throw fail("trailing bytes after checksum");
        const std::string_view body = bytes.substr(body_start, body_bytes);
        if (crc32_of(body) != get_u32(bytes, body_start + body_bytes)) throw fail("CRC32 mismatch (corrupt body)");

        HeadConfig heads_config;
        heads_config.sts_head = parse_similarity_head(header.at("heads").at("sts_head").get<std::string>());
        heads_config.paraphrase_features =
            parse_paraphrase_features(header.at("heads").at("paraphrase_features").get<std::string>());
        const Vocab vocab = Vocab::from_tokens(header.at("vocab").get<std::vector<std::string>>());
        const EncoderConfig encoder = encoder_from_json(header.at("encoder"));
        if (encoder.vocab_size != vocab.size()) throw fail("vocab size disagrees with the encoder config");

        Checkpoint ck;
        ck.model = init_model(vocab, encoder, heads_config, 0);
        ck.stage = parse_stage(header.at("stage").get<std::string>());
        ck.trained_tasks = header.at("trained_tasks").get<std::vector<std::string>>();
        ck.history = history_from_json(header.at("history"));
        ck.stages = stages_from_json(header.at("stages"));

        const auto params = all_parameters(ck.model);
        const auto& arrays = header.at("arrays");
        if (arrays.size() != params.size()) throw fail("array manifest does not match the model architecture");
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& entry = arrays[i];
            const auto name = entry.at("name").get<std::string>();
            const auto shape = entry.at("shape").get<Shape>();
            const auto offset = entry.at("offset").get<std::size_t>();
            if (name != params[i].name || shape != params[i].tensor.shape() || entry.at("dtype") != "f64") {
                throw fail("array '" + name + "' does not match expected '" + params[i].name + "' " +
                           shape_to_string(params[i].tensor.shape()));
            }
            Tensor target = params[i].tensor;
            auto dst = target.mutable_data();
            if (offset + dst.size_bytes() > body.size()) throw fail("array '" + name + "' runs past the body");
            std::memcpy(dst.data(), body.data() + offset, dst.size_bytes());
        }
        return ck;
    } catch (const json::exception& e) {
        throw fail(std::string("malformed header: ") + e.what());
    } catch (const ConfigError& e) {
        throw fail(std::string("invalid configuration: ") + e.what());
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    const std::string bytes = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read checkpoint " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes, path.string());
}

}  // namespace simcse
