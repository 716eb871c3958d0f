// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <limits>

#include "simcse/cli.hpp"
#include "simcse/error.hpp"
#include "simcse/rng.hpp"

namespace simcse::cli {

using json = nlohmann::json;

json default_config() {
    return json::parse(R"({
  "seed": 42,
  "output_dir": "runs",
  "init": "",
  "encoder": {"hidden_dim": 32, "num_layers": 4, "num_heads": 4, "ffn_dim": 128, "max_seq_len": 64,
              "pooling": "cls_tanh", "min_count": 1},
  "dropout": {"kind": "standard", "p": 0.3, "gamma": 5.0, "alpha": 1.0, "beta": 0.0, "total_steps": 0},
  "optim": {"lr": 1e-5, "weight_decay": 0.0, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "clip_norm": 0.0},
  "train": {"task": "sst", "epochs": 10, "batch_size": 8, "tau": 0.05, "eval_every": 0, "sst_loss": "bce"},
  "multitask": {"sst": true, "paraphrase": true, "sts": true},
  "sts": {"head": "cos_sigmoid"},
  "paraphrase": {"features": "interaction"},
  "data": {"sst_train": "", "sst_dev": "", "para_train": "", "para_dev": "", "sts_train": "", "sts_dev": "",
           "nli_train": "", "sentences": ""},
  "unsup_simcse": {"epochs": 10, "batch_size": 64, "lr": 3e-5, "dropout_p": 0.1},
  "sup_simcse": {"epochs": 5, "batch_size": 24, "lr": 5e-5, "dropout_p": 0.1},
  "two_tier": {"skip_unsup": false, "sts_finetune": false},
  "transfer": {"checkpoint": "", "task": "sst"}
})");
}

namespace {

bool is_integer_default(const json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

// Checks `value` against the type of `reference` and returns it normalized.
json conform(const json& reference, const json& value, const std::string& path) {
    auto bad = [&](const char* expected) {
        return ConfigError("config key '" + path + "' expects " + expected + ", got " + value.dump());
    };
    if (reference.is_object()) {
        if (!value.is_object()) throw bad("an object");
        json out = reference;
        for (const auto& [key, v] : value.items()) {
            if (!reference.contains(key)) throw ConfigError("unknown config key '" + (path.empty() ? key : path + "." + key) + "'");
            out[key] = conform(reference[key], v, path.empty() ? key : path + "." + key);
        }
        return out;
    }
    if (reference.is_boolean()) {
        if (!value.is_boolean()) throw bad("true or false");
        return value;
    }
    if (reference.is_string()) {
        if (!value.is_string()) throw bad("a string");
        return value;
    }
    if (is_integer_default(reference)) {
        if (value.is_number_float()) {
            const double d = value.get<double>();
            if (d != std::floor(d)) throw bad("an integer");
            return json(static_cast<std::int64_t>(d));
        }
        if (!value.is_number()) throw bad("an integer");
        return value;
    }
    if (!value.is_number()) throw bad("a number");
    return json(value.get<double>());
}

json parse_override_value(const json& reference, const std::string& raw, const std::string& path) {
    if (reference.is_string()) return json(raw);
    if (reference.is_object()) throw ConfigError("config key '" + path + "' is a section, not a value");
    json parsed;
    try {
        parsed = json::parse(raw);
    } catch (const json::exception&) {
        throw ConfigError("cannot parse value '" + raw + "' for config key '" + path + "'");
    }
    return conform(reference, parsed, path);
}

void apply_override(json& config, const json& defaults, const Override& o) {
    json* node = &config;
    const json* ref = &defaults;
    std::string walked;
    std::size_t start = 0;
    while (true) {
        const auto dot = o.first.find('.', start);
        const std::string key = o.first.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        walked += (walked.empty() ? "" : ".") + key;
        if (key.empty() || !ref->is_object() || !ref->contains(key)) {
            throw ConfigError("unknown config key '" + walked + "' in override --" + o.first);
        }
        ref = &(*ref)[key];
        node = &(*node)[key];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = parse_override_value(*ref, o.second, o.first);
}

std::size_t get_size(const json& j, const char* key, const std::string& section) {
    const auto v = j.at(key).get<std::int64_t>();
    if (v < 0) throw ConfigError("config key '" + section + "." + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

DropoutPolicy dropout_policy(const json& d, double p) {
    const DropoutKind kind = parse_dropout_kind(d.at("kind").get<std::string>());
    switch (kind) {
        case DropoutKind::standard: return DropoutPolicy::standard(p);
        case DropoutKind::curriculum:
            return DropoutPolicy::curriculum_policy(p, d.at("gamma").get<double>(), d.at("total_steps").get<std::int64_t>());
        case DropoutKind::adaptive:
            return DropoutPolicy::adaptive_policy(d.at("alpha").get<double>(), d.at("beta").get<double>());
    }
    return DropoutPolicy::standard(p);
}

}  // namespace

json resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<Override>& overrides,
                    const char* env_seed) {
    const json defaults = default_config();
    json config = defaults;
    if (env_seed && *env_seed) {
        config["seed"] = parse_override_value(defaults["seed"], env_seed, "seed (SIMCSE_FORGE_SEED)");
    }
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot read config file " + file->string());
        json loaded;
        try {
            loaded = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config file " + file->string() + " is not valid JSON: " + e.what());
        }
        // Keys absent from the file keep their current value, including an env seed.
        config = conform(config, loaded, "");
    }
    for (const auto& o : overrides) apply_override(config, defaults, o);
    if (config["seed"].get<std::int64_t>() < 0) throw ConfigError("seed must be non-negative");
    // Surface semantic errors before any work starts.
    train_config(config).validate();
    head_config(config);
    two_tier_config(config);
    EncoderConfig arch = encoder_config(config);
    arch.vocab_size = kReservedTokens;  // the real size comes from the data
    arch.validate();
    return config;
}

EncoderConfig encoder_config(const json& config) {
    const auto& e = config.at("encoder");
    EncoderConfig c;
    c.hidden_dim = get_size(e, "hidden_dim", "encoder");
    c.num_layers = get_size(e, "num_layers", "encoder");
    c.num_heads = get_size(e, "num_heads", "encoder");
    c.ffn_dim = get_size(e, "ffn_dim", "encoder");
    c.max_seq_len = get_size(e, "max_seq_len", "encoder");
    c.pooling = parse_pooling(e.at("pooling").get<std::string>());
    c.dropout = train_config(config).dropout;
    if (c.dropout.curriculum && c.dropout.curriculum->total_steps <= 0) c.dropout.curriculum->total_steps = 1;
    return c;
}

HeadConfig head_config(const json& config) {
    HeadConfig h;
    h.sts_head = parse_similarity_head(config.at("sts").at("head").get<std::string>());
    h.paraphrase_features = parse_paraphrase_features(config.at("paraphrase").at("features").get<std::string>());
    return h;
}

TrainConfig train_config(const json& config) {
    const auto& t = config.at("train");
    const auto& o = config.at("optim");
    TrainConfig c;
    c.task = parse_task(t.at("task").get<std::string>());
    c.epochs = t.at("epochs").get<int>();
    c.batch_size = get_size(t, "batch_size", "train");
    c.tau = t.at("tau").get<double>();
    c.eval_every = t.at("eval_every").get<std::int64_t>();
    c.sst_loss = parse_sst_loss(t.at("sst_loss").get<std::string>());
    c.optim.lr = o.at("lr").get<double>();
    c.optim.weight_decay = o.at("weight_decay").get<double>();
    c.optim.beta1 = o.at("beta1").get<double>();
    c.optim.beta2 = o.at("beta2").get<double>();
    c.optim.eps = o.at("eps").get<double>();
    c.clip_norm = o.at("clip_norm").get<double>();
    c.dropout = dropout_policy(config.at("dropout"), config.at("dropout").at("p").get<double>());
    c.sts_head = parse_similarity_head(config.at("sts").at("head").get<std::string>());
    c.seed = config.at("seed").get<std::uint64_t>();
    return c;
}

TwoTierConfig two_tier_config(const json& config) {
    TrainConfig base = train_config(config);
    TwoTierConfig c = TwoTierConfig::from_base(base);
    auto stage = [&](TrainConfig& t, const json& s) {
        t.epochs = s.at("epochs").get<int>();
        t.batch_size = get_size(s, "batch_size", "simcse");
        t.optim.lr = s.at("lr").get<double>();
        t.dropout = dropout_policy(config.at("dropout"), s.at("dropout_p").get<double>());
        t.validate();
    };
    stage(c.unsup, config.at("unsup_simcse"));
    stage(c.sup, config.at("sup_simcse"));
    c.skip_unsup = config.at("two_tier").at("skip_unsup").get<bool>();
    c.sts_finetune = config.at("two_tier").at("sts_finetune").get<bool>();
    return c;
}

std::string config_hash(const json& config) {
    const std::uint64_t h = fnv1a64(config.dump());
    static const char* digits = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 0; i < 8; ++i) out[static_cast<std::size_t>(i)] = digits[(h >> (60 - 4 * i)) & 0xF];
    return out;
}

}  // namespace simcse::cli
