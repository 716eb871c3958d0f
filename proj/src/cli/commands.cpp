// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "simcse/cli.hpp"
#include "simcse/error.hpp"
#include "simcse/format.hpp"
#include "simcse/metrics.hpp"

namespace simcse::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kCheckpointFile = "checkpoint.scf";

struct RunResult {
    Checkpoint checkpoint;
    std::vector<MetricReport> reports;
};

// Dataset paths from the `data` section.
class DataSource {
public:
    DataSource(const json& config, std::string variant) : data_(config.at("data")), variant_(std::move(variant)) {}

    bool has(const char* key) const { return !data_.at(key).get<std::string>().empty(); }

    std::vector<Example> load(const char* key, Schema schema, bool required) const {
        const auto path = data_.at(key).get<std::string>();
        if (path.empty()) {
            if (required) throw ConfigError("train " + variant_ + " needs data." + key);
            return {};
        }
        if (!fs::exists(path)) throw DataError("data file not found: " + path + " (data." + key + ")");
        return load_tsv(path, schema);
    }

    std::vector<std::string> lines(const char* key) const {
        const auto path = data_.at(key).get<std::string>();
        if (!fs::exists(path)) throw DataError("data file not found: " + path + " (data." + key + ")");
        return read_lines(path);
    }

    static std::vector<std::string> read_lines(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot read " + path.string());
        std::vector<std::string> out;
        for (std::string line; std::getline(in, line);) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            out.push_back(std::move(line));
        }
        return out;
    }

private:
    const json& data_;
    std::string variant_;
};

struct ModelSource {
    std::optional<Checkpoint> init;
    Model model;
};

// The init checkpoint when configured, else a fresh model over a vocabulary of `corpus`.
ModelSource starting_model(const json& config, std::span<const std::string> corpus) {
    ModelSource src;
    const auto init_path = config.at("init").get<std::string>();
    if (!init_path.empty()) {
        if (!fs::exists(init_path)) throw DataError("init checkpoint not found: " + init_path);
        src.init = load_checkpoint(init_path);
        src.model = src.init->model;
        return src;
    }
    const auto min_count = static_cast<std::size_t>(config.at("encoder").at("min_count").get<std::int64_t>());
    const Vocab vocab = Vocab::build(corpus, std::max<std::size_t>(1, min_count));
    src.model = init_model(vocab, encoder_config(config), head_config(config), config.at("seed").get<std::uint64_t>());
    return src;
}

std::vector<std::string> pool_of(std::initializer_list<const std::vector<Example>*> parts,
                                 std::span<const std::string> extra = {}) {
    std::vector<Example> all;
    for (const auto* p : parts) all.insert(all.end(), p->begin(), p->end());
    auto pool = sentence_pool(all);
    pool.insert(pool.end(), extra.begin(), extra.end());
    return pool;
}

MetricReport report_row(const std::string& model, Task task, const EvalResult& r, Stage stage) {
    return {model, to_string(task), r.metric, r.value, r.n, to_string(stage)};
}

std::vector<std::string> merged_tasks(const std::optional<Checkpoint>& init, std::vector<std::string> tasks) {
    if (!init) return tasks;
    std::vector<std::string> out = init->trained_tasks;
    for (auto& t : tasks) {
        if (std::ranges::find(out, t) == out.end()) out.push_back(std::move(t));
    }
    return out;
}

// SimCSE stages fine-tune a task-trained encoder: the init checkpoint, or an
// STS model trained here first.
Checkpoint simcse_start(const json& config, const ModelSource& src, const std::vector<Example>& sts_train,
                        const std::vector<Example>& sts_dev, const TrainHooks& hooks) {
    if (src.init) return *src.init;
    if (sts_train.empty()) {
        throw ConfigError("SimCSE training needs an init checkpoint or data.sts_train for STS pre-training");
    }
    TrainConfig pre = train_config(config);
    pre.task = Task::sts;
    return train_single_task(pre, sts_train, sts_dev, src.model, hooks);
}

RunResult run_train(const std::string& variant, const json& config, const TrainHooks& hooks) {
    const DataSource data(config, variant);
    const TrainConfig base = train_config(config);
    RunResult result;

    if (variant == "single") {
        const Task task = base.task;
        const char* prefix = task == Task::sst ? "sst" : task == Task::paraphrase ? "para" : "sts";
        const auto train = data.load((std::string(prefix) + "_train").c_str(), schema_for(task), true);
        const auto dev = data.load((std::string(prefix) + "_dev").c_str(), schema_for(task), false);
        const auto src = starting_model(config, pool_of({&train, &dev}));
        result.checkpoint = train_single_task(base, train, dev, src.model, hooks);
        result.checkpoint.trained_tasks = merged_tasks(src.init, result.checkpoint.trained_tasks);
        const auto& eval_set = dev.empty() ? train : dev;
        result.reports.push_back(
            report_row("single-task", task, evaluate(result.checkpoint.model, task, eval_set), result.checkpoint.stage));
        return result;
    }
    if (variant == "multitask") {
        const auto& m = config.at("multitask");
        TaskSelection sel{m.at("sst").get<bool>(), m.at("paraphrase").get<bool>(), m.at("sts").get<bool>()};
        MultitaskData d;
        d.sst_train = data.load("sst_train", Schema::classification, sel.sst);
        d.sst_dev = data.load("sst_dev", Schema::classification, false);
        d.para_train = data.load("para_train", Schema::pair_labeled, sel.paraphrase);
        d.para_dev = data.load("para_dev", Schema::pair_labeled, false);
        d.sts_train = data.load("sts_train", Schema::pair_scored, sel.sts);
        d.sts_dev = data.load("sts_dev", Schema::pair_scored, false);
        const auto src = starting_model(
            config, pool_of({&d.sst_train, &d.sst_dev, &d.para_train, &d.para_dev, &d.sts_train, &d.sts_dev}));
        result.checkpoint = train_multitask(base, d, sel, src.model, hooks);
        result.checkpoint.trained_tasks = merged_tasks(src.init, result.checkpoint.trained_tasks);
        const std::vector<std::tuple<bool, Task, const std::vector<Example>*, const std::vector<Example>*>> rows = {
            {sel.paraphrase, Task::paraphrase, &d.para_train, &d.para_dev},
            {sel.sst, Task::sst, &d.sst_train, &d.sst_dev},
            {sel.sts, Task::sts, &d.sts_train, &d.sts_dev}};
        for (const auto& [on, task, train, dev] : rows) {
            if (!on) continue;
            const auto& eval_set = dev->empty() ? *train : *dev;
            result.reports.push_back(report_row("multitask", task, evaluate(result.checkpoint.model, task, eval_set),
                                                result.checkpoint.stage));
        }
        return result;
    }
    const TwoTierConfig tiers = two_tier_config(config);
    if (variant == "unsup-simcse" || variant == "sup-simcse") {
        const auto sts_train = data.load("sts_train", Schema::pair_scored, false);
        const auto sts_dev = data.load("sts_dev", Schema::pair_scored, false);
        const bool unsup = variant == "unsup-simcse";
        std::vector<std::string> sentences;
        std::vector<Example> triplets;
        if (unsup) {
            sentences = data.has("sentences") ? data.lines("sentences") : sentence_pool(sts_train);
            if (sentences.empty()) throw ConfigError("train unsup-simcse needs data.sentences or data.sts_train");
        } else {
            triplets = data.load("nli_train", Schema::triplet, true);
        }
        const auto src = starting_model(config, pool_of({&sts_train, &sts_dev, &triplets}, sentences));
        const Checkpoint start = simcse_start(config, src, sts_train, sts_dev, hooks);
        result.checkpoint = unsup ? train_unsup_simcse(tiers.unsup, sentences, start.model, sts_dev, hooks)
                                  : train_sup_simcse(tiers.sup, triplets, start.model, sts_dev, hooks);
        result.checkpoint.trained_tasks = start.trained_tasks;
        if (!src.init) {
            result.checkpoint.stages.insert(result.checkpoint.stages.begin(), start.stages.begin(), start.stages.end());
            result.checkpoint.history.insert(result.checkpoint.history.begin(), start.history.begin(),
                                             start.history.end());
        }
        if (!sts_dev.empty()) {
            result.reports.push_back(report_row(variant, Task::sts,
                                                evaluate(result.checkpoint.model, Task::sts, sts_dev),
                                                result.checkpoint.stage));
        }
        return result;
    }
    if (variant == "two-tier") {
        const auto sts_train = data.load("sts_train", Schema::pair_scored, true);
        const auto sts_dev = data.load("sts_dev", Schema::pair_scored, false);
        const auto triplets = data.load("nli_train", Schema::triplet, true);
        const auto src = starting_model(config, pool_of({&sts_train, &sts_dev, &triplets}));
        result.checkpoint = run_two_tier(tiers, sts_train, sts_dev, triplets, src.model, hooks);
        result.checkpoint.trained_tasks = merged_tasks(src.init, result.checkpoint.trained_tasks);
        for (const auto& s : result.checkpoint.stages) {
            result.reports.push_back({"two-tier/" + s.name, s.task, s.metric, s.value, s.n, s.name});
        }
        return result;
    }
    if (variant == "transfer") {
        const auto source_path = config.at("transfer").at("checkpoint").get<std::string>();
        if (source_path.empty()) throw ConfigError("train transfer needs transfer.checkpoint");
        if (!fs::exists(source_path)) throw DataError("transfer checkpoint not found: " + source_path);
        const Checkpoint source = load_checkpoint(source_path);
        TrainConfig tc = base;
        tc.task = parse_task(config.at("transfer").at("task").get<std::string>());
        const char* prefix = tc.task == Task::sst ? "sst" : tc.task == Task::paraphrase ? "para" : "sts";
        const auto train = data.load((std::string(prefix) + "_train").c_str(), schema_for(tc.task), true);
        const auto dev = data.load((std::string(prefix) + "_dev").c_str(), schema_for(tc.task), false);
        result.checkpoint = transfer_finetune(source, tc, train, dev, hooks);
        const auto& eval_set = dev.empty() ? train : dev;
        result.reports.push_back(report_row("transfer", tc.task, evaluate(result.checkpoint.model, tc.task, eval_set),
                                            result.checkpoint.stage));
        return result;
    }
    throw ConfigError("unknown train variant '" + variant + "'");
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const json& config) {
    const fs::path root = config.at("output_dir").get<std::string>();
    const std::string base = utc_timestamp() + "-" + config_hash(config);
    fs::path dir = root / base;
    for (int k = 1; fs::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

int cmd_train(const std::string& variant, const std::optional<fs::path>& config_path,
              const std::vector<Override>& overrides, std::ostream& out, std::ostream& err) {
    const json config = resolve_config(config_path, overrides, std::getenv("SIMCSE_FORGE_SEED"));
    TrainHooks hooks;
    hooks.log = &err;
    const auto started = std::chrono::steady_clock::now();
    RunResult result = run_train(variant, config, hooks);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const fs::path dir = make_run_dir(config);
    save_checkpoint(result.checkpoint, dir / kCheckpointFile);
    write_text(dir / "metrics.tsv", emit_report(result.reports, ReportFormat::tsv));
    result.checkpoint.model.vocab.save(dir / "vocab.txt");
    json stages = json::array();
    for (const auto& s : result.checkpoint.stages) {
        stages.push_back({{"name", s.name}, {"init_hash", s.init_hash}, {"final_hash", s.final_hash},
                          {"metric", s.metric}, {"value", s.value}});
    }
    const json manifest = {{"command", "train " + variant},
                           {"config", config},
                           {"config_hash", config_hash(config)},
                           {"seed", config.at("seed")},
                           {"wall_time_seconds", wall},
                           {"checkpoint", kCheckpointFile},
                           {"stage", to_string(result.checkpoint.stage)},
                           {"params_hash", params_hash(result.checkpoint.model)},
                           {"stages", stages}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "run directory: " << dir.string() << '\n' << emit_report(result.reports, ReportFormat::pretty);
    return kOk;
}

bool head_is_parameter_free(SimilarityHeadKind kind) {
    return kind != SimilarityHeadKind::sum_linear && kind != SimilarityHeadKind::cross_attention;
}

int cmd_eval(const fs::path& checkpoint_path, const fs::path& data_path, const std::string& task_name,
             std::optional<fs::path> out_dir, std::size_t bins, const std::string& format, std::ostream& out,
             std::ostream& err) {
    const Task task = parse_task(task_name);
    if (!fs::exists(checkpoint_path)) throw DataError("checkpoint not found: " + checkpoint_path.string());
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const bool trained = std::ranges::find(ck.trained_tasks, task_name) != ck.trained_tasks.end();
    if (!trained && !(task == Task::sts && head_is_parameter_free(ck.model.heads_config.sts_head))) {
        throw ConfigError("checkpoint has no trained " + task_name + " head (stage " + to_string(ck.stage) +
                          ", trained tasks: " + (ck.trained_tasks.empty() ? "none" : [&] {
                              std::string s;
                              for (const auto& t : ck.trained_tasks) s += (s.empty() ? "" : ",") + t;
                              return s;
                          }()) + ")");
    }
    if (!fs::exists(data_path)) throw DataError("data file not found: " + data_path.string());
    const auto data = load_tsv(data_path, schema_for(task));
    std::vector<double> outputs;
    const EvalResult r = evaluate(ck.model, task, data, &outputs);
    const std::vector<MetricReport> reports = {
        {checkpoint_path.stem().string(), task_name, r.metric, r.value, r.n, to_string(ck.stage)}};
    out << emit_report(reports, format == "tsv" ? ReportFormat::tsv : ReportFormat::pretty);
    if (task == Task::sts) {
        std::vector<double> gold;
        for (const auto& e : data) gold.push_back(std::get<PairScored>(e).score);
        const Heatmap h = similarity_heatmap(gold, outputs, bins);
        if (h.clamped > 0) err << "warning: " << h.clamped << " score pairs outside [0,5] were clamped into the heatmap\n";
        const fs::path dir = out_dir.value_or(checkpoint_path.has_parent_path() ? checkpoint_path.parent_path() : ".");
        fs::create_directories(dir);
        write_text(dir / "heatmap.csv", h.to_csv());
        err << "heatmap written to " << (dir / "heatmap.csv").string() << '\n';
    }
    return kOk;
}

int cmd_embed(const fs::path& checkpoint_path, const fs::path& sentences_path, const std::optional<fs::path>& out_path,
              std::ostream& out) {
    if (!fs::exists(checkpoint_path)) throw DataError("checkpoint not found: " + checkpoint_path.string());
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    if (!fs::exists(sentences_path)) throw DataError("sentences file not found: " + sentences_path.string());
    const auto sentences = DataSource::read_lines(sentences_path);
    const auto rows = embed_sentences(ck.model, sentences);
    std::ostringstream text;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        text << quote_tsv_field(sentences[i]);
        for (double v : rows[i]) text << '\t' << format_double(v);
        text << '\n';
    }
    if (out_path) {
        write_text(*out_path, text.str());
    } else {
        out << text.str();
    }
    return kOk;
}

Schema parse_synth_kind(const std::string& kind) {
    if (kind == "sst") return Schema::classification;
    if (kind == "paraphrase") return Schema::pair_labeled;
    if (kind == "sts") return Schema::pair_scored;
    if (kind == "nli") return Schema::triplet;
    return parse_schema(kind);
}

int cmd_synth(const std::string& kind, std::int64_t size, std::optional<std::uint64_t> seed, const fs::path& out_path,
              std::ostream& err) {
    if (size < 1) throw ConfigError("synth --size must be at least 1");
    std::uint64_t s = 42;
    if (const char* env = std::getenv("SIMCSE_FORGE_SEED"); env && *env) s = std::stoull(env);
    if (seed) s = *seed;
    const Schema schema = parse_synth_kind(kind);
    Rng rng = Rng::for_stream(s, "synth/" + to_string(schema));
    const auto examples = synth_toy_corpus(schema, static_cast<std::size_t>(size), rng);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_tsv(out_path, examples, schema);
    err << "wrote " << examples.size() << " " << to_string(schema) << " examples to " << out_path.string() << '\n';
    return kOk;
}

// Splits CLI11's leftover arguments into dotted-path overrides.
std::vector<Override> parse_overrides(const std::vector<std::string>& extras) {
    std::vector<Override> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& a = extras[i];
        if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError("unexpected argument '" + a + "'");
        const std::string body = a.substr(2);
        if (const auto eq = body.find('='); eq != std::string::npos) {
            out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        if (i + 1 >= extras.size()) throw ConfigError("override " + a + " is missing a value");
        out.emplace_back(body, extras[++i]);
    }
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"SimCSE multitask minBERT toolkit"};
    app.name("simcse_forge");
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "train a model; extra --section.key value pairs override the config");
    train->require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string variant;
    for (const char* name : {"single", "multitask", "unsup-simcse", "sup-simcse", "two-tier", "transfer"}) {
        auto* v = train->add_subcommand(name);
        v->add_option("--config", config_path, "JSON config file");
        v->add_option("--seed", seed, "random seed (beats config file and SIMCSE_FORGE_SEED)");
        v->allow_extras();
        v->callback([&variant, name] { variant = name; });
    }

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ckpt, data_path, task, out_dir, format = "pretty";
    std::size_t bins = 6;
    eval->add_option("--checkpoint", ckpt)->required();
    eval->add_option("--data", data_path)->required();
    eval->add_option("--task", task)->required()->check(CLI::IsMember({"sst", "paraphrase", "sts"}));
    eval->add_option("--out-dir", out_dir, "where heatmap.csv goes (default: next to the checkpoint)");
    eval->add_option("--bins", bins, "heatmap bins per axis")->check(CLI::PositiveNumber);
    eval->add_option("--format", format)->check(CLI::IsMember({"pretty", "tsv"}));

    auto* embed = app.add_subcommand("embed", "write pooled sentence embeddings as TSV");
    std::string sentences, embed_out;
    embed->add_option("--checkpoint", ckpt)->required();
    embed->add_option("--sentences", sentences, "one sentence per line")->required();
    embed->add_option("--out", embed_out, "output TSV (default: stdout)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic toy dataset");
    std::string kind, synth_out;
    std::int64_t size = 0;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--kind", kind, "sst|paraphrase|sts|nli or a schema name")->required();
    synth->add_option("--size", size)->required();
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out", synth_out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (train->parsed()) {
            std::vector<std::string> extras;
            for (auto* v : train->get_subcommands()) {
                if (v->parsed()) extras = v->remaining();
            }
            auto overrides = parse_overrides(extras);
            if (seed) overrides.emplace_back("seed", std::to_string(*seed));
            return cmd_train(variant, config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path),
                             overrides, out, err);
        }
        if (eval->parsed()) {
            return cmd_eval(ckpt, data_path, task, out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir),
                            bins, format, out, err);
        }
        if (embed->parsed()) {
            return cmd_embed(ckpt, sentences, embed_out.empty() ? std::nullopt : std::optional<fs::path>(embed_out),
                             out);
        }
        if (synth->parsed()) return cmd_synth(kind, size, synth_seed, synth_out, err);
    } catch (const IntegrityError& e) {
        err << "error: " << e.what() << '\n';
        return kIntegrity;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

}  // namespace simcse::cli
