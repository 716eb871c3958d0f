// SPDX-License-Identifier: Apache-2.0
#include "simcse/experiments.hpp"

#include <cmath>

#include "simcse/error.hpp"

namespace simcse {

namespace {

void split(std::vector<Example> all, double dev_fraction, std::vector<Example>& train, std::vector<Example>& dev) {
    const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(all.size())));
    if (n_dev == 0 || n_dev >= all.size()) throw ConfigError("dev_fraction leaves an empty split");
    dev.assign(all.end() - static_cast<std::ptrdiff_t>(n_dev), all.end());
    all.resize(all.size() - n_dev);
    train = std::move(all);
}

MetricReport row(const std::string& model, Task task, const EvalResult& r, Stage stage) {
    return {model, to_string(task), r.metric, r.value, r.n, to_string(stage)};
}

const std::vector<Example>& dev_of(const ToyCorpora& data, Task task) {
    switch (task) {
        case Task::sst: return data.tasks.sst_dev;
        case Task::paraphrase: return data.tasks.para_dev;
        case Task::sts: return data.tasks.sts_dev;
    }
    return data.tasks.sst_dev;
}

const std::vector<Example>& train_of(const ToyCorpora& data, Task task) {
    switch (task) {
        case Task::sst: return data.tasks.sst_train;
        case Task::paraphrase: return data.tasks.para_train;
        case Task::sts: return data.tasks.sts_train;
    }
    return data.tasks.sst_train;
}

Model fresh_model(const ExperimentSetup& setup, const ToyCorpora& data) {
    return init_model(data.vocab, setup.encoder, setup.heads, setup.base.seed);
}

TrainConfig for_task(const ExperimentSetup& setup, Task task) {
    TrainConfig c = setup.base;
    c.task = task;
    return c;
}

// Single-task rows for all three tasks under `config_of(task)`.
template <class ConfigOf>
std::vector<MetricReport> single_task_rows(const ExperimentSetup& setup, const ToyCorpora& data,
                                           const std::string& name, ConfigOf config_of) {
    std::vector<MetricReport> rows;
    for (Task task : {Task::paraphrase, Task::sst, Task::sts}) {
        const TrainConfig config = config_of(task);
        const Checkpoint ck = train_single_task(config, train_of(data, task), dev_of(data, task),
                                                fresh_model(setup, data));
        rows.push_back(row(name, task, evaluate(ck.model, task, dev_of(data, task)), ck.stage));
    }
    return rows;
}

// STS from the SimCSE checkpoint itself; paraphrase and sst by transfer.
std::vector<MetricReport> transferred_rows(const ExperimentSetup& setup, const ToyCorpora& data,
                                           const std::string& name, const Checkpoint& source) {
    std::vector<MetricReport> rows;
    for (Task task : {Task::paraphrase, Task::sst}) {
        const Checkpoint ck = transfer_finetune(source, for_task(setup, task), train_of(data, task), dev_of(data, task));
        rows.push_back(row(name, task, evaluate(ck.model, task, dev_of(data, task)), ck.stage));
    }
    rows.push_back(row(name, Task::sts, evaluate(source.model, Task::sts, data.tasks.sts_dev), source.stage));
    return rows;
}

}  // namespace

ToyCorpora make_toy_corpora(const CorpusSizes& sizes, std::uint64_t seed) {
    ToyCorpora c;
    auto gen = [&](Schema schema, std::size_t n, const char* stream) {
        Rng rng = Rng::for_stream(seed, stream);
        return synth_toy_corpus(schema, n, rng);
    };
    split(gen(Schema::classification, sizes.sst, "synth/sst"), sizes.dev_fraction, c.tasks.sst_train, c.tasks.sst_dev);
    split(gen(Schema::pair_labeled, sizes.paraphrase, "synth/paraphrase"), sizes.dev_fraction, c.tasks.para_train,
          c.tasks.para_dev);
    split(gen(Schema::pair_scored, sizes.sts, "synth/sts"), sizes.dev_fraction, c.tasks.sts_train, c.tasks.sts_dev);
    c.triplets = gen(Schema::triplet, sizes.triplets, "synth/triplets");

    std::vector<Example> everything;
    for (const auto* part : {&c.tasks.sst_train, &c.tasks.sst_dev, &c.tasks.para_train, &c.tasks.para_dev,
                             &c.tasks.sts_train, &c.tasks.sts_dev, &c.triplets}) {
        everything.insert(everything.end(), part->begin(), part->end());
    }
    c.vocab = Vocab::build(sentence_pool(everything));
    return c;
}

std::vector<MetricReport> single_vs_multitask(const ExperimentSetup& setup, const ToyCorpora& data) {
    auto rows = single_task_rows(setup, data, "single-task", [&](Task t) { return for_task(setup, t); });
    const Checkpoint multi = train_multitask(setup.base, data.tasks, {}, fresh_model(setup, data));
    for (Task task : {Task::paraphrase, Task::sst, Task::sts}) {
        rows.push_back(row("multitask", task, evaluate(multi.model, task, dev_of(data, task)), multi.stage));
    }
    return rows;
}

std::vector<MetricReport> dropout_comparison(const ExperimentSetup& setup, const ToyCorpora& data) {
    const double p = setup.base.dropout.p;
    const std::vector<std::pair<std::string, DropoutPolicy>> kinds = {
        {"standard-dropout", DropoutPolicy::standard(p)},
        {"adaptive-dropout", DropoutPolicy::adaptive_policy(1.0, 0.0)},
        {"curriculum-dropout", DropoutPolicy::curriculum_policy(p, 5.0, 0)},
    };
    std::vector<MetricReport> rows;
    for (const auto& [name, policy] : kinds) {
        auto part = single_task_rows(setup, data, name, [&](Task t) {
            TrainConfig c = for_task(setup, t);
            c.dropout = policy;
            return c;
        });
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

std::vector<MetricReport> transfer_comparison(const ExperimentSetup& setup, const ToyCorpora& data) {
    auto rows = single_task_rows(setup, data, "no-transfer", [&](Task t) { return for_task(setup, t); });

    TrainConfig sts = for_task(setup, Task::sts);
    const Checkpoint pretrained = train_single_task(sts, data.tasks.sts_train, data.tasks.sts_dev, fresh_model(setup, data));

    const auto pool = sentence_pool(data.tasks.sts_train);
    const Checkpoint unsup =
        train_unsup_simcse(setup.two_tier.unsup, pool, pretrained.model, data.tasks.sts_dev);
    auto unsup_rows = transferred_rows(setup, data, "unsup-simcse+transfer", unsup);
    rows.insert(rows.end(), unsup_rows.begin(), unsup_rows.end());

    const Checkpoint sup = train_sup_simcse(setup.two_tier.sup, data.triplets, pretrained.model, data.tasks.sts_dev);
    auto sup_rows = transferred_rows(setup, data, "sup-simcse+transfer", sup);
    rows.insert(rows.end(), sup_rows.begin(), sup_rows.end());
    return rows;
}

std::vector<MetricReport> two_tier_report(const ExperimentSetup& setup, const ToyCorpora& data) {
    const Checkpoint ck = run_two_tier(setup.two_tier, data.tasks.sts_train, data.tasks.sts_dev, data.triplets,
                                       fresh_model(setup, data));
    return transferred_rows(setup, data, "two-tier+transfer", ck);
}

}  // namespace simcse
