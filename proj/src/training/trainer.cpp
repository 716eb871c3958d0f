// SPDX-License-Identifier: Apache-2.0
#include "simcse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "simcse/error.hpp"
#include "simcse/format.hpp"
#include "simcse/metrics.hpp"
#include "simcse/ops.hpp"

namespace simcse {

std::string to_string(Task task) {
    switch (task) {
        case Task::sst: return "sst";
        case Task::paraphrase: return "paraphrase";
        case Task::sts: return "sts";
    }
    return "sst";
}

Task parse_task(std::string_view name) {
    if (name == "sst") return Task::sst;
    if (name == "paraphrase") return Task::paraphrase;
    if (name == "sts") return Task::sts;
    throw ConfigError("unknown task '" + std::string(name) + "' (expected sst, paraphrase or sts)");
}

Schema schema_for(Task task) {
    switch (task) {
        case Task::sst: return Schema::classification;
        case Task::paraphrase: return Schema::pair_labeled;
        case Task::sts: return Schema::pair_scored;
    }
    return Schema::classification;
}

std::string metric_name(Task task) { return task == Task::sts ? "pearson" : "accuracy"; }

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("train.epochs must be non-negative");
    if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
    if (!(tau > 0.0)) throw ConfigError("train.tau must be positive");
    if (clip_norm < 0.0) throw ConfigError("optim.clip_norm must be non-negative");
    if (eval_every < 0) throw ConfigError("train.eval_every must be non-negative");
    optim.validate();
    DropoutPolicy resolved = dropout;
    if (resolved.curriculum && resolved.curriculum->total_steps <= 0) resolved.curriculum->total_steps = 1;
    resolved.validate();
}

namespace {

constexpr std::size_t kEvalBatch = 64;

// One optimizer step's worth of work, built fresh every epoch.
struct Step {
    std::string task;
    std::function<Tensor(const ForwardContext&)> loss;
};

void log_line(const TrainHooks& hooks, const std::string& line) {
    if (hooks.log) *hooks.log << line << '\n';
}

void require_schema(std::span<const Example> data, Schema schema, const char* what) {
    for (const auto& e : data) {
        if (schema_of(e) != schema) {
            throw DataError(std::string(what) + ": expected " + to_string(schema) + " examples, got " +
                            to_string(schema_of(e)));
        }
    }
}

Tensor pooled(const Model& m, const TokenBatch& tokens, const ForwardContext& ctx) {
    return encode(tokens, m.params, m.encoder, ctx).pooled;
}

Tensor task_loss(const Model& m, Task task, const Batch& batch, const TrainConfig& config,
                 const ForwardContext& ctx) {
    switch (task) {
        case Task::sst: {
            const auto& b = std::get<SentenceBatch>(batch);
            const Tensor logits = sst_logits(pooled(m, b.tokens, ctx), m.heads);
            if (config.sst_loss == SstLoss::cross_entropy) {
                std::vector<std::size_t> labels(b.labels.begin(), b.labels.end());
                return cross_entropy_loss(logits, labels);
            }
            std::vector<double> onehot(b.labels.size() * kSentimentClasses, 0.0);
            for (std::size_t i = 0; i < b.labels.size(); ++i) {
                onehot[i * kSentimentClasses + static_cast<std::size_t>(b.labels[i])] = 1.0;
            }
            return bce_loss(logits, Tensor::from({b.labels.size(), kSentimentClasses}, std::move(onehot)));
        }
        case Task::paraphrase: {
            const auto& b = std::get<PairBatch>(batch);
            const Tensor a = pooled(m, b.first, ctx);
            const Tensor c = pooled(m, b.second, ctx);
            const Tensor logit = paraphrase_logit(a, c, m.heads, m.heads_config.paraphrase_features);
            return bce_loss(logit, Tensor::from({b.targets.size()}, b.targets));
        }
        case Task::sts: {
            const auto& b = std::get<PairBatch>(batch);
            const Tensor a = pooled(m, b.first, ctx);
            const Tensor c = pooled(m, b.second, ctx);
            const Tensor pred = sts_score(a, c, m.heads_config.sts_head, m.heads);
            return mse_loss(pred, Tensor::from({b.targets.size()}, b.targets));
        }
    }
    throw ConfigError("unhandled task");
}

// Clone of `init` with the stage's dropout policy and STS head applied.
Model prepare_model(const Model& init, const TrainConfig& config, std::int64_t total_steps) {
    Model m = clone_model(init);
    DropoutPolicy policy = config.dropout;
    if (policy.curriculum && policy.curriculum->total_steps <= 0) {
        policy.curriculum->total_steps = std::max<std::int64_t>(1, total_steps);
    }
    m.encoder.dropout = policy;
    m.encoder.validate();
    sync_dropout_gates(m.params, m.encoder);
    m.heads_config.sts_head = config.sts_head;
    return m;
}

struct Loop {
    std::string stage;
    std::vector<NamedParam> params;
    std::function<std::vector<Step>()> epoch_steps;
    // Dev metrics by task name; empty when no dev data.
    std::function<std::map<std::string, double>(const Model&)> dev_eval;
};

// Shared epoch loop: steps, dev evaluation, best-epoch snapshot.
Checkpoint run_loop(Model& model, const TrainConfig& config, const Loop& loop, const TrainHooks& hooks) {
    Checkpoint ck;
    const std::string init_hash = params_hash(model);
    Model best = clone_model(model);
    double best_selection = -std::numeric_limits<double>::infinity();
    bool any_dev = false;

    AdamW optimizer(loop.params, config.optim);
    Rng dropout_rng = Rng::for_stream(config.seed, "dropout");
    std::int64_t step = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto steps = loop.epoch_steps();
        double loss_sum = 0.0;
        for (const auto& s : steps) {
            optimizer.zero_grad();
            const ForwardContext ctx{Mode::train, step, &dropout_rng};
            const Tensor loss = s.loss(ctx);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                throw NumericError(loop.stage + ": non-finite loss at step " + std::to_string(step));
            }
            backward(loss);
            if (config.clip_norm > 0.0) clip_grad_norm(loop.params, config.clip_norm);
            optimizer.step();
            loss_sum += value;
            if (hooks.on_step) hooks.on_step({loop.stage, s.task, epoch, step, value});
            ++step;
            if (config.eval_every > 0 && step % config.eval_every == 0) {
                for (const auto& [task, v] : loop.dev_eval(model)) {
                    log_line(hooks, loop.stage + " step " + std::to_string(step) + " dev " + task + " " +
                                        format_fixed(v, 4));
                }
            }
        }
        optimizer.zero_grad();

        EpochRecord record;
        record.stage = loop.stage;
        record.epoch = epoch;
        record.train_loss = steps.empty() ? 0.0 : loss_sum / static_cast<double>(steps.size());
        record.dev = loop.dev_eval(model);
        record.has_dev = !record.dev.empty();
        if (record.has_dev) {
            double total = 0.0;
            for (const auto& [task, v] : record.dev) total += v;
            record.selection = total / static_cast<double>(record.dev.size());
            any_dev = true;
            if (record.selection > best_selection) {
                best_selection = record.selection;
                copy_weights(model, best);
            }
        }
        std::string line = loop.stage + " epoch " + std::to_string(epoch) + " loss " + format_fixed(record.train_loss, 6);
        for (const auto& [task, v] : record.dev) line += " dev_" + task + " " + format_fixed(v, 4);
        log_line(hooks, line);
        if (hooks.on_epoch) hooks.on_epoch(record);
        ck.history.push_back(std::move(record));
    }
    if (!any_dev) copy_weights(model, best);
    ck.model = std::move(best);
    ck.stages.push_back({loop.stage, init_hash, params_hash(ck.model), "", "", 0.0, 0});
    return ck;
}

std::map<std::string, double> eval_map(const Model& m, Task task, std::span<const Example> dev) {
    if (dev.empty()) return {};
    return {{to_string(task), evaluate(m, task, dev).value}};
}

void record_stage_metric(Checkpoint& ck, Task task, std::span<const Example> dev) {
    if (dev.empty()) return;
    const auto r = evaluate(ck.model, task, dev);
    auto& s = ck.stages.back();
    s.task = to_string(task);
    s.metric = r.metric;
    s.value = r.value;
    s.n = r.n;
}

std::vector<NamedParam> head_parameters(const Model& model, Task task) {
    switch (task) {
        case Task::sst: return sst_head_parameters(model.heads);
        case Task::paraphrase: return paraphrase_head_parameters(model.heads);
        case Task::sts: return sts_head_parameters(model.heads, model.heads_config.sts_head);
    }
    return {};
}

std::size_t count_batches(std::size_t n, std::size_t batch_size) { return (n + batch_size - 1) / batch_size; }

}  // namespace

EvalResult evaluate(const Model& model, Task task, std::span<const Example> data, std::vector<double>* outputs) {
    if (data.empty()) throw DataError("evaluate: empty " + to_string(task) + " dataset");
    require_schema(data, schema_for(task), "evaluate");
    NoGradGuard no_grad;
    const ForwardContext ctx{Mode::eval, 0, nullptr};
    std::vector<int> predicted, gold;
    std::vector<double> scores, gold_scores;
    for (const auto& batch : make_batches(data, kEvalBatch, model.vocab, model.encoder.max_seq_len, nullptr, false)) {
        switch (task) {
            case Task::sst: {
                const auto& b = std::get<SentenceBatch>(batch);
                const Tensor logits = sst_logits(pooled(model, b.tokens, ctx), model.heads);
                for (std::size_t i = 0; i < b.labels.size(); ++i) {
                    const auto row = logits.data().subspan(i * kSentimentClasses, kSentimentClasses);
                    predicted.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
                    gold.push_back(b.labels[i]);
                }
                break;
            }
            case Task::paraphrase: {
                const auto& b = std::get<PairBatch>(batch);
                const Tensor logit = paraphrase_logit(pooled(model, b.first, ctx), pooled(model, b.second, ctx),
                                                      model.heads, model.heads_config.paraphrase_features);
                for (std::size_t i = 0; i < b.targets.size(); ++i) {
                    predicted.push_back(logit[i] > 0.0 ? 1 : 0);
                    gold.push_back(static_cast<int>(b.targets[i]));
                    scores.push_back(1.0 / (1.0 + std::exp(-logit[i])));
                }
                break;
            }
            case Task::sts: {
                const auto& b = std::get<PairBatch>(batch);
                const Tensor pred = sts_score(pooled(model, b.first, ctx), pooled(model, b.second, ctx),
                                              model.heads_config.sts_head, model.heads);
                for (std::size_t i = 0; i < b.targets.size(); ++i) {
                    scores.push_back(pred[i]);
                    gold_scores.push_back(b.targets[i]);
                }
                break;
            }
        }
    }
    if (task == Task::sts) {
        if (outputs) *outputs = scores;
        return {"pearson", pearson(scores, gold_scores), scores.size()};
    }
    if (outputs) {
        if (task == Task::sst) {
            outputs->assign(predicted.begin(), predicted.end());
        } else {
            *outputs = scores;
        }
    }
    return {"accuracy", accuracy(predicted, gold), gold.size()};
}

std::vector<std::vector<double>> embed_sentences(const Model& model, std::span<const std::string> sentences,
                                                 std::size_t batch_size) {
    NoGradGuard no_grad;
    const ForwardContext ctx{Mode::eval, 0, nullptr};
    std::vector<std::vector<double>> rows;
    const std::size_t d = model.encoder.hidden_dim;
    for (const auto& tokens :
         make_sentence_batches(sentences, batch_size, model.vocab, model.encoder.max_seq_len, nullptr, false)) {
        const Tensor h = pooled(model, tokens, ctx);
        for (std::size_t i = 0; i < tokens.batch; ++i) {
            const auto row = h.data().subspan(i * d, d);
            rows.emplace_back(row.begin(), row.end());
        }
    }
    return rows;
}

double dropout_alignment(const Model& model, std::span<const std::string> sentences, Rng& rng,
                         std::size_t batch_size) {
    if (sentences.empty()) throw DataError("dropout_alignment: no sentences");
    NoGradGuard no_grad;
    const ForwardContext ctx{Mode::train, 0, &rng};
    const std::size_t d = model.encoder.hidden_dim;
    double total = 0.0;
    for (const auto& tokens :
         make_sentence_batches(sentences, batch_size, model.vocab, model.encoder.max_seq_len, nullptr, false)) {
        const Tensor h1 = pooled(model, tokens, ctx);
        const Tensor h2 = pooled(model, tokens, ctx);
        for (std::size_t i = 0; i < tokens.batch; ++i) {
            total += cosine(h1.data().subspan(i * d, d), h2.data().subspan(i * d, d));
        }
    }
    return total / static_cast<double>(sentences.size());
}

std::vector<NamedParam> task_parameters(const Model& model, Task task) {
    auto params = named_parameters(model.params);
    for (auto& p : head_parameters(model, task)) params.push_back(std::move(p));
    return params;
}

Checkpoint train_single_task(const TrainConfig& config, std::span<const Example> train, std::span<const Example> dev,
                             const Model& init, const TrainHooks& hooks) {
    config.validate();
    const Task task = config.task;
    require_schema(train, schema_for(task), "train_single_task (train)");
    require_schema(dev, schema_for(task), "train_single_task (dev)");
    if (train.empty() && config.epochs > 0) throw DataError("train_single_task: empty training set");

    const auto per_epoch = static_cast<std::int64_t>(count_batches(train.size(), config.batch_size));
    Model model = prepare_model(init, config, per_epoch * config.epochs);
    Rng shuffle_rng = Rng::for_stream(config.seed, "shuffle/" + to_string(task));

    Loop loop;
    loop.stage = to_string(task);
    loop.params = task_parameters(model, task);
    loop.epoch_steps = [&] {
        std::vector<Step> steps;
        for (auto& batch :
             make_batches(train, config.batch_size, model.vocab, model.encoder.max_seq_len, &shuffle_rng, true)) {
            steps.push_back({to_string(task), [&model, &config, task, b = std::move(batch)](const ForwardContext& ctx) {
                                 return task_loss(model, task, b, config, ctx);
                             }});
        }
        return steps;
    };
    loop.dev_eval = [&](const Model& m) { return eval_map(m, task, dev); };

    Checkpoint ck = run_loop(model, config, loop, hooks);
    ck.stage = Stage::baseline;
    ck.trained_tasks = {to_string(task)};
    record_stage_metric(ck, task, dev);
    return ck;
}

Checkpoint train_multitask(const TrainConfig& config, const MultitaskData& data, const TaskSelection& tasks,
                           const Model& init, const TrainHooks& hooks) {
    config.validate();
    struct Stream {
        Task task;
        std::span<const Example> train, dev;
        Rng shuffle;
    };
    std::vector<Stream> streams;
    auto add = [&](bool enabled, Task task, const std::vector<Example>& train, const std::vector<Example>& dev) {
        if (!enabled) return;
        if (train.empty()) throw DataError("train_multitask: missing " + to_string(task) + " training data");
        require_schema(train, schema_for(task), "train_multitask (train)");
        require_schema(dev, schema_for(task), "train_multitask (dev)");
        streams.push_back({task, train, dev, Rng::for_stream(config.seed, "shuffle/" + to_string(task))});
    };
    add(tasks.sst, Task::sst, data.sst_train, data.sst_dev);
    add(tasks.paraphrase, Task::paraphrase, data.para_train, data.para_dev);
    add(tasks.sts, Task::sts, data.sts_train, data.sts_dev);
    if (streams.empty()) throw ConfigError("train_multitask: no task enabled");

    std::size_t longest = 0;
    for (const auto& s : streams) longest = std::max(longest, count_batches(s.train.size(), config.batch_size));
    Model model = prepare_model(init, config, static_cast<std::int64_t>(longest * streams.size()) * config.epochs);

    Loop loop;
    loop.stage = "multitask";
    loop.params = named_parameters(model.params);
    for (const auto& s : streams) {
        for (auto& p : head_parameters(model, s.task)) loop.params.push_back(std::move(p));
    }
    loop.epoch_steps = [&] {
        std::vector<std::vector<Batch>> per_task;
        for (auto& s : streams) {
            per_task.push_back(make_batches(s.train, config.batch_size, model.vocab, model.encoder.max_seq_len,
                                            &s.shuffle, true));
        }
        std::vector<Step> steps;
        for (std::size_t round = 0; round < longest; ++round) {
            for (std::size_t k = 0; k < streams.size(); ++k) {
                const Task task = streams[k].task;
                // Exhausted streams restart from their first batch.
                Batch batch = per_task[k][round % per_task[k].size()];
                steps.push_back({to_string(task), [&model, &config, task, b = std::move(batch)](const ForwardContext& ctx) {
                                     return task_loss(model, task, b, config, ctx);
                                 }});
            }
        }
        return steps;
    };
    loop.dev_eval = [&](const Model& m) {
        std::map<std::string, double> out;
        for (const auto& s : streams) {
            if (!s.dev.empty()) out[to_string(s.task)] = evaluate(m, s.task, s.dev).value;
        }
        return out;
    };

    Checkpoint ck = run_loop(model, config, loop, hooks);
    ck.stage = Stage::baseline;
    for (const auto& s : streams) ck.trained_tasks.push_back(to_string(s.task));
    return ck;
}

Checkpoint train_unsup_simcse(const TrainConfig& config, std::span<const std::string> sentences, const Model& init,
                              std::span<const Example> sts_dev, const TrainHooks& hooks) {
    config.validate();
    require_schema(sts_dev, Schema::pair_scored, "train_unsup_simcse (dev)");
    if (sentences.empty() && config.epochs > 0) throw DataError("train_unsup_simcse: no sentences");
    const auto per_epoch = static_cast<std::int64_t>(count_batches(sentences.size(), config.batch_size));
    Model model = prepare_model(init, config, per_epoch * config.epochs);
    Rng shuffle_rng = Rng::for_stream(config.seed, "shuffle/unsup_simcse");

    Loop loop;
    loop.stage = "unsup_simcse";
    loop.params = named_parameters(model.params);
    loop.epoch_steps = [&] {
        std::vector<Step> steps;
        for (auto& tokens : make_sentence_batches(sentences, config.batch_size, model.vocab, model.encoder.max_seq_len,
                                                  &shuffle_rng, true)) {
            if (tokens.batch < 2) {
                log_line(hooks, "warning: unsup_simcse skipped a batch of 1 sentence (no in-batch negatives)");
                continue;
            }
            steps.push_back({"sts", [&model, &config, t = std::move(tokens)](const ForwardContext& ctx) {
                                 const Tensor h = pooled(model, t, ctx);
                                 const Tensor h_plus = pooled(model, t, ctx);
                                 return unsup_simcse_loss(h, h_plus, config.tau);
                             }});
        }
        return steps;
    };
    loop.dev_eval = [&](const Model& m) { return eval_map(m, Task::sts, sts_dev); };

    Checkpoint ck = run_loop(model, config, loop, hooks);
    ck.stage = Stage::unsup_simcse;
    record_stage_metric(ck, Task::sts, sts_dev);
    return ck;
}

Checkpoint train_sup_simcse(const TrainConfig& config, std::span<const Example> triplets, const Model& init,
                            std::span<const Example> sts_dev, const TrainHooks& hooks) {
    config.validate();
    require_schema(triplets, Schema::triplet, "train_sup_simcse");
    require_schema(sts_dev, Schema::pair_scored, "train_sup_simcse (dev)");
    if (triplets.empty() && config.epochs > 0) throw DataError("train_sup_simcse: no triplets");
    const auto per_epoch = static_cast<std::int64_t>(count_batches(triplets.size(), config.batch_size));
    Model model = prepare_model(init, config, per_epoch * config.epochs);
    Rng shuffle_rng = Rng::for_stream(config.seed, "shuffle/sup_simcse");

    Loop loop;
    loop.stage = "sup_simcse";
    loop.params = named_parameters(model.params);
    loop.epoch_steps = [&] {
        std::vector<Step> steps;
        for (auto& batch :
             make_batches(triplets, config.batch_size, model.vocab, model.encoder.max_seq_len, &shuffle_rng, true)) {
            steps.push_back({"sts", [&model, &config, b = std::get<TripletBatch>(std::move(batch))](
                                        const ForwardContext& ctx) {
                                 const Tensor h = pooled(model, b.anchor, ctx);
                                 const Tensor h_plus = pooled(model, b.positive, ctx);
                                 const Tensor h_minus = pooled(model, b.negative, ctx);
                                 return sup_simcse_loss(h, h_plus, h_minus, config.tau);
                             }});
        }
        return steps;
    };
    loop.dev_eval = [&](const Model& m) { return eval_map(m, Task::sts, sts_dev); };

    Checkpoint ck = run_loop(model, config, loop, hooks);
    ck.stage = Stage::sup_simcse;
    record_stage_metric(ck, Task::sts, sts_dev);
    return ck;
}

TwoTierConfig TwoTierConfig::from_base(const TrainConfig& base) {
    TwoTierConfig c;
    c.sts = base;
    c.sts.task = Task::sts;
    c.unsup = c.sts;
    c.unsup.batch_size = 64;
    c.unsup.optim.lr = 3e-5;
    c.unsup.dropout.p = 0.1;
    c.sup = c.sts;
    c.sup.batch_size = 24;
    c.sup.optim.lr = 5e-5;
    c.sup.dropout.p = 0.1;
    c.sup.epochs = 5;
    c.finetune = c.sts;
    return c;
}

Checkpoint run_two_tier(const TwoTierConfig& config, std::span<const Example> sts_train,
                        std::span<const Example> sts_dev, std::span<const Example> triplets, const Model& init,
                        const TrainHooks& hooks) {
    if (sts_train.empty()) throw DataError("run_two_tier: missing STS training data");
    if (triplets.empty()) throw DataError("run_two_tier: missing triplet data");
    const std::span<const Example> eval_set = sts_dev.empty() ? sts_train : sts_dev;

    Checkpoint out;
    auto absorb = [&](Checkpoint&& stage, const std::string& name) {
        auto record = stage.stages.back();
        record.name = name;
        log_line(hooks, "stage " + name + " sts pearson " + format_fixed(record.value, 4));
        out.stages.push_back(record);
        out.history.insert(out.history.end(), stage.history.begin(), stage.history.end());
        out.model = std::move(stage.model);
    };

    TrainConfig stage1 = config.sts;
    stage1.task = Task::sts;
    absorb(train_single_task(stage1, sts_train, eval_set, init, hooks), "sts_pretrain");

    if (!config.skip_unsup) {
        const auto pool = sentence_pool(sts_train);
        absorb(train_unsup_simcse(config.unsup, pool, out.model, eval_set, hooks), "unsup_simcse");
    }
    absorb(train_sup_simcse(config.sup, triplets, out.model, eval_set, hooks), "sup_simcse");
    if (config.sts_finetune) {
        TrainConfig stage4 = config.finetune;
        stage4.task = Task::sts;
        absorb(train_single_task(stage4, sts_train, eval_set, out.model, hooks), "sts_finetune");
    }
    out.stage = Stage::two_tier;
    out.trained_tasks = {"sts"};
    return out;
}

Checkpoint transfer_finetune(const Checkpoint& source, const TrainConfig& config, std::span<const Example> train,
                             std::span<const Example> dev, const TrainHooks& hooks) {
    Model staged = clone_model(source.model);
    // The whole head set is redrawn so the target head matches a fresh init_model.
    Rng head_rng = Rng::for_stream(config.seed, "head-init");
    const HeadParams fresh = init_heads(staged.encoder.hidden_dim, staged.heads_config, head_rng);
    switch (config.task) {
        case Task::sst:
            std::ranges::copy(fresh.sst_weight.data(), staged.heads.sst_weight.mutable_data().begin());
            std::ranges::copy(fresh.sst_bias.data(), staged.heads.sst_bias.mutable_data().begin());
            break;
        case Task::paraphrase:
            std::ranges::copy(fresh.para_weight.data(), staged.heads.para_weight.mutable_data().begin());
            std::ranges::copy(fresh.para_bias.data(), staged.heads.para_bias.mutable_data().begin());
            break;
        case Task::sts:
            std::ranges::copy(fresh.sts_weight.data(), staged.heads.sts_weight.mutable_data().begin());
            std::ranges::copy(fresh.sts_bias.data(), staged.heads.sts_bias.mutable_data().begin());
            std::ranges::copy(fresh.cross_attn.data(), staged.heads.cross_attn.mutable_data().begin());
            break;
    }
    Checkpoint ck = train_single_task(config, train, dev, staged, hooks);
    ck.stage = Stage::transfer;
    ck.trained_tasks = source.trained_tasks;
    if (std::ranges::find(ck.trained_tasks, to_string(config.task)) == ck.trained_tasks.end()) {
        ck.trained_tasks.push_back(to_string(config.task));
    }
    ck.stages.back().name = "transfer_" + to_string(config.task);
    return ck;
}

}  // namespace simcse
