// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simcse/error.hpp"
#include "simcse/experiments.hpp"
#include "simcse/ops.hpp"
#include "simcse/trainer.hpp"

using namespace simcse;

namespace {

const ToyCorpora& corpora() {
    static const ToyCorpora data = [] {
        CorpusSizes sizes;
        sizes.sst = sizes.paraphrase = sizes.sts = 32;
        sizes.triplets = 24;
        return make_toy_corpora(sizes, 5);
    }();
    return data;
}

EncoderConfig tiny_encoder(DropoutPolicy dropout = DropoutPolicy::standard(0.1)) {
    EncoderConfig enc;
    enc.hidden_dim = 8;
    enc.num_layers = 1;
    enc.num_heads = 2;
    enc.ffn_dim = 16;
    enc.max_seq_len = 20;
    enc.dropout = dropout;
    enc.pooling = Pooling::mean;
    return enc;
}

TrainConfig tiny_config(Task task, int epochs = 2) {
    TrainConfig cfg;
    cfg.task = task;
    cfg.epochs = epochs;
    cfg.optim.lr = 1e-3;
    cfg.dropout = DropoutPolicy::standard(0.1);
    cfg.seed = 9;
    return cfg;
}

Model tiny_model(std::uint64_t seed = 9, DropoutPolicy dropout = DropoutPolicy::standard(0.1)) {
    return init_model(corpora().vocab, tiny_encoder(dropout), {}, seed);
}

const std::vector<Example>& train_of(Task task) {
    const auto& t = corpora().tasks;
    return task == Task::sst ? t.sst_train : task == Task::paraphrase ? t.para_train : t.sts_train;
}

const std::vector<Example>& dev_of(Task task) {
    const auto& t = corpora().tasks;
    return task == Task::sst ? t.sst_dev : task == Task::paraphrase ? t.para_dev : t.sts_dev;
}

std::vector<double> step_losses(const std::function<void(const TrainHooks&)>& run) {
    std::vector<double> losses;
    TrainHooks hooks;
    hooks.on_step = [&](const StepEvent& e) { losses.push_back(e.loss); };
    run(hooks);
    return losses;
}

}  // namespace

TEST(TrainConfig, Validation) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.epochs = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.tau = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(TrainConfig{}.optim.lr, 1e-5);
    EXPECT_EQ(TrainConfig{}.dropout.p, 0.3);
    EXPECT_EQ(TrainConfig{}.batch_size, 8u);
    EXPECT_EQ(TrainConfig{}.epochs, 10);
}

TEST(Trainer, ZeroEpochsReturnsInit) {
    const Model init = tiny_model();
    const auto ck = train_single_task(tiny_config(Task::sst, 0), train_of(Task::sst), dev_of(Task::sst), init);
    EXPECT_EQ(params_hash(ck.model), params_hash(init));
    EXPECT_TRUE(ck.history.empty());
}

TEST(Trainer, SingleTaskIsDeterministic) {
    for (Task task : {Task::sst, Task::paraphrase, Task::sts}) {
        const auto a = serialize_checkpoint(train_single_task(tiny_config(task), train_of(task), dev_of(task), tiny_model()));
        const auto b = serialize_checkpoint(train_single_task(tiny_config(task), train_of(task), dev_of(task), tiny_model()));
        EXPECT_EQ(a, b) << to_string(task);
    }
}

TEST(Trainer, ReturnsBestDevEpoch) {
    TrainConfig cfg = tiny_config(Task::sts, 5);
    cfg.optim.lr = 1e-2;  // large enough that dev Pearson moves between epochs
    const auto ck = train_single_task(cfg, train_of(Task::sts), dev_of(Task::sts), tiny_model());
    ASSERT_EQ(ck.history.size(), 5u);
    const auto best = std::max_element(ck.history.begin(), ck.history.end(),
                                       [](const EpochRecord& a, const EpochRecord& b) { return a.selection < b.selection; });
    EXPECT_NEAR(evaluate(ck.model, Task::sts, dev_of(Task::sts)).value, best->dev.at("sts"), 1e-12);
    EXPECT_EQ(ck.stages.back().value, evaluate(ck.model, Task::sts, dev_of(Task::sts)).value);
}

TEST(Trainer, NonFiniteLossIsNumericError) {
    TrainConfig cfg = tiny_config(Task::sts, 1);
    cfg.optim.lr = 1e300;
    EXPECT_THROW(train_single_task(cfg, train_of(Task::sts), {}, tiny_model()), NumericError);
}

TEST(Trainer, TaskParametersAreEncoderPlusOwnHead) {
    const Model m = tiny_model();
    const std::size_t encoder = named_parameters(m.params).size();
    EXPECT_EQ(task_parameters(m, Task::sst).size(), encoder + 2);
    EXPECT_EQ(task_parameters(m, Task::paraphrase).size(), encoder + 2);
    EXPECT_EQ(task_parameters(m, Task::sts).size(), encoder);  // cosine heads have no parameters
}

TEST(Multitask, SingleEnabledTaskMatchesSingleTaskTraining) {
    for (Task task : {Task::sst, Task::paraphrase, Task::sts}) {
        TaskSelection only{task == Task::sst, task == Task::paraphrase, task == Task::sts};
        const auto single = step_losses([&](const TrainHooks& h) {
            train_single_task(tiny_config(task), train_of(task), dev_of(task), tiny_model(), h);
        });
        const auto multi = step_losses(
            [&](const TrainHooks& h) { train_multitask(tiny_config(task), corpora().tasks, only, tiny_model(), h); });
        ASSERT_FALSE(single.empty());
        EXPECT_EQ(single, multi) << to_string(task);
    }
}

TEST(Multitask, RoundRobinOverEnabledTasks) {
    std::vector<std::string> order;
    TrainHooks hooks;
    hooks.on_step = [&](const StepEvent& e) { order.push_back(e.task); };
    TaskSelection sel;
    sel.paraphrase = false;
    const auto ck = train_multitask(tiny_config(Task::sst, 1), corpora().tasks, sel, tiny_model(), hooks);
    ASSERT_GE(order.size(), 4u);
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i % 2 == 0 ? "sst" : "sts");
    EXPECT_EQ(ck.trained_tasks, (std::vector<std::string>{"sst", "sts"}));
    EXPECT_EQ(ck.history.front().dev.size(), 2u);
    EXPECT_THROW(train_multitask(tiny_config(Task::sst), corpora().tasks, {false, false, false}, tiny_model()),
                 ConfigError);
}

TEST(Multitask, DisabledHeadsAreUntouched) {
    const Model init = tiny_model();
    TaskSelection sel{true, false, true};
    const auto ck = train_multitask(tiny_config(Task::sst, 1), corpora().tasks, sel, init);
    EXPECT_EQ(std::vector<double>(ck.model.heads.para_weight.data().begin(), ck.model.heads.para_weight.data().end()),
              std::vector<double>(init.heads.para_weight.data().begin(), init.heads.para_weight.data().end()));
    EXPECT_NE(params_hash(ck.model), params_hash(init));
}

TEST(UnsupSimcse, ZeroDropoutGivesLogNEveryBatch) {
    TrainConfig cfg = tiny_config(Task::sts, 2);
    cfg.dropout = DropoutPolicy::standard(0.0);
    cfg.batch_size = 5;
    const std::vector<std::string> same(15, "the man runs quickly in the park at night");
    const auto losses = step_losses([&](const TrainHooks& h) {
        train_unsup_simcse(cfg, same, tiny_model(9, cfg.dropout), {}, h);
    });
    EXPECT_EQ(losses.size(), 6u);
    for (double loss : losses) EXPECT_NEAR(loss, std::log(5.0), 1e-9);
}

TEST(UnsupSimcse, DropoutMakesPassesDiffer) {
    const Model m = tiny_model();
    const std::vector<std::string> sentences = {"the dog sleeps", "a woman reads slowly"};
    Rng rng(3);
    EXPECT_LT(dropout_alignment(m, sentences, rng), 1.0);
    TrainConfig cfg = tiny_config(Task::sts, 1);
    cfg.dropout = DropoutPolicy::standard(0.0);
    Rng rng0(3);
    EXPECT_NEAR(dropout_alignment(tiny_model(9, cfg.dropout), sentences, rng0), 1.0, 1e-12);
}

TEST(UnsupSimcse, SingleSentenceBatchesAreSkippedWithWarning) {
    TrainConfig cfg = tiny_config(Task::sts, 1);
    cfg.batch_size = 4;
    const std::vector<std::string> five = {"a b", "c d", "e f", "g h", "i j"};
    std::ostringstream log;
    TrainHooks hooks;
    std::size_t steps = 0;
    hooks.on_step = [&](const StepEvent&) { ++steps; };
    hooks.log = &log;
    train_unsup_simcse(cfg, five, tiny_model(), {}, hooks);
    EXPECT_EQ(steps, 1u);
    EXPECT_NE(log.str().find("warning"), std::string::npos);
}

TEST(SupSimcse, BatchOfOneAndDecreasingLoss) {
    TrainConfig cfg = tiny_config(Task::sts, 1);
    cfg.batch_size = 1;
    const std::vector<Example> one(corpora().triplets.begin(), corpora().triplets.begin() + 1);
    const auto single = step_losses([&](const TrainHooks& h) { train_sup_simcse(cfg, one, tiny_model(), {}, h); });
    ASSERT_EQ(single.size(), 1u);
    EXPECT_TRUE(std::isfinite(single[0]));

    cfg.epochs = 6;
    cfg.batch_size = 8;
    cfg.optim.lr = 3e-3;
    std::vector<double> epoch_loss;
    TrainHooks hooks;
    hooks.on_epoch = [&](const EpochRecord& r) { epoch_loss.push_back(r.train_loss); };
    train_sup_simcse(cfg, corpora().triplets, tiny_model(), {}, hooks);
    ASSERT_EQ(epoch_loss.size(), 6u);
    EXPECT_LT(epoch_loss.back(), epoch_loss.front());
}

TEST(TwoTier, ThreeStagesWithChainedHashes) {
    TwoTierConfig cfg = TwoTierConfig::from_base(tiny_config(Task::sts, 1));
    EXPECT_EQ(cfg.unsup.batch_size, 64u);
    EXPECT_EQ(cfg.unsup.optim.lr, 3e-5);
    EXPECT_EQ(cfg.sup.batch_size, 24u);
    EXPECT_EQ(cfg.sup.optim.lr, 5e-5);
    EXPECT_EQ(cfg.sup.epochs, 5);
    cfg.unsup.batch_size = 16;
    cfg.sup.batch_size = 8;
    cfg.sup.epochs = 1;
    const auto& d = corpora();
    const auto ck = run_two_tier(cfg, d.tasks.sts_train, d.tasks.sts_dev, d.triplets, tiny_model());
    ASSERT_EQ(ck.stages.size(), 3u);
    EXPECT_EQ(ck.stages[0].name, "sts_pretrain");
    EXPECT_EQ(ck.stages[1].name, "unsup_simcse");
    EXPECT_EQ(ck.stages[2].name, "sup_simcse");
    for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(ck.stages[i].init_hash, ck.stages[i - 1].final_hash);
    EXPECT_EQ(ck.stages.back().final_hash, params_hash(ck.model));
    for (const auto& s : ck.stages) EXPECT_EQ(s.metric, "pearson");
    EXPECT_EQ(ck.stage, Stage::two_tier);

    cfg.skip_unsup = true;
    cfg.sts_finetune = true;
    const auto skipped = run_two_tier(cfg, d.tasks.sts_train, d.tasks.sts_dev, d.triplets, tiny_model());
    ASSERT_EQ(skipped.stages.size(), 3u);
    EXPECT_EQ(skipped.stages[1].name, "sup_simcse");
    EXPECT_EQ(skipped.stages[2].name, "sts_finetune");
}

TEST(Transfer, RandomSourceEqualsPlainTraining) {
    for (Task task : {Task::sst, Task::paraphrase, Task::sts}) {
        Checkpoint source;
        source.model = tiny_model();
        const auto transferred = transfer_finetune(source, tiny_config(task), train_of(task), dev_of(task));
        const auto plain = train_single_task(tiny_config(task), train_of(task), dev_of(task), tiny_model());
        EXPECT_EQ(params_hash(transferred.model), params_hash(plain.model)) << to_string(task);
        EXPECT_EQ(transferred.stage, Stage::transfer);
        EXPECT_EQ(transferred.stages.back().name, "transfer_" + to_string(task));
    }
}

TEST(Transfer, KeepsSourceEncoderAndOtherHeads) {
    Checkpoint source;
    source.model = tiny_model(77);
    source.trained_tasks = {"sts"};
    const auto ck = transfer_finetune(source, tiny_config(Task::sst, 0), train_of(Task::sst), dev_of(Task::sst));
    const auto src = named_parameters(source.model.params), dst = named_parameters(ck.model.params);
    for (std::size_t i = 0; i < src.size(); ++i)
        EXPECT_TRUE(std::ranges::equal(src[i].tensor.data(), dst[i].tensor.data())) << src[i].name;
    EXPECT_TRUE(std::ranges::equal(source.model.heads.para_weight.data(), ck.model.heads.para_weight.data()));
    EXPECT_FALSE(std::ranges::equal(source.model.heads.sst_weight.data(), ck.model.heads.sst_weight.data()));
    EXPECT_EQ(ck.trained_tasks, (std::vector<std::string>{"sts", "sst"}));
}

TEST(Trainer, FrozenEncoderLinearHeadLossIsNonIncreasing) {
    // Convex problem: fixed features from a frozen encoder, linear SST head,
    // full-batch BCE against one-hot targets.
    const Model m = tiny_model();
    const auto& data = train_of(Task::sst);
    std::vector<std::string> texts;
    std::vector<double> onehot;
    for (const auto& e : data) {
        const auto& c = std::get<Classification>(e);
        texts.push_back(c.text);
        for (int k = 0; k < 5; ++k) onehot.push_back(k == c.label ? 1.0 : 0.0);
    }
    const auto rows = embed_sentences(m, texts);
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const Tensor features = Tensor::from({rows.size(), rows[0].size()}, flat);
    const Tensor targets = Tensor::from({rows.size(), 5}, onehot);
    HeadParams heads = clone_model(m).heads;
    AdamWOptions o;
    o.lr = 1e-3;
    AdamW opt({{"w", heads.sst_weight, true}, {"b", heads.sst_bias, false}}, o);
    double prev = INFINITY;
    for (int epoch = 0; epoch < 50; ++epoch) {
        opt.zero_grad();
        const Tensor loss = bce_loss(sst_logits(features, heads), targets);
        EXPECT_LE(loss.item(), prev + 1e-15) << "epoch " << epoch;
        prev = loss.item();
        backward(loss);
        opt.step();
    }
}

TEST(Evaluate, OutputsAndEmbeddings) {
    const Model m = tiny_model();
    for (Task task : {Task::sst, Task::paraphrase, Task::sts}) {
        std::vector<double> outputs;
        const auto r = evaluate(m, task, dev_of(task), &outputs);
        EXPECT_EQ(r.metric, metric_name(task));
        EXPECT_EQ(r.n, dev_of(task).size());
        EXPECT_EQ(outputs.size(), dev_of(task).size());
    }
    EXPECT_THROW(evaluate(m, Task::sst, dev_of(Task::sts)), DataError);
    const std::vector<std::string> dup = {"the cat sleeps", "a dog", "the cat sleeps"};
    const auto e = embed_sentences(m, dup);
    EXPECT_EQ(e[0], e[2]);
    EXPECT_EQ(e[0].size(), 8u);
}
