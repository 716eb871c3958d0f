// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simcse/adamw.hpp"
#include "simcse/checkpoint.hpp"
#include "simcse/data.hpp"
#include "simcse/objectives.hpp"

namespace simcse {

enum class Task { sst, paraphrase, sts };

std::string to_string(Task task);
Task parse_task(std::string_view name);
Schema schema_for(Task task);
/// "accuracy" for sst and paraphrase, "pearson" for sts.
std::string metric_name(Task task);

/// Hyperparameters of one training stage. Defaults are the baseline settings:
/// lr 1e-5, dropout 0.3, weight decay 0, batch 8, 10 epochs.
struct TrainConfig {
    Task task = Task::sst;
    int epochs = 10;
    std::size_t batch_size = 8;
    AdamWOptions optim{};
    double clip_norm = 0.0;  // 0 disables clipping
    // A curriculum schedule with total_steps <= 0 is stretched over the whole run.
    DropoutPolicy dropout = DropoutPolicy::standard(0.3);
    SimilarityHeadKind sts_head = SimilarityHeadKind::cos_sigmoid;
    SstLoss sst_loss = SstLoss::bce;
    double tau = 0.05;
    std::uint64_t seed = 42;
    std::int64_t eval_every = 0;  // steps between logged dev evaluations; 0 = epoch ends only

    void validate() const;
};

struct StepEvent {
    std::string stage;
    std::string task;
    int epoch = 0;
    std::int64_t step = 0;
    double loss = 0.0;
};

struct TrainHooks {
    std::function<void(const StepEvent&)> on_step;
    std::function<void(const EpochRecord&)> on_epoch;
    std::ostream* log = nullptr;  // line-oriented progress and warnings
};

struct EvalResult {
    std::string metric;
    double value = 0.0;
    std::size_t n = 0;
};

/// Eval-mode metric of `model` on `data`: accuracy for sst/paraphrase, Pearson
/// of the configured STS head for sts. Optionally returns per-example outputs
/// (predicted class, duplicate probability, or similarity score).
EvalResult evaluate(const Model& model, Task task, std::span<const Example> data,
                    std::vector<double>* outputs = nullptr);

/// Eval-mode pooled embeddings, one row per sentence.
std::vector<std::vector<double>> embed_sentences(const Model& model, std::span<const std::string> sentences,
                                                 std::size_t batch_size = 64);

/// Mean cosine between two train-mode (dropout-perturbed) encodings of each
/// sentence, the alignment of unsupervised SimCSE positive pairs.
double dropout_alignment(const Model& model, std::span<const std::string> sentences, Rng& rng,
                         std::size_t batch_size = 64);

/// Encoder parameters plus the head that `task` trains.
std::vector<NamedParam> task_parameters(const Model& model, Task task);

/// Single-task fine-tuning. Returns the weights of the best dev epoch (the last
/// epoch when `dev` is empty); 0 epochs returns `init` unchanged.
Checkpoint train_single_task(const TrainConfig& config, std::span<const Example> train, std::span<const Example> dev,
                             const Model& init, const TrainHooks& hooks = {});

struct MultitaskData {
    std::vector<Example> sst_train, sst_dev;
    std::vector<Example> para_train, para_dev;
    std::vector<Example> sts_train, sts_dev;
};

struct TaskSelection {
    bool sst = true;
    bool paraphrase = true;
    bool sts = true;
};

/// Shared encoder with per-task heads. Each epoch interleaves batches strictly
/// round-robin (sst, paraphrase, sts) and cycles shorter streams until the
/// longest is exhausted. Best epoch = highest mean of the enabled dev metrics.
Checkpoint train_multitask(const TrainConfig& config, const MultitaskData& data, const TaskSelection& tasks,
                           const Model& init, const TrainHooks& hooks = {});

/// Unsupervised SimCSE: two dropout-perturbed passes of each sentence form the
/// positive pair; other sentences in the batch are negatives. Batches of one
/// sentence are skipped with a warning. An STS dev set, when given, drives
/// best-epoch selection.
Checkpoint train_unsup_simcse(const TrainConfig& config, std::span<const std::string> sentences, const Model& init,
                              std::span<const Example> sts_dev = {}, const TrainHooks& hooks = {});

/// Supervised SimCSE over (anchor, entailment, contradiction) triplets.
Checkpoint train_sup_simcse(const TrainConfig& config, std::span<const Example> triplets, const Model& init,
                            std::span<const Example> sts_dev = {}, const TrainHooks& hooks = {});

/// Stage settings of the two-tier pipeline.
struct TwoTierConfig {
    TrainConfig sts;       // stage 1: STS task training
    TrainConfig unsup;     // stage 2: unsupervised SimCSE on STS sentences
    TrainConfig sup;       // stage 3: supervised SimCSE on triplets
    TrainConfig finetune;  // optional stage 4: STS training after stage 3
    bool skip_unsup = false;
    bool sts_finetune = false;

    /// Stage hyperparameters derived from `base`: STS training as given;
    /// unsupervised SimCSE batch 64, lr 3e-5, dropout 0.1; supervised SimCSE
    /// batch 24, lr 5e-5, dropout 0.1, 5 epochs.
    static TwoTierConfig from_base(const TrainConfig& base);
};

/// STS training, then unsupervised SimCSE on the deduplicated STS sentences,
/// then supervised SimCSE on triplets, each starting from the previous stage's
/// returned weights. STS is evaluated after every stage (on `sts_dev`, or on
/// `sts_train` when no dev set is given).
Checkpoint run_two_tier(const TwoTierConfig& config, std::span<const Example> sts_train,
                        std::span<const Example> sts_dev, std::span<const Example> triplets, const Model& init,
                        const TrainHooks& hooks = {});

/// Loads the encoder (and untouched heads) of `source`, re-initializes the
/// `config.task` head from the "head-init" stream of `config.seed`, then runs
/// train_single_task. Stage tag: transfer.
Checkpoint transfer_finetune(const Checkpoint& source, const TrainConfig& config, std::span<const Example> train,
                             std::span<const Example> dev, const TrainHooks& hooks = {});

}  // namespace simcse
