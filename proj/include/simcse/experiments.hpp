// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "simcse/report.hpp"
#include "simcse/trainer.hpp"

namespace simcse {

// Synthetic stand-ins for the three task datasets plus NLI triplets.
struct ToyCorpora {
    MultitaskData tasks;
    std::vector<Example> triplets;
    Vocab vocab;
};

struct CorpusSizes {
    std::size_t sst = 60;
    std::size_t paraphrase = 60;
    std::size_t sts = 60;
    std::size_t triplets = 48;
    double dev_fraction = 0.25;
};

/// Each split is generated from its own "synth/<task>" stream of `seed`; the
/// vocabulary covers every sentence.
ToyCorpora make_toy_corpora(const CorpusSizes& sizes, std::uint64_t seed);

struct ExperimentSetup {
    EncoderConfig encoder;
    HeadConfig heads;
    TrainConfig base;        // per-stage settings are derived from this
    TwoTierConfig two_tier;  // SimCSE stage settings
};

/// Single-task models (one per task) against one multitask model.
/// Rows: models "single-task" and "multitask".
std::vector<MetricReport> single_vs_multitask(const ExperimentSetup& setup, const ToyCorpora& data);

/// Single-task models under standard, adaptive and curriculum dropout.
/// Rows: models "standard-dropout", "adaptive-dropout", "curriculum-dropout".
std::vector<MetricReport> dropout_comparison(const ExperimentSetup& setup, const ToyCorpora& data);

/// STS-pretrained then SimCSE-tuned encoders, transferred to paraphrase and
/// sst, against plain single-task training. Rows: "no-transfer",
/// "unsup-simcse+transfer", "sup-simcse+transfer".
std::vector<MetricReport> transfer_comparison(const ExperimentSetup& setup, const ToyCorpora& data);

/// The two-tier pipeline on STS, transferred to paraphrase and sst.
/// Rows: model "two-tier+transfer".
std::vector<MetricReport> two_tier_report(const ExperimentSetup& setup, const ToyCorpora& data);

}  // namespace simcse
