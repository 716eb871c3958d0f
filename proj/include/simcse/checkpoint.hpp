// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "simcse/data.hpp"
#include "simcse/encoder.hpp"
#include "simcse/objectives.hpp"

namespace simcse {

enum class Stage { baseline, unsup_simcse, sup_simcse, two_tier, transfer };

std::string to_string(Stage stage);
Stage parse_stage(std::string_view name);

/// Everything a forward pass needs: vocabulary, architecture, and weights.
struct Model {
    Vocab vocab;
    EncoderConfig encoder;
    HeadConfig heads_config;
    EncoderParams params;
    HeadParams heads;
};

/// Fresh model; encoder and heads draw from the "encoder-init" and "head-init"
/// streams of `seed`.
Model init_model(const Vocab& vocab, EncoderConfig encoder, const HeadConfig& heads, std::uint64_t seed);

/// Independent deep copy (Tensor handles alias, so plain copies share weights).
Model clone_model(const Model& model);

/// Encoder parameters followed by every head parameter, in a stable order.
std::vector<NamedParam> all_parameters(const Model& model);

/// Copies every value of `src` into the same-named tensors of `dst`.
void copy_weights(const Model& src, Model& dst);

/// FNV-1a over parameter names and raw value bytes, as 16 hex digits.
std::string params_hash(const Model& model);

// Dev metrics of one epoch; `selection` is what best-epoch choice maximizes.
struct EpochRecord {
    std::string stage;
    int epoch = 0;
    double train_loss = 0.0;
    std::map<std::string, double> dev;  // task -> metric value
    double selection = 0.0;
    bool has_dev = false;
};

// One stage of a (possibly multi-stage) run, evaluated after it finished.
struct StageRecord {
    std::string name;
    std::string init_hash;
    std::string final_hash;
    std::string task;
    std::string metric;
    double value = 0.0;
    std::size_t n = 0;
};

struct Checkpoint {
    Model model;
    Stage stage = Stage::baseline;
    std::vector<std::string> trained_tasks;
    std::vector<EpochRecord> history;
    std::vector<StageRecord> stages;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, little-endian:
///   "SCF1" | u32 header_len | header JSON (configs, vocab, metadata, array
///   manifest of name/dtype/shape/offset) | raw f64 arrays | u32 CRC32 of arrays.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes, const std::string& source = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// IntegrityError on bad magic, truncation, checksum or manifest mismatch, and
/// on an unsupported format version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace simcse
