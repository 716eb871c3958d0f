// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "simcse/experiments.hpp"
#include "simcse/trainer.hpp"

namespace simcse::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kIntegrity = 3 };

/// Every accepted key with its default. Unknown keys in a config file or an
/// override are rejected.
nlohmann::json default_config();

using Override = std::pair<std::string, std::string>;  // dotted path, raw value

/// Seed precedence, lowest first: built-in default, `env_seed`, the config file,
/// then overrides (`--seed` is the override of the top-level key).
nlohmann::json resolve_config(const std::optional<std::filesystem::path>& file, const std::vector<Override>& overrides,
                              const char* env_seed);

EncoderConfig encoder_config(const nlohmann::json& config);
HeadConfig head_config(const nlohmann::json& config);
TrainConfig train_config(const nlohmann::json& config);
TwoTierConfig two_tier_config(const nlohmann::json& config);

/// First 8 hex digits of the FNV-1a hash of the canonical config dump.
std::string config_hash(const nlohmann::json& config);

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simcse::cli
