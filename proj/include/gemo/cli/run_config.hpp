// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gemo/data/dataset.hpp"
#include "gemo/training/training.hpp"

namespace gemo::cli {

/// Fully resolved settings for one command invocation.
struct RunConfig {
  TrainConfig train;
  SynthConfig synth;
  std::filesystem::path manifest;
  std::filesystem::path out = ".";
  std::filesystem::path checkpoint;
  std::vector<std::uint64_t> seeds;  // empty: command default
  std::size_t folds = 5;
  std::optional<std::size_t> fold;   // 1-based
  bool paper_fidelity = false;
  bool timestamp = true;
  std::string inject_fault;  // gradcheck only: slot name whose gradient is negated

  /// Flat provenance record echoed into output JSON. Paths and output
  /// switches are left out so that moving a run does not change its digest.
  nlohmann::json to_json() const;
};

/// Layers `file` then `flags` (both flat JSON objects using the keys of
/// RunConfig::to_json plus manifest, out, checkpoint, no_timestamp) over the
/// defaults. When either layer enables paper_fidelity, its preset replaces
/// the defaults before the layers are applied, so explicit values still win.
/// Unknown keys and invalid values raise ConfigError.
RunConfig resolve_run_config(const nlohmann::json& file, const nlohmann::json& flags);

/// Reads a JSON object from disk. Throws IoError or ParseError.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// "1,2,3" -> {1,2,3}. Throws ConfigError on empty or malformed lists.
std::vector<std::uint64_t> parse_seed_list(const std::string& csv);

}  // namespace gemo::cli
