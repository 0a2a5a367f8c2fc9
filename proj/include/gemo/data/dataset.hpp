// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gemo/numerics/matrix.hpp"

namespace gemo {

/// One utterance: pooled-before-use audio frames (T x D_a) and text tokens (L x D_t).
struct SampleRecord {
  std::string id;
  std::string emotion;
  std::string gender;
  std::optional<int> session;
  Matrix audio_features;
  Matrix text_features;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Dataset {
  std::vector<SampleRecord> samples;
  std::vector<std::string> emotion_labels;
  std::vector<std::string> gender_labels;
  std::size_t d_a = 0;
  std::size_t d_t = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t emotion_index(const std::string& label) const;
  std::size_t gender_index(const std::string& label) const;

  /// Checks shapes, finiteness, label membership and id uniqueness.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Per-class prompt features ("natural-language supervision" stand-ins).
struct ClassPromptSet {
  std::map<std::string, Matrix> emotion;
  std::map<std::string, Matrix> gender;

  /// Throws PromptError unless every label has a prompt with `d_t` columns.
  void require_emotions(const Dataset& d) const;
  void require_genders(const Dataset& d) const;

  friend bool operator==(const ClassPromptSet&, const ClassPromptSet&) = default;
};

struct LoadedManifest {
  Dataset dataset;
  ClassPromptSet prompts;
};

/// Reads a JSON Lines manifest (header, sample and prompt lines).
LoadedManifest load_manifest(const std::filesystem::path& path);

/// Writes header, then samples, then emotion prompts, then gender prompts.
void write_manifest(const std::filesystem::path& path, const Dataset& d, const ClassPromptSet& p);
std::string manifest_to_string(const Dataset& d, const ClassPromptSet& p);

struct SynthConfig {
  std::size_t n_samples = 1000;
  std::vector<std::string> emotion_labels{"angry", "happy", "neutral", "sad"};
  std::vector<std::string> gender_labels{"female", "male"};
  std::size_t d_a = 16;
  std::size_t d_t = 12;
  std::size_t t_min = 5, t_max = 20;
  std::size_t l_min = 3, l_max = 8;
  double separation = 3.0;
  double noise = 1.0;
  double confound = 0.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
};

struct SynthData {
  Dataset dataset;
  ClassPromptSet prompts;
};

SynthData generate_synthetic(const SynthConfig& cfg);

struct Fold {
  std::vector<std::size_t> train;  // indices into Dataset::samples
  std::vector<std::size_t> test;
};

/// Session folds when every sample has a session (fold i tests session i),
/// otherwise a seeded split stratified by emotion.
std::vector<Fold> kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed = 0);

/// Seeded shuffle then consecutive chunks; a trailing chunk of one is merged
/// into the previous batch.
std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> ids,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed);

}  // namespace gemo
