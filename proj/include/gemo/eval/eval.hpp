// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "gemo/data/dataset.hpp"
#include "gemo/model/model.hpp"
#include "gemo/training/training.hpp"

namespace gemo {

/// Cosine similarity; throws NumericError when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

/// 1 x D text embedding of each emotion prompt, in declared label order.
std::vector<Matrix> emotion_prompt_embeddings(const ModelParams& p, const Dataset& d,
                                              const ClassPromptSet& prompts);

/// Index of the prompt embedding with the highest cosine to the audio embedding.
/// Ties go to the lowest index.
std::size_t classify_embedding(std::span<const double> audio_embedding,
                               std::span<const Matrix> class_embeddings);
std::size_t classify(const ModelParams& p, const Matrix& audio_seq,
                     std::span<const Matrix> class_embeddings);

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct FoldMetrics {
  double war = 0.0;
  double uar = 0.0;
  ConfusionMatrix confusion;
  std::size_t total = 0;
};

/// WAR is overall accuracy; UAR averages recall over classes that occur in `truth`.
FoldMetrics compute_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                            std::size_t n_classes);
FoldMetrics compute_metrics(std::span<const std::string> truth, std::span<const std::string> predicted,
                            std::span<const std::string> labels);

struct FoldResult {
  std::size_t fold = 0;  // 1-based
  FoldMetrics metrics;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<double> loss_history;
  ModelParams params;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
};
Summary summarize(std::span<const double> values);

struct EvalReport {
  Variant variant = Variant::kEmo;
  std::uint64_t seed = 0;
  std::string config_digest;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> labels;
  std::vector<FoldResult> folds;
  Summary war;
  Summary uar;

  void aggregate();
};

/// Classifies every test id with the trained heads and scores the fold.
FoldMetrics evaluate_ids(const ModelParams& p, const Dataset& d, const ClassPromptSet& prompts,
                         std::span<const std::size_t> test_ids);

struct CrossValidationOptions {
  std::size_t folds = 5;
  /// Fan folds out across OpenMP threads; results are identical either way.
  bool parallel = true;
};

EvalReport run_cross_validation(const TrainConfig& cfg, const Dataset& d, const ClassPromptSet& prompts,
                                const CrossValidationOptions& opts);

/// 64-bit FNV-1a over the compact JSON dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& config);

nlohmann::json report_to_json(const EvalReport& r);
/// "fold,variant,war,uar" rows.
std::string report_to_csv(const EvalReport& r);

}  // namespace gemo
