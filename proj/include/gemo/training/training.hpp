// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "gemo/data/dataset.hpp"
#include "gemo/model/model.hpp"
#include "gemo/objectives/objectives.hpp"

namespace gemo {

struct TrainConfig {
  Variant variant = Variant::kEmo;
  double alpha_e = 0.8;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 80;
  std::uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  std::size_t hidden = 64;
  std::size_t joint = 32;
  TargetNorm target_norm = TargetNorm::kSoftmax;

  /// Learning rate, batch size and epoch count used for the original
  /// fine-tuning runs.
  static TrainConfig paper_fidelity();

  void validate() const;
  nlohmann::json to_json() const;
};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::uint64_t t = 0;

  /// Zero moments shaped like `params`.
  static AdamState zeros_like(std::span<const Matrix> params);
};

/// One bias-corrected Adam update of `params` in place. Empty gradient entries
/// count as zero.
void adam_step(AdamState& state, std::span<Matrix> params, std::span<const Matrix> grads, double lr);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // per-epoch mean batch loss
  std::uint64_t steps = 0;
};

/// Deterministic given (cfg, data, prompts, train ids). Epoch e shuffles with seed + e.
TrainResult train(const TrainConfig& cfg, const Dataset& d, const ClassPromptSet& prompts,
                  std::span<const std::size_t> train_ids);

/// "epoch,mean_loss" CSV with epochs numbered from 1.
std::string loss_history_csv(std::span<const double> history);

}  // namespace gemo
