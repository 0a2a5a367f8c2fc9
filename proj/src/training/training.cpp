// SPDX-License-Identifier: Apache-2.0
#include "gemo/training/training.hpp"

#include <cmath>
#include <cstdio>

#include "gemo/errors.hpp"

namespace gemo {

TrainConfig TrainConfig::paper_fidelity() {
  TrainConfig cfg;
  cfg.lr = 2e-5;
  cfg.batch_size = 32;
  cfg.epochs = 80;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train config field 'lr': must be positive");
  if (epochs < 1) throw ConfigError("train config field 'epochs': must be >= 1");
  if (batch_size < 2) throw ConfigError("train config field 'batch_size': must be >= 2");
  if (!(alpha_e >= 0.0 && alpha_e <= 1.0)) {
    throw ConfigError("train config field 'alpha_e': must lie in [0, 1]");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("train config field 'temperature': must be positive");
  }
  if (hidden < 1 || joint < 1) throw ConfigError("train config field 'hidden'/'joint': must be >= 1");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"variant", to_string(variant)}, {"alpha_e", alpha_e},   {"lr", lr},
          {"batch_size", batch_size},      {"epochs", epochs},     {"seed", seed},
          {"temperature", temperature},    {"hidden", hidden},     {"joint", joint},
          {"target_norm", to_string(target_norm)}};
}

AdamState AdamState::zeros_like(std::span<const Matrix> params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.rows(), p.cols());
    s.v.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(AdamState& state, std::span<Matrix> params, std::span<const Matrix> grads, double lr) {
  if (state.m.size() != params.size() || grads.size() != params.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.m.size()) + " moment slots");
  }
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (!state.m[s].same_shape(params[s]) || (!grads[s].empty() && !grads[s].same_shape(params[s]))) {
      throw DimensionError("adam_step: slot " + std::to_string(s) + " parameter " +
                           params[s].shape_string() + " vs gradient " + grads[s].shape_string());
    }
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correct1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correct2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    auto w = params[s].data();
    auto m = state.m[s].data();
    auto v = state.v[s].data();
    const bool zero = grads[s].empty();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double g = zero ? 0.0 : grads[s].data()[k];
      m[k] = AdamState::kBeta1 * m[k] + (1.0 - AdamState::kBeta1) * g;
      v[k] = AdamState::kBeta2 * v[k] + (1.0 - AdamState::kBeta2) * g * g;
      const double m_hat = m[k] / correct1;
      const double v_hat = v[k] / correct2;
      w[k] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
    }
  }
}

TrainResult train(const TrainConfig& cfg, const Dataset& d, const ClassPromptSet& prompts,
                  std::span<const std::size_t> train_ids) {
  cfg.validate();
  if (train_ids.size() < 2) throw BatchError("train: need at least 2 training samples");

  std::vector<const Matrix*> gender_prompts;
  if (cfg.variant == Variant::kMlGemo) {
    prompts.require_genders(d);
    for (const auto& label : d.gender_labels) gender_prompts.push_back(&prompts.gender.at(label));
  }
  std::vector<std::size_t> emotion_ids(d.size()), gender_ids(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    emotion_ids[i] = d.emotion_index(d.samples[i].emotion);
    gender_ids[i] = d.gender_index(d.samples[i].gender);
  }

  TrainResult result;
  result.params = init_params(cfg.seed, {d.d_a, d.d_t, cfg.hidden, cfg.joint}, cfg.temperature);
  std::vector<Matrix> tensors = result.params.flatten();
  AdamState adam = AdamState::zeros_like(tensors);
  const LossOptions opts{cfg.alpha_e, cfg.target_norm};
  const std::vector<std::size_t> ids(train_ids.begin(), train_ids.end());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(ids, cfg.batch_size, cfg.seed + epoch);
    double total = 0.0;
    for (const auto& batch : batches) {
      BatchFeatures features;
      LabelBatch labels;
      for (std::size_t i : batch) {
        features.audio.push_back(&d.samples[i].audio_features);
        features.text.push_back(&d.samples[i].text_features);
        labels.emotion.push_back(emotion_ids[i]);
        labels.gender.push_back(gender_ids[i]);
      }
      Graph g;
      const NodeId loss = variant_loss(cfg.variant, result.params, features, gender_prompts, labels, opts, g);
      const double value = g.scalar(loss);
      if (!std::isfinite(value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      total += value;
      std::vector<Matrix> grads = g.backward(loss);
      grads.resize(tensors.size());
      adam_step(adam, tensors, grads, cfg.lr);
      result.params.assign(tensors);
    }
    result.loss_history.push_back(total / static_cast<double>(batches.size()));
  }
  result.steps = adam.t;
  return result;
}

std::string loss_history_csv(std::span<const double> history) {
  std::string out = "epoch,mean_loss\n";
  char line[64];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", e + 1, history[e]);
    out += line;
  }
  return out;
}

}  // namespace gemo
