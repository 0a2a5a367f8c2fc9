// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gemo/model/model.hpp"
#include "gemo/numerics/graph.hpp"

namespace gemo {

enum class Variant { kEmo, kMlGemo, kSlGemo };

std::string to_string(Variant v);          // "emo", "ml-gemo", "sl-gemo"
Variant parse_variant(const std::string& s);  // throws ConfigError

/// How a ground-truth matrix becomes a per-row target distribution.
enum class TargetNorm { kSoftmax, kRowSum };

std::string to_string(TargetNorm t);
TargetNorm parse_target_norm(const std::string& s);

struct LabelBatch {
  std::vector<std::size_t> emotion;
  std::vector<std::size_t> gender;

  std::size_t size() const { return emotion.size(); }
  /// N >= 2, equal lengths, ids below the label-set sizes.
  void validate(std::size_t n_emotions, std::size_t n_genders) const;
};

/// N x N batch ground truth: symmetric, unit diagonal, entries in [0, 1].
struct TargetMatrix {
  Matrix values;
};

TargetMatrix build_emotion_gt(const LabelBatch& b);
TargetMatrix build_gender_gt(const LabelBatch& b);
/// alpha_e * me + (1 - alpha_e) * mg.
TargetMatrix fuse_gt(const TargetMatrix& me, const TargetMatrix& mg, double alpha_e);

/// Row distribution the model is pulled towards.
Matrix target_distribution(const TargetMatrix& m, TargetNorm norm);

/// eps * (ea * et^T).
Matrix similarity(const Matrix& ea, const Matrix& et, double eps);
NodeId similarity(Graph& g, NodeId ea, NodeId et, double eps);

/// (1/N) sum_ij P_ij (log P_ij - log_softmax(c)_ij) with P = target_distribution(m).
NodeId clap_kl_loss(Graph& g, NodeId logits, const TargetMatrix& m, TargetNorm norm = TargetNorm::kSoftmax);
double clap_kl_loss(const Matrix& logits, const TargetMatrix& m, TargetNorm norm = TargetNorm::kSoftmax);

/// Per-sample feature pointers for one batch; both lists have length N.
struct BatchFeatures {
  std::vector<const Matrix*> audio;
  std::vector<const Matrix*> text;
};

struct LossOptions {
  double alpha_e = 0.8;
  TargetNorm target_norm = TargetNorm::kSoftmax;
};

/// 1/2 [KL(C^a, M_e) + KL(C^t, M_e)].
NodeId emo_clap_loss(const ModelParams& p, const BatchFeatures& f, const LabelBatch& b, Graph& g,
                     TargetNorm norm = TargetNorm::kSoftmax);

/// Emo-CLAP against the fused target alpha_e M_e + (1 - alpha_e) M_g.
NodeId sl_gemo_loss(const ModelParams& p, const BatchFeatures& f, const LabelBatch& b,
                    double alpha_e, Graph& g, TargetNorm norm = TargetNorm::kSoftmax);

/// alpha_e L_E + (1 - alpha_e) L_G. L_G pairs the audio embeddings with each
/// sample's gender prompt passed through the shared text head, against M_g.
/// `gender_prompts[k]` holds the prompt features of gender label k.
NodeId ml_gemo_loss(const ModelParams& p, const BatchFeatures& f,
                    std::span<const Matrix* const> gender_prompts, const LabelBatch& b,
                    double alpha_e, Graph& g, TargetNorm norm = TargetNorm::kSoftmax);

/// Dispatches on the variant. `gender_prompts` is only read for ml-gemo.
NodeId variant_loss(Variant v, const ModelParams& p, const BatchFeatures& f,
                    std::span<const Matrix* const> gender_prompts, const LabelBatch& b,
                    const LossOptions& opts, Graph& g);

}  // namespace gemo
