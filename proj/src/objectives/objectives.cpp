// SPDX-License-Identifier: Apache-2.0
#include "gemo/objectives/objectives.hpp"

#include "gemo/errors.hpp"
#include "gemo/numerics/kernels.hpp"

namespace gemo {
namespace {

TargetMatrix equivalence_matrix(const std::vector<std::size_t>& labels) {
  const std::size_t n = labels.size();
  TargetMatrix m{Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.values(i, j) = labels[i] == labels[j] ? 1.0 : 0.0;
  return m;
}

void require_batch(const BatchFeatures& f, const LabelBatch& b) {
  if (b.size() < 2) throw BatchError("contrastive loss needs a batch of at least 2");
  if (f.audio.size() != b.size() || f.text.size() != b.size() || b.gender.size() != b.size()) {
    throw DimensionError("batch features and labels disagree on batch size");
  }
}

void require_alpha(double alpha_e) {
  if (!(alpha_e >= 0.0 && alpha_e <= 1.0)) {
    throw ConfigError("alpha_e must lie in [0, 1], got " + std::to_string(alpha_e));
  }
}

// 1/2 [KL(l_S(C^a), S(M)) + KL(l_S(C^t), S(M))]
NodeId symmetric_loss(Graph& g, NodeId ea, NodeId et, const ModelParams& p, const TargetMatrix& m,
                      TargetNorm norm) {
  const NodeId ca = similarity(g, ea, et, p.eps_a);
  const NodeId ct = similarity(g, et, ea, p.eps_t);
  const NodeId la = clap_kl_loss(g, ca, m, norm);
  const NodeId lt = clap_kl_loss(g, ct, m, norm);
  return g.scale(g.add(la, lt), 0.5);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kEmo: return "emo";
    case Variant::kMlGemo: return "ml-gemo";
    case Variant::kSlGemo: return "sl-gemo";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "emo") return Variant::kEmo;
  if (s == "ml-gemo") return Variant::kMlGemo;
  if (s == "sl-gemo") return Variant::kSlGemo;
  throw ConfigError("variant: expected emo, ml-gemo or sl-gemo, got '" + s + "'");
}

std::string to_string(TargetNorm t) { return t == TargetNorm::kSoftmax ? "softmax" : "row_sum"; }

TargetNorm parse_target_norm(const std::string& s) {
  if (s == "softmax") return TargetNorm::kSoftmax;
  if (s == "row_sum") return TargetNorm::kRowSum;
  throw ConfigError("target_norm: expected softmax or row_sum, got '" + s + "'");
}

void LabelBatch::validate(std::size_t n_emotions, std::size_t n_genders) const {
  if (emotion.size() != gender.size()) throw DimensionError("label batch: list lengths differ");
  if (emotion.size() < 2) throw BatchError("label batch: need N >= 2");
  for (std::size_t i = 0; i < emotion.size(); ++i) {
    if (emotion[i] >= n_emotions || gender[i] >= n_genders) {
      throw LabelError("label batch: id out of range at position " + std::to_string(i));
    }
  }
}

TargetMatrix build_emotion_gt(const LabelBatch& b) { return equivalence_matrix(b.emotion); }
TargetMatrix build_gender_gt(const LabelBatch& b) { return equivalence_matrix(b.gender); }

TargetMatrix fuse_gt(const TargetMatrix& me, const TargetMatrix& mg, double alpha_e) {
  if (!me.values.same_shape(mg.values)) {
    throw DimensionError("fuse_gt: shapes " + me.values.shape_string() + " and " +
                         mg.values.shape_string());
  }
  require_alpha(alpha_e);
  TargetMatrix out{Matrix(me.values.rows(), me.values.cols())};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values.data()[i] = alpha_e * me.values.data()[i] + (1.0 - alpha_e) * mg.values.data()[i];
  }
  return out;
}

Matrix target_distribution(const TargetMatrix& m, TargetNorm norm) {
  if (norm == TargetNorm::kSoftmax) return row_softmax(m.values);
  Matrix p = m.values;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto r = p.row(i);
    double total = 0.0;
    for (double v : r) total += v;
    if (!(total > 0.0)) throw NumericError("row_sum target: row " + std::to_string(i) + " sums to 0");
    for (double& v : r) v /= total;
  }
  return p;
}

Matrix similarity(const Matrix& ea, const Matrix& et, double eps) {
  if (ea.cols() != et.cols()) {
    throw DimensionError("similarity: embeddings " + ea.shape_string() + " and " + et.shape_string());
  }
  if (!(eps > 0.0)) throw ConfigError("similarity: temperature must be positive");
  return scale(matmul_nt(ea, et), eps);
}

NodeId similarity(Graph& g, NodeId ea, NodeId et, double eps) {
  if (g.value(ea).cols() != g.value(et).cols()) {
    throw DimensionError("similarity: embeddings " + g.value(ea).shape_string() + " and " +
                         g.value(et).shape_string());
  }
  if (!(eps > 0.0)) throw ConfigError("similarity: temperature must be positive");
  return g.scale(g.matmul_nt(ea, et), eps);
}

NodeId clap_kl_loss(Graph& g, NodeId logits, const TargetMatrix& m, TargetNorm norm) {
  if (!g.value(logits).same_shape(m.values)) {
    throw DimensionError("clap_kl_loss: logits " + g.value(logits).shape_string() + " vs target " +
                         m.values.shape_string());
  }
  return g.kl_divergence(g.row_log_softmax(logits), target_distribution(m, norm));
}

double clap_kl_loss(const Matrix& logits, const TargetMatrix& m, TargetNorm norm) {
  Graph g;
  return g.scalar(clap_kl_loss(g, g.constant(logits), m, norm));
}

NodeId emo_clap_loss(const ModelParams& p, const BatchFeatures& f, const LabelBatch& b, Graph& g,
                     TargetNorm norm) {
  require_batch(f, b);
  const NodeId ea = forward_audio_batch(p, f.audio, g);
  const NodeId et = forward_text_batch(p, f.text, g);
  return symmetric_loss(g, ea, et, p, build_emotion_gt(b), norm);
}

NodeId sl_gemo_loss(const ModelParams& p, const BatchFeatures& f, const LabelBatch& b,
                    double alpha_e, Graph& g, TargetNorm norm) {
  require_batch(f, b);
  require_alpha(alpha_e);
  const TargetMatrix fused = fuse_gt(build_emotion_gt(b), build_gender_gt(b), alpha_e);
  const NodeId ea = forward_audio_batch(p, f.audio, g);
  const NodeId et = forward_text_batch(p, f.text, g);
  return symmetric_loss(g, ea, et, p, fused, norm);
}

NodeId ml_gemo_loss(const ModelParams& p, const BatchFeatures& f,
                    std::span<const Matrix* const> gender_prompts, const LabelBatch& b,
                    double alpha_e, Graph& g, TargetNorm norm) {
  require_batch(f, b);
  require_alpha(alpha_e);
  std::vector<const Matrix*> prompt_rows;
  prompt_rows.reserve(b.size());
  for (std::size_t gid : b.gender) {
    if (gid >= gender_prompts.size() || gender_prompts[gid] == nullptr) {
      throw PromptError("ml-gemo: no gender prompt for gender id " + std::to_string(gid));
    }
    prompt_rows.push_back(gender_prompts[gid]);
  }
  const NodeId ea = forward_audio_batch(p, f.audio, g);
  const NodeId et = forward_text_batch(p, f.text, g);
  const NodeId eg = forward_text_batch(p, prompt_rows, g);
  const NodeId emotion = symmetric_loss(g, ea, et, p, build_emotion_gt(b), norm);
  const NodeId gender = symmetric_loss(g, ea, eg, p, build_gender_gt(b), norm);
  return g.add(g.scale(emotion, alpha_e), g.scale(gender, 1.0 - alpha_e));
}

NodeId variant_loss(Variant v, const ModelParams& p, const BatchFeatures& f,
                    std::span<const Matrix* const> gender_prompts, const LabelBatch& b,
                    const LossOptions& opts, Graph& g) {
  switch (v) {
    case Variant::kEmo: return emo_clap_loss(p, f, b, g, opts.target_norm);
    case Variant::kSlGemo: return sl_gemo_loss(p, f, b, opts.alpha_e, g, opts.target_norm);
    case Variant::kMlGemo:
      return ml_gemo_loss(p, f, gender_prompts, b, opts.alpha_e, g, opts.target_norm);
  }
  throw ConfigError("unknown variant");
}

}  // namespace gemo
