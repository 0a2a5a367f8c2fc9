// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "gemo/numerics/graph.hpp"
#include "gemo/numerics/matrix.hpp"

namespace gemo {

inline constexpr double kDefaultTemperature = 14.2857;

struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Affine layers with a rectifier between consecutive layers and none after the last.
struct ProjectionHead {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().weight.rows(); }
  std::size_t output_dim() const { return layers.back().weight.cols(); }
  /// Throws DimensionError if empty or if layer shapes do not chain.
  void validate(const std::string& name) const;

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

struct ModelDims {
  std::size_t d_a = 16;
  std::size_t d_t = 12;
  std::size_t hidden = 64;
  std::size_t joint = 32;
};

struct ModelParams {
  ProjectionHead audio_head;
  ProjectionHead text_head;
  double eps_a = kDefaultTemperature;
  double eps_t = kDefaultTemperature;

  void validate() const;

  /// Parameter tensors in slot order: audio layers (weight, bias) then text layers.
  std::vector<Matrix> flatten() const;
  /// Inverse of flatten(); shapes must match the current layout.
  void assign(std::span<const Matrix> tensors);
  /// "audio_head.0.weight", ... aligned with flatten().
  std::vector<std::string> slot_names() const;
  std::size_t parameter_count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Glorot-uniform weights, zero biases, both temperatures set to `temperature`.
/// Heads are two layers deep: input -> hidden -> joint.
ModelParams init_params(std::uint64_t seed, const ModelDims& dims,
                        double temperature = kDefaultTemperature);

/// Same initialisation scheme for arbitrary layer widths {in, h1, ..., out}.
ProjectionHead init_head(std::uint64_t seed, std::span<const std::size_t> widths);

/// Mean-pools the T x D_a sequence, then applies the audio head. Returns a 1 x D node.
NodeId forward_audio(const ModelParams& p, const Matrix& seq, Graph& g);
/// Reads the first row of the L x D_t sequence, then applies the text head.
NodeId forward_text(const ModelParams& p, const Matrix& seq, Graph& g);

/// Batched versions: one row per sequence, N x D.
NodeId forward_audio_batch(const ModelParams& p, std::span<const Matrix* const> seqs, Graph& g);
NodeId forward_text_batch(const ModelParams& p, std::span<const Matrix* const> seqs, Graph& g);

/// Convenience wrappers that build a throwaway graph and return the embedding.
Matrix embed_audio(const ModelParams& p, const Matrix& seq);
Matrix embed_text(const ModelParams& p, const Matrix& seq);

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const ModelParams& p, const nlohmann::json& config);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Writes the checkpoint document; `extra` keys (e.g. a timestamp) are merged at top level.
void save_checkpoint(const ModelParams& p, const std::filesystem::path& path,
                     const nlohmann::json& config = nlohmann::json::object(),
                     const nlohmann::json& extra = nlohmann::json::object());
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gemo
