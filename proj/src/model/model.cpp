// SPDX-License-Identifier: Apache-2.0
#include "gemo/model/model.hpp"

#include <cmath>
#include <random>

#include "gemo/errors.hpp"
#include "gemo/numerics/kernels.hpp"

namespace gemo {
namespace {

NodeId apply_head(const ProjectionHead& head, std::size_t first_slot, NodeId x, Graph& g) {
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    const NodeId w = g.parameter(first_slot + 2 * l, head.layers[l].weight);
    const NodeId b = g.parameter(first_slot + 2 * l + 1, head.layers[l].bias);
    x = g.add_row(g.matmul(x, w), b);
    if (l + 1 < head.layers.size()) x = g.relu(x);
  }
  return x;
}

void require_cols(const Matrix& seq, std::size_t expected, const char* what) {
  if (seq.cols() != expected) {
    throw ShapeError(std::string(what) + ": sequence " + seq.shape_string() + " needs " +
                     std::to_string(expected) + " columns");
  }
  if (seq.rows() == 0) throw EmptySequenceError(std::string(what) + ": empty sequence");
}

}  // namespace

void ProjectionHead::validate(const std::string& name) const {
  if (layers.empty()) throw DimensionError(name + ": projection head has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
      throw DimensionError(name + " layer " + std::to_string(l) + ": bias " +
                           layer.bias.shape_string() + " vs weight " + layer.weight.shape_string());
    }
    if (l > 0 && layers[l - 1].weight.cols() != layer.weight.rows()) {
      throw DimensionError(name + " layer " + std::to_string(l) + ": input " +
                           std::to_string(layer.weight.rows()) + " does not chain from " +
                           std::to_string(layers[l - 1].weight.cols()));
    }
  }
}

void ModelParams::validate() const {
  audio_head.validate("audio_head");
  text_head.validate("text_head");
  if (audio_head.output_dim() != text_head.output_dim()) {
    throw DimensionError("heads disagree on joint dimension: " +
                         std::to_string(audio_head.output_dim()) + " vs " +
                         std::to_string(text_head.output_dim()));
  }
  if (!(eps_a > 0.0) || !(eps_t > 0.0)) throw ConfigError("temperatures must be positive");
}

std::vector<Matrix> ModelParams::flatten() const {
  std::vector<Matrix> out;
  for (const auto* head : {&audio_head, &text_head}) {
    for (const auto& layer : head->layers) {
      out.push_back(layer.weight);
      out.push_back(layer.bias);
    }
  }
  return out;
}

void ModelParams::assign(std::span<const Matrix> tensors) {
  std::size_t slot = 0;
  for (auto* head : {&audio_head, &text_head}) {
    for (auto& layer : head->layers) {
      for (Matrix* dst : {&layer.weight, &layer.bias}) {
        if (slot >= tensors.size() || !tensors[slot].same_shape(*dst)) {
          throw DimensionError("assign: tensor " + std::to_string(slot) + " has wrong shape");
        }
        *dst = tensors[slot++];
      }
    }
  }
  if (slot != tensors.size()) throw DimensionError("assign: too many tensors");
}

std::vector<std::string> ModelParams::slot_names() const {
  std::vector<std::string> names;
  auto add = [&](const ProjectionHead& head, const std::string& prefix) {
    for (std::size_t l = 0; l < head.layers.size(); ++l) {
      names.push_back(prefix + "." + std::to_string(l) + ".weight");
      names.push_back(prefix + "." + std::to_string(l) + ".bias");
    }
  };
  add(audio_head, "audio_head");
  add(text_head, "text_head");
  return names;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& m : flatten()) n += m.size();
  return n;
}

ProjectionHead init_head(std::uint64_t seed, std::span<const std::size_t> widths) {
  if (widths.size() < 2) throw DimensionError("init_head: need at least input and output widths");
  std::mt19937_64 rng(seed);
  ProjectionHead head;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l], fan_out = widths[l + 1];
    if (fan_in == 0 || fan_out == 0) throw DimensionError("init_head: zero width");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    DenseLayer layer{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
    for (double& v : layer.weight.data()) v = uniform(rng);
    head.layers.push_back(std::move(layer));
  }
  return head;
}

ModelParams init_params(std::uint64_t seed, const ModelDims& dims, double temperature) {
  // Audio and text heads get distinct streams derived from one seed.
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::uint64_t streams[2];
  {
    std::uint32_t words[4];
    seq.generate(words, words + 4);
    streams[0] = (std::uint64_t{words[0]} << 32) | words[1];
    streams[1] = (std::uint64_t{words[2]} << 32) | words[3];
  }
  const std::size_t audio_widths[] = {dims.d_a, dims.hidden, dims.joint};
  const std::size_t text_widths[] = {dims.d_t, dims.hidden, dims.joint};
  ModelParams p;
  p.audio_head = init_head(streams[0], audio_widths);
  p.text_head = init_head(streams[1], text_widths);
  p.eps_a = temperature;
  p.eps_t = temperature;
  p.validate();
  return p;
}

NodeId forward_audio(const ModelParams& p, const Matrix& seq, Graph& g) {
  require_cols(seq, p.audio_head.input_dim(), "forward_audio");
  const NodeId pooled = g.mean_rows(g.constant(seq));
  return apply_head(p.audio_head, 0, pooled, g);
}

NodeId forward_text(const ModelParams& p, const Matrix& seq, Graph& g) {
  require_cols(seq, p.text_head.input_dim(), "forward_text");
  return apply_head(p.text_head, 2 * p.audio_head.layers.size(), g.constant(first_row(seq)), g);
}

NodeId forward_audio_batch(const ModelParams& p, std::span<const Matrix* const> seqs, Graph& g) {
  std::vector<Matrix> pooled;
  pooled.reserve(seqs.size());
  for (const Matrix* s : seqs) {
    require_cols(*s, p.audio_head.input_dim(), "forward_audio");
    pooled.push_back(mean_rows(*s));
  }
  return apply_head(p.audio_head, 0, g.constant(stack_rows(pooled)), g);
}

NodeId forward_text_batch(const ModelParams& p, std::span<const Matrix* const> seqs, Graph& g) {
  std::vector<Matrix> heads;
  heads.reserve(seqs.size());
  for (const Matrix* s : seqs) {
    require_cols(*s, p.text_head.input_dim(), "forward_text");
    heads.push_back(first_row(*s));
  }
  return apply_head(p.text_head, 2 * p.audio_head.layers.size(), g.constant(stack_rows(heads)), g);
}

Matrix embed_audio(const ModelParams& p, const Matrix& seq) {
  Graph g;
  return g.value(forward_audio(p, seq, g));
}

Matrix embed_text(const ModelParams& p, const Matrix& seq) {
  Graph g;
  return g.value(forward_text(p, seq, g));
}

}  // namespace gemo
