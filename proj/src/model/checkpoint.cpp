// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "gemo/errors.hpp"
#include "gemo/model/model.hpp"
#include "gemo/numerics/json_matrix.hpp"

namespace gemo {
namespace {

using nlohmann::json;

json head_to_json(const ProjectionHead& head) {
  json layers = json::array();
  for (const auto& layer : head.layers) {
    layers.push_back({{"weight", matrix_to_json(layer.weight)}, {"bias", matrix_to_json(layer.bias)}});
  }
  return layers;
}

ProjectionHead head_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("checkpoint: '" + name + "' must be an array of layers");
  ProjectionHead head;
  for (std::size_t l = 0; l < j.size(); ++l) {
    const std::string where = name + "[" + std::to_string(l) + "]";
    head.layers.push_back({matrix_from_json(j[l].at("weight"), where + ".weight"),
                           matrix_from_json(j[l].at("bias"), where + ".bias")});
  }
  return head;
}

}  // namespace

json checkpoint_to_json(const ModelParams& p, const json& config) {
  return {{"version", kCheckpointVersion},
          {"config", config},
          {"audio_head", head_to_json(p.audio_head)},
          {"text_head", head_to_json(p.text_head)},
          {"eps_a", p.eps_a},
          {"eps_t", p.eps_t}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw CheckpointError("checkpoint: missing version tag");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + j["version"].dump() + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  try {
    c.params.audio_head = head_from_json(j.at("audio_head"), "audio_head");
    c.params.text_head = head_from_json(j.at("text_head"), "text_head");
    c.params.eps_a = j.at("eps_a").get<double>();
    c.params.eps_t = j.at("eps_t").get<double>();
    if (j.contains("config")) c.config = j["config"];
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  c.params.validate();
  return c;
}

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path, const json& config,
                     const json& extra) {
  json doc = checkpoint_to_json(p, config);
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << doc.dump() << '\n';
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint '" + path.string() + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace gemo
