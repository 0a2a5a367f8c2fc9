// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gemo/data/dataset.hpp"
#include "gemo/errors.hpp"
#include "gemo/numerics/json_matrix.hpp"

namespace gemo {
namespace {

using nlohmann::json;

void add_unique(std::vector<std::string>& labels, const std::string& label) {
  if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
}

std::vector<std::string> string_list(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError("line " + std::to_string(line) + ": header needs array '" + key + "'");
  }
  return j[key].get<std::vector<std::string>>();
}

}  // namespace

LoadedManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");

  LoadedManifest out;
  Dataset& d = out.dataset;
  bool have_header = false;
  std::vector<std::string> seen_emotions, seen_genders;
  std::optional<std::size_t> d_a, d_t;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("manifest line " + std::to_string(line) + ": " + e.what());
    }
    try {
      const std::string kind = j.value("kind", "");
      if (kind == "header") {
        if (have_header || !d.samples.empty()) {
          throw ParseError("line " + std::to_string(line) + ": header must be the first line");
        }
        have_header = true;
        d.emotion_labels = string_list(j, "emotion_labels", line);
        d.gender_labels = string_list(j, "gender_labels", line);
        if (j.contains("d_a")) d_a = j.at("d_a").get<std::size_t>();
        if (j.contains("d_t")) d_t = j.at("d_t").get<std::size_t>();
      } else if (kind == "sample") {
        SampleRecord s;
        s.id = j.at("id").get<std::string>();
        s.emotion = j.at("emotion").get<std::string>();
        s.gender = j.at("gender").get<std::string>();
        if (j.contains("session") && !j["session"].is_null()) s.session = j["session"].get<int>();
        s.audio_features = matrix_from_json(j.at("audio_features"), "sample '" + s.id + "' audio_features");
        s.text_features = matrix_from_json(j.at("text_features"), "sample '" + s.id + "' text_features");
        if (!d_a) d_a = s.audio_features.cols();
        if (!d_t) d_t = s.text_features.cols();
        if (s.audio_features.cols() != *d_a || s.text_features.cols() != *d_t) {
          throw ShapeError("sample '" + s.id + "': features " + s.audio_features.shape_string() +
                           " / " + s.text_features.shape_string() + " inconsistent with d_a=" +
                           std::to_string(*d_a) + ", d_t=" + std::to_string(*d_t));
        }
        if (have_header) {
          d.emotion_index(s.emotion);
          d.gender_index(s.gender);
        }
        add_unique(seen_emotions, s.emotion);
        add_unique(seen_genders, s.gender);
        d.samples.push_back(std::move(s));
      } else if (kind == "prompt") {
        const std::string space = j.at("space").get<std::string>();
        const std::string label = j.at("label").get<std::string>();
        Matrix features = matrix_from_json(j.at("text_features"), "prompt '" + label + "'");
        auto& table = space == "emotion" ? out.prompts.emotion
                      : space == "gender" ? out.prompts.gender
                                          : throw ParseError("line " + std::to_string(line) +
                                                             ": unknown prompt space '" + space + "'");
        if (!table.emplace(label, std::move(features)).second) {
          throw PromptError("duplicate " + space + " prompt for label '" + label + "'");
        }
      } else {
        throw ParseError("line " + std::to_string(line) + ": unknown kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(line) + ": " + e.what());
    } catch (const ShapeError&) {
      throw;
    } catch (const LabelError& e) {
      throw LabelError("manifest line " + std::to_string(line) + ": " + e.what());
    }
  }

  if (d.samples.empty()) throw EmptyDatasetError("manifest '" + path.string() + "' has no samples");
  if (!have_header) {
    d.emotion_labels = seen_emotions;
    d.gender_labels = seen_genders;
  }
  d.d_a = d_a.value_or(0);
  d.d_t = d_t.value_or(0);
  d.validate();
  return out;
}

std::string manifest_to_string(const Dataset& d, const ClassPromptSet& p) {
  std::ostringstream os;
  json header = {{"kind", "header"},
                 {"emotion_labels", d.emotion_labels},
                 {"gender_labels", d.gender_labels},
                 {"d_a", d.d_a},
                 {"d_t", d.d_t}};
  os << header.dump() << '\n';
  for (const auto& s : d.samples) {
    json j = {{"kind", "sample"}, {"id", s.id}, {"emotion", s.emotion}, {"gender", s.gender}};
    if (s.session) j["session"] = *s.session;
    j["audio_features"] = matrix_to_json(s.audio_features);
    j["text_features"] = matrix_to_json(s.text_features);
    os << j.dump() << '\n';
  }
  auto prompts = [&](const std::map<std::string, Matrix>& table, const char* space,
                     const std::vector<std::string>& order) {
    for (const auto& label : order) {
      auto it = table.find(label);
      if (it == table.end()) continue;
      json j = {{"kind", "prompt"}, {"space", space}, {"label", label},
                {"text_features", matrix_to_json(it->second)}};
      os << j.dump() << '\n';
    }
  };
  prompts(p.emotion, "emotion", d.emotion_labels);
  prompts(p.gender, "gender", d.gender_labels);
  return os.str();
}

void write_manifest(const std::filesystem::path& path, const Dataset& d, const ClassPromptSet& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << manifest_to_string(d, p);
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

}  // namespace gemo
