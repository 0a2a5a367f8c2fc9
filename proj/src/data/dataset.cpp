// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "gemo/data/dataset.hpp"
#include "gemo/errors.hpp"

namespace gemo {
namespace {

std::size_t index_of(const std::vector<std::string>& labels, const std::string& label,
                     const char* space) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw LabelError(std::string("unknown ") + space + " label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

void require_prompts(const std::map<std::string, Matrix>& prompts,
                     const std::vector<std::string>& labels, std::size_t d_t, const char* space) {
  for (const auto& label : labels) {
    auto it = prompts.find(label);
    if (it == prompts.end()) {
      throw PromptError(std::string("missing ") + space + " prompt for label '" + label + "'");
    }
    if (it->second.rows() == 0 || it->second.cols() != d_t) {
      throw PromptError(std::string(space) + " prompt '" + label + "' has shape " +
                        it->second.shape_string() + ", expected Lx" + std::to_string(d_t));
    }
  }
}

}  // namespace

std::size_t Dataset::emotion_index(const std::string& label) const {
  return index_of(emotion_labels, label, "emotion");
}

std::size_t Dataset::gender_index(const std::string& label) const {
  return index_of(gender_labels, label, "gender");
}

void Dataset::validate() const {
  if (samples.empty()) throw EmptyDatasetError("dataset has no samples");
  if (gender_labels.size() != 2) {
    throw LabelError("gender label set must have exactly two entries, got " +
                     std::to_string(gender_labels.size()));
  }
  std::set<std::string> ids;
  for (const auto& s : samples) {
    if (!ids.insert(s.id).second) throw ParseError("duplicate sample id '" + s.id + "'");
    if (s.audio_features.rows() == 0 || s.audio_features.cols() != d_a) {
      throw ShapeError("sample '" + s.id + "': audio_features " + s.audio_features.shape_string() +
                       " does not match d_a=" + std::to_string(d_a));
    }
    if (s.text_features.rows() == 0 || s.text_features.cols() != d_t) {
      throw ShapeError("sample '" + s.id + "': text_features " + s.text_features.shape_string() +
                       " does not match d_t=" + std::to_string(d_t));
    }
    if (!s.audio_features.all_finite() || !s.text_features.all_finite()) {
      throw ParseError("sample '" + s.id + "': non-finite feature value");
    }
    emotion_index(s.emotion);
    gender_index(s.gender);
  }
}

void ClassPromptSet::require_emotions(const Dataset& d) const {
  require_prompts(emotion, d.emotion_labels, d.d_t, "emotion");
}

void ClassPromptSet::require_genders(const Dataset& d) const {
  require_prompts(gender, d.gender_labels, d.d_t, "gender");
}

}  // namespace gemo
