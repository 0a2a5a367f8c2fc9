// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <random>

#include "gemo/data/dataset.hpp"
#include "gemo/errors.hpp"

namespace gemo {
namespace {

// Per-coordinate scale of the text anchors. Independent of `separation`, so
// separation only controls how much emotion information the audio carries.
constexpr double kTextAnchorScale = 2.0;
constexpr int kSessions = 5;

Matrix gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * normal(rng);
  return m;
}

// rows drawn from N(center, noise^2 I)
Matrix around(std::mt19937_64& rng, std::size_t rows, std::span<const double> center, double noise) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, center.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < center.size(); ++j) m(i, j) = center[j] + noise * normal(rng);
  return m;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("synth config field '" + field + "': " + why);
  };
  if (n_samples < 2) fail("n_samples", "must be at least 2");
  if (emotion_labels.size() < 2) fail("emotion_labels", "need at least two labels");
  if (gender_labels.size() != 2) fail("gender_labels", "need exactly two labels");
  if (d_a < 1) fail("d_a", "must be >= 1");
  if (d_t < 1) fail("d_t", "must be >= 1");
  if (t_min < 1 || t_max < t_min) fail("t_range", "need 1 <= t_min <= t_max");
  if (l_min < 1 || l_max < l_min) fail("l_range", "need 1 <= l_min <= l_max");
  if (!(separation >= 0.0) || !std::isfinite(separation)) fail("separation", "must be >= 0");
  if (!(noise > 0.0) || !std::isfinite(noise)) fail("noise", "must be > 0");
  if (!(confound >= 0.0) || !std::isfinite(confound)) fail("confound", "must be >= 0");
}

SynthData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n_emotions = cfg.emotion_labels.size();

  // Anchors are drawn first and in a fixed order, so confound only rescales
  // the gender offsets and never shifts the random stream.
  Matrix audio_anchor = gaussian(rng, n_emotions, cfg.d_a, cfg.separation);
  Matrix gender_offset = gaussian(rng, 2, cfg.d_a, 1.0);
  Matrix text_anchor = gaussian(rng, n_emotions, cfg.d_t, kTextAnchorScale);
  Matrix gender_text_anchor = gaussian(rng, 2, cfg.d_t, kTextAnchorScale);

  std::uniform_int_distribution<std::size_t> t_len(cfg.t_min, cfg.t_max);
  std::uniform_int_distribution<std::size_t> l_len(cfg.l_min, cfg.l_max);

  SynthData out;
  Dataset& d = out.dataset;
  d.emotion_labels = cfg.emotion_labels;
  d.gender_labels = cfg.gender_labels;
  d.d_a = cfg.d_a;
  d.d_t = cfg.d_t;
  d.samples.reserve(cfg.n_samples);

  std::vector<double> center(cfg.d_a);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const std::size_t e = i % n_emotions;
    const std::size_t g = (i / n_emotions) % 2;
    for (std::size_t j = 0; j < cfg.d_a; ++j) {
      center[j] = audio_anchor(e, j) + cfg.confound * gender_offset(g, j);
    }
    const std::size_t t = t_len(rng);
    const std::size_t l = l_len(rng);

    SampleRecord s;
    char id[32];
    std::snprintf(id, sizeof id, "syn%05zu", i);
    s.id = id;
    s.emotion = cfg.emotion_labels[e];
    s.gender = cfg.gender_labels[g];
    s.session = static_cast<int>(i % kSessions) + 1;
    s.audio_features = around(rng, t, center, cfg.noise);
    s.text_features = around(rng, l, text_anchor.row(e), cfg.noise);
    d.samples.push_back(std::move(s));
  }

  for (std::size_t e = 0; e < n_emotions; ++e) {
    out.prompts.emotion.emplace(cfg.emotion_labels[e], Matrix::row_vector(text_anchor.row(e)));
  }
  for (std::size_t g = 0; g < 2; ++g) {
    out.prompts.gender.emplace(cfg.gender_labels[g], Matrix::row_vector(gender_text_anchor.row(g)));
  }
  return out;
}

}  // namespace gemo
