// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "gemo/data/dataset.hpp"
#include "gemo/errors.hpp"

using namespace gemo;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / "gemo_test_data";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

Dataset tiny_dataset(std::size_t n, bool sessions) {
  Dataset d;
  d.emotion_labels = {"a", "b", "c", "d"};
  d.gender_labels = {"f", "m"};
  d.d_a = 2;
  d.d_t = 2;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord s;
    s.id = "id" + std::to_string(i);
    s.emotion = d.emotion_labels[i % 4];
    s.gender = d.gender_labels[(i / 4) % 2];
    if (sessions) s.session = static_cast<int>(i % 5) + 1;
    s.audio_features = Matrix(1, 2, static_cast<double>(i));
    s.text_features = Matrix(1, 2, 1.0);
    d.samples.push_back(s);
  }
  return d;
}

void check_partition(const std::vector<Fold>& folds, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& f : folds) {
    std::set<std::size_t> train(f.train.begin(), f.train.end());
    CHECK(train.size() + f.test.size() == n);
    for (std::size_t i : f.test) {
      ++seen[i];
      CHECK(train.count(i) == 0);
    }
  }
  for (int count : seen) CHECK(count == 1);
}

}  // namespace

TEST_CASE("load_manifest reads a two-sample manifest") {
  const auto p = temp_file("two.jsonl",
                           R"({"kind":"header","emotion_labels":["angry","sad"],"gender_labels":["female","male"],"d_a":2,"d_t":3}
{"kind":"sample","id":"u1","emotion":"angry","gender":"female","session":1,"audio_features":[[1,2],[3,4]],"text_features":[[1,2,3]]}
{"kind":"sample","id":"u2","emotion":"sad","gender":"male","audio_features":[[5,6]],"text_features":[[4,5,6],[7,8,9]]}
{"kind":"prompt","space":"emotion","label":"angry","text_features":[[1,0,0]]}
)");
  const LoadedManifest m = load_manifest(p);
  CHECK(m.dataset.size() == 2);
  CHECK(m.dataset.d_a == 2);
  CHECK(m.dataset.d_t == 3);
  CHECK(m.dataset.samples[0].session == 1);
  CHECK_FALSE(m.dataset.samples[1].session.has_value());
  CHECK(m.dataset.samples[1].text_features.rows() == 2);
  CHECK(m.prompts.emotion.count("angry") == 1);
  CHECK_THROWS_AS(m.prompts.require_emotions(m.dataset), PromptError);
}

TEST_CASE("load_manifest shape error cites the sample id") {
  const auto p = temp_file("shape.jsonl",
                           R"({"kind":"header","emotion_labels":["angry"],"gender_labels":["female","male"],"d_a":16,"d_t":1}
{"kind":"sample","id":"bad-one","emotion":"angry","gender":"male","audio_features":[[1,2,3]],"text_features":[[1]]}
)");
  try {
    load_manifest(p);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("bad-one") != std::string::npos);
  }
}

TEST_CASE("load_manifest error paths") {
  CHECK_THROWS_AS(load_manifest(temp_file("empty.jsonl", "")), EmptyDatasetError);
  CHECK_THROWS_AS(load_manifest("/nonexistent/manifest.jsonl"), IoError);

  try {
    load_manifest(temp_file("broken.jsonl",
                            R"({"kind":"header","emotion_labels":["a"],"gender_labels":["f","m"]}
{"kind":"sample", oops
)"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  CHECK_THROWS_AS(load_manifest(temp_file("gender.jsonl",
                                          R"({"kind":"header","emotion_labels":["a"],"gender_labels":["f","m"]}
{"kind":"sample","id":"x","emotion":"a","gender":"other","audio_features":[[1]],"text_features":[[1]]}
)")),
                  LabelError);

  CHECK_THROWS_AS(load_manifest(temp_file("dims.jsonl",
                                          R"({"kind":"sample","id":"x","emotion":"a","gender":"f","audio_features":[[1,2]],"text_features":[[1]]}
{"kind":"sample","id":"y","emotion":"a","gender":"m","audio_features":[[1]],"text_features":[[1]]}
)")),
                  ShapeError);
}

TEST_CASE("manifest without header derives label sets in order of appearance") {
  const auto p = temp_file("noheader.jsonl",
                           R"({"kind":"sample","id":"x","emotion":"sad","gender":"m","audio_features":[[1]],"text_features":[[1]]}
{"kind":"sample","id":"y","emotion":"angry","gender":"f","audio_features":[[2]],"text_features":[[1]]}
)");
  const auto m = load_manifest(p);
  CHECK(m.dataset.emotion_labels == std::vector<std::string>{"sad", "angry"});
  CHECK(m.dataset.gender_labels == std::vector<std::string>{"m", "f"});
}

TEST_CASE("manifest write/load round-trips synthetic data exactly") {
  SynthConfig cfg;
  cfg.n_samples = 40;
  cfg.seed = 3;
  const SynthData data = generate_synthetic(cfg);
  const auto p = fs::temp_directory_path() / "gemo_test_data" / "roundtrip.jsonl";
  write_manifest(p, data.dataset, data.prompts);
  const LoadedManifest back = load_manifest(p);
  CHECK(back.dataset == data.dataset);
  CHECK(back.prompts == data.prompts);
  CHECK(manifest_to_string(back.dataset, back.prompts) == manifest_to_string(data.dataset, data.prompts));
}

TEST_CASE("generate_synthetic is a pure function of its config") {
  SynthConfig cfg;
  cfg.n_samples = 60;
  cfg.seed = 7;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  CHECK(manifest_to_string(a.dataset, a.prompts) == manifest_to_string(b.dataset, b.prompts));
  cfg.seed = 8;
  const auto c = generate_synthetic(cfg);
  CHECK(manifest_to_string(a.dataset, a.prompts) != manifest_to_string(c.dataset, c.prompts));
}

TEST_CASE("generate_synthetic structure") {
  SynthConfig cfg;
  cfg.n_samples = 80;
  const auto data = generate_synthetic(cfg);
  data.dataset.validate();
  data.prompts.require_emotions(data.dataset);
  data.prompts.require_genders(data.dataset);
  std::map<std::pair<std::string, std::string>, int> cells;
  for (const auto& s : data.dataset.samples) {
    CHECK(s.audio_features.rows() >= cfg.t_min);
    CHECK(s.audio_features.rows() <= cfg.t_max);
    CHECK(s.text_features.rows() >= cfg.l_min);
    CHECK(s.text_features.rows() <= cfg.l_max);
    CHECK(s.session.has_value());
    ++cells[{s.emotion, s.gender}];
  }
  CHECK(cells.size() == 8);
  for (const auto& [key, count] : cells) CHECK(count == 10);
}

TEST_CASE("confound only moves audio features") {
  SynthConfig cfg;
  cfg.n_samples = 30;
  cfg.seed = 4;
  cfg.confound = 0.0;
  const auto plain = generate_synthetic(cfg);
  cfg.confound = 2.0;
  const auto shifted = generate_synthetic(cfg);
  CHECK(plain.prompts == shifted.prompts);
  for (std::size_t i = 0; i < plain.dataset.size(); ++i) {
    CHECK(plain.dataset.samples[i].text_features == shifted.dataset.samples[i].text_features);
    CHECK(plain.dataset.samples[i].audio_features.rows() == shifted.dataset.samples[i].audio_features.rows());
    CHECK(plain.dataset.samples[i].audio_features != shifted.dataset.samples[i].audio_features);
  }
}

TEST_CASE("zero confound leaves per-gender emotion means together") {
  SynthConfig cfg;
  cfg.n_samples = 800;
  cfg.seed = 21;
  cfg.confound = 0.0;
  const auto data = generate_synthetic(cfg);
  // per (emotion, gender): mean of all audio rows
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::size_t>> acc;
  for (const auto& s : data.dataset.samples) {
    auto& [sum, count] = acc[{s.emotion, s.gender}];
    sum.resize(cfg.d_a, 0.0);
    for (std::size_t t = 0; t < s.audio_features.rows(); ++t) {
      for (std::size_t j = 0; j < cfg.d_a; ++j) sum[j] += s.audio_features(t, j);
      ++count;
    }
  }
  for (const auto& emotion : cfg.emotion_labels) {
    const auto& f = acc[{emotion, "female"}];
    const auto& m = acc[{emotion, "male"}];
    const double n = static_cast<double>(std::min(f.second, m.second));
    for (std::size_t j = 0; j < cfg.d_a; ++j) {
      const double diff = f.first[j] / static_cast<double>(f.second) - m.first[j] / static_cast<double>(m.second);
      // difference of two means has standard deviation noise * sqrt(2 / n)
      CHECK(std::abs(diff) <= 4.0 * cfg.noise * std::sqrt(2.0 / n));
    }
  }
}

TEST_CASE("synth config validation names the field") {
  SynthConfig cfg;
  cfg.noise = 0.0;
  try {
    generate_synthetic(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("noise") != std::string::npos);
  }
  cfg = SynthConfig{};
  cfg.separation = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("kfold_split by session") {
  const Dataset d = tiny_dataset(10, true);
  const auto folds = kfold_split(d, 5);
  REQUIRE(folds.size() == 5);
  std::vector<std::string> fold3;
  for (std::size_t i : folds[2].test) fold3.push_back(d.samples[i].id);
  CHECK(fold3 == std::vector<std::string>{"id2", "id7"});
  for (std::size_t i : folds[2].test) CHECK(d.samples[i].session == 3);
  check_partition(folds, d.size());

  CHECK_THROWS_AS(kfold_split(d, 4), ConfigError);
  CHECK_THROWS_AS(kfold_split(d, 1), ConfigError);
}

TEST_CASE("kfold_split stratified fallback") {
  const Dataset d = tiny_dataset(40, false);
  const auto folds = kfold_split(d, 5, 9);
  REQUIRE(folds.size() == 5);
  check_partition(folds, d.size());
  for (const auto& f : folds) {
    std::map<std::string, int> per_emotion;
    for (std::size_t i : f.test) ++per_emotion[d.samples[i].emotion];
    CHECK(per_emotion.size() == 4);
    for (const auto& [label, count] : per_emotion) CHECK(count == 2);
  }
  CHECK_THROWS_AS(kfold_split(tiny_dataset(3, false), 5), ConfigError);
}

TEST_CASE("kfold_split partitions exhaustively over sizes and k") {
  for (std::size_t n = 2; n <= 23; ++n) {
    for (std::size_t k = 2; k <= std::min<std::size_t>(n, 7); ++k) {
      check_partition(kfold_split(tiny_dataset(n, false), k, n * 31 + k), n);
    }
  }
}

TEST_CASE("make_batches") {
  std::vector<std::size_t> seven{0, 1, 2, 3, 4, 5, 6};
  auto b = make_batches(seven, 3, 1);
  REQUIRE(b.size() == 2);
  CHECK(b[0].size() == 3);
  CHECK(b[1].size() == 4);
  CHECK(make_batches(seven, 3, 1) == b);

  std::vector<std::size_t> ids(64);
  for (std::size_t i = 0; i < 64; ++i) ids[i] = i;
  b = make_batches(ids, 32, 5);
  REQUIRE(b.size() == 2);
  CHECK(b[0].size() == 32);
  CHECK(b[1].size() == 32);

  CHECK_THROWS_AS(make_batches({1}, 32, 0), BatchError);
  CHECK_THROWS_AS(make_batches({1, 2, 3}, 1, 0), BatchError);
  CHECK(make_batches({4, 5}, 32, 0).size() == 1);
}

TEST_CASE("every batch has at least two ids and batches cover the input") {
  for (std::size_t n = 2; n < 70; n += 3) {
    for (std::size_t bs : {2u, 3u, 5u, 32u}) {
      std::vector<std::size_t> ids(n);
      for (std::size_t i = 0; i < n; ++i) ids[i] = i;
      std::multiset<std::size_t> seen;
      for (const auto& batch : make_batches(ids, bs, n + bs)) {
        CHECK(batch.size() >= 2);
        seen.insert(batch.begin(), batch.end());
      }
      CHECK(seen == std::multiset<std::size_t>(ids.begin(), ids.end()));
    }
  }
}
