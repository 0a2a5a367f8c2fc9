// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "gemo/errors.hpp"
#include "gemo/eval/eval.hpp"

using namespace gemo;

namespace {

ModelParams identity_model(std::size_t dim) {
  ModelParams p;
  Matrix eye(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) eye(i, i) = 1.0;
  p.audio_head.layers.push_back({eye, Matrix(1, dim)});
  p.text_head.layers.push_back({eye, Matrix(1, dim)});
  return p;
}

using Strings = std::vector<std::string>;

}  // namespace

TEST_CASE("classify by cosine with lowest-index ties") {
  const std::vector<Matrix> prompts{Matrix{{1, 0}}, Matrix{{0, 1}}};
  const ModelParams p = identity_model(2);
  CHECK(classify(p, Matrix{{1, 0}}, prompts) == 0);
  CHECK(classify(p, Matrix{{0.1, 2}}, prompts) == 1);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(classify(p, Matrix{{r, r}}, prompts) == 0);
  CHECK_THROWS_AS(classify(p, Matrix{{0, 0}}, prompts), NumericError);
  CHECK_THROWS_AS(classify_embedding(std::vector<double>{1.0, 0.0}, std::vector<Matrix>{}), PromptError);
}

TEST_CASE("classify is invariant to positive scaling") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Matrix> prompts;
    for (int c = 0; c < 4; ++c) prompts.push_back(Matrix{{normal(rng), normal(rng), normal(rng)}});
    const std::vector<double> e{normal(rng), normal(rng), normal(rng)};
    const std::size_t base = classify_embedding(e, prompts);
    for (double lambda : {1e-3, 0.5, 7.0, 1e4}) {
      std::vector<double> scaled = e;
      for (double& v : scaled) v *= lambda;
      CHECK(classify_embedding(scaled, prompts) == base);
      std::vector<Matrix> scaled_prompts = prompts;
      for (double& v : scaled_prompts[trial % 4].data()) v *= lambda;
      CHECK(classify_embedding(e, scaled_prompts) == base);
    }
  }
}

TEST_CASE("compute_metrics on hand-computed fixtures") {
  const Strings labels{"A", "B", "C"};
  auto check = [&](const Strings& truth, const Strings& pred, double war, double uar) {
    const FoldMetrics m = compute_metrics(truth, pred, labels);
    CHECK(std::abs(m.war - war) <= 1e-12);
    CHECK(std::abs(m.uar - uar) <= 1e-12);
    std::size_t total = 0, trace = 0;
    for (std::size_t i = 0; i < m.confusion.size(); ++i) {
      for (std::size_t j = 0; j < m.confusion.size(); ++j) total += m.confusion[i][j];
      trace += m.confusion[i][i];
    }
    CHECK(total == truth.size());
    CHECK(std::abs(m.war - static_cast<double>(trace) / static_cast<double>(total)) <= 1e-12);
  };
  check({"A", "A", "A", "B"}, {"A", "A", "B", "B"}, 0.75, (2.0 / 3.0 + 1.0) / 2.0);
  check({"A", "B", "C"}, {"A", "B", "C"}, 1.0, 1.0);
  check({"A", "A", "B", "B"}, {"A", "B", "B", "A"}, 0.5, 0.5);
  // C absent from the truth: excluded from the recall mean
  check({"A", "A", "B"}, {"C", "A", "B"}, 2.0 / 3.0, (0.5 + 1.0) / 2.0);
}

TEST_CASE("compute_metrics confusion layout and errors") {
  const std::vector<std::size_t> truth{0, 0, 1, 2}, pred{1, 0, 1, 1};
  const FoldMetrics m = compute_metrics(truth, pred, 3);
  CHECK(m.confusion == ConfusionMatrix{{1, 1, 0}, {0, 1, 0}, {0, 1, 0}});
  CHECK(m.total == 4);
  const std::vector<std::size_t> short_pred{0};
  CHECK_THROWS_AS(compute_metrics(truth, short_pred, 3), ContractError);
  CHECK_THROWS_AS(compute_metrics(std::vector<std::size_t>{}, std::vector<std::size_t>{}, 3), ContractError);
}

TEST_CASE("balanced truth gives WAR == UAR") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> cls(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> truth, pred;
    for (std::size_t c = 0; c < 4; ++c)
      for (int k = 0; k < 5; ++k) {
        truth.push_back(c);
        pred.push_back(cls(rng));
      }
    const FoldMetrics m = compute_metrics(truth, pred, 4);
    CHECK(std::abs(m.war - m.uar) <= 1e-12);
  }
}

TEST_CASE("UAR ignores proportional duplication of one class") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> cls(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> truth, pred;
    for (int k = 0; k < 12; ++k) {
      truth.push_back(cls(rng));
      pred.push_back(cls(rng));
    }
    const FoldMetrics base = compute_metrics(truth, pred, 3);
    // repeat every sample of class 0 three more times
    auto t2 = truth, p2 = pred;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != 0) continue;
      for (int r = 0; r < 3; ++r) {
        t2.push_back(truth[i]);
        p2.push_back(pred[i]);
      }
    }
    CHECK(std::abs(compute_metrics(t2, p2, 3).uar - base.uar) <= 1e-12);
  }
}

TEST_CASE("summarize uses the sample standard deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Summary s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(std::abs(s.stddev - std::sqrt(5.0 / 3.0)) <= 1e-15);
  CHECK(summarize(std::vector<double>{0.7}).stddev == 0.0);
}

TEST_CASE("cross-validation tests each sample once and never trains on it") {
  SynthConfig s;
  s.n_samples = 60;
  s.seed = 5;
  const auto data = generate_synthetic(s);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.hidden = 8;
  cfg.joint = 6;
  const EvalReport r = run_cross_validation(cfg, data.dataset, data.prompts, {5, true});
  REQUIRE(r.folds.size() == 5);
  std::multiset<std::string> tested;
  for (const auto& f : r.folds) {
    std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
    for (const auto& id : f.test_ids) CHECK(train.count(id) == 0);
    tested.insert(f.test_ids.begin(), f.test_ids.end());
    CHECK(f.metrics.total == f.test_ids.size());
  }
  CHECK(tested.size() == 60);
  CHECK(std::set<std::string>(tested.begin(), tested.end()).size() == 60);

  const EvalReport serial = run_cross_validation(cfg, data.dataset, data.prompts, {5, false});
  CHECK(report_to_json(serial).dump() == report_to_json(r).dump());
  CHECK(report_to_csv(r).rfind("fold,variant,war,uar\n1,emo,", 0) == 0);
}

TEST_CASE("no emotion signal gives chance-level UAR") {
  SynthConfig s;
  s.n_samples = 400;
  s.separation = 0.0;
  s.noise = 1.0;
  s.seed = 13;
  const auto data = generate_synthetic(s);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 1;
  const EvalReport r = run_cross_validation(cfg, data.dataset, data.prompts, {5, true});
  CHECK(r.uar.mean <= 0.35);
}

TEST_CASE("config digest is stable and sensitive") {
  const nlohmann::json a = {{"lr", 0.001}, {"seed", 1}};
  CHECK(config_digest(a) == config_digest(a));
  CHECK(config_digest(a).size() == 16);
  CHECK(config_digest(a) != config_digest({{"lr", 0.001}, {"seed", 2}}));
}
