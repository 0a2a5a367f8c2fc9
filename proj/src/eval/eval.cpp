// SPDX-License-Identifier: Apache-2.0
#include "gemo/eval/eval.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

#include "gemo/errors.hpp"

namespace gemo {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("cosine: zero-norm embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Matrix> emotion_prompt_embeddings(const ModelParams& p, const Dataset& d,
                                              const ClassPromptSet& prompts) {
  prompts.require_emotions(d);
  std::vector<Matrix> out;
  out.reserve(d.emotion_labels.size());
  for (const auto& label : d.emotion_labels) out.push_back(embed_text(p, prompts.emotion.at(label)));
  return out;
}

std::size_t classify_embedding(std::span<const double> audio_embedding,
                               std::span<const Matrix> class_embeddings) {
  if (class_embeddings.empty()) throw PromptError("classify: empty prompt set");
  std::size_t best = 0;
  double best_score = cosine(audio_embedding, class_embeddings[0].row(0));
  for (std::size_t c = 1; c < class_embeddings.size(); ++c) {
    const double score = cosine(audio_embedding, class_embeddings[c].row(0));
    if (score > best_score) {
      best = c;
      best_score = score;
    }
  }
  return best;
}

std::size_t classify(const ModelParams& p, const Matrix& audio_seq,
                     std::span<const Matrix> class_embeddings) {
  return classify_embedding(embed_audio(p, audio_seq).row(0), class_embeddings);
}

FoldMetrics compute_metrics(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                            std::size_t n_classes) {
  if (truth.size() != predicted.size()) {
    throw ContractError("compute_metrics: " + std::to_string(truth.size()) + " true labels vs " +
                        std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw ContractError("compute_metrics: no samples");
  FoldMetrics m;
  m.total = truth.size();
  m.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || predicted[i] >= n_classes) {
      throw LabelError("compute_metrics: label index out of range at position " + std::to_string(i));
    }
    ++m.confusion[truth[i]][predicted[i]];
  }
  std::size_t correct = 0;
  double recall_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t support = 0;
    for (std::size_t v : m.confusion[c]) support += v;
    correct += m.confusion[c][c];
    if (support == 0) continue;
    recall_sum += static_cast<double>(m.confusion[c][c]) / static_cast<double>(support);
    ++present;
  }
  m.war = static_cast<double>(correct) / static_cast<double>(m.total);
  m.uar = recall_sum / static_cast<double>(present);
  return m;
}

FoldMetrics compute_metrics(std::span<const std::string> truth, std::span<const std::string> predicted,
                            std::span<const std::string> labels) {
  auto index = [&](const std::string& s) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == s) return i;
    throw LabelError("compute_metrics: unknown label '" + s + "'");
  };
  std::vector<std::size_t> t, p;
  for (const auto& s : truth) t.push_back(index(s));
  for (const auto& s : predicted) p.push_back(index(s));
  return compute_metrics(t, p, labels.size());
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void EvalReport::aggregate() {
  std::vector<double> wars, uars;
  for (const auto& f : folds) {
    wars.push_back(f.metrics.war);
    uars.push_back(f.metrics.uar);
  }
  war = summarize(wars);
  uar = summarize(uars);
}

FoldMetrics evaluate_ids(const ModelParams& p, const Dataset& d, const ClassPromptSet& prompts,
                         std::span<const std::size_t> test_ids) {
  const std::vector<Matrix> classes = emotion_prompt_embeddings(p, d, prompts);
  std::vector<std::size_t> truth, predicted;
  truth.reserve(test_ids.size());
  predicted.reserve(test_ids.size());
  for (std::size_t i : test_ids) {
    truth.push_back(d.emotion_index(d.samples.at(i).emotion));
    predicted.push_back(classify(p, d.samples[i].audio_features, classes));
  }
  return compute_metrics(truth, predicted, d.emotion_labels.size());
}

EvalReport run_cross_validation(const TrainConfig& cfg, const Dataset& d, const ClassPromptSet& prompts,
                                const CrossValidationOptions& opts) {
  cfg.validate();
  prompts.require_emotions(d);
  const std::vector<Fold> folds = kfold_split(d, opts.folds, cfg.seed);

  EvalReport report;
  report.variant = cfg.variant;
  report.seed = cfg.seed;
  report.labels = d.emotion_labels;
  report.config = cfg.to_json();
  report.config["folds"] = opts.folds;
  report.config_digest = config_digest(report.config);
  report.folds.resize(folds.size());

  std::vector<std::exception_ptr> errors(folds.size());
  const auto n = static_cast<std::ptrdiff_t>(folds.size());
#pragma omp parallel for schedule(dynamic, 1) if (opts.parallel)
  for (std::ptrdiff_t f = 0; f < n; ++f) {
    try {
      const Fold& fold = folds[static_cast<std::size_t>(f)];
      FoldResult& out = report.folds[static_cast<std::size_t>(f)];
      TrainResult trained = train(cfg, d, prompts, fold.train);
      out.fold = static_cast<std::size_t>(f) + 1;
      out.metrics = evaluate_ids(trained.params, d, prompts, fold.test);
      out.loss_history = std::move(trained.loss_history);
      out.params = std::move(trained.params);
      for (std::size_t i : fold.train) out.train_ids.push_back(d.samples[i].id);
      for (std::size_t i : fold.test) out.test_ids.push_back(d.samples[i].id);
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  report.aggregate();
  return report;
}

std::string config_digest(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json report_to_json(const EvalReport& r) {
  using nlohmann::json;
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"war", f.metrics.war},
                     {"uar", f.metrics.uar},
                     {"test_count", f.metrics.total},
                     {"train_count", f.train_ids.size()},
                     {"confusion", f.metrics.confusion},
                     {"test_ids", f.test_ids},
                     {"loss_history", f.loss_history}});
  }
  return {{"variant", to_string(r.variant)},
          {"seed", r.seed},
          {"config_digest", r.config_digest},
          {"config", r.config},
          {"labels", r.labels},
          {"folds", folds},
          {"aggregate",
           {{"war_mean", r.war.mean}, {"war_std", r.war.stddev}, {"uar_mean", r.uar.mean}, {"uar_std", r.uar.stddev}}}};
}

std::string report_to_csv(const EvalReport& r) {
  std::string out = "fold,variant,war,uar\n";
  char line[128];
  for (const auto& f : r.folds) {
    std::snprintf(line, sizeof line, "%zu,%s,%.17g,%.17g\n", f.fold, to_string(r.variant).c_str(),
                  f.metrics.war, f.metrics.uar);
    out += line;
  }
  return out;
}

}  // namespace gemo
