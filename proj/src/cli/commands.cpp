// SPDX-License-Identifier: Apache-2.0
#include "gemo/cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

#include "gemo/cli/compare.hpp"
#include "gemo/cli/gradcheck.hpp"
#include "gemo/cli/run_config.hpp"
#include "gemo/errors.hpp"
#include "gemo/eval/eval.hpp"

namespace gemo::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, json doc, const RunConfig& rc) {
  if (rc.timestamp) doc["created_at"] = utc_timestamp();
  write_text(path, doc.dump(2) + "\n");
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

LoadedManifest require_manifest(const RunConfig& rc) {
  if (rc.manifest.empty()) throw ConfigError("--manifest is required");
  LoadedManifest m = load_manifest(rc.manifest);
  m.dataset.validate();
  return m;
}

std::vector<std::size_t> all_ids(const Dataset& d) {
  std::vector<std::size_t> ids(d.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

// Train on the fold's train split when a fold is chosen, otherwise on everything.
Fold select_split(const RunConfig& rc, const Dataset& d) {
  if (!rc.fold) return {all_ids(d), {}};
  return kfold_split(d, rc.folds, rc.train.seed).at(*rc.fold - 1);
}

int cmd_gen_synth(const RunConfig& rc, std::ostream& out) {
  const SynthData data = generate_synthetic(rc.synth);
  const fs::path path = rc.manifest.empty() ? rc.out / "manifest.jsonl" : rc.manifest;
  write_text(path, manifest_to_string(data.dataset, data.prompts));
  out << "wrote " << data.dataset.size() << " samples to " << path.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const LoadedManifest m = require_manifest(rc);
  const Fold split = select_split(rc, m.dataset);
  TrainResult trained = train(rc.train, m.dataset, m.prompts, split.train);
  const std::vector<double>& history = trained.loss_history;

  json config = rc.to_json();
  config["train_count"] = split.train.size();
  fs::create_directories(rc.out);
  json extra = json::object();
  if (rc.timestamp) extra["created_at"] = utc_timestamp();
  save_checkpoint(trained.params, rc.out / "checkpoint.json", config, extra);
  write_text(rc.out / "loss.csv", loss_history_csv(history));
  out << fmt("trained %s on %zu samples for %zu epochs, final loss %.6f\n", to_string(rc.train.variant).c_str(),
             split.train.size(), history.size(), history.back());
  out << "wrote " << (rc.out / "checkpoint.json").string() << " and " << (rc.out / "loss.csv").string() << "\n";
  return 0;
}

EvalReport single_fold_report(const RunConfig& rc, const Dataset& d, std::span<const std::size_t> train_ids,
                              std::span<const std::size_t> test) {
  EvalReport report;
  report.variant = rc.train.variant;
  report.seed = rc.train.seed;
  report.labels = d.emotion_labels;
  report.config = rc.to_json();
  report.config_digest = config_digest(report.config);
  FoldResult f;
  f.fold = rc.fold.value_or(0);
  for (std::size_t i : train_ids) f.train_ids.push_back(d.samples[i].id);
  for (std::size_t i : test) f.test_ids.push_back(d.samples[i].id);
  report.folds.push_back(std::move(f));
  return report;
}

int cmd_eval(const json& file, const json& flags, std::ostream& out) {
  RunConfig rc = resolve_run_config(file, flags);
  if (rc.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  Checkpoint ck = load_checkpoint(rc.checkpoint);
  // checkpoint provenance sits between the config file and the flags
  json layered = file.is_object() ? file : json::object();
  for (const auto& [k, v] : ck.config.items()) {
    if (k != "train_count") layered[k] = v;
  }
  rc = resolve_run_config(layered, flags);

  const LoadedManifest m = require_manifest(rc);
  const Fold split = select_split(rc, m.dataset);
  const std::vector<std::size_t> test = rc.fold ? split.test : split.train;
  const std::vector<std::size_t> none;
  EvalReport report = single_fold_report(rc, m.dataset, rc.fold ? split.train : none, test);
  report.folds[0].metrics = evaluate_ids(ck.params, m.dataset, m.prompts, test);
  report.aggregate();

  write_json(rc.out / "eval_report.json", report_to_json(report), rc);
  write_text(rc.out / "eval_report.csv", report_to_csv(report));
  out << fmt("eval %s on %zu samples: WAR %.4f UAR %.4f\n", to_string(rc.train.variant).c_str(), test.size(),
             report.folds[0].metrics.war, report.folds[0].metrics.uar);
  return 0;
}

int cmd_xval(const RunConfig& rc, std::ostream& out) {
  const LoadedManifest m = require_manifest(rc);
  EvalReport report = run_cross_validation(rc.train, m.dataset, m.prompts, {rc.folds, true});
  report.config = rc.to_json();
  report.config_digest = config_digest(report.config);

  for (const auto& f : report.folds) {
    const fs::path dir = rc.out / fmt("fold_%zu", f.fold);
    RunConfig fold_rc = rc;
    fold_rc.fold = f.fold;
    json config = fold_rc.to_json();
    config["train_count"] = f.train_ids.size();
    json extra = json::object();
    if (rc.timestamp) extra["created_at"] = utc_timestamp();
    fs::create_directories(dir);
    save_checkpoint(f.params, dir / "checkpoint.json", config, extra);
    write_text(dir / "loss.csv", loss_history_csv(f.loss_history));
    out << fmt("fold %zu: WAR %.4f UAR %.4f (%zu test)\n", f.fold, f.metrics.war, f.metrics.uar, f.metrics.total);
  }
  write_json(rc.out / "report.json", report_to_json(report), rc);
  write_text(rc.out / "report.csv", report_to_csv(report));
  out << fmt("%s %zu-fold: WAR %.4f ± %.4f UAR %.4f ± %.4f\n", to_string(rc.train.variant).c_str(), rc.folds,
             report.war.mean, report.war.stddev, report.uar.mean, report.uar.stddev);
  return 0;
}

int cmd_gradcheck(const RunConfig& rc, bool write_csv, std::ostream& out, std::ostream& err) {
  GradCheckOptions opts;
  // a single value is a count, a list names the seeds
  if (rc.seeds.empty()) opts.seeds = default_gradcheck_seeds();
  else if (rc.seeds.size() == 1) opts.seeds = default_gradcheck_seeds(rc.seeds[0]);
  else opts.seeds = rc.seeds;
  opts.inject_fault = rc.inject_fault;

  const auto cases = run_gradcheck_suite(opts);
  std::string csv = "seed,variant,batch,target_norm,max_rel_error,worst_parameter,passed\n";
  std::map<std::string, double> worst;
  bool ok = true;
  for (const auto& c : cases) {
    const std::string v = to_string(c.variant);
    out << fmt("seed %3llu %-8s N=%zu %-8s max rel error %.3e  %s\n", static_cast<unsigned long long>(c.seed),
               v.c_str(), c.batch, to_string(c.target_norm).c_str(), c.result.max_rel_error,
               c.passed ? "ok" : "FAIL");
    csv += fmt("%llu,%s,%zu,%s,%.17g,%s,%d\n", static_cast<unsigned long long>(c.seed), v.c_str(), c.batch,
               to_string(c.target_norm).c_str(), c.result.max_rel_error, c.worst_parameter.c_str(),
               c.passed ? 1 : 0);
    worst[v] = std::max(worst[v], c.result.max_rel_error);
    if (!c.passed) {
      ok = false;
      err << fmt("gradcheck failure: seed %llu variant %s parameter %s analytic %.6g numeric %.6g\n",
                 static_cast<unsigned long long>(c.seed), v.c_str(), c.worst_parameter.c_str(),
                 c.result.worst_analytic, c.result.worst_numeric);
    }
  }
  for (const auto& [v, e] : worst) out << fmt("%-8s max rel error %.3e\n", v.c_str(), e);
  out << fmt("gradcheck %s: %zu checks\n", ok ? "PASS" : "FAIL", cases.size());
  if (write_csv) write_text(rc.out / "gradcheck.csv", csv);
  return ok ? 0 : 1;
}

int cmd_compare(const RunConfig& rc, std::ostream& out) {
  const LoadedManifest m = require_manifest(rc);
  const std::vector<std::uint64_t> seeds = rc.seeds.empty() ? std::vector<std::uint64_t>{1, 2, 3} : rc.seeds;
  const auto reports = run_comparison(rc.train, m.dataset, m.prompts, seeds, rc.folds);
  const auto rows = summarize_comparison(reports);

  json runs = json::array();
  for (const auto& r : reports) {
    runs.push_back({{"variant", to_string(r.variant)}, {"seed", r.seed}, {"config_digest", r.config_digest},
                    {"war_mean", r.war.mean}, {"uar_mean", r.uar.mean}});
  }
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"variant", to_string(r.variant)}, {"runs", r.runs}, {"war_mean", r.war.mean},
                     {"war_std", r.war.stddev}, {"uar_mean", r.uar.mean}, {"uar_std", r.uar.stddev},
                     {"war_delta", r.war_delta}, {"uar_delta", r.uar_delta}});
  }
  RunConfig echoed = rc;
  echoed.seeds = seeds;
  json config = echoed.to_json();
  config.erase("variant");  // every variant runs
  write_json(rc.out / "comparison.json", {{"config", config}, {"runs", runs}, {"table", table}}, rc);
  write_text(rc.out / "comparison.csv", comparison_csv(rows));
  const std::string text = comparison_text(rows);
  write_text(rc.out / "comparison.txt", text);
  out << text;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrastive language-audio emotion models with gender-aware objectives", "gemo-clap"};
  app.require_subcommand(1);
  app.fallthrough();

  json flags = json::object();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  auto str_opt = [&](CLI::App& a, const std::string& name, const std::string& key, const std::string& help) {
    return a.add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  auto num_opt = [&](CLI::App& a, const std::string& name, const std::string& key, const std::string& help) {
    return a.add_option_function<double>(name, [&flags, key](const double& v) { flags[key] = v; }, help);
  };
  auto count_opt = [&](CLI::App& a, const std::string& name, const std::string& key, const std::string& help) {
    return a.add_option_function<std::uint64_t>(name, [&flags, key](const std::uint64_t& v) { flags[key] = v; },
                                                help);
  };

  str_opt(app, "--manifest", "manifest", "JSONL manifest path");
  str_opt(app, "--out", "out", "output directory");
  str_opt(app, "--variant", "variant", "emo | ml-gemo | sl-gemo");
  num_opt(app, "--alpha-e", "alpha_e", "emotion weight in [0, 1]");
  num_opt(app, "--lr", "lr", "Adam learning rate");
  count_opt(app, "--batch-size", "batch_size", "batch size");
  count_opt(app, "--epochs", "epochs", "training epochs");
  count_opt(app, "--seed", "seed", "random seed");
  str_opt(app, "--seeds", "seeds", "comma-separated seeds (gradcheck: a single value is a count)");
  count_opt(app, "--folds", "folds", "cross-validation folds");
  num_opt(app, "--temperature", "temperature", "similarity temperature");
  str_opt(app, "--target-norm", "target_norm", "softmax | row_sum");
  app.add_flag_callback("--paper-fidelity", [&] { flags["paper_fidelity"] = true; },
                        "lr 2e-5, batch 32, 80 epochs");
  app.add_flag_callback("--no-timestamp", [&] { flags["no_timestamp"] = true; }, "omit created_at fields");

  auto* gen = app.add_subcommand("gen-synth", "write a synthetic manifest");
  count_opt(*gen, "--n", "n", "sample count");
  num_opt(*gen, "--separation", "separation", "emotion anchor scale");
  num_opt(*gen, "--noise", "noise", "feature noise");
  num_opt(*gen, "--confound", "confound", "gender offset scale");
  count_opt(*gen, "--d-a", "d_a", "audio feature width");
  count_opt(*gen, "--d-t", "d_t", "text feature width");

  auto* tr = app.add_subcommand("train", "train one model and save a checkpoint");
  count_opt(*tr, "--fold", "fold", "train on this fold's train split (1-based)");
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  str_opt(*ev, "--checkpoint", "checkpoint", "checkpoint JSON")->required();
  count_opt(*ev, "--fold", "fold", "evaluate this fold's test split (1-based)");
  auto* xv = app.add_subcommand("xval", "k-fold cross-validation");
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  str_opt(*gc, "--inject-fault", "inject_fault", "")->group("");
  auto* cmp = app.add_subcommand("compare", "three-variant comparison table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const json file = config_path.empty() ? json(nullptr) : read_config_file(config_path);
    if (ev->parsed()) return cmd_eval(file, flags, out);
    const RunConfig rc = resolve_run_config(file, flags);
    if (gen->parsed()) return cmd_gen_synth(rc, out);
    if (tr->parsed()) return cmd_train(rc, out);
    if (xv->parsed()) return cmd_xval(rc, out);
    if (gc->parsed()) {
      const bool out_given = flags.contains("out") || (file.is_object() && file.contains("out"));
      return cmd_gradcheck(rc, out_given, out, err);
    }
    if (cmp->parsed()) return cmd_compare(rc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gemo::cli
