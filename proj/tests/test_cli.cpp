// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gemo/cli/commands.hpp"
#include "gemo/cli/compare.hpp"
#include "gemo/cli/run_config.hpp"
#include "gemo/errors.hpp"

using namespace gemo;
using namespace gemo::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gemo_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("flags override the config file and the preset") {
  const json file = {{"lr", 0.5}, {"epochs", 3}, {"variant", "ml-gemo"}};
  RunConfig rc = resolve_run_config(file, {{"lr", 0.25}});
  CHECK(rc.train.lr == 0.25);
  CHECK(rc.train.epochs == 3);
  CHECK(rc.train.variant == Variant::kMlGemo);

  rc = resolve_run_config(nullptr, {{"paper_fidelity", true}});
  CHECK(rc.train.lr == 2e-5);
  CHECK(rc.train.batch_size == 32);
  CHECK(rc.train.epochs == 80);
  rc = resolve_run_config({{"paper_fidelity", true}}, {{"epochs", 4}});
  CHECK(rc.train.lr == 2e-5);
  CHECK(rc.train.epochs == 4);
  CHECK(rc.to_json()["paper_fidelity"] == true);
}

TEST_CASE("config validation names the field") {
  CHECK_THROWS_AS(resolve_run_config({{"epoch", 3}}, json::object()), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(nullptr, {{"epochs", -1}}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(nullptr, {{"alpha_e", 1.5}}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(nullptr, {{"target_norm", "l2"}}), ConfigError);
  CHECK_THROWS_AS(resolve_run_config(nullptr, {{"fold", 6}}), ConfigError);
  try {
    resolve_run_config(nullptr, {{"noise", 0.0}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("noise") != std::string::npos);
  }
  CHECK(parse_seed_list("1,2,30") == std::vector<std::uint64_t>{1, 2, 30});
  CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list("x"), ConfigError);
}

TEST_CASE("gen-synth is deterministic and confound only touches audio") {
  const fs::path dir = scratch("gen");
  REQUIRE(invoke({"gen-synth", "--n", "120", "--seed", "7", "--manifest", (dir / "a.jsonl").string()}).status == 0);
  REQUIRE(invoke({"gen-synth", "--n", "120", "--seed", "7", "--manifest", (dir / "b.jsonl").string()}).status == 0);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));

  REQUIRE(invoke({"gen-synth", "--n", "120", "--seed", "7", "--confound", "2", "--manifest",
               (dir / "c.jsonl").string()})
              .status == 0);
  const LoadedManifest a = load_manifest(dir / "a.jsonl");
  const LoadedManifest c = load_manifest(dir / "c.jsonl");
  a.dataset.validate();
  REQUIRE(a.dataset.size() == 120);
  CHECK(a.prompts == c.prompts);
  for (std::size_t i = 0; i < a.dataset.size(); ++i) {
    SampleRecord x = a.dataset.samples[i], y = c.dataset.samples[i];
    CHECK(x.audio_features != y.audio_features);
    x.audio_features = y.audio_features;
    CHECK(x == y);
  }
}

TEST_CASE("train, xval and eval agree and rerun byte-identically") {
  const fs::path dir = scratch("pipeline");
  const std::string manifest = (dir / "m.jsonl").string();
  REQUIRE(invoke({"gen-synth", "--n", "100", "--seed", "2", "--manifest", manifest}).status == 0);

  const std::vector<std::string> xval{"xval", "--manifest", manifest, "--variant", "sl-gemo", "--alpha-e", "0.9",
                                      "--folds", "5", "--epochs", "4", "--no-timestamp"};
  auto with_out = [](std::vector<std::string> a, const fs::path& out) {
    a.push_back("--out");
    a.push_back(out.string());
    return a;
  };
  REQUIRE(invoke(with_out(xval, dir / "x1")).status == 0);
  REQUIRE(invoke(with_out(xval, dir / "x2")).status == 0);
  for (const char* f : {"report.json", "report.csv", "fold_2/checkpoint.json", "fold_2/loss.csv"}) {
    CHECK(slurp(dir / "x1" / f) == slurp(dir / "x2" / f));
  }
  const json report = json::parse(slurp(dir / "x1" / "report.json"));
  CHECK(report["folds"].size() == 5);
  CHECK(report["variant"] == "sl-gemo");
  CHECK(report["config"]["alpha_e"] == 0.9);
  CHECK(!report.contains("created_at"));

  // eval on a fold checkpoint reproduces that fold's metrics
  const Run ev = invoke({"eval", "--manifest", manifest, "--checkpoint", (dir / "x1/fold_4/checkpoint.json").string(),
                      "--out", (dir / "ev").string(), "--no-timestamp"});
  REQUIRE(ev.status == 0);
  const json evr = json::parse(slurp(dir / "ev" / "eval_report.json"));
  CHECK(evr["folds"][0]["fold"] == 4);
  CHECK(evr["folds"][0]["test_ids"] == report["folds"][3]["test_ids"]);
  CHECK(evr["folds"][0]["uar"] == report["folds"][3]["uar"]);
  CHECK(evr["folds"][0]["confusion"] == report["folds"][3]["confusion"]);

  // train on the same fold gives the same parameters as xval
  REQUIRE(invoke({"train", "--manifest", manifest, "--variant", "sl-gemo", "--alpha-e", "0.9", "--epochs", "4",
               "--fold", "4", "--out", (dir / "t").string(), "--no-timestamp"})
              .status == 0);
  const json trained = json::parse(slurp(dir / "t" / "checkpoint.json"));
  const json from_xval = json::parse(slurp(dir / "x1" / "fold_4" / "checkpoint.json"));
  CHECK(trained["audio_head"] == from_xval["audio_head"]);
  CHECK(trained["text_head"] == from_xval["text_head"]);
  CHECK(slurp(dir / "t" / "loss.csv") == slurp(dir / "x1" / "fold_4" / "loss.csv"));

  // timestamps appear unless disabled
  REQUIRE(invoke({"train", "--manifest", manifest, "--epochs", "1", "--out", (dir / "ts").string()}).status == 0);
  CHECK(json::parse(slurp(dir / "ts" / "checkpoint.json")).contains("created_at"));
}

TEST_CASE("errors exit nonzero with the message on stderr") {
  const Run missing = invoke({"train", "--manifest", "/nonexistent/path/m.jsonl"});
  CHECK(missing.status != 0);
  CHECK(missing.err.find("/nonexistent/path/m.jsonl") != std::string::npos);
  CHECK(invoke({"train"}).status != 0);
  CHECK(invoke({"frobnicate"}).status != 0);
  CHECK(invoke({"gen-synth", "--n", "1", "--out", scratch("bad").string()}).err.find("n_samples") != std::string::npos);
}

TEST_CASE("gradcheck counts, passes, and catches an injected fault") {
  Run r = invoke({"gradcheck", "--seeds", "5"});
  CHECK(r.status == 0);
  std::size_t lines = 0;
  for (std::size_t pos = 0; (pos = r.out.find("seed ", pos)) != std::string::npos; ++pos) ++lines;
  CHECK(lines == 15);
  CHECK(r.out.find("gradcheck PASS: 15 checks") != std::string::npos);

  r = invoke({"gradcheck", "--seeds", "3,9"});
  CHECK(r.out.find("gradcheck PASS: 6 checks") != std::string::npos);

  r = invoke({"gradcheck", "--seeds", "2", "--inject-fault", "text_head.1.weight"});
  CHECK(r.status != 0);
  CHECK(r.err.find("text_head.1.weight") != std::string::npos);
  CHECK(invoke({"gradcheck", "--inject-fault", "no.such.slot"}).status != 0);
}

TEST_CASE("compare emits one row per variant with a zero baseline delta") {
  const fs::path dir = scratch("compare");
  const std::string manifest = (dir / "m.jsonl").string();
  REQUIRE(invoke({"gen-synth", "--n", "60", "--seed", "4", "--confound", "2", "--manifest", manifest}).status == 0);
  const Run r = invoke({"compare", "--manifest", manifest, "--seeds", "1,2,3", "--epochs", "2", "--folds", "5",
                     "--out", (dir / "out").string(), "--no-timestamp"});
  REQUIRE(r.status == 0);
  const json doc = json::parse(slurp(dir / "out" / "comparison.json"));
  CHECK(doc["runs"].size() == 9);
  CHECK(doc["table"].size() == 3);
  CHECK(doc["table"][0]["variant"] == "emo");
  CHECK(doc["table"][0]["uar_delta"] == 0.0);
  CHECK(doc["table"][0]["war_delta"] == 0.0);
  const std::string csv = slurp(dir / "out" / "comparison.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(slurp(dir / "out" / "comparison.txt") == r.out);
}

TEST_CASE("comparison rows are ordered and summarised") {
  std::vector<EvalReport> reports(4);
  reports[0].variant = Variant::kSlGemo;
  reports[0].uar.mean = 0.7;
  reports[1].variant = Variant::kEmo;
  reports[1].uar.mean = 0.5;
  reports[2].variant = Variant::kEmo;
  reports[2].uar.mean = 0.7;
  reports[3].variant = Variant::kSlGemo;
  reports[3].uar.mean = 0.9;
  const auto rows = summarize_comparison(reports);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].variant == Variant::kEmo);
  CHECK(rows[0].uar.mean == doctest::Approx(0.6));
  CHECK(rows[1].uar_delta == doctest::Approx(0.2));
  CHECK(rows[0].uar_delta == 0.0);
  CHECK_THROWS_AS(summarize_comparison(std::vector<EvalReport>(reports.begin(), reports.begin() + 1)), ContractError);
}
