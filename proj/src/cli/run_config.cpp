// SPDX-License-Identifier: Apache-2.0
#include "gemo/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "gemo/errors.hpp"

namespace gemo::cli {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "variant", "alpha_e",  "lr",     "batch_size", "epochs",    "seed",       "seeds",
      "folds",   "fold",     "temperature", "target_norm", "hidden", "joint",   "paper_fidelity",
      "n",       "separation", "noise", "confound",  "d_a",       "d_t",        "manifest",
      "out",     "checkpoint", "no_timestamp", "inject_fault"};
  return keys;
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value: " + j.at(key).dump());
  }
}

std::size_t get_count(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError("config key '" + key + "' must be a non-negative integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

void apply(RunConfig& rc, const json& layer) {
  if (!layer.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : layer.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    if (value.is_null()) throw ConfigError("config key '" + key + "' is null");
  }
  auto has = [&](const char* k) { return layer.contains(k); };
  TrainConfig& t = rc.train;
  if (has("variant")) t.variant = parse_variant(get<std::string>(layer, "variant"));
  if (has("alpha_e")) t.alpha_e = get<double>(layer, "alpha_e");
  if (has("lr")) t.lr = get<double>(layer, "lr");
  if (has("batch_size")) t.batch_size = get_count(layer, "batch_size");
  if (has("epochs")) t.epochs = get_count(layer, "epochs");
  if (has("seed")) {
    t.seed = get_count(layer, "seed");
    rc.synth.seed = t.seed;
  }
  if (has("temperature")) t.temperature = get<double>(layer, "temperature");
  if (has("target_norm")) t.target_norm = parse_target_norm(get<std::string>(layer, "target_norm"));
  if (has("hidden")) t.hidden = get_count(layer, "hidden");
  if (has("joint")) t.joint = get_count(layer, "joint");
  if (has("seeds")) {
    const json& s = layer.at("seeds");
    if (s.is_string()) {
      rc.seeds = parse_seed_list(s.get<std::string>());
    } else {
      rc.seeds = get<std::vector<std::uint64_t>>(layer, "seeds");
      if (rc.seeds.empty()) throw ConfigError("config key 'seeds' is empty");
    }
  }
  if (has("folds")) rc.folds = get_count(layer, "folds");
  if (has("fold")) rc.fold = get_count(layer, "fold");
  if (has("n")) rc.synth.n_samples = get_count(layer, "n");
  if (has("separation")) rc.synth.separation = get<double>(layer, "separation");
  if (has("noise")) rc.synth.noise = get<double>(layer, "noise");
  if (has("confound")) rc.synth.confound = get<double>(layer, "confound");
  if (has("d_a")) rc.synth.d_a = get_count(layer, "d_a");
  if (has("d_t")) rc.synth.d_t = get_count(layer, "d_t");
  if (has("manifest")) rc.manifest = get<std::string>(layer, "manifest");
  if (has("out")) rc.out = get<std::string>(layer, "out");
  if (has("checkpoint")) rc.checkpoint = get<std::string>(layer, "checkpoint");
  if (has("no_timestamp")) rc.timestamp = !get<bool>(layer, "no_timestamp");
  if (has("paper_fidelity")) get<bool>(layer, "paper_fidelity");
  if (has("inject_fault")) rc.inject_fault = get<std::string>(layer, "inject_fault");
}

bool wants_paper_fidelity(const json& layer) {
  return layer.is_object() && layer.contains("paper_fidelity") && layer.at("paper_fidelity").is_boolean() &&
         layer.at("paper_fidelity").get<bool>();
}

}  // namespace

json RunConfig::to_json() const {
  json j = train.to_json();
  j["folds"] = folds;
  if (fold) j["fold"] = *fold;
  if (!seeds.empty()) j["seeds"] = seeds;
  j["paper_fidelity"] = paper_fidelity;
  return j;
}

RunConfig resolve_run_config(const json& file, const json& flags) {
  RunConfig rc;
  if (wants_paper_fidelity(file) || wants_paper_fidelity(flags)) {
    rc.train = TrainConfig::paper_fidelity();
    rc.paper_fidelity = true;
  }
  if (!file.is_null()) apply(rc, file);
  apply(rc, flags);

  rc.train.validate();
  rc.synth.validate();
  if (rc.folds < 2) throw ConfigError("config key 'folds' must be at least 2");
  if (rc.fold && (*rc.fold < 1 || *rc.fold > rc.folds)) {
    throw ConfigError("config key 'fold' must lie in 1.." + std::to_string(rc.folds));
  }
  return rc;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError("config file " + path.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    const std::string item = csv.substr(start, end - start);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("seeds: '" + item + "' is not a non-negative integer in '" + csv + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace gemo::cli
