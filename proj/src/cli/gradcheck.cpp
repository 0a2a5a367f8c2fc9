// SPDX-License-Identifier: Apache-2.0
#include "gemo/cli/gradcheck.hpp"

#include <algorithm>
#include <random>

#include "gemo/errors.hpp"
#include "gemo/model/model.hpp"

namespace gemo::cli {
namespace {

// A small random problem: dimensions, labels, features and perturbed
// parameters all come from the seed.
struct Problem {
  ModelParams params;
  std::vector<Matrix> audio, text, gender_prompts;
  LabelBatch labels;
  LossOptions options;
};

Matrix normal_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

Problem make_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  Problem p;
  const std::size_t n = pick(2, 8);
  const std::size_t n_emotions = pick(2, 4);
  ModelDims dims{pick(2, 6), pick(2, 6), pick(2, 6), pick(2, 5)};
  p.params = init_params(seed, dims, uniform(0.5, 3.0));
  p.params.eps_t = uniform(0.5, 3.0);
  // nonzero biases so every slot carries signal
  for (auto* head : {&p.params.audio_head, &p.params.text_head})
    for (auto& layer : head->layers)
      for (double& b : layer.bias.data()) b = 0.1 * std::normal_distribution<double>(0.0, 1.0)(rng);

  for (std::size_t i = 0; i < n; ++i) {
    p.audio.push_back(normal_matrix(rng, pick(1, 4), dims.d_a));
    p.text.push_back(normal_matrix(rng, pick(1, 4), dims.d_t));
    p.labels.emotion.push_back(pick(0, n_emotions - 1));
    p.labels.gender.push_back(pick(0, 1));
  }
  for (int g = 0; g < 2; ++g) p.gender_prompts.push_back(normal_matrix(rng, pick(1, 3), dims.d_t));
  p.options.alpha_e = uniform(0.1, 0.9);
  p.options.target_norm = seed % 2 == 0 ? TargetNorm::kSoftmax : TargetNorm::kRowSum;
  return p;
}

}  // namespace

std::vector<std::uint64_t> default_gradcheck_seeds(std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = i + 1;
  return seeds;
}

std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckOptions& opts) {
  if (opts.seeds.empty()) throw ConfigError("gradcheck: no seeds");
  std::vector<GradCheckCase> cases;
  for (std::uint64_t seed : opts.seeds) {
    const Problem problem = make_problem(seed);
    const std::vector<std::string> names = problem.params.slot_names();

    GradientHook hook;
    if (!opts.inject_fault.empty()) {
      const auto it = std::find(names.begin(), names.end(), opts.inject_fault);
      if (it == names.end()) throw ConfigError("inject_fault: unknown parameter '" + opts.inject_fault + "'");
      const std::size_t slot = static_cast<std::size_t>(it - names.begin());
      hook = [slot](std::vector<Matrix>& grads) {
        for (double& v : grads[slot].data()) v = -v;
      };
    }

    BatchFeatures features;
    for (const auto& m : problem.audio) features.audio.push_back(&m);
    for (const auto& m : problem.text) features.text.push_back(&m);
    std::vector<const Matrix*> prompts;
    for (const auto& m : problem.gender_prompts) prompts.push_back(&m);

    for (Variant v : {Variant::kEmo, Variant::kMlGemo, Variant::kSlGemo}) {
      LossBuilder build = [&](Graph& g, std::span<const Matrix> tensors) {
        ModelParams p = problem.params;
        p.assign(tensors);
        return variant_loss(v, p, features, prompts, problem.labels, problem.options, g);
      };
      GradCheckCase c;
      c.seed = seed;
      c.variant = v;
      c.batch = problem.labels.size();
      c.target_norm = problem.options.target_norm;
      c.result = finite_diff_check(build, problem.params.flatten(), opts.step, hook);
      c.worst_parameter = names[c.result.worst_slot] + "[" + std::to_string(c.result.worst_index) + "]";
      c.passed = c.result.max_rel_error <= opts.tolerance;
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

}  // namespace gemo::cli
