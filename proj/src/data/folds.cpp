// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>
#include <set>

#include "gemo/data/dataset.hpp"
#include "gemo/errors.hpp"

namespace gemo {
namespace {

std::vector<Fold> complete(std::vector<std::vector<std::size_t>> tests, std::size_t n) {
  std::vector<Fold> folds(tests.size());
  for (std::size_t f = 0; f < tests.size(); ++f) {
    std::sort(tests[f].begin(), tests[f].end());
    std::vector<bool> in_test(n, false);
    for (std::size_t i : tests[f]) in_test[i] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_test[i]) folds[f].train.push_back(i);
    folds[f].test = std::move(tests[f]);
  }
  return folds;
}

}  // namespace

std::vector<Fold> kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("folds: k must be at least 2, got " + std::to_string(k));
  const std::size_t n = d.size();

  const bool sessions = n > 0 && std::all_of(d.samples.begin(), d.samples.end(),
                                             [](const SampleRecord& s) { return s.session.has_value(); });
  if (sessions) {
    std::set<int> distinct;
    for (const auto& s : d.samples) distinct.insert(*s.session);
    if (distinct.size() != k || *distinct.begin() != 1 || *distinct.rbegin() != static_cast<int>(k)) {
      throw ConfigError("folds: dataset has " + std::to_string(distinct.size()) +
                        " sessions but k=" + std::to_string(k) + " (sessions must be 1..k)");
    }
    std::vector<std::vector<std::size_t>> tests(k);
    for (std::size_t i = 0; i < n; ++i) tests[*d.samples[i].session - 1].push_back(i);
    return complete(std::move(tests), n);
  }

  if (k > n) {
    throw ConfigError("folds: k=" + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  // Stratified: deal each emotion's shuffled members round-robin, carrying the
  // dealing position across classes so fold sizes stay within one of each other.
  std::vector<std::vector<std::size_t>> by_emotion(d.emotion_labels.size());
  for (std::size_t i = 0; i < n; ++i) by_emotion[d.emotion_index(d.samples[i].emotion)].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> tests(k);
  std::size_t position = 0;
  for (auto& members : by_emotion) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) tests[position++ % k].push_back(i);
  }
  return complete(std::move(tests), n);
}

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> ids,
                                                   std::size_t batch_size,
                                                   std::uint64_t shuffle_seed) {
  if (batch_size < 2) throw BatchError("batch size must be at least 2, got " + std::to_string(batch_size));
  if (ids.size() < 2) throw BatchError("need at least 2 ids to batch, got " + std::to_string(ids.size()));
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < ids.size(); start += batch_size) {
    const std::size_t end = std::min(ids.size(), start + batch_size);
    if (end - start == 1 && !batches.empty()) {
      batches.back().push_back(ids[start]);
    } else {
      batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                           ids.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return batches;
}

}  // namespace gemo
