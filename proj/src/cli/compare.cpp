// SPDX-License-Identifier: Apache-2.0
#include "gemo/cli/compare.hpp"

#include <cstdio>
#include <exception>

#include "gemo/errors.hpp"

namespace gemo::cli {
namespace {

constexpr Variant kOrder[] = {Variant::kEmo, Variant::kMlGemo, Variant::kSlGemo};

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace

std::vector<EvalReport> run_comparison(const TrainConfig& base, const Dataset& d,
                                       const ClassPromptSet& prompts,
                                       std::span<const std::uint64_t> seeds, std::size_t folds) {
  if (seeds.empty()) throw ConfigError("compare: seed list is empty");
  const std::size_t total = std::size(kOrder) * seeds.size();
  std::vector<EvalReport> reports(total);
  std::vector<std::exception_ptr> errors(total);
  const auto n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    try {
      TrainConfig cfg = base;
      cfg.variant = kOrder[idx / seeds.size()];
      cfg.seed = seeds[idx % seeds.size()];
      reports[idx] = run_cross_validation(cfg, d, prompts, {folds, false});
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

std::vector<ComparisonRow> summarize_comparison(std::span<const EvalReport> reports) {
  std::vector<ComparisonRow> rows;
  for (Variant v : kOrder) {
    std::vector<double> war, uar;
    for (const auto& r : reports) {
      if (r.variant != v) continue;
      war.push_back(r.war.mean);
      uar.push_back(r.uar.mean);
    }
    if (war.empty()) continue;
    ComparisonRow row;
    row.variant = v;
    row.runs = war.size();
    row.war = summarize(war);
    row.uar = summarize(uar);
    rows.push_back(row);
  }
  if (rows.empty() || rows.front().variant != Variant::kEmo) {
    throw ContractError("compare: the emo baseline has no runs");
  }
  for (auto& row : rows) {
    row.war_delta = row.war.mean - rows.front().war.mean;
    row.uar_delta = row.uar.mean - rows.front().uar.mean;
  }
  return rows;
}

std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::string out = "variant,runs,war_mean,war_std,uar_mean,uar_std,war_delta,uar_delta\n";
  for (const auto& r : rows) {
    out += format("%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", to_string(r.variant).c_str(), r.runs,
                  r.war.mean, r.war.stddev, r.uar.mean, r.uar.stddev, r.war_delta, r.uar_delta);
  }
  return out;
}

std::string comparison_text(std::span<const ComparisonRow> rows) {
  std::string out = format("%-10s %5s  %-17s %-17s %9s %9s\n", "variant", "runs", "WAR (%)", "UAR (%)",
                           "dWAR", "dUAR");
  for (const auto& r : rows) {
    const std::string war = format("%.2f ± %.2f", 100 * r.war.mean, 100 * r.war.stddev);
    const std::string uar = format("%.2f ± %.2f", 100 * r.uar.mean, 100 * r.uar.stddev);
    // the ± sign is two bytes, so pad one extra column
    out += format("%-10s %5zu  %-18s %-18s %+9.2f %+9.2f\n", to_string(r.variant).c_str(), r.runs, war.c_str(),
                  uar.c_str(), 100 * r.war_delta, 100 * r.uar_delta);
  }
  return out;
}

}  // namespace gemo::cli
