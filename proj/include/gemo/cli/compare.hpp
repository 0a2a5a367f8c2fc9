// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gemo/eval/eval.hpp"

namespace gemo::cli {

/// One table row: a variant summarised over its runs (one run per seed).
struct ComparisonRow {
  Variant variant = Variant::kEmo;
  std::size_t runs = 0;
  Summary war;
  Summary uar;
  double war_delta = 0.0;  // mean minus the emo mean, absolute points
  double uar_delta = 0.0;
};

/// Cross-validates every (variant, seed) pair, fanning runs out across
/// threads. Output is ordered by variant (emo, ml-gemo, sl-gemo) then seed.
std::vector<EvalReport> run_comparison(const TrainConfig& base, const Dataset& d,
                                       const ClassPromptSet& prompts,
                                       std::span<const std::uint64_t> seeds, std::size_t folds);

/// Groups reports by variant in canonical order; each run contributes its
/// cross-validated mean. Deltas are against emo, which must be present.
std::vector<ComparisonRow> summarize_comparison(std::span<const EvalReport> reports);

std::string comparison_csv(std::span<const ComparisonRow> rows);
/// Aligned table with mean±std columns and signed deltas.
std::string comparison_text(std::span<const ComparisonRow> rows);

}  // namespace gemo::cli
