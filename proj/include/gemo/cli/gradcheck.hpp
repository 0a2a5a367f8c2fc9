// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gemo/numerics/graph.hpp"
#include "gemo/objectives/objectives.hpp"

namespace gemo::cli {

struct GradCheckOptions {
  std::vector<std::uint64_t> seeds;
  double tolerance = 1e-4;
  double step = 1e-5;
  /// Slot name (e.g. "audio_head.0.weight") whose analytic gradient is
  /// negated before comparison. Used to prove the checker catches faults.
  std::string inject_fault;
};

/// One seeded random configuration checked under one variant.
struct GradCheckCase {
  std::uint64_t seed = 0;
  Variant variant = Variant::kEmo;
  std::size_t batch = 0;
  TargetNorm target_norm = TargetNorm::kSoftmax;
  GradCheckResult result;
  std::string worst_parameter;  // "text_head.1.bias[3]"
  bool passed = false;
};

/// Seeds 1..count.
std::vector<std::uint64_t> default_gradcheck_seeds(std::size_t count = 20);

/// Every seed under every variant, ordered by (seed, variant).
std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckOptions& opts);

}  // namespace gemo::cli
