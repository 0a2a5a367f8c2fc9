// SPDX-License-Identifier: Apache-2.0
// Serial vs OpenMP timings for the matmul kernels and for fold fan-out in
// cross-validation. Also confirms both paths produce identical results.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "gemo/eval/eval.hpp"
#include "gemo/numerics/kernels.hpp"

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

gemo::Matrix random(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> normal;
  gemo::Matrix m(r, c);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", omp_get_max_threads());
  std::printf("%-14s %-10s %12s %12s %8s %s\n", "kernel", "size", "serial ms", "parallel ms", "speedup", "identical");
  std::mt19937_64 rng(1);
  for (std::size_t n : {32, 128, 256, 512}) {
    const gemo::Matrix a = random(rng, n, n), b = random(rng, n, n);
    const int reps = n <= 128 ? 50 : 3;
    struct Kernel {
      const char* name;
      gemo::Matrix (*serial)(const gemo::Matrix&, const gemo::Matrix&);
      gemo::Matrix (*parallel)(const gemo::Matrix&, const gemo::Matrix&);
    };
    for (const Kernel& k : {Kernel{"matmul", gemo::serial::matmul, gemo::parallel::matmul},
                            Kernel{"matmul_nt", gemo::serial::matmul_nt, gemo::parallel::matmul_nt},
                            Kernel{"matmul_tn", gemo::serial::matmul_tn, gemo::parallel::matmul_tn}}) {
      const double ts = seconds([&] { (void)k.serial(a, b); }, reps);
      const double tp = seconds([&] { (void)k.parallel(a, b); }, reps);
      const bool same = k.serial(a, b) == k.parallel(a, b);
      std::printf("%-14s %-10s %12.3f %12.3f %8.2f %s\n", k.name, (std::to_string(n) + "^2").c_str(), 1e3 * ts,
                  1e3 * tp, ts / tp, same ? "yes" : "NO");
    }
  }

  gemo::SynthConfig s;
  s.n_samples = 500;
  const auto data = gemo::generate_synthetic(s);
  gemo::TrainConfig cfg;
  cfg.epochs = 10;
  gemo::EvalReport serial_report, parallel_report;
  const double ts = seconds([&] { serial_report = gemo::run_cross_validation(cfg, data.dataset, data.prompts, {5, false}); }, 1);
  const double tp = seconds([&] { parallel_report = gemo::run_cross_validation(cfg, data.dataset, data.prompts, {5, true}); }, 1);
  const bool same = gemo::report_to_json(serial_report).dump() == gemo::report_to_json(parallel_report).dump();
  std::printf("\n%-14s %-10s %12.1f %12.1f %8.2f %s\n", "xval 5-fold", "n=500", 1e3 * ts, 1e3 * tp, ts / tp,
              same ? "yes" : "NO");
  return same ? 0 : 1;
}
