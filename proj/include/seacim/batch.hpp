#pragma once

// Many independent macro evaluations. run_batch spreads jobs over OpenMP
// threads; run_batch_serial is the single-threaded reference that tests
// compare it against. Results are indexed like the jobs in both.

#include <optional>
#include <span>
#include <vector>

#include "seacim/crossbar.hpp"
#include "seacim/pipeline.hpp"

namespace seacim {

struct MacroJob {
  std::span<const Fp16> inputs;
  const CrossbarTile* tile = nullptr;
  std::optional<ExponentRange> layer_range;
};

std::vector<MacroResult> run_batch(std::span<const MacroJob> jobs, const MacroConfig& config);
std::vector<MacroResult> run_batch_serial(std::span<const MacroJob> jobs, const MacroConfig& config);

// Exact reference outputs for one job: encode(exact_dot) per logical column
// against the supplied original weights (row-major [rows x cols]).
std::vector<ExactAccumulator> exact_outputs(std::span<const Fp16> inputs, std::span<const Fp16> weights, int cols);

int max_threads();

}  // namespace seacim
