#pragma once

// Strategy comparisons over a workload of macro calls: cycle totals,
// reductions against a baseline and error statistics against the exact
// oracle. Shared by the command-line tool and the acceptance suite.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seacim/analysis.hpp"
#include "seacim/crossbar.hpp"
#include "seacim/ingest.hpp"
#include "seacim/pipeline.hpp"

namespace seacim {

// Inputs split into macro calls of exactly `rows` values each.
struct Workload {
  std::string name;
  std::vector<std::vector<Fp16>> calls;
  std::optional<ExponentRange> layer_range;
};

Workload synthetic_workload(const BimodalSpec& spec, int calls, int rows, std::string name = "synthetic");
// The last call is zero-padded up to `rows`.
Workload tensor_workload(const Tensor& tensor, int rows, std::string name);

// Weights shared by every call, row-major [rows x cols], with the tile
// programmed from them.
struct WeightSet {
  std::vector<Fp16> values;
  int rows = 0;
  int cols = 0;
  CrossbarTile tile;
};

WeightSet make_weights(std::vector<Fp16> values, int rows, int cols, int w_s);
WeightSet gaussian_weights(int rows, int cols, int w_s, double sigma, std::uint64_t seed);

struct StrategyRun {
  std::string strategy;
  std::vector<long> call_cycles;
  long total_cycles = 0;
  long clip_events = 0;
  long dropped_bits = 0;
  long clamped_shifts = 0;
  bool accumulator_overflow = false;
  std::vector<Fp16> outputs;  // [call][col] flattened
  ErrorReport errors;
  std::vector<ErrorSummary> column_abs;  // per logical column, across calls
  std::vector<ErrorSummary> column_rel;
};

// Oracle values for every (call, column), flattened like StrategyRun::outputs.
std::vector<ExactAccumulator> workload_oracle(const Workload& work, const WeightSet& weights);

StrategyRun run_strategy(const Workload& work, const WeightSet& weights, MacroConfig config, const Strategy& strategy,
                         const std::vector<ExactAccumulator>& oracle);

// Mean of per-call reductions over calls where the baseline spends cycles;
// nullopt when none does.
std::optional<double> mean_reduction(const StrategyRun& candidate, const StrategyRun& baseline);

nlohmann::json to_json(const StrategyRun& run, const std::string& tensor, const std::optional<double>& reduction,
                       const std::string& baseline);

std::string csv_header();
std::string csv_row(const StrategyRun& run, const std::string& tensor, const std::optional<double>& reduction);

}  // namespace seacim
