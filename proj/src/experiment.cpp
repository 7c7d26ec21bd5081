#include "seacim/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "seacim/batch.hpp"

namespace seacim {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

}  // namespace

Workload synthetic_workload(const BimodalSpec& spec, int calls, int rows, std::string name) {
  if (calls < 0 || rows < 1) throw std::invalid_argument("synthetic_workload: bad call/row count");
  const auto values = sample_bimodal(spec, static_cast<std::size_t>(calls) * rows);
  Workload w;
  w.name = std::move(name);
  for (int c = 0; c < calls; ++c) {
    w.calls.emplace_back(values.begin() + static_cast<long>(c) * rows, values.begin() + static_cast<long>(c + 1) * rows);
  }
  w.layer_range = nonzero_exponent_range(values);
  return w;
}

Workload tensor_workload(const Tensor& tensor, int rows, std::string name) {
  if (rows < 1) throw std::invalid_argument("tensor_workload: rows must be positive");
  Workload w;
  w.name = std::move(name);
  for (std::size_t i = 0; i < tensor.values.size(); i += rows) {
    std::vector<Fp16> call(static_cast<std::size_t>(rows), Fp16{0});
    const std::size_t n = std::min<std::size_t>(rows, tensor.values.size() - i);
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = tensor.values[i + k];
      if (!v.is_finite()) throw DataError(w.name + ": non-finite value " + to_hex(v) + " at index " + std::to_string(i + k));
      call[k] = v;
    }
    w.calls.push_back(std::move(call));
  }
  w.layer_range = nonzero_exponent_range(tensor.values);
  return w;
}

WeightSet make_weights(std::vector<Fp16> values, int rows, int cols, int w_s) {
  WeightSet ws;
  ws.tile = CrossbarTile::program(values, rows, cols, w_s);
  ws.values = std::move(values);
  ws.rows = rows;
  ws.cols = cols;
  return ws;
}

WeightSet gaussian_weights(int rows, int cols, int w_s, double sigma, std::uint64_t seed) {
  return make_weights(sample_gaussian(static_cast<std::size_t>(rows) * cols, sigma, seed), rows, cols, w_s);
}

std::vector<ExactAccumulator> workload_oracle(const Workload& work, const WeightSet& weights) {
  std::vector<ExactAccumulator> out;
  out.reserve(work.calls.size() * weights.cols);
  for (const auto& call : work.calls) {
    const auto col = exact_outputs(call, weights.values, weights.cols);
    out.insert(out.end(), col.begin(), col.end());
  }
  return out;
}

StrategyRun run_strategy(const Workload& work, const WeightSet& weights, MacroConfig config, const Strategy& strategy,
                         const std::vector<ExactAccumulator>& oracle) {
  const auto md = config.strategy.width.m_d;
  config.strategy = strategy;
  if (strategy.width.is_dwi()) config.strategy.width.m_d = md;
  config.rows = weights.rows;
  config.w_s = weights.tile.w_s();
  config.validate();

  std::vector<MacroJob> jobs;
  jobs.reserve(work.calls.size());
  for (const auto& call : work.calls) jobs.push_back({call, &weights.tile, work.layer_range});
  const auto results = run_batch(jobs, config);

  StrategyRun run;
  run.strategy = config.strategy.name();
  for (const auto& r : results) {
    run.call_cycles.push_back(r.cycles.input_cycles);
    run.total_cycles += r.cycles.input_cycles;
    run.clip_events += r.clip_events;
    run.dropped_bits += r.dropped_bits;
    run.clamped_shifts += r.clamped_shifts;
    run.accumulator_overflow = run.accumulator_overflow || r.accumulator_overflow;
    run.outputs.insert(run.outputs.end(), r.outputs.begin(), r.outputs.end());
  }
  run.errors = error_stats(run.outputs, oracle);
  run.errors.dropped_bits = run.dropped_bits;

  const auto cols = static_cast<std::size_t>(weights.cols);
  for (std::size_t c = 0; c < cols; ++c) {
    std::vector<double> a;
    std::vector<double> rel;
    for (std::size_t i = c; i < run.errors.abs_error.size(); i += cols) {
      a.push_back(run.errors.abs_error[i]);
      rel.push_back(run.errors.rel_error[i]);
    }
    run.column_abs.push_back(summarize(a));
    run.column_rel.push_back(summarize(rel));
  }
  return run;
}

std::optional<double> mean_reduction(const StrategyRun& candidate, const StrategyRun& baseline) {
  if (candidate.call_cycles.size() != baseline.call_cycles.size()) {
    throw std::invalid_argument("mean_reduction: runs cover different workloads");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < baseline.call_cycles.size(); ++i) {
    if (baseline.call_cycles[i] == 0) continue;
    sum += compare_latency(candidate.call_cycles[i], baseline.call_cycles[i]);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

nlohmann::json to_json(const StrategyRun& run, const std::string& tensor, const std::optional<double>& reduction,
                       const std::string& baseline) {
  auto columns = nlohmann::json::array();
  for (std::size_t c = 0; c < run.column_abs.size(); ++c) {
    columns.push_back({{"column", c}, {"abs", to_json(run.column_abs[c])}, {"rel", to_json(run.column_rel[c])}});
  }
  return nlohmann::json{{"tensor", tensor},
                        {"strategy", run.strategy},
                        {"baseline", baseline},
                        {"calls", run.call_cycles.size()},
                        {"cycles", run.total_cycles},
                        {"reduction_vs_baseline", reduction ? nlohmann::json(*reduction) : nlohmann::json()},
                        {"clip_events", run.clip_events},
                        {"dropped_bits", run.dropped_bits},
                        {"clamped_shifts", run.clamped_shifts},
                        {"accumulator_overflow", run.accumulator_overflow},
                        {"error",
                         {{"abs", to_json(run.errors.abs)},
                          {"rel", to_json(run.errors.rel)},
                          {"oracle_zero", run.errors.oracle_zero},
                          {"nonfinite_outputs", run.errors.nonfinite_outputs}}},
                        {"per_column", std::move(columns)}};
}

std::string csv_header() {
  return "tensor,strategy,calls,input_cycles,mean_cycles_per_call,reduction_vs_baseline,clip_events,dropped_bits,"
         "abs_err_median,abs_err_mean,abs_err_p99,rel_err_median,rel_err_mean,rel_err_p99,oracle_zero";
}

std::string csv_row(const StrategyRun& run, const std::string& tensor, const std::optional<double>& reduction) {
  const double calls = static_cast<double>(run.call_cycles.size());
  const double per_call = calls > 0 ? static_cast<double>(run.total_cycles) / calls : 0.0;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", tensor, run.strategy, run.call_cycles.size(),
                     run.total_cycles, num(per_call), reduction ? num(*reduction) : "", run.clip_events,
                     run.dropped_bits, num(run.errors.abs.median), num(run.errors.abs.mean), num(run.errors.abs.p99),
                     num(run.errors.rel.median), num(run.errors.rel.mean), num(run.errors.rel.p99),
                     run.errors.oracle_zero);
}

}  // namespace seacim
