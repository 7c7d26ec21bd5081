#include "seacim/batch.hpp"

#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seacim {

std::vector<MacroResult> run_batch(std::span<const MacroJob> jobs, const MacroConfig& config) {
  std::vector<MacroResult> results(jobs.size());
  std::exception_ptr failure;
  const auto n = static_cast<long>(jobs.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      const auto& job = jobs[i];
      results[i] = run_mac(job.inputs, *job.tile, config, job.layer_range);
    } catch (...) {
#pragma omp critical(seacim_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<MacroResult> run_batch_serial(std::span<const MacroJob> jobs, const MacroConfig& config) {
  std::vector<MacroResult> results;
  results.reserve(jobs.size());
  for (const auto& job : jobs) results.push_back(run_mac(job.inputs, *job.tile, config, job.layer_range));
  return results;
}

std::vector<ExactAccumulator> exact_outputs(std::span<const Fp16> inputs, std::span<const Fp16> weights, int cols) {
  if (cols < 1 || weights.size() != inputs.size() * static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("exact_outputs: weight matrix does not match the input length");
  }
  std::vector<ExactAccumulator> out(static_cast<std::size_t>(cols));
  std::vector<Fp16> column(inputs.size());
  for (int c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < inputs.size(); ++r) column[r] = weights[r * cols + c];
    out[c] = exact_dot(inputs, column);
  }
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace seacim
