#pragma once

// Exponent-distribution statistics, synthetic activation/weight generators,
// and error metrics against the exact oracle.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "seacim/fp16.hpp"
#include "seacim/sea.hpp"

namespace seacim {

struct ExponentHistogram {
  std::array<std::uint64_t, 32> bins{};  // finite non-zero values by biased exponent
  std::uint64_t zero_count = 0;
  std::uint64_t nonfinite_count = 0;     // diagnostics only
  std::uint64_t total = 0;
  std::array<std::uint64_t, 3> group_counts{};

  std::uint64_t nonzero_finite() const { return total - zero_count - nonfinite_count; }
  // Share of the finite non-zero values falling in a group; 0 when there are none.
  double group_fraction(ExponentGroup g) const;
};

ExponentHistogram histogram(std::span<const Fp16> values);

// Mixture over exponent regions. The center mass is whatever is left after
// the other three and is spread over [4,23] with weights
// exp(-(e - center_mean)^2 / (2 center_spread^2)).
struct BimodalSpec {
  double p_zero = 0.35;
  double p_nearzero = 0.10;
  double center_mean = 15.0;
  double center_spread = 3.0;
  double p_nearmax = 0.02;
  std::uint64_t seed = 42;

  double p_center() const { return 1.0 - p_zero - p_nearzero - p_nearmax; }
  void validate() const;
};

void to_json(nlohmann::json& j, const BimodalSpec& s);
void from_json(const nlohmann::json& j, BimodalSpec& s);

// Deterministic for a fixed spec (seed included). NearZero draws exponents
// uniformly from [0,3] (exponent 0 with a non-zero fraction), NearMax from
// [24,30]; fractions are uniform and signs are fair coin flips.
std::vector<Fp16> sample_bimodal(const BimodalSpec& spec, std::size_t n);

// Zero-mean Gaussian values rounded to FP16, used as synthetic weights.
std::vector<Fp16> sample_gaussian(std::size_t n, double sigma, std::uint64_t seed);

struct ErrorSummary {
  double median = 0.0;
  double mean = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct ErrorReport {
  std::vector<double> abs_error;
  std::vector<double> rel_error;  // NaN where the oracle is exactly zero
  ErrorSummary abs;
  ErrorSummary rel;               // over non-zero oracle entries only
  std::size_t oracle_zero = 0;
  std::size_t nonfinite_outputs = 0;
  long dropped_bits = 0;
};

// Throws std::invalid_argument on a length mismatch.
ErrorReport error_stats(std::span<const Fp16> outputs, std::span<const ExactAccumulator> oracle);

// Nearest-rank summary; NaNs are ignored.
ErrorSummary summarize(std::span<const double> values);

nlohmann::json to_json(const ErrorSummary& s);

}  // namespace seacim
