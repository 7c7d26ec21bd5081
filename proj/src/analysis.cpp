#include "seacim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace seacim {

namespace {

// Bit-level uniform double in [0, 1); the standard distributions are not
// pinned across library implementations, the engine is.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng() % span);
}

Fp16 make(bool sign, int exponent, int fraction) {
  return Fp16{static_cast<std::uint16_t>((sign ? 0x8000 : 0) | (exponent << kFractionBits) | fraction)};
}

}  // namespace

double ExponentHistogram::group_fraction(ExponentGroup g) const {
  const auto n = nonzero_finite();
  return n == 0 ? 0.0 : static_cast<double>(group_counts[static_cast<int>(g)]) / static_cast<double>(n);
}

ExponentHistogram histogram(std::span<const Fp16> values) {
  ExponentHistogram h;
  h.total = values.size();
  for (auto v : values) {
    if (!v.is_finite()) {
      ++h.nonfinite_count;
    } else if (v.is_zero()) {
      ++h.zero_count;
    } else {
      ++h.bins[v.exponent()];
    }
  }
  for (int e = 0; e < 32; ++e) h.group_counts[static_cast<int>(classify_exponent(e))] += h.bins[e];
  return h;
}

void BimodalSpec::validate() const {
  const double masses[] = {p_zero, p_nearzero, p_nearmax};
  for (double m : masses) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("bimodal spec: masses must lie in [0,1]");
  }
  if (p_center() < -1e-12) throw std::invalid_argument("bimodal spec: masses sum above 1");
  if (!(center_spread > 0.0)) throw std::invalid_argument("bimodal spec: center_spread must be positive");
  if (!std::isfinite(center_mean)) throw std::invalid_argument("bimodal spec: center_mean must be finite");
}

void to_json(nlohmann::json& j, const BimodalSpec& s) {
  j = nlohmann::json{{"p_zero", s.p_zero},           {"p_nearzero", s.p_nearzero},
                     {"center_mean", s.center_mean}, {"center_spread", s.center_spread},
                     {"p_nearmax", s.p_nearmax},     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, BimodalSpec& s) {
  if (!j.is_object()) throw std::invalid_argument("bimodal spec must be a JSON object");
  s.p_zero = j.value("p_zero", s.p_zero);
  s.p_nearzero = j.value("p_nearzero", s.p_nearzero);
  s.center_mean = j.value("center_mean", s.center_mean);
  s.center_spread = j.value("center_spread", s.center_spread);
  s.p_nearmax = j.value("p_nearmax", s.p_nearmax);
  s.seed = j.value("seed", s.seed);
  s.validate();
}

std::vector<Fp16> sample_bimodal(const BimodalSpec& spec, std::size_t n) {
  spec.validate();
  std::array<double, 20> center_cdf{};
  double acc = 0.0;
  for (int e = 4; e <= 23; ++e) {
    const double z = (e - spec.center_mean) / spec.center_spread;
    acc += std::exp(-0.5 * z * z);
    center_cdf[e - 4] = acc;
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Fp16> out;
  out.reserve(n);
  const double c_zero = spec.p_zero;
  const double c_nearzero = c_zero + spec.p_nearzero;
  const double c_nearmax = c_nearzero + spec.p_nearmax;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    if (u < c_zero) {
      out.push_back(Fp16{0});
      continue;
    }
    const bool sign = (rng() >> 63) != 0;
    int exponent;
    if (u < c_nearzero) {
      exponent = uniform_int(rng, 0, 3);
    } else if (u < c_nearmax) {
      exponent = uniform_int(rng, 24, kMaxFiniteExponent);
    } else {
      const double t = uniform01(rng) * acc;
      exponent = 4 + static_cast<int>(std::upper_bound(center_cdf.begin(), center_cdf.end(), t) - center_cdf.begin());
      exponent = std::min(exponent, 23);
    }
    const int fraction = exponent == 0 ? uniform_int(rng, 1, 1023) : uniform_int(rng, 0, 1023);
    out.push_back(make(sign, exponent, fraction));
  }
  return out;
}

std::vector<Fp16> sample_gaussian(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Fp16> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    out.push_back(Fp16{encode(sigma * g)});
  }
  return out;
}

ErrorSummary summarize(std::span<const double> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  ErrorSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(n);
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  s.p99 = v[std::max<std::size_t>(rank, 1) - 1];
  s.max = v.back();
  return s;
}

ErrorReport error_stats(std::span<const Fp16> outputs, std::span<const ExactAccumulator> oracle) {
  if (outputs.size() != oracle.size()) throw std::invalid_argument("error_stats: length mismatch");
  ErrorReport r;
  r.abs_error.reserve(outputs.size());
  r.rel_error.reserve(outputs.size());
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto exact = oracle[i].scaled_sum();
    double abs_err;
    if (!outputs[i].is_finite()) {
      ++r.nonfinite_outputs;
      abs_err = outputs[i].classify() == Fp16Class::NaN ? kNaN : std::numeric_limits<double>::infinity();
    } else {
      const int128 diff = scaled_units(outputs[i]) - exact;
      abs_err = std::ldexp(static_cast<double>(diff < 0 ? -diff : diff), ExactAccumulator::kScaleExponent);
    }
    r.abs_error.push_back(abs_err);
    if (exact == 0) {
      ++r.oracle_zero;
      r.rel_error.push_back(kNaN);
    } else {
      r.rel_error.push_back(abs_err / std::fabs(oracle[i].to_double()));
    }
  }
  r.abs = summarize(r.abs_error);
  r.rel = summarize(r.rel_error);
  return r;
}

nlohmann::json to_json(const ErrorSummary& s) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(std::isnan(x) ? "nan" : "inf"); };
  return nlohmann::json{{"median", num(s.median)}, {"mean", num(s.mean)}, {"p99", num(s.p99)}, {"max", num(s.max)},
                        {"count", s.count}};
}

}  // namespace seacim
