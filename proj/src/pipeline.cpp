#include "seacim/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace seacim {

namespace {

using Wide = boost::multiprecision::checked_int512_t;

uint128 magnitude(int128 v) { return v < 0 ? -static_cast<uint128>(v) : static_cast<uint128>(v); }

bool exceeds_width(int128 acc, int width) {
  if (width >= 128) return false;
  return magnitude(acc) >= (uint128{1} << (width - 1));
}

// |v| * 2^shift with the sign of v; checked types refuse shifts of negatives.
Wide to_wide(int128 v, int shift) {
  const uint128 m = magnitude(v);
  Wide w = static_cast<std::uint64_t>(m >> 64);
  w <<= 64;
  w += static_cast<std::uint64_t>(m);
  w <<= shift;
  return v < 0 ? Wide(-w) : w;
}

uint128 to_u128(const Wide& w) {
  const auto hi = static_cast<std::uint64_t>(w >> 64);
  const auto lo = static_cast<std::uint64_t>(w & Wide(~std::uint64_t{0}));
  return (static_cast<uint128>(hi) << 64) | lo;
}

}  // namespace

void MacroConfig::validate() const {
  if (rows < 1 || rows > kMaxRows) throw std::invalid_argument("rows must be in [1,128]");
  if (w_s < 1 || w_s > kMaxWeightBits) throw std::invalid_argument("w_s must be in [1,48]");
  if (accumulator_width < 8 || accumulator_width > 128) throw std::invalid_argument("accumulator_width must be in [8,128]");
  if (mux_ratio < 1) throw std::invalid_argument("mux_ratio must be >= 1");
  if (strategy.width.m_d && (*strategy.width.m_d < 0 || *strategy.width.m_d > 31)) {
    throw std::invalid_argument("width.m_d must be in [0,31]");
  }
  adc.validate();
  sea.validate();
}

void to_json(nlohmann::json& j, const MacroConfig& c) {
  j = nlohmann::json{{"rows", c.rows},
                     {"w_s", c.w_s},
                     {"accumulator_width", c.accumulator_width},
                     {"mux_ratio", c.mux_ratio},
                     {"adc", c.adc},
                     {"sea", c.sea},
                     {"schedule", c.schedule},
                     {"width", {{"m_d", c.strategy.width.m_d ? nlohmann::json(*c.strategy.width.m_d) : nlohmann::json()}}}};
}

void from_json(const nlohmann::json& j, MacroConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("macro config must be a JSON object");
  c.rows = j.value("rows", c.rows);
  c.w_s = j.value("w_s", c.w_s);
  c.accumulator_width = j.value("accumulator_width", c.accumulator_width);
  c.mux_ratio = j.value("mux_ratio", c.mux_ratio);
  if (j.contains("adc")) c.adc = j.at("adc").get<AdcModel>();
  if (j.contains("sea")) c.sea = j.at("sea").get<SeaConfig>();
  if (j.contains("schedule")) c.schedule = j.at("schedule").get<ScheduleOptions>();
  if (j.contains("width") && j.at("width").contains("m_d")) {
    const auto& m = j.at("width").at("m_d");
    c.strategy.width.m_d = m.is_null() ? std::nullopt : std::optional<int>(m.get<int>());
  }
  c.validate();
}

Preprocessed preprocess(std::span<const Fp16> inputs, const MacroConfig& config, std::optional<ExponentRange> layer_range) {
  if (inputs.size() > static_cast<std::size_t>(config.rows)) {
    throw std::invalid_argument("preprocess: " + std::to_string(inputs.size()) + " inputs exceed " +
                                std::to_string(config.rows) + " rows");
  }
  Preprocessed out;
  out.schedule = build_schedule(inputs, config.strategy, config.sea, config.schedule, layer_range);
  out.inputs.resize(inputs.size());
  const auto kind = config.strategy.width.kind;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& plan = out.schedule.rows[i];
    auto& a = out.inputs[i];
    a.group_flag = to_flag(plan.group);
    a.active = plan.active;
    if (!plan.active) continue;
    const auto sig = field_significand(inputs[i]);
    const auto& phase = out.schedule.phases[plan.phase];
    const auto al = align(sig.magnitude, plan.shift, kind, phase.m_d);
    a.significand = al.significand;
    a.negative = sig.negative;
    a.shift_applied = plan.shift;
    a.dropped_bits = al.dropped_bits;
    a.shift_clamped = plan.shift_clamped;
    out.dropped_bits += al.dropped_bits;
    out.clamped_shifts += plan.shift_clamped ? 1 : 0;
  }
  return out;
}

Fp16 normalize(std::span<const PartialSumRegister> partials) {
  if (partials.size() > 3) throw std::invalid_argument("normalize: more than three group partials");
  std::optional<int> base;
  for (const auto& p : partials) {
    if (p.dequant_num != partials.front().dequant_num || p.dequant_den != partials.front().dequant_den) {
      throw std::invalid_argument("normalize: partials disagree on the ADC dequantization factor");
    }
    if (p.acc != 0) base = base ? std::min(*base, p.scale_exponent) : p.scale_exponent;
  }
  if (!base) return Fp16{0};

  Wide total = 0;
  for (const auto& p : partials) {
    if (p.acc != 0) total += to_wide(p.acc, p.scale_exponent - *base);
  }
  if (total == 0) return Fp16{0};

  const bool negative = total < 0;
  Wide mag = negative ? Wide(-total) : total;
  mag *= partials.front().dequant_num;
  const long den = partials.front().dequant_den;

  constexpr int kKeep = 120;
  int exponent = *base;
  bool sticky = false;
  const int bits = static_cast<int>(boost::multiprecision::msb(mag)) + 1;
  if (bits > kKeep) {
    const int drop = bits - kKeep;
    sticky = (mag & ((Wide(1) << drop) - 1)) != 0;
    mag >>= drop;
    exponent += drop;
  } else if (den != 1) {
    mag <<= kKeep - bits;
    exponent -= kKeep - bits;
  }
  uint128 m = to_u128(mag);
  if (den != 1) {
    const auto d = static_cast<uint128>(den);
    sticky = sticky || (m % d) != 0;
    m /= d;
  }
  return Fp16{encode(Dyadic{Dyadic::Kind::Finite, negative, m, exponent, sticky})};
}

MacroResult run_mac(std::span<const Fp16> inputs, const CrossbarTile& tile, const MacroConfig& config,
                    std::optional<ExponentRange> layer_range) {
  if (inputs.size() != static_cast<std::size_t>(tile.rows())) {
    throw std::invalid_argument("run_mac: " + std::to_string(inputs.size()) + " inputs for a " +
                                std::to_string(tile.rows()) + "-row tile");
  }
  const auto pre = preprocess(inputs, config, layer_range);
  const int cols = tile.logical_cols();
  const int ws = tile.w_s();
  const int dac = config.schedule.dac_bits;
  const bool quantized = config.adc.mode == AdcMode::Quantized;

  MacroResult result;
  result.dropped_bits = pre.dropped_bits;
  result.clamped_shifts = pre.clamped_shifts;
  result.partials.assign(static_cast<std::size_t>(cols), {});

  std::vector<std::vector<StreamSums>> plane_sums(static_cast<std::size_t>(dac),
                                                  std::vector<StreamSums>(static_cast<std::size_t>(tile.physical_cols())));
  std::vector<int128> acc(static_cast<std::size_t>(cols));

  for (const auto& phase : pre.schedule.phases) {
    RowMask active;
    RowMask negative;
    std::vector<RowMask> planes(static_cast<std::size_t>(phase.serial_bits));
    for (int r : phase.rows) {
      active.set(r);
      negative[r] = pre.inputs[r].negative;
      for (auto sig = pre.inputs[r].significand; sig != 0; sig &= sig - 1) planes[std::countr_zero(sig)].set(r);
    }
    std::fill(acc.begin(), acc.end(), 0);

    // MSB-first: digit k covers significand bits [k*dac, (k+1)*dac).
    for (int k = phase.cycles - 1; k >= 0; --k) {
      int used = 0;
      for (int j = 0; j < dac && k * dac + j < phase.serial_bits; ++j, ++used) {
        bitline_cycle(tile, active, planes[k * dac + j], negative, plane_sums[j]);
      }
      for (int c = 0; c < cols; ++c) {
        for (int s = 0; s < ws; ++s) {
          const int pc = c * ws + s;
          int pos = 0;
          int neg = 0;
          for (int j = 0; j < used; ++j) {
            pos += plane_sums[j][pc].positive << j;
            neg += plane_sums[j][pc].negative << j;
          }
          int pos_code = pos;
          int neg_code = neg;
          if (quantized) {
            const auto rp = adc_convert(pos, config.adc);
            const auto rn = adc_convert(neg, config.adc);
            pos_code = rp.code;
            neg_code = rn.code;
            result.clip_events += (rp.clipped ? 1 : 0) + (rn.clipped ? 1 : 0);
          }
          if (pos_code == neg_code) continue;
          acc[c] += static_cast<int128>(pos_code - neg_code) << (k * dac + (ws - 1 - s));
          if (exceeds_width(acc[c], config.accumulator_width)) result.accumulator_overflow = true;
        }
      }
    }
    for (int c = 0; c < cols; ++c) {
      PartialSumRegister reg;
      reg.group = phase.group;
      reg.input_exponent = phase.frame_exponent;
      reg.m_d = phase.m_d;
      reg.weight_exponent = tile.col_shared_exp(c);
      reg.acc = acc[c];
      reg.scale_exponent = exponent_add(phase.frame_exponent, reg.weight_exponent, ws) - phase.m_d;
      if (quantized) {
        reg.dequant_num = config.adc.full_scale;
        reg.dequant_den = config.adc.levels();
      }
      result.partials[c].push_back(reg);
    }
  }

  result.outputs.reserve(static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c) result.outputs.push_back(normalize(result.partials[c]));

  auto& rep = result.cycles;
  rep.strategy = config.strategy.name();
  rep.input_cycles = pre.schedule.input_cycles();
  rep.phases = static_cast<int>(pre.schedule.phases.size());
  rep.skipped_rows = pre.schedule.skipped_rows;
  rep.comparator_depth = pre.schedule.comparator_depth;
  rep.adc_conversions = rep.input_cycles * tile.physical_cols() * 2L;
  rep.adc_mux_cycles = rep.input_cycles * static_cast<long>(config.mux_ratio);
  return result;
}

}  // namespace seacim
