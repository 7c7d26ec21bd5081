#pragma once

// Macro datapath: preprocessing (grouping, shifts, alignment), the
// bit-serial crossbar MAC with shift-and-add, the exponent adder and the
// normalizer that rounds the combined group partial sums back to FP16.

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "seacim/alignment.hpp"
#include "seacim/crossbar.hpp"
#include "seacim/fp16.hpp"
#include "seacim/schedule.hpp"
#include "seacim/sea.hpp"

namespace seacim {

struct MacroConfig {
  int rows = kMaxRows;
  AdcModel adc;
  Strategy strategy;
  SeaConfig sea;
  ScheduleOptions schedule;
  int w_s = kSignificandBits;
  int accumulator_width = 64;  // signed bits per partial-sum register
  int mux_ratio = 16;          // bitline multiplexing onto the ADCs

  void validate() const;
};

// The strategy is not part of the JSON form; a run selects it separately.
// The DWI width cap is: {"width": {"m_d": <int|null>}}.
void to_json(nlohmann::json& j, const MacroConfig& c);
void from_json(const nlohmann::json& j, MacroConfig& c);

// One group's partial sum for one logical column.
// value = acc * 2^scale_exponent * dequant_num / dequant_den
struct PartialSumRegister {
  std::optional<ExponentGroup> group;
  int input_exponent = 0;   // frame exponent of the phase
  int m_d = 0;
  int weight_exponent = 0;  // E_w of the column
  int128 acc = 0;
  int scale_exponent = 0;
  long dequant_num = 1;
  long dequant_den = 1;
};

struct Preprocessed {
  std::vector<AlignedInput> inputs;
  Schedule schedule;
  int clamped_shifts = 0;
  long dropped_bits = 0;
};

// Throws std::invalid_argument when |inputs| > rows or an input is not finite.
Preprocessed preprocess(std::span<const Fp16> inputs, const MacroConfig& config,
                        std::optional<ExponentRange> layer_range = std::nullopt);

// Power-of-two weight of one accumulator LSB for an FWI frame:
// (e_g - 15) + (e_w - 15) - 10 - (w_s - 1). DWI frames subtract m_d.
constexpr int exponent_add(int e_g, int e_w, int w_s = kSignificandBits) {
  return (e_g - kFp16Bias) + (e_w - kFp16Bias) - kFractionBits - (w_s - 1);
}

// Exact sum of up to three partials, rounded once to nearest-even.
// All partials must share the same dequantization factor.
Fp16 normalize(std::span<const PartialSumRegister> partials);

struct MacroResult {
  std::vector<Fp16> outputs;  // one per logical column
  CycleReport cycles;
  long clip_events = 0;
  bool accumulator_overflow = false;
  long dropped_bits = 0;
  int clamped_shifts = 0;
  std::vector<std::vector<PartialSumRegister>> partials;  // [column][phase]
};

// Requires |inputs| == tile.rows().
MacroResult run_mac(std::span<const Fp16> inputs, const CrossbarTile& tile, const MacroConfig& config,
                    std::optional<ExponentRange> layer_range = std::nullopt);

}  // namespace seacim
