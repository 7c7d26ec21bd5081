#pragma once

// Wordline activation plans and bit-serial input cycle accounting.
//
// In-order activation drives every non-skipped wordline in a single phase;
// dynamic wordline activation (DWA) drives each exponent group in its own
// phase, ordered NearMax -> Center -> NearZero. A phase's significands are
// all aligned to one frame exponent: the global maximum for MEA, the group's
// shared exponent for SEA+DWA, and the largest shared exponent in use for
// SEA with in-order activation.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seacim/alignment.hpp"
#include "seacim/fp16.hpp"
#include "seacim/sea.hpp"

namespace seacim {

enum class AlignmentMode { Mea, Sea };
enum class Activation { InOrder, Dwa };

struct Strategy {
  AlignmentMode alignment = AlignmentMode::Sea;
  Activation activation = Activation::Dwa;
  WidthPolicy width = WidthPolicy::fwi();

  // mea-dwi, mea-fwi, sea-dwa-fwi, sea-dwa-dwi, or the long form
  // <mea|sea>-<inorder|dwa>-<dwi|fwi>.
  static Strategy parse(std::string_view name);
  std::string name() const;
  friend bool operator==(const Strategy&, const Strategy&) = default;
};

enum class DwiSpread { PerCall, PerLayer };

struct ScheduleOptions {
  bool zero_skip = true;       // never activate rows whose input is +-0
  bool skip_nearzero = false;  // drop the whole NearZero group
  DwiSpread dwi_spread = DwiSpread::PerCall;
  int dac_bits = 1;            // input bits driven per cycle
  friend bool operator==(const ScheduleOptions&, const ScheduleOptions&) = default;
};

void to_json(nlohmann::json& j, const ScheduleOptions& o);
void from_json(const nlohmann::json& j, ScheduleOptions& o);

// Exponent range of a whole layer, used when dwi_spread == PerLayer.
struct ExponentRange {
  int min = 0;
  int max = 0;
};

std::optional<ExponentRange> nonzero_exponent_range(std::span<const Fp16> values);

struct Phase {
  std::optional<ExponentGroup> group;  // unset for an in-order phase
  std::vector<int> rows;
  int frame_exponent = 0;
  int m_d = 0;          // DWI frame extension, 0 under FWI
  int lead_bits = 0;    // known-zero MSBs of the DWI frame that are not streamed
  int serial_bits = 0;  // significand bits streamed per row
  int cycles = 0;       // ceil(serial_bits / dac_bits)
};

struct RowPlan {
  bool active = false;
  int phase = -1;
  ExponentGroup group = ExponentGroup::NearZero;
  int shift = 0;
  bool shift_clamped = false;
};

struct Schedule {
  std::vector<Phase> phases;
  std::vector<RowPlan> rows;
  int skipped_rows = 0;
  int comparator_depth = 0;  // MEA comparison tree depth, 0 for SEA
  ScheduleOptions options;

  int input_cycles() const;
  nlohmann::json to_json() const;
};

// Throws std::invalid_argument on an empty or non-finite input list.
Schedule build_schedule(std::span<const Fp16> inputs, const Strategy& strategy, const SeaConfig& sea,
                        const ScheduleOptions& options, std::optional<ExponentRange> layer_range = std::nullopt);

// Conventional baseline: MEA alignment, all rows in one phase.
Schedule schedule_inorder(std::span<const Fp16> inputs, const WidthPolicy& width, const ScheduleOptions& options = {});

// SEA alignment with one phase per non-empty group.
Schedule schedule_dwa(std::span<const Fp16> inputs, const SeaConfig& sea, const WidthPolicy& width,
                      const ScheduleOptions& options = {});

struct CycleReport {
  std::string strategy;
  long input_cycles = 0;
  int phases = 0;
  int skipped_rows = 0;
  int comparator_depth = 0;
  long adc_conversions = 0;  // per-column digitizations, both streams
  long adc_mux_cycles = 0;   // input_cycles scaled by the bitline multiplexer ratio
  std::string baseline;
  std::optional<double> reduction_vs_baseline;
};

// (baseline - candidate) / baseline. Throws on a zero-cycle baseline.
double compare_latency(const CycleReport& candidate, const CycleReport& baseline);
double compare_latency(long candidate_cycles, long baseline_cycles);

}  // namespace seacim
