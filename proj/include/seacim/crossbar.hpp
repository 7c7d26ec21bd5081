#pragma once

// Functional model of the analog crossbar: offline weight pre-alignment,
// one bit per cell with bit-sliced weight significands, per-cycle bitline
// summation split into positive and negative streams, and the column ADC.

#include <bitset>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "seacim/fp16.hpp"

namespace seacim {

inline constexpr int kMaxRows = 128;
inline constexpr int kMacroCells = 128 * 128;
inline constexpr int kMaxWeightBits = 48;

using RowMask = std::bitset<kMaxRows>;

struct PreAlignedColumn {
  int shared_exponent = 0;                  // E_w, max field exponent of the column
  std::vector<std::uint64_t> significands;  // w_s-bit truncated values
  std::vector<bool> negative;
};

// Each weight's field significand is shifted right by (E_w - e) and kept at
// w_s bits, so weight ~= stored * 2^(E_w - 15 - (w_s - 1)). Zero weights
// store 0; an all-zero column gets E_w = 0.
PreAlignedColumn prealign_weights(std::span<const Fp16> column, int w_s);

class CrossbarTile {
 public:
  CrossbarTile() = default;
  CrossbarTile(int rows, int logical_cols, int w_s);

  // weights: row-major [rows x logical_cols]. Throws on non-finite weights
  // or a geometry that exceeds the 128x128 macro.
  static CrossbarTile program(std::span<const Fp16> weights, int rows, int logical_cols, int w_s);

  int rows() const { return rows_; }
  int logical_cols() const { return logical_cols_; }
  int w_s() const { return w_s_; }
  int physical_cols() const { return logical_cols_ * w_s_; }

  int col_shared_exp(int col) const { return shared_exp_[col]; }

  // Slice 0 is the MSB of the stored significand.
  bool cell(int row, int col, int slice) const { return cells_[col * w_s_ + slice][row]; }
  bool weight_negative(int row, int col) const { return signs_[col][row]; }
  std::uint64_t stored_significand(int row, int col) const;
  // Exact value represented by the stored cells.
  Dyadic stored_weight(int row, int col) const;

  const RowMask& slice_mask(int col, int slice) const { return cells_[col * w_s_ + slice]; }
  const RowMask& sign_mask(int col) const { return signs_[col]; }

  // JSON header line, then the cell plane (rows x physical_cols) and the
  // sign plane (rows x logical_cols), each row-major, MSB-first packed.
  void save(std::ostream& out) const;
  static CrossbarTile load(std::istream& in);

  friend bool operator==(const CrossbarTile&, const CrossbarTile&) = default;

 private:
  void set_cell(int row, int col, int slice, bool v) { cells_[col * w_s_ + slice][row] = v; }

  int rows_ = 0;
  int logical_cols_ = 0;
  int w_s_ = 0;
  std::vector<RowMask> cells_;  // indexed by physical column
  std::vector<RowMask> signs_;  // indexed by logical column
  std::vector<int> shared_exp_;
};

struct StreamSums {
  int positive = 0;  // rows where input sign == weight sign
  int negative = 0;
  friend bool operator==(StreamSums, StreamSums) = default;
};

// One bit-serial cycle: for every physical column, sum input_bit * cell_bit
// over active rows, split by input sign XOR weight sign. `out` must hold
// physical_cols() entries.
void bitline_cycle(const CrossbarTile& tile, const RowMask& active, const RowMask& input_bits,
                   const RowMask& input_negative, std::span<StreamSums> out);

// Row-by-row loop over the same contract; kept as the reference kernel.
void bitline_cycle_serial(const CrossbarTile& tile, const RowMask& active, const RowMask& input_bits,
                          const RowMask& input_negative, std::span<StreamSums> out);

enum class AdcMode { Ideal, Quantized };

struct AdcModel {
  int bits = 6;
  int full_scale = kMaxRows;
  AdcMode mode = AdcMode::Ideal;

  int levels() const { return (1 << bits) - 1; }
  void validate() const;
  friend bool operator==(const AdcModel&, const AdcModel&) = default;
};

void to_json(nlohmann::json& j, const AdcModel& m);
void from_json(const nlohmann::json& j, AdcModel& m);

struct AdcReading {
  int code = 0;
  bool clipped = false;
  double value = 0.0;  // code * full_scale / levels in Quantized mode
};

// Ideal: identity. Quantized: code = round(sum * levels / full_scale),
// clamped to [0, levels]; sums above full_scale report a clip.
AdcReading adc_convert(int sum, const AdcModel& model);

}  // namespace seacim
