#include "seacim/crossbar.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "seacim/alignment.hpp"

namespace seacim {

namespace {

void check_geometry(int rows, int logical_cols, int w_s) {
  if (rows < 1 || rows > kMaxRows) throw std::invalid_argument("crossbar: rows must be in [1,128]");
  if (logical_cols < 1) throw std::invalid_argument("crossbar: need at least one logical column");
  if (w_s < 1 || w_s > kMaxWeightBits) throw std::invalid_argument("crossbar: w_s must be in [1,48]");
  if (static_cast<long>(rows) * logical_cols * w_s > kMacroCells) {
    throw std::invalid_argument("crossbar: " + std::to_string(rows) + "x" + std::to_string(logical_cols * w_s) +
                                " cells exceed the 128x128 macro");
  }
}

std::uint64_t truncate_to_width(std::uint32_t sig, int shift, int w_s) {
  const int right = shift + kSignificandBits - w_s;
  if (right >= 64) return 0;
  if (right >= 0) return static_cast<std::uint64_t>(sig) >> right;
  return static_cast<std::uint64_t>(sig) << -right;
}

void write_plane(std::ostream& out, const std::vector<bool>& bits) {
  std::string bytes((bits.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<bool> read_plane(std::istream& in, std::size_t count) {
  std::string bytes((count + 7) / 8, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw std::runtime_error("tile: truncated bit payload");
  std::vector<bool> bits(count);
  for (std::size_t i = 0; i < count; ++i) bits[i] = (static_cast<unsigned char>(bytes[i / 8]) >> (7 - i % 8)) & 1;
  return bits;
}

}  // namespace

PreAlignedColumn prealign_weights(std::span<const Fp16> column, int w_s) {
  if (w_s < 1 || w_s > kMaxWeightBits) throw std::invalid_argument("prealign_weights: w_s must be in [1,48]");
  PreAlignedColumn out;
  for (auto w : column) {
    if (!w.is_finite()) throw std::invalid_argument("prealign_weights: non-finite weight " + to_hex(w));
    if (!w.is_zero()) out.shared_exponent = std::max(out.shared_exponent, w.exponent());
  }
  out.significands.reserve(column.size());
  out.negative.reserve(column.size());
  for (auto w : column) {
    const auto sig = field_significand(w);
    out.significands.push_back(truncate_to_width(sig.magnitude, out.shared_exponent - w.exponent(), w_s));
    out.negative.push_back(sig.negative && sig.magnitude != 0);
  }
  return out;
}

CrossbarTile::CrossbarTile(int rows, int logical_cols, int w_s)
    : rows_(rows), logical_cols_(logical_cols), w_s_(w_s) {
  check_geometry(rows, logical_cols, w_s);
  cells_.assign(static_cast<std::size_t>(logical_cols) * w_s, RowMask{});
  signs_.assign(static_cast<std::size_t>(logical_cols), RowMask{});
  shared_exp_.assign(static_cast<std::size_t>(logical_cols), 0);
}

CrossbarTile CrossbarTile::program(std::span<const Fp16> weights, int rows, int logical_cols, int w_s) {
  CrossbarTile tile(rows, logical_cols, w_s);
  if (weights.size() != static_cast<std::size_t>(rows) * logical_cols) {
    throw std::invalid_argument("crossbar: expected " + std::to_string(rows * logical_cols) + " weights, got " +
                                std::to_string(weights.size()));
  }
  std::vector<Fp16> column(static_cast<std::size_t>(rows));
  for (int c = 0; c < logical_cols; ++c) {
    for (int r = 0; r < rows; ++r) column[r] = weights[static_cast<std::size_t>(r) * logical_cols + c];
    const auto pre = prealign_weights(column, w_s);
    tile.shared_exp_[c] = pre.shared_exponent;
    for (int r = 0; r < rows; ++r) {
      tile.signs_[c][r] = pre.negative[r];
      for (int s = 0; s < w_s; ++s) tile.set_cell(r, c, s, (pre.significands[r] >> (w_s - 1 - s)) & 1);
    }
  }
  return tile;
}

std::uint64_t CrossbarTile::stored_significand(int row, int col) const {
  std::uint64_t v = 0;
  for (int s = 0; s < w_s_; ++s) v = (v << 1) | (cell(row, col, s) ? 1 : 0);
  return v;
}

Dyadic CrossbarTile::stored_weight(int row, int col) const {
  return {Dyadic::Kind::Finite, weight_negative(row, col), stored_significand(row, col),
          shared_exp_[col] - kFp16Bias - (w_s_ - 1), false};
}

void CrossbarTile::save(std::ostream& out) const {
  nlohmann::json header{{"format", "seacim-tile"},
                        {"rows", rows_},
                        {"logical_cols", logical_cols_},
                        {"w_s", w_s_},
                        {"col_shared_exp", shared_exp_}};
  out << header.dump() << '\n';
  std::vector<bool> cells;
  cells.reserve(static_cast<std::size_t>(rows_) * physical_cols());
  for (int r = 0; r < rows_; ++r) {
    for (int p = 0; p < physical_cols(); ++p) cells.push_back(cells_[p][r]);
  }
  write_plane(out, cells);
  std::vector<bool> signs;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < logical_cols_; ++c) signs.push_back(signs_[c][r]);
  }
  write_plane(out, signs);
  if (!out) throw std::runtime_error("tile: write failed");
}

CrossbarTile CrossbarTile::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("tile: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("tile: malformed header: ") + e.what());
  }
  if (header.value("format", "") != "seacim-tile") throw std::runtime_error("tile: not a seacim-tile header");
  CrossbarTile tile(header.at("rows").get<int>(), header.at("logical_cols").get<int>(), header.at("w_s").get<int>());
  const auto exps = header.at("col_shared_exp").get<std::vector<int>>();
  if (exps.size() != static_cast<std::size_t>(tile.logical_cols_)) throw std::runtime_error("tile: col_shared_exp length");
  tile.shared_exp_ = exps;
  const auto cells = read_plane(in, static_cast<std::size_t>(tile.rows_) * tile.physical_cols());
  for (int r = 0; r < tile.rows_; ++r) {
    for (int p = 0; p < tile.physical_cols(); ++p) tile.cells_[p][r] = cells[static_cast<std::size_t>(r) * tile.physical_cols() + p];
  }
  const auto signs = read_plane(in, static_cast<std::size_t>(tile.rows_) * tile.logical_cols_);
  for (int r = 0; r < tile.rows_; ++r) {
    for (int c = 0; c < tile.logical_cols_; ++c) tile.signs_[c][r] = signs[static_cast<std::size_t>(r) * tile.logical_cols_ + c];
  }
  return tile;
}

void bitline_cycle(const CrossbarTile& tile, const RowMask& active, const RowMask& input_bits,
                   const RowMask& input_negative, std::span<StreamSums> out) {
  const RowMask driven = active & input_bits;
  for (int c = 0; c < tile.logical_cols(); ++c) {
    const RowMask flipped = input_negative ^ tile.sign_mask(c);
    const RowMask pos_rows = driven & ~flipped;
    const RowMask neg_rows = driven & flipped;
    for (int s = 0; s < tile.w_s(); ++s) {
      const RowMask& cells = tile.slice_mask(c, s);
      out[c * tile.w_s() + s] = {static_cast<int>((pos_rows & cells).count()),
                                 static_cast<int>((neg_rows & cells).count())};
    }
  }
}

void bitline_cycle_serial(const CrossbarTile& tile, const RowMask& active, const RowMask& input_bits,
                          const RowMask& input_negative, std::span<StreamSums> out) {
  for (int c = 0; c < tile.logical_cols(); ++c) {
    for (int s = 0; s < tile.w_s(); ++s) {
      StreamSums sums;
      for (int r = 0; r < tile.rows(); ++r) {
        if (!active[r] || !input_bits[r] || !tile.cell(r, c, s)) continue;
        if (input_negative[r] != tile.weight_negative(r, c)) {
          ++sums.negative;
        } else {
          ++sums.positive;
        }
      }
      out[c * tile.w_s() + s] = sums;
    }
  }
}

void AdcModel::validate() const {
  if (bits < 1 || bits > 16) throw std::invalid_argument("adc.bits must be in [1,16]");
  if (full_scale < 1) throw std::invalid_argument("adc.full_scale must be >= 1");
}

void to_json(nlohmann::json& j, const AdcModel& m) {
  j = nlohmann::json{{"mode", m.mode == AdcMode::Ideal ? "ideal" : "quantized"},
                     {"bits", m.bits},
                     {"full_scale", m.full_scale}};
}

void from_json(const nlohmann::json& j, AdcModel& m) {
  if (!j.is_object()) throw std::invalid_argument("adc config must be a JSON object");
  m.bits = j.value("bits", m.bits);
  m.full_scale = j.value("full_scale", m.full_scale);
  if (j.contains("mode")) {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "ideal") {
      m.mode = AdcMode::Ideal;
    } else if (mode == "quantized") {
      m.mode = AdcMode::Quantized;
    } else {
      throw std::invalid_argument("unknown adc mode '" + mode + "'");
    }
  }
  m.validate();
}

AdcReading adc_convert(int sum, const AdcModel& model) {
  if (sum < 0) throw std::invalid_argument("adc_convert: negative bitline sum");
  if (model.mode == AdcMode::Ideal) return {sum, false, static_cast<double>(sum)};
  const long levels = model.levels();
  const long fs = model.full_scale;
  long code = (2L * sum * levels + fs) / (2L * fs);
  code = std::min(code, levels);
  return {static_cast<int>(code), sum > model.full_scale, static_cast<double>(code) * fs / levels};
}

}  // namespace seacim
