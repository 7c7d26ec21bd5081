#pragma once

// Aligned integer significands for bit-serial input under the dynamic-width
// (DWI) and fixed-width (FWI) policies.

#include <cstdint>
#include <optional>

#include "seacim/fp16.hpp"
#include "seacim/sea.hpp"

namespace seacim {

enum class InputWidth { Dwi, Fwi };

struct WidthPolicy {
  InputWidth kind = InputWidth::Fwi;
  // Extra DWI width M_d. Unset means "as wide as the largest shift", which
  // never drops a bit.
  std::optional<int> m_d;

  static WidthPolicy fwi() { return {InputWidth::Fwi, std::nullopt}; }
  static WidthPolicy dwi(int m_d) { return {InputWidth::Dwi, m_d}; }
  static WidthPolicy dwi_unbounded() { return {InputWidth::Dwi, std::nullopt}; }

  bool is_dwi() const { return kind == InputWidth::Dwi; }
  friend bool operator==(const WidthPolicy&, const WidthPolicy&) = default;
};

struct Significand {
  std::uint32_t magnitude = 0;
  bool negative = false;
};

// Normals: 1024 + fraction. Subnormals and zero: the fraction alone.
// Throws std::invalid_argument for inf/NaN.
Significand raw_significand(Fp16 v);

// Significand expressed against the biased exponent field, so that
// |v| = magnitude * 2^(exponent() - 25) for every finite v. Equal to
// raw_significand for normals; subnormals carry one extra factor of two
// because their field reads 0 while their scale is that of exponent 1.
Significand field_significand(Fp16 v);

struct Alignment {
  std::uint64_t significand = 0;
  int dropped_bits = 0;  // number of 1-bits shifted out
  int width = kSignificandBits;
};

// FWI: sig >> shift, 11 bits wide.
// DWI: sig * 2^(m_d - shift) in an (11 + m_d)-bit frame; a shift beyond m_d
// truncates the excess exactly like FWI.
// Requires sig < 2^11, shift >= 0, 0 <= m_d <= 31.
Alignment align(std::uint32_t sig, int shift, InputWidth kind, int m_d = 0);

struct AlignedInput {
  std::uint64_t significand = 0;
  bool negative = false;
  int shift_applied = 0;
  GroupFlag group_flag{};
  int dropped_bits = 0;
  bool shift_clamped = false;
  bool active = false;  // scheduled onto a wordline
};

}  // namespace seacim
