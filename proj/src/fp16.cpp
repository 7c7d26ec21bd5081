#include "seacim/fp16.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace seacim {

namespace {

int bit_length(uint128 x) {
  const auto hi = static_cast<std::uint64_t>(x >> 64);
  if (hi != 0) return 128 - std::countl_zero(hi);
  return 64 - std::countl_zero(static_cast<std::uint64_t>(x));
}

// Significand with the hidden bit, and the exponent of its LSB.
struct Unpacked {
  std::uint32_t significand;
  int lsb_exponent;
};

Unpacked unpack(Fp16 v) {
  const int e = v.exponent();
  if (e == 0) return {static_cast<std::uint32_t>(v.fraction()), 1 - kFp16Bias - kFractionBits};
  return {static_cast<std::uint32_t>(1024 + v.fraction()), e - kFp16Bias - kFractionBits};
}

}  // namespace

const char* to_string(Fp16Class cls) {
  switch (cls) {
    case Fp16Class::Zero: return "zero";
    case Fp16Class::Subnormal: return "subnormal";
    case Fp16Class::Normal: return "normal";
    case Fp16Class::Infinity: return "inf";
    case Fp16Class::NaN: return "nan";
  }
  return "?";
}

Dyadic exact_value(Fp16 v) {
  switch (v.classify()) {
    case Fp16Class::NaN: return Dyadic::nan();
    case Fp16Class::Infinity: return Dyadic::infinity(v.sign());
    default: break;
  }
  const auto u = unpack(v);
  return {Dyadic::Kind::Finite, v.sign(), u.significand, u.lsb_exponent, false};
}

std::uint16_t encode(const Dyadic& value) {
  const std::uint16_t sign_bit = value.negative ? 0x8000 : 0;
  if (value.kind == Dyadic::Kind::NaN) return kCanonicalNaN;
  if (value.kind == Dyadic::Kind::Infinite) return sign_bit | 0x7C00;
  if (value.magnitude == 0) return sign_bit;

  const int top = bit_length(value.magnitude) - 1 + value.exponent;
  // Exponent of the result LSB: 2^-24 in the subnormal range, else 10 below the leading bit.
  int lsb = (top < 1 - kFp16Bias ? 1 - kFp16Bias : top) - kFractionBits;
  const int shift = lsb - value.exponent;

  uint128 rounded;
  if (shift <= 0) {
    rounded = value.magnitude << -shift;
  } else if (shift > 128) {
    rounded = 0;
  } else {
    const uint128 kept = shift == 128 ? 0 : value.magnitude >> shift;
    const uint128 rem = shift == 128 ? value.magnitude : value.magnitude & ((uint128{1} << shift) - 1);
    const uint128 half = uint128{1} << (shift - 1);
    const bool up = rem > half || (rem == half && (value.sticky || (kept & 1) != 0));
    rounded = kept + (up ? 1 : 0);
  }

  if (rounded == 2048) {
    rounded = 1024;
    ++lsb;
  }
  if (rounded == 0) return sign_bit;
  if (rounded < 1024) return sign_bit | static_cast<std::uint16_t>(rounded);

  const int biased = lsb + kFp16Bias + kFractionBits;
  if (biased > kMaxFiniteExponent) return sign_bit | 0x7C00;
  return sign_bit | static_cast<std::uint16_t>((biased << kFractionBits) | static_cast<int>(rounded - 1024));
}

std::uint16_t encode(double value) {
  if (std::isnan(value)) return kCanonicalNaN;
  if (std::isinf(value)) return encode(Dyadic::infinity(std::signbit(value)));
  int exp = 0;
  const double m = std::frexp(std::fabs(value), &exp);
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
  return encode(Dyadic{Dyadic::Kind::Finite, std::signbit(value), mantissa, exp - 53, false});
}

double to_double(Fp16 v) {
  switch (v.classify()) {
    case Fp16Class::NaN: return std::nan("");
    case Fp16Class::Infinity: return v.sign() ? -HUGE_VAL : HUGE_VAL;
    default: break;
  }
  const auto u = unpack(v);
  const double mag = std::ldexp(static_cast<double>(u.significand), u.lsb_exponent);
  return v.sign() ? -mag : mag;
}

int128 scaled_units(Fp16 v) {
  if (!v.is_finite()) throw std::invalid_argument("scaled_units: non-finite operand " + to_hex(v));
  const auto u = unpack(v);
  // lsb_exponent >= -24, so the shift into 2^-48 units is at least 24.
  const int128 units = static_cast<int128>(u.significand) << (u.lsb_exponent - ExactAccumulator::kScaleExponent);
  return v.sign() ? -units : units;
}

void ExactAccumulator::add_product(Fp16 a, Fp16 b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw std::invalid_argument("exact_dot: non-finite operand " + to_hex(a.is_finite() ? b : a));
  }
  const auto ua = unpack(a);
  const auto ub = unpack(b);
  const int shift = ua.lsb_exponent + ub.lsb_exponent - kScaleExponent;
  int128 p = static_cast<int128>(static_cast<std::uint64_t>(ua.significand) * ub.significand) << shift;
  scaled_sum_ += a.sign() != b.sign() ? -p : p;
}

Dyadic ExactAccumulator::value() const {
  const bool negative = scaled_sum_ < 0;
  const uint128 mag = negative ? -static_cast<uint128>(scaled_sum_) : static_cast<uint128>(scaled_sum_);
  return {Dyadic::Kind::Finite, negative, mag, kScaleExponent, false};
}

double ExactAccumulator::to_double() const {
  return std::ldexp(static_cast<double>(scaled_sum_), kScaleExponent);
}

ExactAccumulator exact_dot(std::span<const Fp16> inputs, std::span<const Fp16> weights) {
  if (inputs.size() != weights.size()) {
    throw std::invalid_argument("exact_dot: length mismatch (" + std::to_string(inputs.size()) + " vs " +
                                std::to_string(weights.size()) + ")");
  }
  if (inputs.size() > kMaxExactDotLength) {
    throw std::invalid_argument("exact_dot: length " + std::to_string(inputs.size()) + " exceeds 4096");
  }
  ExactAccumulator acc;
  for (std::size_t i = 0; i < inputs.size(); ++i) acc.add_product(inputs[i], weights[i]);
  return acc;
}

std::string to_hex(Fp16 v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04X", v.raw);
  return buf;
}

}  // namespace seacim
