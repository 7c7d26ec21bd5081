#pragma once

// IEEE-754 binary16 codec and the exact dot-product oracle used to check
// every datapath in the simulator.

#include <cstdint>
#include <span>
#include <string>

namespace seacim {

__extension__ using int128 = __int128;
__extension__ using uint128 = unsigned __int128;

inline constexpr int kFp16Bias = 15;
inline constexpr int kFractionBits = 10;      // stored mantissa width
inline constexpr int kSignificandBits = 11;   // with the hidden bit
inline constexpr int kMaxFiniteExponent = 30;
inline constexpr std::uint16_t kCanonicalNaN = 0x7E00;

enum class Fp16Class { Zero, Subnormal, Normal, Infinity, NaN };

const char* to_string(Fp16Class cls);

// A decoded half-precision value. `raw` is the only state; the field
// accessors slice it.
struct Fp16 {
  std::uint16_t raw = 0;

  constexpr bool sign() const { return (raw >> 15) != 0; }
  constexpr int exponent() const { return (raw >> kFractionBits) & 0x1F; }
  constexpr int fraction() const { return raw & 0x3FF; }

  constexpr Fp16Class classify() const {
    const int e = exponent();
    if (e == 0x1F) return fraction() == 0 ? Fp16Class::Infinity : Fp16Class::NaN;
    if (e == 0) return fraction() == 0 ? Fp16Class::Zero : Fp16Class::Subnormal;
    return Fp16Class::Normal;
  }
  constexpr bool is_finite() const { return exponent() != 0x1F; }
  constexpr bool is_zero() const { return (raw & 0x7FFF) == 0; }

  friend constexpr bool operator==(Fp16, Fp16) = default;
};

constexpr Fp16 decode(std::uint16_t raw) { return Fp16{raw}; }

// Exact dyadic value (-1)^negative * magnitude * 2^exponent.
//
// `sticky` marks a magnitude that was truncated: the true value lies strictly
// between magnitude and magnitude + 1 units. Producers setting it must keep at
// least two bits below the FP16 rounding position.
struct Dyadic {
  enum class Kind { Finite, Infinite, NaN };
  Kind kind = Kind::Finite;
  bool negative = false;
  uint128 magnitude = 0;
  int exponent = 0;
  bool sticky = false;

  static Dyadic infinity(bool negative) { return {Kind::Infinite, negative, 0, 0, false}; }
  static Dyadic nan() { return {Kind::NaN, false, 0, 0, false}; }
};

// Exact value of a decoded pattern. NaN maps to Dyadic::nan().
Dyadic exact_value(Fp16 v);

// Round-to-nearest-even into binary16. Overflow goes to signed infinity,
// anything below half the smallest subnormal to signed zero, every NaN to
// kCanonicalNaN.
std::uint16_t encode(const Dyadic& value);
std::uint16_t encode(double value);

double to_double(Fp16 v);

// Sum of products held at a fixed scale of 2^-48. The smallest nonzero
// product of two FP16 values is 2^-24 * 2^-24, so every product is an exact
// integer in these units and accumulation never rounds.
class ExactAccumulator {
 public:
  static constexpr int kScaleExponent = -48;

  void add_product(Fp16 a, Fp16 b);
  void add_scaled(int128 units) { scaled_sum_ += units; }

  int128 scaled_sum() const { return scaled_sum_; }
  Dyadic value() const;
  double to_double() const;
  std::uint16_t to_fp16() const { return encode(value()); }

  friend bool operator==(const ExactAccumulator&, const ExactAccumulator&) = default;

 private:
  int128 scaled_sum_ = 0;
};

// FP16 value as an integer count of 2^-48 units. Requires a finite value.
int128 scaled_units(Fp16 v);

inline constexpr std::size_t kMaxExactDotLength = 4096;

// Mathematically exact sum of inputs[i] * weights[i]. Throws
// std::invalid_argument on length mismatch, length above 4096, or any
// non-finite operand.
ExactAccumulator exact_dot(std::span<const Fp16> inputs, std::span<const Fp16> weights);

std::string to_hex(Fp16 v);

}  // namespace seacim
