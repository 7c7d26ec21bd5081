#pragma once

// Segmented exponent alignment: three exponent regions selected by the top
// three bits of the 5-bit biased exponent, each aligned to its own shared
// exponent. The comparison-tree maximum-exponent alignment (MEA) baseline
// lives here too.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include <json.hpp>

namespace seacim {

enum class ExponentGroup : std::uint8_t { NearZero = 0, Center = 1, NearMax = 2 };

inline constexpr std::array<ExponentGroup, 3> kAllGroups = {ExponentGroup::NearZero, ExponentGroup::Center,
                                                            ExponentGroup::NearMax};

std::string_view to_string(ExponentGroup g);

// 000xx -> NearZero, 11xxx -> NearMax, everything else -> Center.
constexpr ExponentGroup classify_exponent(int e_in) {
  const int top3 = (e_in >> 2) & 0x7;
  if (top3 == 0) return ExponentGroup::NearZero;
  if ((top3 >> 1) == 0x3) return ExponentGroup::NearMax;
  return ExponentGroup::Center;
}

// 2-bit per-input tag carried to the wordline activation logic.
struct GroupFlag {
  std::uint8_t code = 0;  // 00 NearZero, 01 Center, 10 NearMax, 11 reserved
  friend constexpr bool operator==(GroupFlag, GroupFlag) = default;
};

constexpr GroupFlag to_flag(ExponentGroup g) { return GroupFlag{static_cast<std::uint8_t>(g)}; }
ExponentGroup from_flag(GroupFlag flag);  // throws on the reserved code

enum class SharedExponentPolicy { Static, DynamicGroupMax };

struct SeaConfig {
  int e_z = 3;
  int e_c = 23;
  int e_m = 31;
  SharedExponentPolicy policy = SharedExponentPolicy::Static;
  int shift_cap = 31;

  int configured(ExponentGroup g) const;
  void validate() const;
};

void to_json(nlohmann::json& j, const SeaConfig& c);
void from_json(const nlohmann::json& j, SeaConfig& c);

// Static: the configured E_z/E_c/E_m. DynamicGroupMax: max(members), which
// must be non-empty.
int shared_exponent(ExponentGroup group, std::span<const int> members, const SeaConfig& config);

// Shared exponent per group for one input set; groups without members stay
// unset under the dynamic policy.
struct SharedExponents {
  std::array<std::optional<int>, 3> by_group{};
  std::optional<int> operator[](ExponentGroup g) const { return by_group[static_cast<int>(g)]; }
};

SharedExponents resolve_shared_exponents(std::span<const int> exponents, const SeaConfig& config);

struct SeaShift {
  int shift = 0;
  bool clamped = false;  // raw shift fell outside [0, shift_cap]
};

SeaShift sea_shift(int e_in, int shared, int shift_cap);
SeaShift sea_shift(int e_in, const SharedExponents& shared, const SeaConfig& config);

struct TreeMax {
  int value = 0;
  int depth = 0;        // ceil(log2 n)
  int comparators = 0;  // n - 1
};

// Maximum via a balanced pairwise comparison tree. Throws on an empty list.
TreeMax mea_max_exponent(std::span<const int> exponents);

// e_max - e_in; throws when e_in > e_max.
int mea_shift(int e_in, int e_max);

}  // namespace seacim
