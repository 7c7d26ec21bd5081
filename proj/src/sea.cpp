#include "seacim/sea.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace seacim {

namespace {

void check_exponent(int e, const char* what) {
  if (e < 0 || e > 31) throw std::invalid_argument(std::string(what) + ": exponent " + std::to_string(e) + " outside [0,31]");
}

}  // namespace

std::string_view to_string(ExponentGroup g) {
  switch (g) {
    case ExponentGroup::NearZero: return "near_zero";
    case ExponentGroup::Center: return "center";
    case ExponentGroup::NearMax: return "near_max";
  }
  return "?";
}

ExponentGroup from_flag(GroupFlag flag) {
  if (flag.code > 2) throw std::invalid_argument("group flag 0b11 is reserved");
  return static_cast<ExponentGroup>(flag.code);
}

int SeaConfig::configured(ExponentGroup g) const {
  switch (g) {
    case ExponentGroup::NearZero: return e_z;
    case ExponentGroup::Center: return e_c;
    case ExponentGroup::NearMax: return e_m;
  }
  return e_c;
}

void SeaConfig::validate() const {
  check_exponent(e_z, "sea.e_z");
  check_exponent(e_c, "sea.e_c");
  check_exponent(e_m, "sea.e_m");
  if (shift_cap < 0) throw std::invalid_argument("sea.shift_cap must be >= 0");
}

void to_json(nlohmann::json& j, const SeaConfig& c) {
  j = nlohmann::json{{"e_z", c.e_z},
                     {"e_c", c.e_c},
                     {"e_m", c.e_m},
                     {"policy", c.policy == SharedExponentPolicy::Static ? "static" : "dynamic"},
                     {"shift_cap", c.shift_cap}};
}

void from_json(const nlohmann::json& j, SeaConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("sea config must be a JSON object");
  c.e_z = j.value("e_z", c.e_z);
  c.e_c = j.value("e_c", c.e_c);
  c.e_m = j.value("e_m", c.e_m);
  c.shift_cap = j.value("shift_cap", c.shift_cap);
  if (j.contains("policy")) {
    const auto p = j.at("policy").get<std::string>();
    if (p == "static") {
      c.policy = SharedExponentPolicy::Static;
    } else if (p == "dynamic" || p == "dynamic_group_max") {
      c.policy = SharedExponentPolicy::DynamicGroupMax;
    } else {
      throw std::invalid_argument("unknown sea policy '" + p + "'");
    }
  }
  c.validate();
}

int shared_exponent(ExponentGroup group, std::span<const int> members, const SeaConfig& config) {
  if (config.policy == SharedExponentPolicy::Static) return config.configured(group);
  if (members.empty()) {
    throw std::invalid_argument("shared_exponent: empty " + std::string(to_string(group)) +
                                " group under dynamic policy");
  }
  return *std::max_element(members.begin(), members.end());
}

SharedExponents resolve_shared_exponents(std::span<const int> exponents, const SeaConfig& config) {
  SharedExponents out;
  for (auto g : kAllGroups) {
    if (config.policy == SharedExponentPolicy::Static) out.by_group[static_cast<int>(g)] = config.configured(g);
  }
  if (config.policy == SharedExponentPolicy::DynamicGroupMax) {
    for (int e : exponents) {
      auto& slot = out.by_group[static_cast<int>(classify_exponent(e))];
      slot = slot ? std::max(*slot, e) : e;
    }
  }
  return out;
}

SeaShift sea_shift(int e_in, int shared, int shift_cap) {
  const int raw = shared - e_in;
  if (raw < 0) return {0, true};
  if (raw > shift_cap) return {shift_cap, true};
  return {raw, false};
}

SeaShift sea_shift(int e_in, const SharedExponents& shared, const SeaConfig& config) {
  const auto g = classify_exponent(e_in);
  const auto s = shared[g];
  if (!s) throw std::invalid_argument("sea_shift: no shared exponent resolved for " + std::string(to_string(g)));
  return sea_shift(e_in, *s, config.shift_cap);
}

TreeMax mea_max_exponent(std::span<const int> exponents) {
  if (exponents.empty()) throw std::invalid_argument("mea_max_exponent: empty exponent list");
  std::vector<int> level(exponents.begin(), exponents.end());
  TreeMax out;
  while (level.size() > 1) {
    std::vector<int> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      next.push_back(std::max(level[i], level[i + 1]));
      ++out.comparators;
    }
    if (level.size() % 2 == 1) next.push_back(level.back());
    level = std::move(next);
    ++out.depth;
  }
  out.value = level.front();
  return out;
}

int mea_shift(int e_in, int e_max) {
  if (e_in > e_max) {
    throw std::invalid_argument("mea_shift: e_in " + std::to_string(e_in) + " exceeds e_max " + std::to_string(e_max));
  }
  return e_max - e_in;
}

}  // namespace seacim
