#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "seacim/sea.hpp"

namespace seacim {
namespace {

SeaConfig dynamic_config() {
  SeaConfig c;
  c.policy = SharedExponentPolicy::DynamicGroupMax;
  return c;
}

TEST(ClassifyExponent, Examples) {
  EXPECT_EQ(classify_exponent(2), ExponentGroup::NearZero);
  EXPECT_EQ(classify_exponent(23), ExponentGroup::Center);
  EXPECT_EQ(classify_exponent(31), ExponentGroup::NearMax);
}

TEST(ClassifyExponent, PartitionIsExhaustiveAndUnique) {
  // Region bounds written out independently of the bit test.
  for (int e = 0; e <= 31; ++e) {
    const int matches = (e <= 3 ? 1 : 0) + (e >= 4 && e <= 23 ? 1 : 0) + (e >= 24 ? 1 : 0);
    ASSERT_EQ(matches, 1);
    const auto expected = e <= 3 ? ExponentGroup::NearZero : e <= 23 ? ExponentGroup::Center : ExponentGroup::NearMax;
    EXPECT_EQ(classify_exponent(e), expected) << e;
  }
}

TEST(GroupFlag, RoundTripsBijectively) {
  std::vector<std::uint8_t> seen;
  for (auto g : kAllGroups) {
    const auto f = to_flag(g);
    EXPECT_LT(f.code, 3);
    EXPECT_EQ(from_flag(f), g);
    seen.push_back(f.code);
  }
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
  EXPECT_THROW(from_flag(GroupFlag{3}), std::invalid_argument);
}

TEST(SharedExponent, StaticLookup) {
  const std::vector<int> m{0, 1, 3};
  EXPECT_EQ(shared_exponent(ExponentGroup::NearZero, m, SeaConfig{}), 3);
}

TEST(SharedExponent, DynamicMax) {
  const std::vector<int> m{14, 16, 12};
  EXPECT_EQ(shared_exponent(ExponentGroup::Center, m, dynamic_config()), 16);
}

TEST(SharedExponent, DynamicEmptyRejected) {
  EXPECT_THROW(shared_exponent(ExponentGroup::NearMax, {}, dynamic_config()), std::invalid_argument);
}

TEST(SeaShift, Examples) {
  EXPECT_EQ(sea_shift(14, 23, 31).shift, 9);
  EXPECT_EQ(sea_shift(3, 3, 31).shift, 0);
  const std::vector<int> group{12, 16};
  const auto shared = resolve_shared_exponents(group, dynamic_config());
  EXPECT_EQ(sea_shift(12, shared, dynamic_config()).shift, 4);
}

TEST(SeaShift, NegativeRawShiftIsClampedAndFlagged) {
  SeaConfig c;
  c.e_c = 15;
  const std::vector<int> exps{20};
  const auto s = sea_shift(20, resolve_shared_exponents(exps, c), c);
  EXPECT_EQ(s.shift, 0);
  EXPECT_TRUE(s.clamped);
}

TEST(SeaShift, CapClamps) {
  const auto s = sea_shift(0, 31, 7);
  EXPECT_EQ(s.shift, 7);
  EXPECT_TRUE(s.clamped);
}

TEST(SeaShift, StaticBoundsExhaustive) {
  const SeaConfig c;
  for (int e = 0; e <= 31; ++e) {
    const std::vector<int> one{e};
    const auto s = sea_shift(e, resolve_shared_exponents(one, c), c);
    EXPECT_FALSE(s.clamped);
    const int bound = e <= 3 ? 3 : e <= 23 ? 19 : 7;
    EXPECT_LE(s.shift, bound) << e;
    EXPECT_GE(s.shift, 0);
  }
}

TEST(MeaMaxExponent, Examples) {
  const std::vector<int> a{17, 3, 25, 25};
  const auto t = mea_max_exponent(a);
  EXPECT_EQ(t.value, 25);
  EXPECT_EQ(t.depth, 2);
  EXPECT_EQ(t.comparators, 3);
  const std::vector<int> b{7};
  EXPECT_EQ(mea_max_exponent(b).value, 7);
  EXPECT_EQ(mea_max_exponent(b).depth, 0);
  EXPECT_THROW(mea_max_exponent({}), std::invalid_argument);
}

TEST(MeaMaxExponent, MatchesLinearScan) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 128);
    std::vector<int> e(static_cast<std::size_t>(n));
    for (auto& x : e) x = static_cast<int>(rng() % 32);
    int linear = e[0];
    for (int x : e) linear = x > linear ? x : linear;
    int depth = 0;
    while ((1 << depth) < n) ++depth;
    const auto tm = mea_max_exponent(e);
    ASSERT_EQ(tm.value, linear);
    ASSERT_EQ(tm.depth, depth);
    ASSERT_EQ(tm.comparators, n - 1);
  }
}

TEST(MeaShift, Examples) {
  EXPECT_EQ(mea_shift(14, 25), 11);
  EXPECT_EQ(mea_shift(25, 25), 0);
  EXPECT_EQ(mea_shift(0, 31), 31);
  EXPECT_THROW(mea_shift(26, 25), std::invalid_argument);
}

TEST(SeaProperty, DynamicShiftNeverExceedsMeaShift) {
  std::mt19937_64 rng(5);
  const auto c = dynamic_config();
  for (int t = 0; t < 2000; ++t) {
    std::vector<int> e(1 + rng() % 128);
    for (auto& x : e) x = static_cast<int>(rng() % 32);
    const auto shared = resolve_shared_exponents(e, c);
    const int gmax = mea_max_exponent(e).value;
    for (int x : e) ASSERT_LE(sea_shift(x, shared, c).shift, mea_shift(x, gmax));
  }
}

TEST(SeaProperty, StaticDefaultsShiftAtLeastMea) {
  // Region maxima sit at or above any in-group global max, so static shifts
  // are never smaller than the MEA shift within a group.
  const SeaConfig c;
  for (int gmax = 0; gmax <= 31; ++gmax) {
    for (int e = 0; e <= gmax; ++e) {
      if (classify_exponent(e) != classify_exponent(gmax)) continue;
      const std::vector<int> set{e, gmax};
      const auto s = sea_shift(e, resolve_shared_exponents(set, c), c);
      EXPECT_GE(s.shift, mea_shift(e, gmax));
    }
  }
}

TEST(SeaProperty, StaticDefaultsCanExceedMeaShift) {
  const SeaConfig c;
  const std::vector<int> set{14, 16};
  EXPECT_EQ(sea_shift(14, resolve_shared_exponents(set, c), c).shift, 9);
  EXPECT_EQ(mea_shift(14, 16), 2);
}

TEST(SeaConfigJson, RoundTripAndValidation) {
  SeaConfig c;
  c.policy = SharedExponentPolicy::DynamicGroupMax;
  c.e_c = 20;
  const nlohmann::json j = c;
  const auto back = j.get<SeaConfig>();
  EXPECT_EQ(back.e_c, 20);
  EXPECT_EQ(back.policy, SharedExponentPolicy::DynamicGroupMax);
  EXPECT_THROW(nlohmann::json({{"policy", "median"}}).get<SeaConfig>(), std::invalid_argument);
}

}  // namespace
}  // namespace seacim
