#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "seacim/batch.hpp"
#include "seacim/pipeline.hpp"
#include "test_support.hpp"

namespace seacim {
namespace {

using testing::BigInt;

MacroConfig config_for(const std::string& strategy, SharedExponentPolicy policy = SharedExponentPolicy::DynamicGroupMax) {
  MacroConfig c;
  c.strategy = Strategy::parse(strategy);
  c.sea.policy = policy;
  return c;
}

// Lossless setup: weights stored exactly, every frame wide enough.
MacroConfig exact_config(AlignmentMode a, Activation act, SharedExponentPolicy policy) {
  MacroConfig c;
  c.strategy = {a, act, WidthPolicy::dwi_unbounded()};
  c.sea.policy = policy;
  c.w_s = 42;
  c.accumulator_width = 128;
  return c;
}

// Nearest FP16 to units * num / den in 2^-scale_bits, by exhaustive search.
std::uint16_t nearest_rational(const BigInt& units, long num, long den, int scale_bits) {
  const bool neg = units < 0;
  const BigInt target = abs(units) * num;  // compare v * den against this
  std::uint16_t best = 0;
  BigInt best_dist = -1;
  for (std::uint32_t raw = 0; raw <= 0x7C00; ++raw) {
    const BigInt v = raw == 0x7C00 ? BigInt(BigInt(1) << (16 + scale_bits))
                                   : testing::formula_units(static_cast<std::uint16_t>(raw), scale_bits);
    const BigInt vd = v * den;
    const BigInt d = vd > target ? BigInt(vd - target) : BigInt(target - vd);
    if (best_dist < 0 || d < best_dist || (d == best_dist && (raw & 1) == 0)) {
      best = static_cast<std::uint16_t>(raw);
      best_dist = d;
    }
    if (vd > target) break;
  }
  return static_cast<std::uint16_t>(best | (neg ? 0x8000 : 0));
}

TEST(Preprocess, AllZeros) {
  const std::vector<Fp16> in(128, Fp16{0});
  const auto p = preprocess(in, config_for("sea-dwa-fwi"));
  EXPECT_TRUE(p.schedule.phases.empty());
  for (const auto& a : p.inputs) {
    EXPECT_EQ(a.significand, 0u);
    EXPECT_FALSE(a.active);
  }
}

TEST(Preprocess, StaticCenterShift) {
  const std::vector<Fp16> in{Fp16{0x3C00}};
  const auto p = preprocess(in, config_for("sea-dwa-fwi", SharedExponentPolicy::Static));
  EXPECT_EQ(p.inputs[0].group_flag, to_flag(ExponentGroup::Center));
  EXPECT_EQ(p.inputs[0].shift_applied, 8);
  EXPECT_EQ(p.inputs[0].significand, 4u);
}

TEST(Preprocess, DynamicCenterShift) {
  const std::vector<Fp16> in{Fp16{0x3C00}};
  const auto p = preprocess(in, config_for("sea-dwa-fwi"));
  EXPECT_EQ(p.inputs[0].shift_applied, 0);
  EXPECT_EQ(p.inputs[0].significand, 1024u);
}

TEST(Preprocess, RejectsTooManyInputsAndNonFinite) {
  const std::vector<Fp16> many(129, Fp16{0x3C00});
  EXPECT_THROW(preprocess(many, MacroConfig{}), std::invalid_argument);
  const std::vector<Fp16> bad{Fp16{0x7E00}};
  EXPECT_THROW(preprocess(bad, MacroConfig{}), std::invalid_argument);
}

TEST(RunMac, AllZeroInputs) {
  std::mt19937_64 rng(71);
  std::vector<Fp16> w(128 * 4);
  for (auto& x : w) x = testing::random_finite(rng);
  const auto tile = CrossbarTile::program(w, 128, 4, 11);
  const std::vector<Fp16> in(128, Fp16{0});
  const auto r = run_mac(in, tile, config_for("sea-dwa-fwi"));
  for (auto o : r.outputs) EXPECT_EQ(o.raw, 0x0000);
  EXPECT_EQ(r.cycles.input_cycles, 0);
}

TEST(RunMac, SingleExactProduct) {
  const std::vector<Fp16> w{Fp16{0x4000}};
  const auto tile = CrossbarTile::program(w, 1, 1, 11);
  const std::vector<Fp16> in{Fp16{0x3C00}};
  auto c = config_for("sea-dwa-dwi");
  c.rows = 1;
  const auto r = run_mac(in, tile, c);
  ASSERT_EQ(r.outputs.size(), 1u);
  EXPECT_EQ(r.outputs[0].raw, 0x4000);
  EXPECT_EQ(r.cycles.input_cycles, 11);
}

TEST(RunMac, RowCountMustMatchTile) {
  const std::vector<Fp16> w(4, Fp16{0x3C00});
  const auto tile = CrossbarTile::program(w, 4, 1, 11);
  const std::vector<Fp16> in(3, Fp16{0x3C00});
  EXPECT_THROW(run_mac(in, tile, MacroConfig{}), std::invalid_argument);
}

TEST(RunMac, ExactnessAcrossStrategies) {
  std::mt19937_64 rng(72);
  const SharedExponentPolicy policies[] = {SharedExponentPolicy::Static, SharedExponentPolicy::DynamicGroupMax};
  for (int t = 0; t < 150; ++t) {
    const auto in = testing::random_vector(rng, 128, 0, 30);
    std::vector<Fp16> w(128 * 3);
    for (auto& x : w) x = testing::random_finite(rng);
    const auto tile = CrossbarTile::program(w, 128, 3, 42);
    const auto oracle = exact_outputs(in, w, 3);
    for (auto a : {AlignmentMode::Mea, AlignmentMode::Sea}) {
      for (auto act : {Activation::InOrder, Activation::Dwa}) {
        for (auto pol : policies) {
          if (a == AlignmentMode::Mea && pol == SharedExponentPolicy::Static) continue;
          const auto r = run_mac(in, tile, exact_config(a, act, pol));
          ASSERT_FALSE(r.accumulator_overflow);
          ASSERT_EQ(r.dropped_bits, 0);
          for (int c = 0; c < 3; ++c) ASSERT_EQ(r.outputs[c].raw, oracle[c].to_fp16()) << "trial " << t;
        }
      }
    }
  }
}

TEST(RunMac, ExactnessWithSubnormalsAndZeros) {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 100; ++t) {
    auto in = testing::random_vector(rng, 64, 0, 3);
    for (std::size_t i = 0; i < in.size(); i += 5) in[i] = Fp16{0x8000};
    std::vector<Fp16> w(64 * 2);
    for (auto& x : w) x = testing::random_finite(rng);
    const auto tile = CrossbarTile::program(w, 64, 2, 42);
    const auto oracle = exact_outputs(in, w, 2);
    auto c = exact_config(AlignmentMode::Sea, Activation::Dwa, SharedExponentPolicy::Static);
    c.rows = 64;
    const auto r = run_mac(in, tile, c);
    for (int k = 0; k < 2; ++k) ASSERT_EQ(r.outputs[k].raw, oracle[k].to_fp16());
  }
}

TEST(ExponentAdd, Examples) {
  static_assert(exponent_add(15, 15, 11) == -20);
  static_assert(exponent_add(16, 15, 11) == -19);
  EXPECT_EQ(exponent_add(15, 15), -20);
}

TEST(ExponentAdd, PartialTimesScaleIsExactProduct) {
  std::mt19937_64 rng(74);
  for (int t = 0; t < 2000; ++t) {
    const Fp16 a = testing::random_finite(rng);
    const Fp16 b = testing::random_finite(rng);
    const std::vector<Fp16> in{a};
    const std::vector<Fp16> w{b};
    const auto tile = CrossbarTile::program(w, 1, 1, 42);
    auto c = exact_config(AlignmentMode::Sea, Activation::Dwa, SharedExponentPolicy::DynamicGroupMax);
    c.rows = 1;
    const auto r = run_mac(in, tile, c);
    BigInt sum = 0;
    for (const auto& p : r.partials[0]) {
      ASSERT_EQ(p.scale_exponent, exponent_add(p.input_exponent, p.weight_exponent, 42) - p.m_d);
      sum += testing::to_big(p.acc) << (p.scale_exponent + 96);
    }
    ASSERT_EQ(sum, testing::formula_units(a.raw, 48) * testing::formula_units(b.raw, 48));
  }
}

TEST(Normalize, SinglePartial) {
  PartialSumRegister p;
  p.acc = int128{1} << 20;
  p.scale_exponent = -20;
  const std::vector<PartialSumRegister> v{p};
  EXPECT_EQ(normalize(v).raw, 0x3C00);
}

TEST(Normalize, Cancellation) {
  PartialSumRegister a;
  a.acc = 12345;
  a.scale_exponent = -7;
  PartialSumRegister b = a;
  b.acc = -12345;
  const std::vector<PartialSumRegister> v{a, b};
  EXPECT_EQ(normalize(v).raw, 0x0000);
  EXPECT_EQ(normalize({}).raw, 0x0000);
}

TEST(Normalize, RejectsMoreThanThreePartials) {
  const std::vector<PartialSumRegister> v(4);
  EXPECT_THROW(normalize(v), std::invalid_argument);
}

TEST(Normalize, RandomPartialsMatchBigIntegerCombination) {
  std::mt19937_64 rng(75);
  for (int t = 0; t < 300; ++t) {
    const bool quantized = t % 3 == 0;
    std::vector<PartialSumRegister> parts(1 + rng() % 3);
    BigInt sum = 0;
    constexpr int kScale = 100;
    for (auto& p : parts) {
      const int bits = 1 + static_cast<int>(rng() % 62);
      p.acc = static_cast<int128>(rng() >> (64 - bits));
      if (rng() & 1) p.acc = -p.acc;
      p.scale_exponent = -60 + static_cast<int>(rng() % 50);
      if (quantized) {
        p.dequant_num = 128;
        p.dequant_den = 63;
      }
      sum += testing::to_big(p.acc) << (p.scale_exponent + kScale);
    }
    const long num = quantized ? 128 : 1;
    const long den = quantized ? 63 : 1;
    const auto expected = sum == 0 ? std::uint16_t{0} : nearest_rational(sum, num, den, kScale);
    ASSERT_EQ(normalize(parts).raw, expected) << "trial " << t;
  }
}

TEST(Normalize, MismatchedDequantizationRejected) {
  PartialSumRegister a;
  a.acc = 1;
  PartialSumRegister b = a;
  b.dequant_num = 128;
  b.dequant_den = 63;
  const std::vector<PartialSumRegister> v{a, b};
  EXPECT_THROW(normalize(v), std::invalid_argument);
}

TEST(PipelineProperty, FwiErrorOrderingOnSameSignOperands) {
  // With all operands positive, every truncation pulls the sum the same way,
  // so SEA's elementwise-smaller shifts give an elementwise-smaller deficit.
  std::mt19937_64 rng(76);
  for (int t = 0; t < 300; ++t) {
    auto in = testing::random_vector(rng, 128, 0, 26);
    std::vector<Fp16> w(128 * 2);
    for (auto& x : w) x = testing::random_with_exponent(rng, 0, 10);
    for (auto& x : in) x.raw &= 0x7FFF;
    for (auto& x : w) x.raw &= 0x7FFF;
    const auto tile = CrossbarTile::program(w, 128, 2, 11);
    const auto oracle = exact_outputs(in, w, 2);
    const auto sea = run_mac(in, tile, config_for("sea-dwa-fwi"));
    const auto mea = run_mac(in, tile, config_for("mea-fwi"));
    ASSERT_LE(sea.dropped_bits, mea.dropped_bits);
    for (int c = 0; c < 2; ++c) {
      const auto exact = oracle[c].scaled_sum();
      const auto es = scaled_units(sea.outputs[c]) - exact;
      const auto em = scaled_units(mea.outputs[c]) - exact;
      const int128 ulp = scaled_units(Fp16{static_cast<std::uint16_t>((sea.outputs[c].raw & 0x7C00) | 1)}) -
                         scaled_units(Fp16{static_cast<std::uint16_t>(sea.outputs[c].raw & 0x7C00)});
      ASSERT_LE(es < 0 ? -es : es, (em < 0 ? -em : em) + ulp) << "trial " << t;
    }
  }
}

TEST(PipelineProperty, FwiErrorOrderingMixedSignsMostly) {
  // Mixed signs let truncation errors cancel, so single outputs may go
  // either way; the ordering must still hold in aggregate.
  std::mt19937_64 rng(77);
  long sea_total = 0;
  long mea_total = 0;
  double sea_err = 0.0;
  double mea_err = 0.0;
  for (int t = 0; t < 300; ++t) {
    const auto in = testing::random_vector(rng, 128, 0, 26);
    std::vector<Fp16> w(128 * 2);
    for (auto& x : w) x = testing::random_with_exponent(rng, 0, 10);
    const auto tile = CrossbarTile::program(w, 128, 2, 11);
    const auto oracle = exact_outputs(in, w, 2);
    const auto sea = run_mac(in, tile, config_for("sea-dwa-fwi"));
    const auto mea = run_mac(in, tile, config_for("mea-fwi"));
    sea_total += sea.dropped_bits;
    mea_total += mea.dropped_bits;
    for (int c = 0; c < 2; ++c) {
      sea_err += std::fabs(to_double(sea.outputs[c]) - oracle[c].to_double());
      mea_err += std::fabs(to_double(mea.outputs[c]) - oracle[c].to_double());
    }
  }
  EXPECT_LE(sea_total, mea_total);
  EXPECT_LT(sea_err, mea_err);
}

TEST(PipelineProperty, Deterministic) {
  std::mt19937_64 rng(78);
  const auto in = testing::random_vector(rng, 128);
  std::vector<Fp16> w(128 * 8);
  for (auto& x : w) x = testing::random_finite(rng);
  const auto tile = CrossbarTile::program(w, 128, 8, 11);
  auto c = config_for("sea-dwa-fwi");
  c.adc.mode = AdcMode::Quantized;
  const auto a = run_mac(in, tile, c);
  const auto b = run_mac(in, tile, c);
  EXPECT_EQ(a.outputs, b.outputs);
  EXPECT_EQ(a.clip_events, b.clip_events);
  EXPECT_EQ(a.cycles.input_cycles, b.cycles.input_cycles);
}

TEST(PipelineProperty, QuantizedAdcStaysFiniteWithoutClipping) {
  std::mt19937_64 rng(79);
  for (int t = 0; t < 50; ++t) {
    const auto in = testing::random_vector(rng, 128, 0, 20);
    std::vector<Fp16> w(128 * 4);
    for (auto& x : w) x = testing::random_with_exponent(rng, 0, 20);
    const auto tile = CrossbarTile::program(w, 128, 4, 11);
    auto c = config_for("sea-dwa-fwi");
    c.adc.mode = AdcMode::Quantized;
    const auto r = run_mac(in, tile, c);
    EXPECT_EQ(r.clip_events, 0);
    for (auto o : r.outputs) EXPECT_TRUE(o.is_finite());
  }
}

TEST(PipelineProperty, MultiBitDacMatchesSingleBitInIdealMode) {
  std::mt19937_64 rng(80);
  for (int t = 0; t < 50; ++t) {
    const auto in = testing::random_vector(rng, 128);
    std::vector<Fp16> w(128 * 2);
    for (auto& x : w) x = testing::random_finite(rng);
    const auto tile = CrossbarTile::program(w, 128, 2, 11);
    auto one = config_for("mea-dwi");
    auto four = one;
    four.schedule.dac_bits = 4;
    const auto a = run_mac(in, tile, one);
    const auto b = run_mac(in, tile, four);
    EXPECT_EQ(a.outputs, b.outputs);
    EXPECT_EQ(b.cycles.input_cycles, (a.cycles.input_cycles + 3) / 4);
  }
}

TEST(PipelineProperty, NoAccumulatorOverflowAtDefaultWidths) {
  // 10^6 macro evaluations at rows 128, w_s 11, 64-bit registers, over every
  // strategy; the worst-case operands are included explicitly.
  std::mt19937_64 rng(81);
  std::vector<Fp16> w(128);
  for (auto& x : w) x = testing::random_finite(rng);
  const auto tile = CrossbarTile::program(w, 128, 1, 11);
  const std::vector<Fp16> worst_w(128, Fp16{0x7BFF});
  const auto worst_tile = CrossbarTile::program(worst_w, 128, 1, 11);
  const char* strategies[] = {"mea-dwi", "mea-fwi", "sea-dwa-fwi", "sea-dwa-dwi"};
  std::vector<MacroConfig> configs;
  for (const char* s : strategies) configs.push_back(config_for(s));

  const std::vector<Fp16> worst_in(128, Fp16{0x7BFF});
  for (const auto& c : configs) ASSERT_FALSE(run_mac(worst_in, worst_tile, c).accumulator_overflow);
  std::vector<Fp16> spread(128, Fp16{0x7BFF});
  for (int i = 0; i < 64; ++i) spread[i] = Fp16{0x0001};
  for (const auto& c : configs) ASSERT_FALSE(run_mac(spread, worst_tile, c).accumulator_overflow);

  constexpr int kTrials = 1000000;
  constexpr int kBatch = 2000;
  std::vector<std::vector<Fp16>> inputs(kBatch);
  std::vector<MacroJob> jobs(kBatch);
  for (int done = 0; done < kTrials; done += kBatch) {
    for (int j = 0; j < kBatch; ++j) {
      inputs[j] = testing::random_vector(rng, 128, 0, 30);
      jobs[j] = {inputs[j], &tile, std::nullopt};
    }
    const auto& c = configs[(done / kBatch) % configs.size()];
    for (const auto& r : run_batch(jobs, c)) ASSERT_FALSE(r.accumulator_overflow);
  }
}

TEST(Batch, ParallelMatchesSerial) {
  std::mt19937_64 rng(82);
  std::vector<Fp16> w(128 * 6);
  for (auto& x : w) x = testing::random_finite(rng);
  const auto tile = CrossbarTile::program(w, 128, 6, 11);
  std::vector<std::vector<Fp16>> inputs(200);
  std::vector<MacroJob> jobs;
  for (auto& in : inputs) {
    in = testing::random_vector(rng, 128);
    jobs.push_back({in, &tile, std::nullopt});
  }
  for (const char* s : {"mea-dwi", "sea-dwa-fwi"}) {
    auto c = config_for(s);
    c.adc.mode = AdcMode::Quantized;
    const auto par = run_batch(jobs, c);
    const auto ser = run_batch_serial(jobs, c);
    ASSERT_EQ(par.size(), ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      ASSERT_EQ(par[i].outputs, ser[i].outputs);
      ASSERT_EQ(par[i].cycles.input_cycles, ser[i].cycles.input_cycles);
      ASSERT_EQ(par[i].clip_events, ser[i].clip_events);
    }
  }
}

TEST(Batch, ErrorsPropagate) {
  const std::vector<Fp16> w(4, Fp16{0x3C00});
  const auto tile = CrossbarTile::program(w, 4, 1, 11);
  const std::vector<Fp16> bad(3, Fp16{0x3C00});
  const std::vector<MacroJob> jobs{{bad, &tile, std::nullopt}};
  EXPECT_THROW(run_batch(jobs, MacroConfig{}), std::invalid_argument);
  EXPECT_GE(max_threads(), 1);
}

TEST(MacroConfigJson, RoundTripAndValidation) {
  MacroConfig c;
  c.strategy.width.m_d = 12;
  c.adc.mode = AdcMode::Quantized;
  c.sea.e_c = 20;
  const nlohmann::json j = c;
  const auto back = j.get<MacroConfig>();
  EXPECT_EQ(back.strategy.width.m_d, 12);
  EXPECT_EQ(back.adc, c.adc);
  EXPECT_EQ(back.sea.e_c, 20);
  EXPECT_THROW(nlohmann::json({{"rows", 0}}).get<MacroConfig>(), std::invalid_argument);
  EXPECT_THROW(nlohmann::json({{"accumulator_width", 200}}).get<MacroConfig>(), std::invalid_argument);
}

TEST(MacroConfig, FixedMdTruncatesResidualShifts) {
  std::vector<Fp16> in(128, Fp16{0x3C00});
  in[0] = Fp16{0x0401};  // exponent 1, 14 below the rest
  const std::vector<Fp16> w(128, Fp16{0x3C00});
  const auto tile = CrossbarTile::program(w, 128, 1, 11);
  auto c = config_for("mea-dwi");
  c.strategy.width.m_d = 4;
  const auto r = run_mac(in, tile, c);
  EXPECT_EQ(r.cycles.input_cycles, 15);
  EXPECT_GT(r.dropped_bits, 0);
}

}  // namespace
}  // namespace seacim
