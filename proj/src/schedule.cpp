#include "seacim/schedule.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace seacim {

namespace {

constexpr std::array<ExponentGroup, 3> kPhaseOrder = {ExponentGroup::NearMax, ExponentGroup::Center,
                                                      ExponentGroup::NearZero};

std::string_view width_name(const WidthPolicy& w) { return w.is_dwi() ? "dwi" : "fwi"; }

}  // namespace

Strategy Strategy::parse(std::string_view name) {
  if (name == "mea-dwi") return {AlignmentMode::Mea, Activation::InOrder, WidthPolicy::dwi_unbounded()};
  if (name == "mea-fwi") return {AlignmentMode::Mea, Activation::InOrder, WidthPolicy::fwi()};
  if (name == "sea-dwa-fwi") return {AlignmentMode::Sea, Activation::Dwa, WidthPolicy::fwi()};
  if (name == "sea-dwa-dwi") return {AlignmentMode::Sea, Activation::Dwa, WidthPolicy::dwi_unbounded()};

  const auto first = name.find('-');
  const auto second = first == std::string_view::npos ? first : name.find('-', first + 1);
  if (second == std::string_view::npos) throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
  const auto a = name.substr(0, first);
  const auto act = name.substr(first + 1, second - first - 1);
  const auto w = name.substr(second + 1);
  Strategy s;
  if (a == "mea") {
    s.alignment = AlignmentMode::Mea;
  } else if (a == "sea") {
    s.alignment = AlignmentMode::Sea;
  } else {
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
  }
  if (act == "inorder") {
    s.activation = Activation::InOrder;
  } else if (act == "dwa") {
    s.activation = Activation::Dwa;
  } else {
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
  }
  if (w == "dwi") {
    s.width = WidthPolicy::dwi_unbounded();
  } else if (w == "fwi") {
    s.width = WidthPolicy::fwi();
  } else {
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
  }
  return s;
}

std::string Strategy::name() const {
  if (alignment == AlignmentMode::Mea && activation == Activation::InOrder) return "mea-" + std::string(width_name(width));
  if (alignment == AlignmentMode::Sea && activation == Activation::Dwa) return "sea-dwa-" + std::string(width_name(width));
  return std::string(alignment == AlignmentMode::Mea ? "mea" : "sea") + "-" +
         (activation == Activation::InOrder ? "inorder" : "dwa") + "-" + std::string(width_name(width));
}

void to_json(nlohmann::json& j, const ScheduleOptions& o) {
  j = nlohmann::json{{"zero_skip", o.zero_skip},
                     {"skip_nearzero", o.skip_nearzero},
                     {"dwi_spread", o.dwi_spread == DwiSpread::PerCall ? "per_call" : "per_layer"},
                     {"dac_bits", o.dac_bits}};
}

void from_json(const nlohmann::json& j, ScheduleOptions& o) {
  if (!j.is_object()) throw std::invalid_argument("schedule config must be a JSON object");
  o.zero_skip = j.value("zero_skip", o.zero_skip);
  o.skip_nearzero = j.value("skip_nearzero", o.skip_nearzero);
  o.dac_bits = j.value("dac_bits", o.dac_bits);
  if (j.contains("dwi_spread")) {
    const auto s = j.at("dwi_spread").get<std::string>();
    if (s == "per_call") {
      o.dwi_spread = DwiSpread::PerCall;
    } else if (s == "per_layer") {
      o.dwi_spread = DwiSpread::PerLayer;
    } else {
      throw std::invalid_argument("unknown dwi_spread '" + s + "'");
    }
  }
  if (o.dac_bits < 1 || o.dac_bits > 8) throw std::invalid_argument("schedule.dac_bits must be in [1,8]");
}

std::optional<ExponentRange> nonzero_exponent_range(std::span<const Fp16> values) {
  std::optional<ExponentRange> r;
  for (auto v : values) {
    if (v.is_zero() || !v.is_finite()) continue;
    const int e = v.exponent();
    r = r ? ExponentRange{std::min(r->min, e), std::max(r->max, e)} : ExponentRange{e, e};
  }
  return r;
}

int Schedule::input_cycles() const {
  int total = 0;
  for (const auto& p : phases) total += p.cycles;
  return total;
}

nlohmann::json Schedule::to_json() const {
  auto out = nlohmann::json::object();
  out["input_cycles"] = input_cycles();
  out["skipped_rows"] = skipped_rows;
  out["comparator_depth"] = comparator_depth;
  out["options"] = options;
  auto list = nlohmann::json::array();
  for (const auto& p : phases) {
    list.push_back({{"group", p.group ? std::string(to_string(*p.group)) : std::string("all")},
                    {"wordlines", p.rows},
                    {"frame_exponent", p.frame_exponent},
                    {"m_d", p.m_d},
                    {"lead_bits", p.lead_bits},
                    {"serial_bits", p.serial_bits},
                    {"cycles", p.cycles}});
  }
  out["phases"] = std::move(list);
  return out;
}

Schedule build_schedule(std::span<const Fp16> inputs, const Strategy& strategy, const SeaConfig& sea,
                        const ScheduleOptions& options, std::optional<ExponentRange> layer_range) {
  if (inputs.empty()) throw std::invalid_argument("schedule: empty input list");
  if (options.dac_bits < 1) throw std::invalid_argument("schedule: dac_bits must be >= 1");
  Schedule sched;
  sched.options = options;
  sched.rows.resize(inputs.size());

  // Row eligibility and grouping.
  std::vector<int> nonzero_exps;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto v = inputs[i];
    if (!v.is_finite()) throw std::invalid_argument("schedule: non-finite input " + to_hex(v) + " at row " + std::to_string(i));
    auto& plan = sched.rows[i];
    plan.group = classify_exponent(v.exponent());
    const bool skip = (v.is_zero() && options.zero_skip) || (options.skip_nearzero && plan.group == ExponentGroup::NearZero);
    plan.active = !skip;
    if (skip) {
      ++sched.skipped_rows;
    } else if (!v.is_zero()) {
      nonzero_exps.push_back(v.exponent());
    }
  }

  // Phase membership.
  if (strategy.activation == Activation::InOrder) {
    Phase p;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (sched.rows[i].active) p.rows.push_back(static_cast<int>(i));
    }
    if (!p.rows.empty()) sched.phases.push_back(std::move(p));
  } else {
    for (auto g : kPhaseOrder) {
      Phase p;
      p.group = g;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (sched.rows[i].active && sched.rows[i].group == g) p.rows.push_back(static_cast<int>(i));
      }
      if (!p.rows.empty()) sched.phases.push_back(std::move(p));
    }
  }

  // Frame exponents.
  const bool per_layer = strategy.alignment == AlignmentMode::Mea && options.dwi_spread == DwiSpread::PerLayer && layer_range;
  int global_max = 0;
  if (strategy.alignment == AlignmentMode::Mea) {
    if (per_layer) {
      global_max = layer_range->max;
    } else if (!nonzero_exps.empty()) {
      const auto tree = mea_max_exponent(nonzero_exps);
      global_max = tree.value;
      sched.comparator_depth = tree.depth;
    }
  }
  const auto shared = resolve_shared_exponents(nonzero_exps, sea);
  auto group_frame = [&](ExponentGroup g) { return shared[g].value_or(0); };

  for (std::size_t pi = 0; pi < sched.phases.size(); ++pi) {
    auto& p = sched.phases[pi];
    if (strategy.alignment == AlignmentMode::Mea) {
      p.frame_exponent = global_max;
    } else if (p.group) {
      p.frame_exponent = group_frame(*p.group);
    } else {
      int frame = 0;
      for (int r : p.rows) frame = std::max(frame, group_frame(sched.rows[r].group));
      p.frame_exponent = frame;
    }

    int min_shift = -1;
    int max_shift = 0;
    for (int r : p.rows) {
      auto& plan = sched.rows[r];
      plan.phase = static_cast<int>(pi);
      if (inputs[r].is_zero()) continue;
      const int e = inputs[r].exponent();
      if (strategy.alignment == AlignmentMode::Mea) {
        plan.shift = mea_shift(e, p.frame_exponent);
      } else {
        const auto s = sea_shift(e, p.frame_exponent, sea.shift_cap);
        plan.shift = s.shift;
        plan.shift_clamped = s.clamped;
      }
      min_shift = min_shift < 0 ? plan.shift : std::min(min_shift, plan.shift);
      max_shift = std::max(max_shift, plan.shift);
    }
    if (min_shift < 0) min_shift = 0;

    if (strategy.width.is_dwi()) {
      if (strategy.width.m_d) {
        p.m_d = *strategy.width.m_d;
      } else if (per_layer) {
        p.m_d = layer_range->max - layer_range->min;
      } else {
        p.m_d = max_shift;
      }
      p.m_d = std::clamp(p.m_d, 0, 31);
      p.lead_bits = per_layer ? 0 : std::min(min_shift, p.m_d);
      p.serial_bits = kSignificandBits + p.m_d - p.lead_bits;
    } else {
      p.serial_bits = kSignificandBits;
    }
    p.cycles = (p.serial_bits + options.dac_bits - 1) / options.dac_bits;
  }
  return sched;
}

Schedule schedule_inorder(std::span<const Fp16> inputs, const WidthPolicy& width, const ScheduleOptions& options) {
  return build_schedule(inputs, {AlignmentMode::Mea, Activation::InOrder, width}, SeaConfig{}, options);
}

Schedule schedule_dwa(std::span<const Fp16> inputs, const SeaConfig& sea, const WidthPolicy& width,
                      const ScheduleOptions& options) {
  return build_schedule(inputs, {AlignmentMode::Sea, Activation::Dwa, width}, sea, options);
}

double compare_latency(long candidate_cycles, long baseline_cycles) {
  if (baseline_cycles <= 0) throw std::invalid_argument("compare_latency: baseline has zero input cycles");
  return static_cast<double>(baseline_cycles - candidate_cycles) / static_cast<double>(baseline_cycles);
}

double compare_latency(const CycleReport& candidate, const CycleReport& baseline) {
  return compare_latency(candidate.input_cycles, baseline.input_cycles);
}

}  // namespace seacim
