// Command-line front end: strategy comparisons, exponent profiling and
// parameter sweeps. Every output is a pure function of the config, the
// input files and the seed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "seacim/analysis.hpp"
#include "seacim/errors.hpp"
#include "seacim/experiment.hpp"
#include "seacim/ingest.hpp"
#include "seacim/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seacim;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// Everything a simulate/sweep run needs besides the strategy list.
struct RunSetup {
  MacroConfig macro;
  int cols = 8;
  int calls = 100;
  double weight_sigma = 0.1;
  std::string baseline = "mea-dwi";
  std::vector<std::string> strategies = {"mea-dwi", "mea-fwi", "sea-dwa-fwi", "sea-dwa-dwi"};
  std::optional<BimodalSpec> synthetic;
  std::vector<std::string> inputs;
  std::string weights_path;
  std::uint64_t seed = 42;
  json config_json;
};

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> inputs;
  std::string synthetic;
  std::string weights;
  std::vector<std::string> strategies;
  std::string baseline;
  std::optional<std::uint64_t> seed;
  std::optional<int> cols;
  std::optional<int> calls;
  std::string out = ".";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunSetup build_setup(const CommonFlags& f) {
  RunSetup s;
  json cfg = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
  try {
    s.macro = cfg.get<MacroConfig>();
    s.cols = cfg.value("cols", s.cols);
    s.calls = cfg.value("calls", s.calls);
    s.weight_sigma = cfg.value("weight_sigma", s.weight_sigma);
    s.baseline = cfg.value("baseline", s.baseline);
    s.strategies = cfg.value("strategies", s.strategies);
    s.seed = cfg.value("seed", s.seed);
    if (cfg.contains("synthetic")) s.synthetic = cfg.at("synthetic").get<BimodalSpec>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (f.seed) s.seed = *f.seed;
  if (f.cols) s.cols = *f.cols;
  if (f.calls) s.calls = *f.calls;
  if (!f.baseline.empty()) s.baseline = f.baseline;
  if (!f.strategies.empty()) s.strategies = f.strategies;
  if (!f.synthetic.empty()) {
    if (f.synthetic == "default") {
      s.synthetic = BimodalSpec{};
    } else {
      try {
        s.synthetic = read_json_file(f.synthetic).get<BimodalSpec>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("synthetic spec: ") + e.what());
      }
    }
  }
  if (s.synthetic) s.synthetic->seed = s.seed;
  s.inputs = f.inputs;
  s.weights_path = f.weights;
  if (s.inputs.empty() && !s.synthetic) throw ConfigError("need --input tensors or --synthetic");
  if (s.cols < 1 || s.calls < 0) throw ConfigError("cols must be >= 1 and calls >= 0");

  try {
    Strategy::parse(s.baseline);
    for (const auto& name : s.strategies) Strategy::parse(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  s.config_json = s.macro;
  s.config_json["cols"] = s.cols;
  s.config_json["calls"] = s.calls;
  s.config_json["weight_sigma"] = s.weight_sigma;
  s.config_json["baseline"] = s.baseline;
  s.config_json["seed"] = s.seed;
  if (s.synthetic) s.config_json["synthetic"] = *s.synthetic;
  return s;
}

std::vector<Workload> load_workloads(const RunSetup& s) {
  std::vector<Workload> out;
  if (s.synthetic) out.push_back(synthetic_workload(*s.synthetic, s.calls, s.macro.rows));
  for (const auto& path : s.inputs) {
    const auto t = load_tensor(path);
    out.push_back(tensor_workload(t, s.macro.rows, fs::path(path).stem().string()));
  }
  return out;
}

WeightSet load_weight_set(const RunSetup& s) {
  if (s.weights_path.empty()) {
    return gaussian_weights(s.macro.rows, s.cols, s.macro.w_s, s.weight_sigma, s.seed ^ 0x9E3779B97F4A7C15ull);
  }
  auto t = load_tensor(s.weights_path);
  const auto expected = static_cast<std::size_t>(s.macro.rows) * s.cols;
  if (t.values.size() != expected) {
    throw DataError(s.weights_path + ": expected " + std::to_string(expected) + " weights (rows x cols), got " +
                    std::to_string(t.values.size()));
  }
  for (auto v : t.values) {
    if (!v.is_finite()) throw DataError(s.weights_path + ": non-finite weight " + to_hex(v));
  }
  return make_weights(std::move(t.values), s.macro.rows, s.cols, s.macro.w_s);
}

struct SimRecord {
  std::string tensor;
  StrategyRun run;
  std::optional<double> reduction;
};

// Baseline runs with the near-zero skip disabled: it models the
// conventional macro.
std::vector<SimRecord> simulate_all(const RunSetup& s, const std::vector<Workload>& works, const WeightSet& weights) {
  std::vector<SimRecord> out;
  for (const auto& work : works) {
    const auto oracle = workload_oracle(work, weights);
    MacroConfig base_cfg = s.macro;
    base_cfg.schedule.skip_nearzero = false;
    const auto base = run_strategy(work, weights, base_cfg, Strategy::parse(s.baseline), oracle);
    for (const auto& name : s.strategies) {
      auto run = run_strategy(work, weights, s.macro, Strategy::parse(name), oracle);
      auto red = mean_reduction(run, base);
      out.push_back({work.name, std::move(run), red});
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
}

int cmd_simulate(const CommonFlags& flags) {
  const auto setup = build_setup(flags);
  const auto works = load_workloads(setup);
  const auto weights = load_weight_set(setup);
  const auto records = simulate_all(setup, works, weights);

  json report{{"config", setup.config_json}, {"records", json::array()}};
  std::string csv = csv_header() + "\n";
  for (const auto& r : records) {
    report["records"].push_back(to_json(r.run, r.tensor, r.reduction, setup.baseline));
    csv += csv_row(r.run, r.tensor, r.reduction) + "\n";
  }
  ensure_dir(flags.out);
  write_file(fs::path(flags.out) / "report.json", report.dump(2) + "\n");
  write_file(fs::path(flags.out) / "report.csv", csv);
  return 0;
}

int cmd_profile(const std::vector<std::string>& inputs, const std::string& out_dir) {
  if (inputs.empty()) throw ConfigError("profile needs at least one --input tensor");
  ensure_dir(out_dir);
  json summary = json::array();
  for (const auto& path : inputs) {
    const auto t = load_tensor(path);
    const auto h = histogram(t.values);
    const auto stem = fs::path(path).stem().string();
    std::string csv = "bin,group,count\n";
    for (int e = 0; e < 32; ++e) {
      csv += fmt::format("{},{},{}\n", e, to_string(classify_exponent(e)), h.bins[e]);
    }
    csv += fmt::format("zero,,{}\nnonfinite,,{}\n", h.zero_count, h.nonfinite_count);
    write_file(fs::path(out_dir) / (stem + "_hist.csv"), csv);
    summary.push_back({{"tensor", stem},
                       {"layer", t.layer},
                       {"total", h.total},
                       {"zero", h.zero_count},
                       {"nonfinite", h.nonfinite_count},
                       {"near_zero", h.group_fraction(ExponentGroup::NearZero)},
                       {"center", h.group_fraction(ExponentGroup::Center)},
                       {"near_max", h.group_fraction(ExponentGroup::NearMax)}});
  }
  write_file(fs::path(out_dir) / "profile.json", summary.dump(2) + "\n");
  return 0;
}

// One axis of the sweep grid: a name and its JSON values.
struct Axis {
  std::string name;
  std::vector<json> values;
};

void apply_axis(RunSetup& s, const std::string& name, const json& v) {
  try {
    if (name == "policy") {
      json sea = s.macro.sea;
      sea["policy"] = v;
      s.macro.sea = sea.get<SeaConfig>();
    } else if (name == "e_z") {
      s.macro.sea.e_z = v.get<int>();
    } else if (name == "e_c") {
      s.macro.sea.e_c = v.get<int>();
    } else if (name == "e_m") {
      s.macro.sea.e_m = v.get<int>();
    } else if (name == "adc") {
      json adc = s.macro.adc;
      adc["mode"] = v;
      s.macro.adc = adc.get<AdcModel>();
    } else if (name == "skip_nearzero") {
      s.macro.schedule.skip_nearzero = v.get<bool>();
    } else if (name == "zero_skip") {
      s.macro.schedule.zero_skip = v.get<bool>();
    } else if (name == "strategy") {
      s.strategies = {v.get<std::string>()};
      Strategy::parse(s.strategies.front());
    } else {
      throw ConfigError("unknown sweep axis '" + name + "'");
    }
    s.macro.validate();
  } catch (const json::exception& e) {
    throw ConfigError("sweep axis " + name + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sweep axis " + name + ": " + e.what());
  }
}

std::string axis_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

int cmd_sweep(const CommonFlags& flags, const std::string& grid_path) {
  const json grid = read_json_file(grid_path);
  if (!grid.is_object() || grid.empty()) throw ConfigError("sweep grid must be a non-empty JSON object of axes");
  std::vector<Axis> axes;
  std::size_t cells = 1;
  for (const auto& [name, values] : grid.items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep axis '" + name + "' must be a non-empty array");
    axes.push_back({name, std::vector<json>(values.begin(), values.end())});
    cells *= values.size();
  }

  auto base = build_setup(flags);
  if (grid.contains("strategy")) base.strategies = {grid["strategy"].front().get<std::string>()};
  const auto works = load_workloads(base);
  const auto weights = load_weight_set(base);

  std::string header = "cell";
  for (const auto& a : axes) header += "," + a.name;
  std::string csv = header + "," + csv_header() + "\n";
  for (std::size_t cell = 0; cell < cells; ++cell) {
    RunSetup s = base;
    std::string prefix = std::to_string(cell);
    std::size_t rest = cell;
    // Last axis varies fastest.
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      idx[a] = rest % axes[a].values.size();
      rest /= axes[a].values.size();
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
      apply_axis(s, axes[a].name, axes[a].values[idx[a]]);
      prefix += "," + axis_text(axes[a].values[idx[a]]);
    }
    for (const auto& r : simulate_all(s, works, weights)) csv += prefix + "," + csv_row(r.run, r.tensor, r.reduction) + "\n";
  }
  ensure_dir(flags.out);
  write_file(fs::path(flags.out) / "sweep.csv", csv);
  return 0;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config mirroring the macro configuration");
  cmd->add_option("--input", f.inputs, "Activation tensor files");
  cmd->add_option("--synthetic", f.synthetic, "'default' or a JSON bimodal spec file");
  cmd->add_option("--weights", f.weights, "Weight tensor file, rows x cols");
  cmd->add_option("--strategy", f.strategies, "mea-dwi, mea-fwi, sea-dwa-fwi, sea-dwa-dwi (repeatable)");
  cmd->add_option("--baseline", f.baseline, "Baseline strategy for reductions (default mea-dwi)");
  cmd->add_option("--seed", f.seed, "Seed for synthetic inputs and weights");
  cmd->add_option("--cols", f.cols, "Logical weight columns");
  cmd->add_option("--calls", f.calls, "Synthetic macro calls");
  cmd->add_option("--out", f.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seacim: FP16 analog CIM macro simulator (SEA/DWA vs MEA, DWI/FWI)"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "Compare strategies on tensors or synthetic inputs");
  add_common(sim, sim_flags);

  std::vector<std::string> profile_inputs;
  std::string profile_out = ".";
  auto* prof = app.add_subcommand("profile", "Exponent histograms per tensor");
  prof->add_option("--input", profile_inputs, "Tensor files")->required();
  prof->add_option("--out", profile_out, "Output directory");

  CommonFlags sweep_flags;
  std::string grid_path;
  auto* sweep = app.add_subcommand("sweep", "Grid sweep over policy, shared exponents, ADC mode and skip flags");
  add_common(sweep, sweep_flags);
  sweep->add_option("--grid", grid_path, "JSON object of axis -> values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags);
    if (*prof) return cmd_profile(profile_inputs, profile_out);
    if (*sweep) return cmd_sweep(sweep_flags, grid_path);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
