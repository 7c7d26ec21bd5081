// OpenMP kernels against their serial references.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "seacim/analysis.hpp"
#include "seacim/batch.hpp"
#include "seacim/crossbar.hpp"

namespace {

using namespace seacim;

struct BatchFixture {
  std::vector<std::vector<Fp16>> inputs;
  CrossbarTile tile;
  std::vector<MacroJob> jobs;

  explicit BatchFixture(int n) {
    BimodalSpec spec;
    const auto flat = sample_bimodal(spec, static_cast<std::size_t>(n) * kMaxRows);
    tile = CrossbarTile::program(sample_gaussian(kMaxRows * 8, 0.1, 7), kMaxRows, 8, 16);
    inputs.resize(n);
    for (int i = 0; i < n; ++i) inputs[i].assign(flat.begin() + i * kMaxRows, flat.begin() + (i + 1) * kMaxRows);
    for (const auto& v : inputs) jobs.push_back({v, &tile, std::nullopt});
  }
};

template <bool Parallel>
void BM_Batch(benchmark::State& state) {
  BatchFixture f(static_cast<int>(state.range(0)));
  MacroConfig cfg;
  for (auto _ : state) {
    auto r = Parallel ? run_batch(f.jobs, cfg) : run_batch_serial(f.jobs, cfg);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Batch<false>)->Name("run_batch_serial")->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch<true>)->Name("run_batch")->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

template <bool Parallel>
void BM_Bitline(benchmark::State& state) {
  const int w_s = static_cast<int>(state.range(0));
  const int cols = kMaxRows / w_s;
  const auto tile = CrossbarTile::program(sample_gaussian(kMaxRows * cols, 0.1, 8), kMaxRows, cols, w_s);
  std::mt19937_64 rng(3);
  RowMask active, bits, neg;
  for (int r = 0; r < kMaxRows; ++r) {
    active[r] = rng() % 8 != 0;
    bits[r] = rng() & 1;
    neg[r] = rng() & 1;
  }
  std::vector<StreamSums> out(tile.physical_cols());
  for (auto _ : state) {
    if (Parallel) {
      bitline_cycle(tile, active, bits, neg, out);
    } else {
      bitline_cycle_serial(tile, active, bits, neg, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Bitline<false>)->Name("bitline_cycle_serial")->Arg(11)->Arg(42);
BENCHMARK(BM_Bitline<true>)->Name("bitline_cycle")->Arg(11)->Arg(42);

}  // namespace
BENCHMARK_MAIN();
