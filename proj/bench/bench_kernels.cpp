// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "pinch/fisher.hpp"
#include "pinch/multi_pa.hpp"

namespace {

using namespace pinch;

struct Fixture {
  SystemConfig cfg;
  Realization scene;
  TransceiverLayout layout;
  GhqRule rule;

  explicit Fixture(int nodes) {
    SystemParams p;
    p.ghq_nodes = nodes;
    cfg = SystemConfig(p);
    Rng rng = Rng::stream(1, 0);
    scene = sample_realization(cfg, rng);
    layout = default_initial_layout(cfg);
    rule = ghq_rule(nodes);
  }
};

void BM_ofim_parallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  auto tx = pass_aperture(f.layout, Side::tx, f.cfg), rx = pass_aperture(f.layout, Side::rx, f.cfg);
  for (auto _ : state) benchmark::DoNotOptimize(ofim(tx, rx, f.scene.prior, f.rule, f.cfg));
}

void BM_ofim_serial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  auto tx = pass_aperture(f.layout, Side::tx, f.cfg), rx = pass_aperture(f.layout, Side::rx, f.cfg);
  for (auto _ : state) benchmark::DoNotOptimize(ofim_serial(tx, rx, f.scene.prior, f.rule, f.cfg));
}

void BM_elementwise_parallel(benchmark::State& state) {
  Fixture f(10);
  ElementwiseFim ef(Side::tx, 1, f.layout, f.scene.prior, f.rule, f.cfg);
  const auto xs = placement_grid(f.cfg.params().region_x, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ef.evaluate_many(xs));
}

void BM_elementwise_serial(benchmark::State& state) {
  Fixture f(10);
  ElementwiseFim ef(Side::tx, 1, f.layout, f.scene.prior, f.rule, f.cfg);
  const auto xs = placement_grid(f.cfg.params().region_x, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ef.evaluate_many_serial(xs));
}

}  // namespace

BENCHMARK(BM_ofim_parallel)->Arg(10)->Arg(32);
BENCHMARK(BM_ofim_serial)->Arg(10)->Arg(32);
BENCHMARK(BM_elementwise_parallel)->Arg(400)->Arg(1000);
BENCHMARK(BM_elementwise_serial)->Arg(400)->Arg(1000);

BENCHMARK_MAIN();
