#include <benchmark/benchmark.h>

#include "spinfreeze/bessel.hpp"
#include "spinfreeze/engine.hpp"
#include "spinfreeze/protocol.hpp"
#include "spinfreeze/spectral.hpp"

using namespace spinfreeze;

namespace {

constexpr double kAreaPeak2 = 3.0542369282271404;

GridSpec default_grid() { return GridSpec{}; }

}  // namespace

static void BM_BesselJ2(benchmark::State& state) {
  double x = 3.054;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_j(2, x));
    x += 1e-9;
  }
}
BENCHMARK(BM_BesselJ2);

static void BM_BesselJHighOrder(benchmark::State& state) {
  double x = 30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_j(20, x));
    x += 1e-9;
  }
}
BENCHMARK(BM_BesselJHighOrder);

static void BM_FindFirstPeak(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(find_first_peak(2).x_peak);
}
BENCHMARK(BM_FindFirstPeak);

static void BM_InitState(benchmark::State& state) {
  const GridSpec grid = default_grid();
  for (auto _ : state) {
    PhaseSpaceState s(grid);
    benchmark::DoNotOptimize(s.time());
  }
}
BENCHMARK(BM_InitState)->Unit(benchmark::kMillisecond);

static void BM_FreeEvolve(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  for (auto _ : state) s.free_evolve(0.5);
}
BENCHMARK(BM_FreeEvolve)->Unit(benchmark::kMillisecond);

static void BM_InstantImprint(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  for (auto _ : state) s.apply_lattice(0.485, kAreaPeak2, 0.0, 1);
}
BENCHMARK(BM_InstantImprint)->Unit(benchmark::kMillisecond);

static void BM_PulseSlice(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  for (auto _ : state) s.apply_lattice(0.485, kAreaPeak2 / 32, 0.54 / 32, 1);
}
BENCHMARK(BM_PulseSlice)->Unit(benchmark::kMillisecond);

static void BM_Readout(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  s.free_evolve(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(s.readout().intensity);
}
BENCHMARK(BM_Readout)->Unit(benchmark::kMillisecond);

static void BM_VAveragedSpectrum(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  s.apply_lattice(0.485, kAreaPeak2, 0.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(v_averaged_spectrum(s).amplitude.size());
}
BENCHMARK(BM_VAveragedSpectrum)->Unit(benchmark::kMillisecond);

static void BM_KspaceModulate(benchmark::State& state) {
  PhaseSpaceState s(default_grid());
  const KSpectrum spec = v_averaged_spectrum(s);
  for (auto _ : state)
    benchmark::DoNotOptimize(kspace_modulate(spec, 0.5, kAreaPeak2, 20).truncation_tail);
}
BENCHMARK(BM_KspaceModulate)->Unit(benchmark::kMillisecond);

// One full storage point of the extension protocol (two 32-slice pulses).
static void BM_ProtocolPoint(benchmark::State& state) {
  Sequence seq;
  seq.grid = default_grid();
  seq.gamma = 0.0151847;
  seq.tau_seconds = 2.3e-6;
  const Event pulse = Event::modulate(0.485, kAreaPeak2, 0.54, 32);
  seq.events = {Event::store(), pulse, Event::wait(10.0), pulse, Event::readout()};
  for (auto _ : state) benchmark::DoNotOptimize(run_sequence(seq).intensity);
}
BENCHMARK(BM_ProtocolPoint)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
