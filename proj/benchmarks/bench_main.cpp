#include <benchmark/benchmark.h>

#include "ionmirror/corrector.hpp"
#include "ionmirror/evaluation.hpp"
#include "ionmirror/layout.hpp"
#include "ionmirror/trap.hpp"

namespace {

using namespace ionmirror;

const layout::LayoutParams kLayout{};

void BM_TraceFan(benchmark::State& state) {
    const auto quartic = geometry::SagProfile::polynomial(
        {0.0, 0.0, 0.0, 0.0,
         corrector::quartic_coefficient(kLayout.mirror_radius, kLayout.corrector_index())});
    const auto sys = layout::build_system(kLayout, &quartic);
    const int fan = static_cast<int>(state.range(0));
    for (auto _ : state) {
        double acc = 0.0;
        for (int i = 1; i <= fan; ++i) {
            const double h = kLayout.aperture_radius * i / fan;
            acc += geometry::trace(sys, layout::aim_at_mirror(kLayout, h)).ray.u;
        }
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * fan);
}
BENCHMARK(BM_TraceFan)->Arg(64)->Arg(256)->Arg(1024);

void BM_DeriveCorrector(benchmark::State& state) {
    corrector::SynthesisParams params;
    params.fan_rays = static_cast<int>(state.range(0));
    params.n_grid = 257;
    for (auto _ : state) {
        benchmark::DoNotOptimize(corrector::derive_corrector(kLayout, params));
    }
}
BENCHMARK(BM_DeriveCorrector)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SpotSize(benchmark::State& state) {
    const auto sys = evaluation::variant_system(kLayout, evaluation::Variant::Quartic, nullptr);
    evaluation::ImagingStage stage;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evaluation::spot_size(sys, stage, 0.0, 0.0, static_cast<int>(state.range(0)),
                                  kLayout));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpotSize)->Arg(128)->Arg(512);

void BM_OrbitCycles(benchmark::State& state) {
    trap::TrapSystem t = trap::TrapSystem::reference_default();
    t.plane_distance_mm = 5.0;
    trap::OrbitParams params;
    params.duration_cycles = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(trap::integrate_orbit(t, params));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * params.steps_per_cycle);
}
BENCHMARK(BM_OrbitCycles)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EquilibriumShift(benchmark::State& state) {
    trap::TrapSystem t = trap::TrapSystem::reference_default();
    t.plane_distance_mm = 5.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(trap::equilibrium_shift(t));
    }
}
BENCHMARK(BM_EquilibriumShift);

}  // namespace

BENCHMARK_MAIN();
