// Hot-path timings: pair assembly, energy/gradient sweeps, modulars, tail,
// one Caccioppoli gap, and a small end-to-end minimize.  Shared state is
// built once; each benchmark touches a realistic mid-size 1D grid.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "nlo/degiorgi.hpp"
#include "nlo/energy.hpp"
#include "nlo/grid.hpp"
#include "nlo/growth.hpp"
#include "nlo/solve.hpp"

using namespace nlo;

namespace {

struct Bench {
    std::shared_ptr<const GridDomain> dom;
    GridFunction u;
    QuadratureTable table;
    GrowthFunction gf = GrowthFunction::sum(2.0, 3.0);
    KernelCoefficient k = KernelCoefficient::one();

    Bench() {
        dom = std::make_shared<GridDomain>(build_grid(1, 0.03125, 1.0, 4.0));
        u = GridFunction(dom, [](Point p) {
            const double r = std::abs(p[0]);
            return std::max(0.0, 2.0 - r) * std::cos(3.0 * r);
        });
        table = pair_weights(*dom, 0.5);
    }
};

const Bench& state() {
    static Bench b;
    return b;
}

void bm_pair_assembly(benchmark::State& st) {
    const auto& b = state();
    for (auto _ : st) {
        auto t = pair_weights(*b.dom, 0.5);
        benchmark::DoNotOptimize(t.w.data());
    }
    st.counters["pairs"] = static_cast<double>(state().table.size());
}
BENCHMARK(bm_pair_assembly);

void bm_energy(benchmark::State& st) {
    const auto& b = state();
    for (auto _ : st) {
        const double e = energy_If(b.gf, b.k, b.u, b.table);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(bm_energy);

void bm_gradient(benchmark::State& st) {
    const auto& b = state();
    for (auto _ : st) {
        auto g = energy_gradient(b.gf, b.k, b.u, b.table);
        benchmark::DoNotOptimize(g.data());
    }
}
BENCHMARK(bm_gradient);

void bm_modular_wsf(benchmark::State& st) {
    const auto& b = state();
    std::vector<int> region;
    for (int i = 0; i < b.dom->size(); ++i)
        if (b.dom->interior(i)) region.push_back(i);
    const auto kind = ModularKind::wsf(region, 0.5);
    for (auto _ : st) {
        const double m = modular(kind, b.gf, b.u);
        benchmark::DoNotOptimize(m);
    }
}
BENCHMARK(bm_modular_wsf);

void bm_tail(benchmark::State& st) {
    const auto& b = state();
    const int x0 = b.dom->node_at(0, 0);
    for (auto _ : st) {
        const auto t = tail_fprime(b.gf, b.u, x0, 0.5, 0.5);
        benchmark::DoNotOptimize(t.tail);
    }
}
BENCHMARK(bm_tail);

void bm_caccioppoli(benchmark::State& st) {
    const auto& b = state();
    const int x0 = b.dom->node_at(0, 0);
    for (auto _ : st) {
        const auto rep = caccioppoli_gap(b.gf, b.u, 0.5, x0, 0.4, 0.8, 0.5);
        benchmark::DoNotOptimize(rep.c_min);
    }
}
BENCHMARK(bm_caccioppoli);

void bm_minimize_small(benchmark::State& st) {
    auto dom = std::make_shared<GridDomain>(build_grid(1, 0.125, 1.0, 4.0));
    GridFunction ext(dom, [](Point p) { return std::max(0.0, 2.0 - std::abs(p[0])); });
    for (auto _ : st) {
        auto res = minimize(GrowthFunction::power(2.0), KernelCoefficient::one(), ext, ext, 0.5);
        benchmark::DoNotOptimize(res.report.final_energy);
        st.counters["iters"] = res.report.iterations;
    }
}
BENCHMARK(bm_minimize_small)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
