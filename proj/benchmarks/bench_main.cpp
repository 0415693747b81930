#include <benchmark/benchmark.h>

#include "klb/bessel.hpp"
#include "klb/kloosterman.hpp"
#include "klb/petersson.hpp"

using namespace klb;

static void BM_Bruteforce(benchmark::State& state) {
    const u64 c = static_cast<u64>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eval_bruteforce(2, 3, c).value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Bruteforce)->Arg(45)->Arg(1001)->Arg(19999)->Arg(225225)->Complexity();

static void BM_Multiplicative(benchmark::State& state) {
    const u64 c = static_cast<u64>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eval_multiplicative(2, 3, c).value);
}
BENCHMARK(BM_Multiplicative)->Arg(45)->Arg(1001)->Arg(19999)->Arg(225225);

static void BM_Certificate(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(certify_lower_bound(2, 7, 1999 * 9).theorem_bound);
}
BENCHMARK(BM_Certificate);

// order, x as a percentage of the order
static void BM_BesselJ(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    const double x = order * state.range(1) / 100.0;
    for (auto _ : state) benchmark::DoNotOptimize(bessel_j(order, x).value);
}
BENCHMARK(BM_BesselJ)
    ->Args({1, 50000})
    ->Args({21, 100})
    ->Args({237, 100})
    ->Args({237, 60})
    ->Args({999, 100})
    ->Args({999, 300})
    ->Unit(benchmark::kMicrosecond);

static void BM_VerifyThm12(benchmark::State& state) {
    const auto ns = find_admissible(15, 238, Mode::thm12);
    TraceInstance inst;
    inst.n = ns.front();
    inst.level = 15;
    inst.k = 238;
    for (auto _ : state) benchmark::DoNotOptimize(verify(inst, Mode::thm12).verdict);
}
BENCHMARK(BM_VerifyThm12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
