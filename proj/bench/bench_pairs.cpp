// Serial reference against the OpenMP kernels on random systems of growing size.
#include "cvp/build.hpp"
#include "cvp/jets.hpp"
#include "cvp/mass.hpp"
#include "cvp/optimize.hpp"

#include <benchmark/benchmark.h>

using namespace cvp;

namespace {

StaticSystem sized(int n)
{
    SystemSpec sp;
    sp.points = n;
    sp.ambient = 4;
    sp.seed = 17;
    return random_system(sp);
}

template <Exec E>
void self_pairs(benchmark::State& st)
{
    const StaticSystem s = sized(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(self_table(s, E));
    st.SetComplexityN(st.range(0));
}

template <Exec E>
void cross_pairs(benchmark::State& st)
{
    const StaticSystem s = sized(static_cast<int>(st.range(0)));
    SystemSpec sp;
    sp.points = static_cast<int>(st.range(0));
    sp.ambient = 4;
    sp.seed = 18;
    const StaticSystem t = random_system(sp);
    for (auto _ : st) benchmark::DoNotOptimize(pair_table(t, s, E));
}

template <Exec E>
void jet_pairs(benchmark::State& st)
{
    const StaticSystem s = sized(static_cast<int>(st.range(0)));
    Jet u;
    u.scalars = RVec::Ones(s.size());
    for (int i = 0; i < s.size(); ++i) u.directions.push_back(s.point(i).matrix);
    for (auto _ : st) benchmark::DoNotOptimize(jet_table(s, u, {}, E));
}

} // namespace

BENCHMARK(self_pairs<Exec::serial>)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(self_pairs<Exec::parallel>)->RangeMultiplier(2)->Range(8, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(cross_pairs<Exec::serial>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(cross_pairs<Exec::parallel>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(jet_pairs<Exec::serial>)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(jet_pairs<Exec::parallel>)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
