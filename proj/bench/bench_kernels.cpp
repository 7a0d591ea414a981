// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "tflab/analysis.hpp"
#include "tflab/kernels.hpp"
#include "tflab/texpr.hpp"

using namespace tflab;
using texpr::Expr;
using texpr::Program;

namespace {

const Expr kMap = texpr::parse("x + (x*x | 5) + 4*((x ^ 3) & (x*x*x))");

void BM_successor_table_serial(benchmark::State& st) {
    const Program p(kMap, static_cast<unsigned>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::successor_table_serial(p));
    st.SetItemsProcessed(st.iterations() * (int64_t{1} << st.range(0)));
}

void BM_successor_table(benchmark::State& st) {
    const Program p(kMap, static_cast<unsigned>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::successor_table(p));
    st.SetItemsProcessed(st.iterations() * (int64_t{1} << st.range(0)));
}

void BM_compat_violation_serial(benchmark::State& st) {
    const unsigned w = static_cast<unsigned>(st.range(0));
    const auto table = kernels::successor_table(Program(kMap, w));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::compat_violation_serial(table, w));
}

void BM_compat_violation(benchmark::State& st) {
    const unsigned w = static_cast<unsigned>(st.range(0));
    const auto table = kernels::successor_table(Program(kMap, w));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::compat_violation(table, w));
}

struct DiffPrograms {
    Program f;
    Program fd;
};

DiffPrograms diff_programs(unsigned width) {
    // A map whose relation holds, so the check runs over the whole space.
    const Expr f = texpr::parse("x + (x*x | 5)");
    const auto d = texpr::derivative(f, 1);
    std::vector<Expr> with{f};
    with.insert(with.end(), d.partials.begin(), d.partials.end());
    return {Program(f, width), Program(with, width)};
}

void BM_differential_check_serial(benchmark::State& st) {
    const unsigned w = static_cast<unsigned>(st.range(0));
    const auto p = diff_programs(w);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::differential_check_serial(p.f, p.fd, w - 2, 2));
}

void BM_differential_check(benchmark::State& st) {
    const unsigned w = static_cast<unsigned>(st.range(0));
    const auto p = diff_programs(w);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::differential_check(p.f, p.fd, w - 2, 2));
}

void BM_shifted_sum_serial(benchmark::State& st) {
    const Program p(kMap, static_cast<unsigned>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::shifted_sum_serial(p));
}

void BM_shifted_sum(benchmark::State& st) {
    const Program p(kMap, static_cast<unsigned>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::shifted_sum(p));
}

void BM_lc_gf2(benchmark::State& st) {
    BitSeq s(static_cast<std::size_t>(st.range(0)));
    std::uint64_t v = 0x9e3779b97f4a7c15ull;
    for (std::size_t i = 0; i < s.size(); ++i) {
        v ^= v << 13, v ^= v >> 7, v ^= v << 17;
        s.set(i, v & 1);
    }
    for (auto _ : st) benchmark::DoNotOptimize(analysis::lc_gf2(s));
}

}  // namespace

BENCHMARK(BM_successor_table_serial)->DenseRange(16, 22, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_successor_table)->DenseRange(16, 22, 3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compat_violation_serial)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_compat_violation)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_differential_check_serial)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_differential_check)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shifted_sum_serial)->Arg(22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shifted_sum)->Arg(22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lc_gf2)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
