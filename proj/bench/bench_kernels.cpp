// Serial reference vs OpenMP kernels on decoder-sized inputs.
// Run: build/bench/bench_kernels [--benchmark_filter=...]

#include "aad/dsp.hpp"
#include "aad/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace aad::kernels;

namespace {

std::vector<double> gauss(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

// 60 s at 64 Hz; channel count from the benchmark argument.
constexpr std::size_t kT = 64 * 60;
constexpr LagRange kLags{0, 33};

template <auto Fn>
void bm_lag_cross_correlation(benchmark::State& st) {
    const auto C = static_cast<std::size_t>(st.range(0));
    const auto x = gauss(kT * C, 1);
    std::vector<double> out((2 * (kLags.count - 1) + 1) * C * C);
    for (auto _ : st) {
        Fn(x, kT, C, kLags.count - 1, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Fn>
void bm_lagged_cross_target(benchmark::State& st) {
    const auto C = static_cast<std::size_t>(st.range(0));
    const std::size_t D = 20;
    const auto x = gauss(kT * C, 2);
    const auto y = gauss(kT * D, 3);
    std::vector<double> out(kLags.count * C * D);
    for (auto _ : st) {
        Fn(x, kT, C, kLags, y, D, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Fn>
void bm_dense_gram(benchmark::State& st) {
    const auto C = static_cast<std::size_t>(st.range(0));
    const std::size_t P = C * kLags.count;
    const auto a = gauss(kT * P, 4);
    std::vector<double> out(P * P);
    for (auto _ : st) {
        Fn(a, kT, P, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Fn>
void bm_lagged_apply(benchmark::State& st) {
    const auto C = static_cast<std::size_t>(st.range(0));
    const std::size_t D = 20;
    const auto x = gauss(kT * C, 5);
    const auto w = gauss(kLags.count * C * D, 6);
    const std::vector<double> bias(D, 0.0);
    std::vector<double> out(kT * D);
    for (auto _ : st) {
        Fn(x, kT, C, kLags, w, bias, D, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Fn>
void bm_gammatone_bank(benchmark::State& st) {
    const std::size_t T = 16000 * 2;
    const auto x = gauss(T, 7);
    const auto bank = aad::dsp::make_gammatone_bank();
    std::vector<Biquad> sections;
    for (const auto& r : bank.resonators)
        for (int k = 0; k < bank.order; ++k) sections.push_back(r);
    std::vector<double> out(T * bank.n_filters);
    for (auto _ : st) {
        Fn(x, T, sections, static_cast<std::size_t>(bank.order), bank.gains, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Fn>
void bm_sinc_resample(benchmark::State& st) {
    const auto C = static_cast<std::size_t>(st.range(0));
    const std::size_t T_in = 512 * 60, T_out = 64 * 60;
    const auto x = gauss(T_in * C, 8);
    const SincResampler p{512.0, 64.0, 0.45 * 64.0, 16.0 / (2 * 0.45 * 64.0), 8.6};
    std::vector<double> out(T_out * C);
    for (auto _ : st) {
        Fn(x, T_in, C, p, T_out, out);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(bm_lag_cross_correlation<serial::lag_cross_correlation>)->Name("lag_xcorr/serial")->Arg(16)->Arg(64);
BENCHMARK(bm_lag_cross_correlation<omp::lag_cross_correlation>)->Name("lag_xcorr/omp")->Arg(16)->Arg(64);
BENCHMARK(bm_lagged_cross_target<serial::lagged_cross_target>)->Name("lagged_xty/serial")->Arg(16)->Arg(64);
BENCHMARK(bm_lagged_cross_target<omp::lagged_cross_target>)->Name("lagged_xty/omp")->Arg(16)->Arg(64);
BENCHMARK(bm_dense_gram<serial::dense_gram>)->Name("dense_gram/serial")->Arg(8)->Arg(16);
BENCHMARK(bm_dense_gram<omp::dense_gram>)->Name("dense_gram/omp")->Arg(8)->Arg(16);
BENCHMARK(bm_lagged_apply<serial::lagged_apply>)->Name("lagged_apply/serial")->Arg(16)->Arg(64);
BENCHMARK(bm_lagged_apply<omp::lagged_apply>)->Name("lagged_apply/omp")->Arg(16)->Arg(64);
BENCHMARK(bm_gammatone_bank<serial::biquad_bank>)->Name("gammatone/serial");
BENCHMARK(bm_gammatone_bank<omp::biquad_bank>)->Name("gammatone/omp");
BENCHMARK(bm_sinc_resample<serial::sinc_resample>)->Name("resample/serial")->Arg(16)->Arg(64);
BENCHMARK(bm_sinc_resample<omp::sinc_resample>)->Name("resample/omp")->Arg(16)->Arg(64);

BENCHMARK_MAIN();
