#include "aad/kernels.hpp"
#include "kernels_common.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace aad::kernels {

int thread_count() { return omp_get_max_threads(); }
void set_thread_count(int n) {
    if (n > 0) omp_set_num_threads(n);
}

namespace omp {

namespace {

inline double dot(const double* a, const double* b, long long n) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (long long i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

void lag_cross_correlation(std::span<const double> x, std::size_t T, std::size_t C, std::size_t max_lag,
                           std::span<double> out) {
    const std::size_t width = 2 * max_lag + 1;
    const auto L = static_cast<long long>(max_lag);
    const auto TT = static_cast<long long>(T);
    const auto pairs = static_cast<long long>(C * C);
#pragma omp parallel for schedule(static)
    for (long long pc = 0; pc < pairs; ++pc) {
        const auto c1 = static_cast<std::size_t>(pc) / C;
        const auto c2 = static_cast<std::size_t>(pc) % C;
        const double* x1 = x.data() + c1 * T;
        const double* x2 = x.data() + c2 * T;
        double* r = out.data() + static_cast<std::size_t>(pc) * width;
        for (long long d = -L; d <= L; ++d) {
            const long long u0 = std::max(0LL, -d);
            const long long u1 = std::min(TT, TT - d);
            r[d + L] = u1 > u0 ? dot(x1 + u0, x2 + u0 + d, u1 - u0) : 0.0;
        }
    }
}

void lagged_cross_target(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                         std::span<const double> y, std::size_t D, std::span<double> out) {
    const auto TT = static_cast<long long>(T);
    const auto n = static_cast<long long>(lags.count * C);
#pragma omp parallel for schedule(static)
    for (long long lc = 0; lc < n; ++lc) {
        const auto l = static_cast<std::size_t>(lc) / C;
        const auto c = static_cast<std::size_t>(lc) % C;
        const long long a = lags.first + static_cast<long long>(l);
        const long long t0 = std::max(0LL, -a);
        const long long t1 = std::min(TT, TT - a);
        for (std::size_t d = 0; d < D; ++d)
            out[static_cast<std::size_t>(lc) * D + d] =
                t1 > t0 ? dot(x.data() + c * T + t0 + a, y.data() + d * T + t0, t1 - t0) : 0.0;
    }
}

void dense_gram(std::span<const double> a, std::size_t rows, std::size_t P, std::span<double> out) {
    const auto PP = static_cast<long long>(P);
    const auto R = static_cast<long long>(rows);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long i = 0; i < PP; ++i)
        for (long long j = i; j < PP; ++j) {
            const double v = dot(a.data() + i * R, a.data() + j * R, R);
            out[static_cast<std::size_t>(i * PP + j)] = v;
            out[static_cast<std::size_t>(j * PP + i)] = v;
        }
}

void lagged_apply(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                  std::span<const double> w, std::span<const double> bias, std::size_t D,
                  std::span<double> out) {
    const auto TT = static_cast<long long>(T);
#pragma omp parallel
    {
        std::vector<double> acc(D);
#pragma omp for schedule(static)
        for (long long t = 0; t < TT; ++t) {
            std::copy(bias.begin(), bias.end(), acc.begin());
            for (std::size_t l = 0; l < lags.count; ++l) {
                const long long s = t + lags.first + static_cast<long long>(l);
                if (s < 0 || s >= TT) continue;
                const double* wl = w.data() + l * C * D;
                for (std::size_t c = 0; c < C; ++c) {
                    const double xv = x[c * T + static_cast<std::size_t>(s)];
                    for (std::size_t d = 0; d < D; ++d) acc[d] += wl[c * D + d] * xv;
                }
            }
            std::copy(acc.begin(), acc.end(), out.begin() + t * static_cast<long long>(D));
        }
    }
}

void biquad_bank(std::span<const double> x, std::size_t T, std::span<const Biquad> sections,
                 std::size_t sections_per_channel, std::span<const double> gains, std::span<double> out) {
    const auto K = static_cast<long long>(gains.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < K; ++k) {
        auto y = out.subspan(static_cast<std::size_t>(k) * T, T);
        std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(T), y.begin());
        for (std::size_t s = 0; s < sections_per_channel; ++s)
            detail::run_biquad(sections[static_cast<std::size_t>(k) * sections_per_channel + s], y);
        const double g = gains[static_cast<std::size_t>(k)];
        for (auto& v : y) v *= g;
    }
}

void sinc_resample(std::span<const double> x, std::size_t T_in, std::size_t C, const SincResampler& p,
                   std::size_t T_out, std::span<double> out) {
    const detail::SincTable table(p);
    const auto n = static_cast<long long>(C * T_out);
#pragma omp parallel for schedule(static)
    for (long long ci = 0; ci < n; ++ci) {
        const auto c = static_cast<std::size_t>(ci) / T_out;
        const auto i = static_cast<std::size_t>(ci) % T_out;
        out[static_cast<std::size_t>(ci)] = detail::resample_one(x.subspan(c * T_in, T_in), T_in, table, i);
    }
}

}  // namespace omp
}  // namespace aad::kernels
