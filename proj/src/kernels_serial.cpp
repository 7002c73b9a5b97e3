#include "aad/kernels.hpp"
#include "kernels_common.hpp"

#include <algorithm>
#include <cmath>

namespace aad::kernels {

double kaiser_sinc(double t, const SincResampler& p) {
    const double r = t / p.half_width_s;
    if (std::abs(r) >= 1.0) return 0.0;
    const double arg = 2.0 * p.cutoff_hz * t;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double win = std::cyl_bessel_i(0.0, p.kaiser_beta * std::sqrt(1.0 - r * r)) /
                       std::cyl_bessel_i(0.0, p.kaiser_beta);
    return sinc * win;
}

namespace detail {

SincTable::SincTable(const SincResampler& p) : params(p) {
    // Sampled finely enough that linear interpolation error stays below 1e-7.
    const double zero_crossings = 2.0 * p.cutoff_hz * p.half_width_s;
    const auto n = static_cast<std::size_t>(std::ceil(zero_crossings * kPointsPerCrossing)) + 2;
    step = p.half_width_s / static_cast<double>(n - 2);
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = kaiser_sinc(static_cast<double>(i) * step, p);
}

double SincTable::operator()(double t) const noexcept {
    const double pos = std::abs(t) / step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values.size()) return 0.0;
    const double f = pos - static_cast<double>(i);
    return values[i] + f * (values[i + 1] - values[i]);
}

double resample_one(std::span<const double> col, std::size_t T_in, const SincTable& k, std::size_t out_index) {
    const auto& p = k.params;
    const double t_out = static_cast<double>(out_index) / p.target_hz;
    const auto lo = static_cast<long long>(std::ceil((t_out - p.half_width_s) * p.source_hz));
    const auto hi = static_cast<long long>(std::floor((t_out + p.half_width_s) * p.source_hz));
    const long long j0 = std::max<long long>(0, lo);
    const long long j1 = std::min<long long>(static_cast<long long>(T_in) - 1, hi);
    double acc = 0.0, wsum = 0.0;
    for (long long j = j0; j <= j1; ++j) {
        const double w = k(t_out - static_cast<double>(j) / p.source_hz);
        acc += w * col[static_cast<std::size_t>(j)];
        wsum += w;
    }
    return wsum != 0.0 ? acc / wsum : 0.0;
}

}  // namespace detail

namespace serial {

void lag_cross_correlation(std::span<const double> x, std::size_t T, std::size_t C, std::size_t max_lag,
                           std::span<double> out) {
    const std::size_t width = 2 * max_lag + 1;
    const auto L = static_cast<long long>(max_lag);
    const auto TT = static_cast<long long>(T);
    for (std::size_t c1 = 0; c1 < C; ++c1)
        for (std::size_t c2 = 0; c2 < C; ++c2)
            for (long long d = -L; d <= L; ++d) {
                double acc = 0.0;
                for (long long u = std::max(0LL, -d); u < std::min(TT, TT - d); ++u)
                    acc += x[c1 * T + u] * x[c2 * T + u + d];
                out[(c1 * C + c2) * width + static_cast<std::size_t>(d + L)] = acc;
            }
}

void lagged_cross_target(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                         std::span<const double> y, std::size_t D, std::span<double> out) {
    const auto TT = static_cast<long long>(T);
    for (std::size_t l = 0; l < lags.count; ++l) {
        const long long a = lags.first + static_cast<long long>(l);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t d = 0; d < D; ++d) {
                double acc = 0.0;
                for (long long t = std::max(0LL, -a); t < std::min(TT, TT - a); ++t)
                    acc += x[c * T + t + a] * y[d * T + t];
                out[(l * C + c) * D + d] = acc;
            }
    }
}

void dense_gram(std::span<const double> a, std::size_t rows, std::size_t P, std::span<double> out) {
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = i; j < P; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) acc += a[i * rows + r] * a[j * rows + r];
            out[i * P + j] = acc;
            out[j * P + i] = acc;
        }
}

void lagged_apply(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                  std::span<const double> w, std::span<const double> bias, std::size_t D,
                  std::span<double> out) {
    const auto TT = static_cast<long long>(T);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) {
            double acc = bias[d];
            for (std::size_t l = 0; l < lags.count; ++l) {
                const long long s = static_cast<long long>(t) + lags.first + static_cast<long long>(l);
                if (s < 0 || s >= TT) continue;
                for (std::size_t c = 0; c < C; ++c) acc += w[(l * C + c) * D + d] * x[c * T + s];
            }
            out[t * D + d] = acc;
        }
}

void biquad_bank(std::span<const double> x, std::size_t T, std::span<const Biquad> sections,
                 std::size_t sections_per_channel, std::span<const double> gains, std::span<double> out) {
    const std::size_t K = gains.size();
    for (std::size_t k = 0; k < K; ++k) {
        auto y = out.subspan(k * T, T);
        std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(T), y.begin());
        for (std::size_t s = 0; s < sections_per_channel; ++s)
            detail::run_biquad(sections[k * sections_per_channel + s], y);
        for (auto& v : y) v *= gains[k];
    }
}

void sinc_resample(std::span<const double> x, std::size_t T_in, std::size_t C, const SincResampler& p,
                   std::size_t T_out, std::span<double> out) {
    const detail::SincTable table(p);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < T_out; ++i)
            out[c * T_out + i] = detail::resample_one(x.subspan(c * T_in, T_in), T_in, table, i);
}

}  // namespace serial
}  // namespace aad::kernels
