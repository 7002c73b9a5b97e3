#pragma once

// Hot inner loops. Each kernel exists twice with identical signatures:
//   kernels::serial  plain reference loops, used by tests as the oracle
//   kernels::omp     OpenMP-parallel versions used by the library
// Inputs are column-major double buffers: channel c occupies [c*T, (c+1)*T).

#include <cstddef>
#include <span>

namespace aad::kernels {

/// Lag offsets a_l = first + l for l in [0, count).
struct LagRange {
    int first = 0;
    std::size_t count = 1;
    int last() const noexcept { return first + static_cast<int>(count) - 1; }
};

/// Second-order section in direct form II transposed; a0 == 1.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

/// Windowed-sinc interpolation parameters for arbitrary-ratio resampling.
struct SincResampler {
    double source_hz = 0;
    double target_hz = 0;
    double cutoff_hz = 0;
    double half_width_s = 0;
    double kaiser_beta = 8.6;
};

namespace serial {
// R[(c1*C + c2)*(2*max_lag+1) + (d+max_lag)] = sum_u x_c1(u) x_c2(u+d) over valid u.
void lag_cross_correlation(std::span<const double> x, std::size_t T, std::size_t C, std::size_t max_lag,
                           std::span<double> out);

// out[(l*C + c)*D + d] = sum_t x_c(t + a_l) y_d(t), with x zero outside [0, T).
void lagged_cross_target(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                         std::span<const double> y, std::size_t D, std::span<double> out);

// out = A^T A for column-major A (rows x P); full symmetric P x P, row-major.
void dense_gram(std::span<const double> a, std::size_t rows, std::size_t P, std::span<double> out);

// out(t, d) = bias_d + sum_{l,c} w[(l*C + c)*D + d] x_c(t + a_l); out row-major T x D.
void lagged_apply(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                  std::span<const double> w, std::span<const double> bias, std::size_t D,
                  std::span<double> out);

// One cascade of `sections_per_channel` biquads per output channel, all fed
// the same input, scaled by gains[k]; out column-major T x K.
void biquad_bank(std::span<const double> x, std::size_t T, std::span<const Biquad> sections,
                 std::size_t sections_per_channel, std::span<const double> gains, std::span<double> out);

// Resamples each of C columns to T_out samples.
void sinc_resample(std::span<const double> x, std::size_t T_in, std::size_t C, const SincResampler& p,
                   std::size_t T_out, std::span<double> out);
}  // namespace serial

namespace omp {
// R[(c1*C + c2)*(2*max_lag+1) + (d+max_lag)] = sum_u x_c1(u) x_c2(u+d) over valid u.
void lag_cross_correlation(std::span<const double> x, std::size_t T, std::size_t C, std::size_t max_lag,
                           std::span<double> out);

// out[(l*C + c)*D + d] = sum_t x_c(t + a_l) y_d(t), with x zero outside [0, T).
void lagged_cross_target(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                         std::span<const double> y, std::size_t D, std::span<double> out);

// out = A^T A for column-major A (rows x P); full symmetric P x P, row-major.
void dense_gram(std::span<const double> a, std::size_t rows, std::size_t P, std::span<double> out);

// out(t, d) = bias_d + sum_{l,c} w[(l*C + c)*D + d] x_c(t + a_l); out row-major T x D.
void lagged_apply(std::span<const double> x, std::size_t T, std::size_t C, LagRange lags,
                  std::span<const double> w, std::span<const double> bias, std::size_t D,
                  std::span<double> out);

// One cascade of `sections_per_channel` biquads per output channel, all fed
// the same input, scaled by gains[k]; out column-major T x K.
void biquad_bank(std::span<const double> x, std::size_t T, std::span<const Biquad> sections,
                 std::size_t sections_per_channel, std::span<const double> gains, std::span<double> out);

// Resamples each of C columns to T_out samples.
void sinc_resample(std::span<const double> x, std::size_t T_in, std::size_t C, const SincResampler& p,
                   std::size_t T_out, std::span<double> out);
}  // namespace omp

double kaiser_sinc(double t, const SincResampler& p);

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();
void set_thread_count(int n);

}  // namespace aad::kernels
