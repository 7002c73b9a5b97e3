#pragma once

#include "aad/kernels.hpp"

#include <span>
#include <vector>

namespace aad::kernels::detail {

/// Tabulated Kaiser-windowed sinc, linearly interpolated.
struct SincTable {
    static constexpr double kPointsPerCrossing = 2048.0;
    explicit SincTable(const SincResampler& p);
    double operator()(double t) const noexcept;

    SincResampler params;
    double step = 0;
    std::vector<double> values;
};

double resample_one(std::span<const double> col, std::size_t T_in, const SincTable& k, std::size_t out_index);

/// In-place direct form II transposed, zero initial state.
inline void run_biquad(const Biquad& q, std::span<double> y) {
    double z1 = 0.0, z2 = 0.0;
    for (auto& v : y) {
        const double in = v;
        const double out = q.b0 * in + z1;
        z1 = q.b1 * in - q.a1 * out + z2;
        z2 = q.b2 * in - q.a2 * out;
        v = out;
    }
}

}  // namespace aad::kernels::detail
