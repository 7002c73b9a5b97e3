#include "aad/dsp.hpp"

#include "aad/error.hpp"

#include <algorithm>
#include <cmath>

namespace aad::dsp {

TimeSeries resample(const TimeSeries& x, double target_hz, ResampleOptions opts) {
    if (!(target_hz > 0) || !std::isfinite(target_hz))
        throw ConfigError("resample target rate must be positive");
    const double source_hz = x.sample_rate_hz;
    if (std::abs(source_hz - target_hz) < 1e-12) return x;

    const std::size_t T_in = x.samples();
    const std::size_t C = x.channels();
    const auto T_out = static_cast<std::size_t>(std::llround(static_cast<double>(T_in) * target_hz / source_hz));

    kernels::SincResampler p;
    p.source_hz = source_hz;
    p.target_hz = target_hz;
    p.cutoff_hz = opts.cutoff_fraction * std::min(source_hz, target_hz);
    p.half_width_s = opts.zero_crossings / (2.0 * p.cutoff_hz);

    const auto cols = to_column_major(x.matrix);
    std::vector<double> out(T_out * C);
    kernels::omp::sinc_resample(cols, T_in, C, p, T_out, out);
    return TimeSeries(from_column_major(out, T_out, C), target_hz);
}

}  // namespace aad::dsp
