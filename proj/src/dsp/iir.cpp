#include "aad/dsp.hpp"

#include "aad/error.hpp"
#include "aad/log.hpp"
#include "kernels_common.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace aad::dsp {

namespace {

using kernels::Biquad;

// Bilinear transform of H(s) = (B0 s^2 + B1 s + B2) / (s^2 + A1 s + A2).
Biquad bilinear(double B0, double B1, double B2, double A1, double A2, double fs) {
    const double K = 2.0 * fs;
    const double K2 = K * K;
    const double d0 = K2 + A1 * K + A2;
    Biquad q;
    q.b0 = (B0 * K2 + B1 * K + B2) / d0;
    q.b1 = (2.0 * B2 - 2.0 * B0 * K2) / d0;
    q.b2 = (B0 * K2 - B1 * K + B2) / d0;
    q.a1 = (2.0 * A2 - 2.0 * K2) / d0;
    q.a2 = (K2 - A1 * K + A2) / d0;
    return q;
}

// Analog Butterworth pole pairs at radius wa (upper half plane only).
std::vector<std::complex<double>> butterworth_pole_pairs(int order, double wa) {
    if (order < 2 || order % 2 != 0) throw ConfigError("Butterworth order must be even and >= 2");
    std::vector<std::complex<double>> poles;
    for (int k = 0; k < order / 2; ++k) {
        const double theta = M_PI * (2.0 * k + order + 1) / (2.0 * order);
        poles.push_back(wa * std::polar(1.0, theta));
    }
    return poles;
}

double prewarp(double cutoff_hz, double fs) { return 2.0 * fs * std::tan(M_PI * cutoff_hz / fs); }

// State of one section after a long constant input of unit level.
std::pair<double, double> steady_state(const Biquad& q) {
    const double g = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    return {(q.b1 + q.b2) - (q.a1 + q.a2) * g, q.b2 - q.a2 * g};
}

void run_with_init(const Sos& sos, std::vector<double>& y) {
    if (y.empty()) return;
    double level = y.front();
    for (const auto& q : sos) {
        auto [z1, z2] = steady_state(q);
        z1 *= level;
        z2 *= level;
        level *= (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
        for (auto& v : y) {
            const double in = v;
            const double out = q.b0 * in + z1;
            z1 = q.b1 * in - q.a1 * out + z2;
            z2 = q.b2 * in - q.a2 * out;
            v = out;
        }
    }
}

double max_pole_radius(const Sos& sos) {
    double r = 0.0;
    for (const auto& q : sos) {
        // roots of z^2 + a1 z + a2
        const std::complex<double> disc = std::sqrt(std::complex<double>(q.a1 * q.a1 - 4.0 * q.a2));
        r = std::max({r, std::abs((-q.a1 + disc) / 2.0), std::abs((-q.a1 - disc) / 2.0)});
    }
    return r;
}

}  // namespace

Sos butterworth_lowpass(int order, double cutoff_hz, double fs) {
    if (!(cutoff_hz > 0 && cutoff_hz < fs / 2)) throw ConfigError("low-pass cutoff must lie in (0, Nyquist)");
    const double wa = prewarp(cutoff_hz, fs);
    Sos sos;
    for (const auto& p : butterworth_pole_pairs(order, wa))
        sos.push_back(bilinear(0, 0, std::norm(p), -2.0 * p.real(), std::norm(p), fs));
    return sos;
}

Sos butterworth_highpass(int order, double cutoff_hz, double fs) {
    if (!(cutoff_hz > 0 && cutoff_hz < fs / 2)) throw ConfigError("high-pass cutoff must lie in (0, Nyquist)");
    const double wa = prewarp(cutoff_hz, fs);
    Sos sos;
    for (const auto& p : butterworth_pole_pairs(order, wa))
        sos.push_back(bilinear(1, 0, 0, -2.0 * p.real(), std::norm(p), fs));
    return sos;
}

Biquad notch_biquad(double notch_hz, double quality, double fs) {
    if (!(notch_hz > 0 && notch_hz < fs / 2))
        throw ConfigError("notch frequency " + std::to_string(notch_hz) + " Hz is not below Nyquist (" +
                          std::to_string(fs / 2) + " Hz)");
    if (!(quality > 0)) throw ConfigError("notch quality must be positive");
    const double w0 = 2.0 * M_PI * notch_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * quality);
    const double a0 = 1.0 + alpha;
    return {1.0 / a0, -2.0 * std::cos(w0) / a0, 1.0 / a0, -2.0 * std::cos(w0) / a0, (1.0 - alpha) / a0};
}

double sos_gain(const Sos& sos, double freq_hz, double fs) {
    const std::complex<double> z1 = std::polar(1.0, -2.0 * M_PI * freq_hz / fs);
    const std::complex<double> z2 = z1 * z1;
    double g = 1.0;
    for (const auto& q : sos) g *= std::abs((q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2));
    return g;
}

void sos_filter(const Sos& sos, std::span<double> x) {
    for (const auto& q : sos) kernels::detail::run_biquad(q, x);
}

void sos_filtfilt(const Sos& sos, std::span<double> x) {
    const std::size_t n = x.size();
    if (n < 2 || sos.empty()) return;
    // Pad long enough for the slowest pole to decay by ~1e-9.
    const double r = max_pole_radius(sos);
    std::size_t pad = r > 0 && r < 1 ? static_cast<std::size_t>(std::ceil(std::log(1e-9) / std::log(r))) : 3;
    pad = std::min(std::max(pad, 3 * (2 * sos.size() + 1)), n - 1);

    std::vector<double> ext(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
    std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
    for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

    run_with_init(sos, ext);
    std::reverse(ext.begin(), ext.end());
    run_with_init(sos, ext);
    std::reverse(ext.begin(), ext.end());
    std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n),
              x.begin());
}

TimeSeries filtfilt_series(const Sos& sos, const TimeSeries& x) {
    const std::size_t T = x.samples(), C = x.channels();
    auto cols = to_column_major(x.matrix);
#pragma omp parallel for schedule(dynamic, 1) if (C > 1)
    for (long long c = 0; c < static_cast<long long>(C); ++c)
        sos_filtfilt(sos, std::span<double>(cols).subspan(static_cast<std::size_t>(c) * T, T));
    return TimeSeries(from_column_major(cols, T, C), x.sample_rate_hz);
}

void FilterConfig::validate(double fs) const {
    const double nyq = fs / 2.0;
    if (!(lowpass_hz > 0 && lowpass_hz < nyq))
        throw ConfigError("lowpass_hz " + std::to_string(lowpass_hz) + " must lie in (0, Nyquist=" +
                          std::to_string(nyq) + ")");
    if (highpass_hz < 0 || (highpass_hz > 0 && !(highpass_hz < lowpass_hz)))
        throw ConfigError("highpass_hz must satisfy 0 <= highpass_hz < lowpass_hz");
    if (order < 2 || order % 2 != 0) throw ConfigError("filter order must be even and >= 2");
}

TimeSeries notch_filter(const TimeSeries& x, double notch_hz, double quality) {
    const Sos sos{notch_biquad(notch_hz, quality, x.sample_rate_hz)};
    return filtfilt_series(sos, x);
}

TimeSeries band_limit(const TimeSeries& x, const FilterConfig& cfg) {
    cfg.validate(x.sample_rate_hz);
    Sos sos = butterworth_lowpass(cfg.order, cfg.lowpass_hz, x.sample_rate_hz);
    if (cfg.highpass_hz > 0) {
        const Sos hp = butterworth_highpass(cfg.order, cfg.highpass_hz, x.sample_rate_hz);
        sos.insert(sos.end(), hp.begin(), hp.end());
    }
    if (cfg.zero_phase) return filtfilt_series(sos, x);
    TimeSeries out = x;
    auto cols = to_column_major(x.matrix);
    for (std::size_t c = 0; c < x.channels(); ++c)
        sos_filter(sos, std::span<double>(cols).subspan(c * x.samples(), x.samples()));
    out.matrix = from_column_major(cols, x.samples(), x.channels());
    return out;
}

TimeSeries average_reference(const TimeSeries& x) {
    TimeSeries out = x;
    const std::size_t C = x.channels();
    if (C == 0) return out;
    for (std::size_t t = 0; t < x.samples(); ++t) {
        auto row = out.matrix.row(t);
        double mean = 0.0;
        for (float v : row) mean += v;
        mean /= static_cast<double>(C);
        for (auto& v : row) v = static_cast<float>(v - mean);
    }
    return out;
}

ClipResult artifact_clip(const TimeSeries& x, double k_mad) {
    if (!(k_mad > 0)) throw ConfigError("k_mad must be positive");
    const std::size_t T = x.samples(), C = x.channels();
    ClipResult res{x, 0.0, {}};
    std::size_t replaced = 0;
    for (std::size_t c = 0; c < C; ++c) {
        auto col = x.matrix.column(c);
        if (col.empty()) continue;
        auto tmp = col;
        auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(T / 2);
        std::nth_element(tmp.begin(), mid, tmp.end());
        const double median = *mid;
        for (auto& v : tmp) v = std::abs(v - median);
        std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(T / 2), tmp.end());
        const double mad = tmp[T / 2];
        if (mad == 0.0) {
            res.skipped_channels.push_back(c);
            log_warn("artifact_clip_skip").kv("channel", c).kv("reason", "mad_zero");
            continue;
        }
        const double limit = k_mad * mad;
        std::vector<bool> bad(T);
        bool any = false;
        for (std::size_t t = 0; t < T; ++t) {
            bad[t] = std::abs(col[t] - median) > limit;
            any = any || bad[t];
        }
        if (!any) continue;
        std::size_t t = 0;
        while (t < T) {
            if (!bad[t]) {
                ++t;
                continue;
            }
            std::size_t end = t;
            while (end < T && bad[end]) ++end;
            const bool has_left = t > 0, has_right = end < T;
            for (std::size_t u = t; u < end; ++u) {
                double v;
                if (has_left && has_right) {
                    const double f = static_cast<double>(u - (t - 1)) / static_cast<double>(end - (t - 1));
                    v = col[t - 1] + f * (col[end] - col[t - 1]);
                } else if (has_left) {
                    v = col[t - 1];
                } else if (has_right) {
                    v = col[end];
                } else {
                    v = median;
                }
                res.series.matrix(u, c) = static_cast<float>(v);
            }
            replaced += end - t;
            t = end;
        }
    }
    res.replaced_fraction = T * C > 0 ? static_cast<double>(replaced) / static_cast<double>(T * C) : 0.0;
    return res;
}

}  // namespace aad::dsp
