#include "aad/features.hpp"

#include "aad/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

namespace aad::features {

namespace {
constexpr double kMelLinearHz = 200.0 / 3.0;
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearHz;  // 15
const double kMelLogStep = std::log(6.4) / 27.0;
}  // namespace

double hz_to_mel(double hz) {
    if (hz < kMelBreakHz) return hz / kMelLinearHz;
    return kMelBreak + std::log(hz / kMelBreakHz) / kMelLogStep;
}

double mel_to_hz(double mel) {
    if (mel < kMelBreak) return mel * kMelLinearHz;
    return kMelBreakHz * std::exp(kMelLogStep * (mel - kMelBreak));
}

std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg, double sample_rate_hz) {
    if (cfg.n_mels == 0 || !(cfg.f_max_hz > cfg.f_min_hz) || cfg.f_max_hz > sample_rate_hz / 2 + 1e-9)
        throw ConfigError("mel filterbank: invalid band edges");
    const std::size_t n_bins = cfg.n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(cfg.f_min_hz);
    const double mel_hi = hz_to_mel(cfg.f_max_hz);
    std::vector<double> edges(cfg.n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));

    std::vector<std::vector<double>> w(cfg.n_mels, std::vector<double>(n_bins, 0.0));
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        const double norm = 2.0 / (hi - lo);
        for (std::size_t b = 0; b < n_bins; ++b) {
            const double f = sample_rate_hz * static_cast<double>(b) / static_cast<double>(cfg.n_fft);
            const double rising = (f - lo) / (mid - lo);
            const double falling = (hi - f) / (hi - mid);
            w[m][b] = std::max(0.0, std::min(rising, falling)) * norm;
        }
    }
    return w;
}

TimeSeries extract_melspec(const TimeSeries& audio, const MelConfig& cfg) {
    if (audio.channels() != 1) throw ValidationError("extract_melspec expects mono audio");
    if (std::abs(audio.sample_rate_hz - kAudioRateHz) > 1e-6)
        throw ConfigError("extract_melspec expects 16 kHz audio");
    if (cfg.win_length > cfg.n_fft || cfg.hop_length == 0) throw ConfigError("mel: invalid window/hop");
    const std::size_t N = audio.samples();
    if (N < cfg.win_length)
        throw ValidationError("audio (" + std::to_string(N) + " samples) is shorter than one " +
                              std::to_string(cfg.win_length) + "-sample window");

    const auto fb = mel_filterbank(cfg, audio.sample_rate_hz);
    const std::size_t n_bins = cfg.n_fft / 2 + 1;
    const std::size_t frames = N / cfg.hop_length;

    // Periodic Hann of win_length, centered inside the n_fft frame.
    std::vector<double> window(cfg.n_fft, 0.0);
    const std::size_t offset = (cfg.n_fft - cfg.win_length) / 2;
    for (std::size_t i = 0; i < cfg.win_length; ++i)
        window[offset + i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(cfg.win_length));

    const auto x = audio.matrix.column(0);
    MatrixF32 out(frames, cfg.n_mels);
    const auto half = static_cast<long long>(cfg.n_fft / 2);
#pragma omp parallel
    {
        Eigen::FFT<double> fft;
        std::vector<double> frame(cfg.n_fft);
        std::vector<std::complex<double>> spec;
        std::vector<double> power(n_bins);
#pragma omp for schedule(static)
        for (long long f = 0; f < static_cast<long long>(frames); ++f) {
            const long long start = f * static_cast<long long>(cfg.hop_length) - half;
            for (std::size_t i = 0; i < cfg.n_fft; ++i) {
                const long long s = start + static_cast<long long>(i);
                frame[i] = (s >= 0 && s < static_cast<long long>(N)) ? x[static_cast<std::size_t>(s)] * window[i] : 0.0;
            }
            fft.fwd(spec, frame);
            for (std::size_t b = 0; b < n_bins; ++b) power[b] = std::norm(spec[b]);
            for (std::size_t m = 0; m < cfg.n_mels; ++m) {
                double e = 0.0;
                for (std::size_t b = 0; b < n_bins; ++b) e += fb[m][b] * power[b];
                out(static_cast<std::size_t>(f), m) = static_cast<float>(std::log1p(e));
            }
        }
    }
    return TimeSeries(std::move(out), audio.sample_rate_hz / static_cast<double>(cfg.hop_length));
}

}  // namespace aad::features
