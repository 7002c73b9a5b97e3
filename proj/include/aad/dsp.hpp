#pragma once

#include "aad/kernels.hpp"
#include "aad/matrix.hpp"

#include <optional>
#include <span>
#include <vector>

namespace aad::dsp {

// ---- IIR design and zero-phase filtering ----------------------------------

using Sos = std::vector<kernels::Biquad>;

Sos butterworth_lowpass(int order, double cutoff_hz, double fs);
Sos butterworth_highpass(int order, double cutoff_hz, double fs);
kernels::Biquad notch_biquad(double notch_hz, double quality, double fs);

/// Complex frequency response magnitude of a cascade at `freq_hz`.
double sos_gain(const Sos& sos, double freq_hz, double fs);

/// Forward-backward filtering of one channel with odd-extension padding and
/// steady-state initial conditions.
void sos_filtfilt(const Sos& sos, std::span<double> x);
/// Causal single pass with zero initial state.
void sos_filter(const Sos& sos, std::span<double> x);

TimeSeries filtfilt_series(const Sos& sos, const TimeSeries& x);

// ---- preprocessing ---------------------------------------------------------

struct FilterConfig {
    int notch_hz = 50;
    double notch_quality = 30.0;
    /// 0 disables the high-pass edge (literal 0-8 Hz low-pass mode).
    double highpass_hz = 0.1;
    double lowpass_hz = 8.0;
    int order = 4;
    bool zero_phase = true;

    void validate(double fs) const;
};

TimeSeries notch_filter(const TimeSeries& x, double notch_hz, double quality = 30.0);
TimeSeries band_limit(const TimeSeries& x, const FilterConfig& cfg);

/// Subtracts the instantaneous cross-channel mean from every channel.
TimeSeries average_reference(const TimeSeries& x);

struct ClipResult {
    TimeSeries series;
    double replaced_fraction = 0.0;
    std::vector<std::size_t> skipped_channels;  // MAD == 0
};

/// Per channel, samples with |x - median| > k_mad * MAD are replaced by
/// linear interpolation between the nearest retained neighbours.
ClipResult artifact_clip(const TimeSeries& x, double k_mad = 8.0);

// ---- resampling ------------------------------------------------------------

struct ResampleOptions {
    double cutoff_fraction = 0.45;  // of min(source, target) rate
    double zero_crossings = 16.0;
};

/// Output rows = round(rows * target / source). Windowed-sinc interpolation
/// with the anti-alias cutoff at cutoff_fraction * min(source, target).
TimeSeries resample(const TimeSeries& x, double target_hz, ResampleOptions opts = {});

// ---- normalization -------------------------------------------------------------

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;
};

inline constexpr double kStdFloor = 1e-8;

/// Pooled per-column mean and population std (denominator N); zero variance
/// is floored at kStdFloor.
NormStats zscore_fit(std::span<const TimeSeries> xs);
NormStats zscore_fit(std::span<const TimeSeries* const> xs);
TimeSeries zscore_apply(const TimeSeries& x, const NormStats& stats);

/// Rows are mean / std.
MatrixF32 norm_stats_to_matrix(const NormStats& s);
NormStats norm_stats_from_matrix(const MatrixF32& m);

// ---- gammatone -------------------------------------------------------------

double erb_rate(double hz);          // Glasberg & Moore ERB-number scale
double erb_rate_to_hz(double erbs);
double erb_bandwidth(double hz);     // 24.7 * (4.37 f / 1000 + 1)

struct GammatoneBank {
    std::size_t n_filters = 28;
    double f_low_hz = 50.0;
    double f_high_hz = 5000.0;
    int order = 4;
    double sample_rate_hz = 16000.0;
    std::vector<double> center_freqs_hz;
    std::vector<kernels::Biquad> resonators;  // one 2-pole resonator per filter, cascaded `order` times
    std::vector<double> gains;                // unity gain at each center frequency

    /// Largest pole radius across the bank; < 1 for a stable bank.
    double max_pole_radius() const;
};

GammatoneBank make_gammatone_bank(double sample_rate_hz = 16000.0, std::size_t n_filters = 28,
                                  double f_low_hz = 50.0, double f_high_hz = 5000.0, int order = 4);

/// Channel k = audio through filter k; output length equals input length.
TimeSeries gammatone_analyze(const TimeSeries& audio, const GammatoneBank& bank);

}  // namespace aad::dsp
