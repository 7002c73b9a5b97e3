#include "aad/features.hpp"

#include "aad/error.hpp"

#include <algorithm>
#include <cmath>

namespace aad::features {

TimeSeries envelope_full_rate(const TimeSeries& audio, const dsp::GammatoneBank& bank) {
    const TimeSeries bands = dsp::gammatone_analyze(audio, bank);
    const std::size_t T = bands.samples();
    const std::size_t K = bands.channels();
    MatrixF32 env(T, 1);
    for (std::size_t t = 0; t < T; ++t) {
        double acc = 0.0;
        for (float v : bands.matrix.row(t)) acc += std::pow(std::abs(static_cast<double>(v)), kEnvelopePower);
        env(t, 0) = static_cast<float>(acc / static_cast<double>(K));
    }
    return TimeSeries(std::move(env), bands.sample_rate_hz);
}

TimeSeries extract_envelope(const TimeSeries& audio, const dsp::GammatoneBank& bank) {
    TimeSeries env = dsp::resample(envelope_full_rate(audio, bank), kFeatureRateHz);
    // Interpolation ringing may dip just below zero; the envelope is a magnitude.
    for (auto& v : env.matrix.data()) v = std::max(v, 0.0f);
    return env;
}

TimeSeries extract_envelope(const TimeSeries& audio) {
    static const dsp::GammatoneBank bank = dsp::make_gammatone_bank(kAudioRateHz);
    return extract_envelope(audio, bank);
}

}  // namespace aad::features
