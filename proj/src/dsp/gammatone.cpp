#include "aad/dsp.hpp"

#include "aad/error.hpp"

#include <cmath>
#include <complex>

namespace aad::dsp {

double erb_rate(double hz) { return 21.4 * std::log10(1.0 + 0.00437 * hz); }
double erb_rate_to_hz(double erbs) { return (std::pow(10.0, erbs / 21.4) - 1.0) / 0.00437; }
double erb_bandwidth(double hz) { return 24.7 * (4.37 * hz / 1000.0 + 1.0); }

double GammatoneBank::max_pole_radius() const {
    double r = 0.0;
    for (const auto& q : resonators) r = std::max(r, std::sqrt(q.a2));  // complex pair: |p|^2 = a2
    return r;
}

GammatoneBank make_gammatone_bank(double sample_rate_hz, std::size_t n_filters, double f_low_hz,
                                  double f_high_hz, int order) {
    if (n_filters < 2) throw ConfigError("gammatone bank needs at least 2 filters");
    if (!(f_low_hz > 0 && f_low_hz < f_high_hz && f_high_hz < sample_rate_hz / 2))
        throw ConfigError("gammatone band edges must satisfy 0 < low < high < Nyquist");
    if (order < 1) throw ConfigError("gammatone order must be >= 1");

    GammatoneBank bank;
    bank.n_filters = n_filters;
    bank.f_low_hz = f_low_hz;
    bank.f_high_hz = f_high_hz;
    bank.order = order;
    bank.sample_rate_hz = sample_rate_hz;

    const double e_lo = erb_rate(f_low_hz);
    const double e_hi = erb_rate(f_high_hz);
    for (std::size_t k = 0; k < n_filters; ++k) {
        const double e = e_lo + (e_hi - e_lo) * static_cast<double>(k) / static_cast<double>(n_filters - 1);
        double cf = erb_rate_to_hz(e);
        if (k == 0) cf = f_low_hz;
        if (k + 1 == n_filters) cf = f_high_hz;
        bank.center_freqs_hz.push_back(cf);

        // All-pole resonator: conjugate poles at r * exp(+-j theta), with the
        // pole radius set by the 1.019 * ERB bandwidth of a gammatone.
        const double theta = 2.0 * M_PI * cf / sample_rate_hz;
        const double r = std::exp(-2.0 * M_PI * 1.019 * erb_bandwidth(cf) / sample_rate_hz);
        kernels::Biquad q{1.0, 0.0, 0.0, -2.0 * r * std::cos(theta), r * r};
        bank.resonators.push_back(q);

        const std::complex<double> z1 = std::polar(1.0, -theta);
        const double mag = 1.0 / std::abs(1.0 + q.a1 * z1 + q.a2 * z1 * z1);
        bank.gains.push_back(1.0 / std::pow(mag, order));
    }
    return bank;
}

TimeSeries gammatone_analyze(const TimeSeries& audio, const GammatoneBank& bank) {
    if (std::abs(audio.sample_rate_hz - bank.sample_rate_hz) > 1e-6)
        throw ConfigError("gammatone bank expects " + std::to_string(bank.sample_rate_hz) + " Hz audio, got " +
                          std::to_string(audio.sample_rate_hz) + " Hz");
    if (audio.channels() != 1) throw ValidationError("gammatone_analyze expects mono audio");
    if (!audio.matrix.all_finite()) throw ValidationError("gammatone_analyze: non-finite audio samples");

    const std::size_t T = audio.samples();
    const std::size_t K = bank.n_filters;
    const auto x = audio.matrix.column(0);

    std::vector<kernels::Biquad> cascade;
    cascade.reserve(K * static_cast<std::size_t>(bank.order));
    for (std::size_t k = 0; k < K; ++k)
        for (int s = 0; s < bank.order; ++s) cascade.push_back(bank.resonators[k]);

    std::vector<double> out(T * K);
    kernels::omp::biquad_bank(x, T, cascade, static_cast<std::size_t>(bank.order), bank.gains, out);
    return TimeSeries(from_column_major(out, T, K), audio.sample_rate_hz);
}

}  // namespace aad::dsp
