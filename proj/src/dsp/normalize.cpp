#include "aad/dsp.hpp"

#include "aad/error.hpp"

#include <cmath>

namespace aad::dsp {

NormStats zscore_fit(std::span<const TimeSeries* const> xs) {
    if (xs.empty()) throw ValidationError("zscore_fit: no series given");
    const std::size_t C = xs.front()->channels();
    std::size_t n = 0;
    std::vector<double> sum(C, 0.0);
    for (const auto* x : xs) {
        if (x->channels() != C) throw ValidationError("zscore_fit: column count differs between series");
        for (std::size_t t = 0; t < x->samples(); ++t)
            for (std::size_t c = 0; c < C; ++c) sum[c] += x->matrix(t, c);
        n += x->samples();
    }
    if (n < 2) throw ValidationError("zscore_fit: need at least 2 pooled samples per column");

    NormStats s;
    s.mean.resize(C);
    s.std.resize(C);
    for (std::size_t c = 0; c < C; ++c) s.mean[c] = sum[c] / static_cast<double>(n);
    std::vector<double> ss(C, 0.0);
    for (const auto* x : xs)
        for (std::size_t t = 0; t < x->samples(); ++t)
            for (std::size_t c = 0; c < C; ++c) {
                const double d = x->matrix(t, c) - s.mean[c];
                ss[c] += d * d;
            }
    for (std::size_t c = 0; c < C; ++c) s.std[c] = std::max(std::sqrt(ss[c] / static_cast<double>(n)), kStdFloor);
    return s;
}

NormStats zscore_fit(std::span<const TimeSeries> xs) {
    std::vector<const TimeSeries*> ptrs;
    for (const auto& x : xs) ptrs.push_back(&x);
    return zscore_fit(std::span<const TimeSeries* const>(ptrs));
}

TimeSeries zscore_apply(const TimeSeries& x, const NormStats& stats) {
    if (stats.mean.size() != x.channels() || stats.std.size() != x.channels())
        throw ValidationError("zscore_apply: stats have " + std::to_string(stats.mean.size()) +
                              " columns, series has " + std::to_string(x.channels()));
    TimeSeries out = x;
    for (std::size_t t = 0; t < x.samples(); ++t)
        for (std::size_t c = 0; c < x.channels(); ++c)
            out.matrix(t, c) = static_cast<float>((x.matrix(t, c) - stats.mean[c]) / stats.std[c]);
    return out;
}

MatrixF32 norm_stats_to_matrix(const NormStats& s) {
    MatrixF32 m(2, s.mean.size());
    for (std::size_t c = 0; c < s.mean.size(); ++c) {
        m(0, c) = static_cast<float>(s.mean[c]);
        m(1, c) = static_cast<float>(s.std[c]);
    }
    return m;
}

NormStats norm_stats_from_matrix(const MatrixF32& m) {
    if (m.rows() != 2) throw ValidationError("normalization stats matrix must have 2 rows");
    NormStats s;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        s.mean.push_back(m(0, c));
        s.std.push_back(std::max<double>(m(1, c), kStdFloor));
    }
    return s;
}

}  // namespace aad::dsp
