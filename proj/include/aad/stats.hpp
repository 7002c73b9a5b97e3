#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

namespace aad {

/// Pearson correlation; nullopt when either input has zero variance.
inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n) return std::nullopt;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0 || sbb <= 0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace aad
