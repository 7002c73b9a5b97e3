#include "aad/decoder.hpp"

#include "aad/error.hpp"

#include <algorithm>
#include <cmath>

namespace aad::decoder {

int LagConfig::first_lag() const { return static_cast<int>(std::lround(t_min_s * fs_hz)); }

std::size_t LagConfig::n_lags() const {
    return static_cast<std::size_t>(std::lround((t_max_s - t_min_s) * fs_hz)) + 1;
}

void LagConfig::validate() const {
    if (!(fs_hz > 0)) throw ConfigError("lag window: sample rate must be positive");
    if (!(t_max_s >= t_min_s)) throw ConfigError("lag window: t_max must not precede t_min");
}

std::vector<double> LagConfig::delays_ms() const {
    std::vector<double> out(n_lags());
    for (std::size_t l = 0; l < out.size(); ++l)
        out[l] = 1000.0 * (first_lag() + static_cast<int>(l)) / fs_hz;
    return out;
}

namespace {

struct RowRange {
    long long begin, end;  // stimulus rows [begin, end)
};

RowRange design_rows(std::size_t T, const LagConfig& cfg) {
    const auto TT = static_cast<long long>(T);
    if (cfg.edge == EdgeMode::zero_pad) return {0, TT};
    const kernels::LagRange r = cfg.range();
    return {std::max(0LL, -static_cast<long long>(r.first)), std::min(TT, TT - r.last())};
}

void check_pair(const TimeSeries& eeg, const TimeSeries& target, std::size_t C, std::size_t D,
                const LagConfig& cfg) {
    if (eeg.channels() != C)
        throw ValidationError("EEG has " + std::to_string(eeg.channels()) + " channels, expected " +
                              std::to_string(C));
    if (target.channels() != D)
        throw ValidationError("target has " + std::to_string(target.channels()) + " dims, expected " +
                              std::to_string(D));
    if (eeg.samples() != target.samples())
        throw ValidationError("EEG and target lengths differ (" + std::to_string(eeg.samples()) + " vs " +
                              std::to_string(target.samples()) + ")");
    if (std::abs(eeg.sample_rate_hz - cfg.fs_hz) > 1e-9 || std::abs(target.sample_rate_hz - cfg.fs_hz) > 1e-9)
        throw ValidationError("series rate does not match the lag window rate " + std::to_string(cfg.fs_hz) + " Hz");
}

}  // namespace

MatrixF32 build_lagged_design(const TimeSeries& eeg, const LagConfig& cfg) {
    cfg.validate();
    const std::size_t T = eeg.samples(), C = eeg.channels(), L = cfg.n_lags();
    const auto TT = static_cast<long long>(T);
    MatrixF32 X(T, L * C);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t l = 0; l < L; ++l) {
            const long long s = static_cast<long long>(t) + cfg.first_lag() + static_cast<long long>(l);
            if (s < 0 || s >= TT) continue;
            const auto src = eeg.matrix.row(static_cast<std::size_t>(s));
            std::copy(src.begin(), src.end(), X.row(t).begin() + static_cast<std::ptrdiff_t>(l * C));
        }
    return X;
}

CovarianceAccumulator::CovarianceAccumulator(std::size_t channels, std::size_t dims, LagConfig lags)
    : channels_(channels), dims_(dims), lags_(lags) {
    lags_.validate();
    if (channels == 0 || dims == 0) throw ValidationError("accumulator needs at least one channel and one dim");
    const auto P = static_cast<Eigen::Index>(lags_.n_lags() * channels);
    xtx_ = Eigen::MatrixXd::Zero(P, P);
    xty_ = Eigen::MatrixXd::Zero(P, static_cast<Eigen::Index>(dims));
    sx_ = Eigen::VectorXd::Zero(P);
    sy_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims));
}

void CovarianceAccumulator::accumulate(const TimeSeries& eeg, const TimeSeries& target, CovarianceMethod method) {
    check_pair(eeg, target, channels_, dims_, lags_);
    const std::size_t T = eeg.samples(), C = channels_, D = dims_, L = lags_.n_lags();
    const auto TT = static_cast<long long>(T);
    const RowRange rows = design_rows(T, lags_);
    if (rows.end <= rows.begin)
        throw ValidationError("trial of " + std::to_string(T) + " samples is shorter than the lag window");
    const kernels::LagRange lr = lags_.range();
    const std::size_t P = L * C;

    const std::vector<double> x = to_column_major(eeg.matrix);
    std::vector<double> y = to_column_major(target.matrix);
    // Rows outside the design range contribute nothing.
    for (std::size_t d = 0; d < D; ++d)
        for (long long t = 0; t < TT; ++t)
            if (t < rows.begin || t >= rows.end) y[d * T + static_cast<std::size_t>(t)] = 0.0;

    // Sums of the design columns, via per-channel prefix sums.
    std::vector<double> prefix(T + 1);
    for (std::size_t c = 0; c < C; ++c) {
        prefix[0] = 0.0;
        for (std::size_t t = 0; t < T; ++t) prefix[t + 1] = prefix[t] + x[c * T + t];
        for (std::size_t l = 0; l < L; ++l) {
            const long long a = lr.first + static_cast<long long>(l);
            const long long lo = std::clamp(rows.begin + a, 0LL, TT);
            const long long hi = std::clamp(rows.end + a, 0LL, TT);
            sx_(static_cast<Eigen::Index>(l * C + c)) += hi > lo ? prefix[hi] - prefix[lo] : 0.0;
        }
    }
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t t = 0; t < T; ++t) sy_(static_cast<Eigen::Index>(d)) += y[d * T + t];

    std::vector<double> xty(P * D);
    kernels::omp::lagged_cross_target(x, T, C, lr, y, D, xty);
    for (std::size_t p = 0; p < P; ++p)
        for (std::size_t d = 0; d < D; ++d)
            xty_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d)) += xty[p * D + d];

    if (method == CovarianceMethod::dense) {
        const auto n_rows = static_cast<std::size_t>(rows.end - rows.begin);
        std::vector<double> design(n_rows * P, 0.0);
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t c = 0; c < C; ++c) {
                double* col = design.data() + (l * C + c) * n_rows;
                for (long long t = rows.begin; t < rows.end; ++t) {
                    const long long s = t + lr.first + static_cast<long long>(l);
                    if (s >= 0 && s < TT) col[t - rows.begin] = x[c * T + static_cast<std::size_t>(s)];
                }
            }
        std::vector<double> gram(P * P);
        kernels::omp::dense_gram(design, n_rows, P, gram);
        xtx_ += Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            gram.data(), static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
    } else {
        // Entry (l1 c1, l2 c2) is sum_u x_c1(u) x_c2(u + delta), delta = l2 - l1,
        // over u in [begin + a1, end - 1 + a1] intersected with the support of
        // the full cross-correlation R(delta). Trimmed head/tail products are
        // subtracted from R, each at most a lag-window long.
        const std::size_t max_lag = L - 1;
        const std::size_t width = 2 * max_lag + 1;
        std::vector<double> R(C * C * width);
        kernels::omp::lag_cross_correlation(x, T, C, max_lag, R);

#pragma omp parallel for schedule(dynamic, 1)
        for (long long pair = 0; pair < static_cast<long long>(C * C); ++pair) {
            const std::size_t c1 = static_cast<std::size_t>(pair) / C, c2 = static_cast<std::size_t>(pair) % C;
            const double* x1 = x.data() + c1 * T;
            const double* x2 = x.data() + c2 * T;
            for (std::size_t l1 = 0; l1 < L; ++l1) {
                const long long a1 = lr.first + static_cast<long long>(l1);
                for (std::size_t l2 = 0; l2 < L; ++l2) {
                    const long long delta = static_cast<long long>(l2) - static_cast<long long>(l1);
                    const long long full_lo = std::max(0LL, -delta);
                    const long long full_hi = std::min(TT - 1, TT - 1 - delta);
                    const long long lo = std::max(full_lo, rows.begin + a1);
                    const long long hi = std::min(full_hi, rows.end - 1 + a1);
                    double v = 0.0;
                    if (lo <= hi) {
                        v = R[static_cast<std::size_t>(pair) * width + static_cast<std::size_t>(delta) + max_lag];
                        for (long long u = full_lo; u < lo; ++u) v -= x1[u] * x2[u + delta];
                        for (long long u = hi + 1; u <= full_hi; ++u) v -= x1[u] * x2[u + delta];
                    }
                    const auto i = static_cast<Eigen::Index>(l1 * C + c1);
                    const auto j = static_cast<Eigen::Index>(l2 * C + c2);
                    xtx_(i, j) += v;
                }
            }
        }
    }
    n_ += static_cast<std::size_t>(rows.end - rows.begin);
    ++trials_;
}

void CovarianceAccumulator::check_compatible(const CovarianceAccumulator& other) const {
    if (other.channels_ != channels_ || other.dims_ != dims_ || other.lags_.n_lags() != lags_.n_lags() ||
        other.lags_.first_lag() != lags_.first_lag() || other.lags_.edge != lags_.edge)
        throw ValidationError("covariance accumulators have different shapes or lag windows");
}

CovarianceAccumulator& CovarianceAccumulator::operator+=(const CovarianceAccumulator& other) {
    check_compatible(other);
    xtx_ += other.xtx_;
    xty_ += other.xty_;
    sx_ += other.sx_;
    sy_ += other.sy_;
    n_ += other.n_;
    trials_ += other.trials_;
    return *this;
}

CovarianceAccumulator& CovarianceAccumulator::operator-=(const CovarianceAccumulator& other) {
    check_compatible(other);
    if (other.n_ > n_ || other.trials_ > trials_)
        throw ValidationError("cannot remove more data than the accumulator holds");
    xtx_ -= other.xtx_;
    xty_ -= other.xty_;
    sx_ -= other.sx_;
    sy_ -= other.sy_;
    n_ -= other.n_;
    trials_ -= other.trials_;
    return *this;
}

Eigen::MatrixXd CovarianceAccumulator::centered_xtx() const {
    if (n_ == 0) throw ValidationError("covariance accumulator is empty");
    Eigen::MatrixXd out = xtx_ - sx_ * sx_.transpose() / static_cast<double>(n_);
    return (out + out.transpose()) * 0.5;
}

Eigen::MatrixXd CovarianceAccumulator::centered_xty() const {
    if (n_ == 0) throw ValidationError("covariance accumulator is empty");
    return xty_ - sx_ * sy_.transpose() / static_cast<double>(n_);
}

}  // namespace aad::decoder
