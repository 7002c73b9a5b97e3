#include "aad/decoder.hpp"

#include "aad/error.hpp"
#include "aad/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aad::decoder {

void Decoder::validate() const {
    const auto P = static_cast<Eigen::Index>(lag_config.n_lags() * channels);
    if (weights.rows() != P || weights.cols() != static_cast<Eigen::Index>(dims) ||
        intercept.size() != static_cast<Eigen::Index>(dims))
        throw ValidationError("decoder weights/intercept do not match its lag window, channels and dims");
    if (!weights.allFinite() || !intercept.allFinite()) throw NumericalError("decoder contains non-finite values");
}

RidgeSolver::RidgeSolver(const CovarianceAccumulator& acc)
    : channels_(acc.channels()), dims_(acc.dims()), lags_(acc.lag_config()) {
    if (acc.sample_count() < 2) throw ValidationError("ridge fit needs at least two samples");
    const Eigen::MatrixXd xtx = acc.centered_xtx();
    if (!xtx.allFinite() || !acc.xty().allFinite()) throw NumericalError("covariance contains non-finite values");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the lagged covariance failed");
    evecs_ = eig.eigenvectors();
    // A PSD matrix; negative values are roundoff.
    evals_ = eig.eigenvalues().cwiseMax(0.0);
    projected_xty_ = evecs_.transpose() * acc.centered_xty();
    const double n = static_cast<double>(acc.sample_count());
    mean_x_ = acc.sum_x() / n;
    mean_y_ = acc.sum_y() / n;
    mean_diag_ = xtx.diagonal().mean();
}

Decoder RidgeSolver::solve(double lambda) const {
    if (!(lambda >= 0) || !std::isfinite(lambda)) throw ConfigError("ridge lambda must be finite and >= 0");
    const Eigen::Index P = evals_.size();
    const double top = P > 0 ? evals_.maxCoeff() : 0.0;
    const double tol = top * static_cast<double>(P) * std::numeric_limits<double>::epsilon();
    Eigen::VectorXd inv(P);
    std::size_t dropped = 0;
    for (Eigen::Index i = 0; i < P; ++i) {
        const double denom = evals_(i) + lambda;
        if (lambda == 0.0 && evals_(i) <= tol) {
            inv(i) = 0.0;
            ++dropped;
        } else {
            inv(i) = denom > 0 ? 1.0 / denom : 0.0;
        }
    }
    if (dropped > 0)
        log_warn("ridge_pseudo_inverse").kv("lambda", 0).kv("dropped_directions", dropped).kv("features", P);

    Decoder d;
    d.weights = evecs_ * (inv.asDiagonal() * projected_xty_);
    d.intercept = mean_y_ - d.weights.transpose() * mean_x_;
    d.lambda = lambda;
    d.lag_config = lags_;
    d.channels = channels_;
    d.dims = dims_;
    return d;
}

std::vector<Decoder> RidgeSolver::solve(std::span<const double> lambdas) const {
    if (lambdas.empty()) throw ConfigError("empty lambda grid");
    if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ConfigError("lambda grid must be ascending");
    std::vector<Decoder> out;
    out.reserve(lambdas.size());
    for (double l : lambdas) out.push_back(solve(l));
    return out;
}

std::vector<Decoder> solve_ridge(const CovarianceAccumulator& acc, std::span<const double> lambdas) {
    return RidgeSolver(acc).solve(lambdas);
}

std::vector<double> default_relative_grid(std::size_t n, double lo, double hi) {
    if (n == 0 || !(lo > 0) || !(hi >= lo)) throw ConfigError("invalid lambda grid bounds");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1));
    return g;
}

std::vector<double> scale_lambda_grid(const CovarianceAccumulator& acc, std::span<const double> relative) {
    const double scale = acc.centered_xtx().diagonal().mean();
    if (!(scale > 0)) throw NumericalError("lagged covariance has a non-positive mean diagonal");
    std::vector<double> out(relative.begin(), relative.end());
    for (auto& v : out) v *= scale;
    return out;
}

TimeSeries reconstruct(const Decoder& decoder, const TimeSeries& eeg) {
    decoder.validate();
    if (eeg.channels() != decoder.channels)
        throw ValidationError("EEG has " + std::to_string(eeg.channels()) + " channels, decoder expects " +
                              std::to_string(decoder.channels));
    if (std::abs(eeg.sample_rate_hz - decoder.lag_config.fs_hz) > 1e-9)
        throw ValidationError("EEG rate does not match the decoder rate");
    const std::size_t T = eeg.samples(), D = decoder.dims;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = decoder.weights;
    const std::vector<double> x = to_column_major(eeg.matrix);
    std::vector<double> out(T * D);
    kernels::omp::lagged_apply(x, T, decoder.channels, decoder.lag_config.range(),
                               std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                               std::span<const double>(decoder.intercept.data(), D), D, out);
    MatrixF32 m(T, D);
    for (std::size_t i = 0; i < T * D; ++i) m.data()[i] = static_cast<float>(out[i]);
    return TimeSeries(std::move(m), eeg.sample_rate_hz);
}

std::vector<double> weight_energy_profile(const Decoder& decoder) {
    decoder.validate();
    const std::size_t L = decoder.lag_config.n_lags();
    std::vector<double> e(L, 0.0);
    for (std::size_t l = 0; l < L; ++l)
        e[l] = decoder.weights
                   .middleRows(static_cast<Eigen::Index>(l * decoder.channels),
                               static_cast<Eigen::Index>(decoder.channels))
                   .squaredNorm();
    double total = 0.0;
    for (double v : e) total += v;
    if (!(total > 0)) throw NumericalError("weight energy profile of an all-zero decoder is undefined");
    for (auto& v : e) v /= total;
    return e;
}

}  // namespace aad::decoder
