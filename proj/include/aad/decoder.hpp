#pragma once

// Backward (stimulus-reconstruction) model: time-lagged ridge regression from
// EEG to a stimulus feature series.
//
// Lag convention: lag l uses EEG sample t + a_l to reconstruct stimulus
// sample t, with a_l = round(t_min * fs) + l. The default 0..500 ms at 64 Hz
// gives 33 lags covering EEG that follows the stimulus. Design columns are
// lag-major, channel-minor: column index l * C + c.

#include "aad/kernels.hpp"
#include "aad/matrix.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aad::decoder {

enum class EdgeMode {
    zero_pad,  // every stimulus sample is a design row; out-of-trial EEG reads as 0
    valid,     // only rows whose full lag window lies inside the trial
};

struct LagConfig {
    double t_min_s = 0.0;
    double t_max_s = 0.5;
    double fs_hz = 64.0;
    EdgeMode edge = EdgeMode::zero_pad;

    int first_lag() const;
    std::size_t n_lags() const;
    kernels::LagRange range() const { return {first_lag(), n_lags()}; }
    void validate() const;
    /// Delay in ms of every lag, e.g. 0, 15.625, ..., 500.
    std::vector<double> delays_ms() const;
};

/// T x (n_lags * C), zero-padded outside the trial.
MatrixF32 build_lagged_design(const TimeSeries& eeg, const LagConfig& cfg);

enum class CovarianceMethod {
    structured,  // channel-pair cross-correlations over lags plus edge corrections
    dense,       // explicit design matrix product
};

/// Sufficient statistics of the lagged least-squares problem. Closed under
/// addition and subtraction, so folds can be formed as total - held_out.
class CovarianceAccumulator {
public:
    CovarianceAccumulator(std::size_t channels, std::size_t dims, LagConfig lags);

    void accumulate(const TimeSeries& eeg, const TimeSeries& target,
                    CovarianceMethod method = CovarianceMethod::structured);

    CovarianceAccumulator& operator+=(const CovarianceAccumulator& other);
    CovarianceAccumulator& operator-=(const CovarianceAccumulator& other);
    friend CovarianceAccumulator operator+(CovarianceAccumulator a, const CovarianceAccumulator& b) { return a += b; }
    friend CovarianceAccumulator operator-(CovarianceAccumulator a, const CovarianceAccumulator& b) { return a -= b; }

    std::size_t channels() const noexcept { return channels_; }
    std::size_t dims() const noexcept { return dims_; }
    std::size_t features() const noexcept { return static_cast<std::size_t>(xtx_.rows()); }
    const LagConfig& lag_config() const noexcept { return lags_; }
    std::size_t sample_count() const noexcept { return n_; }
    std::size_t trial_count() const noexcept { return trials_; }
    bool empty() const noexcept { return n_ == 0; }

    const Eigen::MatrixXd& xtx() const noexcept { return xtx_; }
    const Eigen::MatrixXd& xty() const noexcept { return xty_; }
    const Eigen::VectorXd& sum_x() const noexcept { return sx_; }
    const Eigen::VectorXd& sum_y() const noexcept { return sy_; }

    /// XtX - sx sx^T / n, the Gram matrix of the mean-removed design.
    Eigen::MatrixXd centered_xtx() const;
    Eigen::MatrixXd centered_xty() const;

private:
    void check_compatible(const CovarianceAccumulator& other) const;

    std::size_t channels_, dims_;
    LagConfig lags_;
    Eigen::MatrixXd xtx_, xty_;
    Eigen::VectorXd sx_, sy_;
    std::size_t n_ = 0;
    std::size_t trials_ = 0;
};

struct Decoder {
    Eigen::MatrixXd weights;    // (n_lags * C) x D, row l * C + c
    Eigen::VectorXd intercept;  // D
    double lambda = 0.0;
    LagConfig lag_config;
    std::size_t channels = 0;
    std::size_t dims = 0;
    std::string eeg_norm_ref;      // where the EEG normalization stats live
    std::string feature_norm_ref;  // where the target normalization stats live

    double weight(std::size_t lag, std::size_t channel, std::size_t dim) const {
        return weights(static_cast<Eigen::Index>(lag * channels + channel), static_cast<Eigen::Index>(dim));
    }
    void validate() const;
};

/// One symmetric eigendecomposition of the centered XtX, reused for any number
/// of regularization values.
class RidgeSolver {
public:
    explicit RidgeSolver(const CovarianceAccumulator& acc);

    Decoder solve(double lambda) const;
    /// Lambdas must be non-negative and ascending; output order matches input.
    std::vector<Decoder> solve(std::span<const double> lambdas) const;

    const Eigen::VectorXd& eigenvalues() const noexcept { return evals_; }
    double mean_diagonal() const noexcept { return mean_diag_; }

private:
    Eigen::MatrixXd evecs_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd projected_xty_;  // V^T XtY_c
    Eigen::VectorXd mean_x_, mean_y_;
    double mean_diag_ = 0;
    std::size_t channels_, dims_;
    LagConfig lags_;
};

std::vector<Decoder> solve_ridge(const CovarianceAccumulator& acc, std::span<const double> lambdas);

/// Relative multipliers, log-spaced: 13 values from 1e-6 to 1e6.
std::vector<double> default_relative_grid(std::size_t n = 13, double lo = 1e-6, double hi = 1e6);
/// Multiplies a relative grid by mean(diag(centered XtX)).
std::vector<double> scale_lambda_grid(const CovarianceAccumulator& acc, std::span<const double> relative);

TimeSeries reconstruct(const Decoder& decoder, const TimeSeries& eeg);

struct TrialRef {
    const TimeSeries* eeg;
    const TimeSeries* target;
};

struct CvRecord {
    double lambda;
    std::size_t fold;
    double score;  // mean Pearson correlation across feature dims
};

struct CvResult {
    double best_lambda = 0;
    std::size_t best_index = 0;
    std::vector<double> lambdas;
    std::vector<double> mean_scores;  // per lambda, across folds
    std::vector<CvRecord> records;    // lambda-major: |lambdas| x folds
};

/// Leave-one-trial-out cross-validation over absolute lambda values. Ties in
/// the mean score go to the larger lambda.
CvResult loo_cv_lambda(std::span<const TrialRef> trials, std::span<const double> lambdas, const LagConfig& lags);

/// Splits one trial into `pieces` contiguous pseudo-trials.
std::vector<std::pair<TimeSeries, TimeSeries>> segment_trial(const TimeSeries& eeg, const TimeSeries& target,
                                                             std::size_t pieces);

/// e[l] = sum_{c,d} W[l,c,d]^2, normalized to sum 1.
std::vector<double> weight_energy_profile(const Decoder& decoder);

void save_decoder(const Decoder& decoder, const std::filesystem::path& prefix);
Decoder load_decoder(const std::filesystem::path& prefix);

}  // namespace aad::decoder
