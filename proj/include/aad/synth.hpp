#pragma once

// Synthetic forward-model data with known ground truth.
//
// Forward mode:  r(t, c) = sum_{l,d} h_a[l,c,d] s_att,d(t - a_l)
//                        + rho * sum_{l,d} h_u[l,c,d] g(s_unatt,d)(t - a_l)
//                        + sigma * n(t, c)
// Backward mode: s_att(t, d) = sum_{l,c} W[l,c,d] r(t + a_l, c) over the
//                zero-padded trial, i.e. exactly the decoder's own model.

#include "aad/decoder.hpp"
#include "aad/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aad::synth {

enum class Nonlinearity { none, rectify };
enum class Generation { forward, backward };

/// Lag-major kernel: value(l, c, d) at index (l * channels + c) * dims + d.
struct Kernel {
    std::size_t n_lags = 0, channels = 0, dims = 0;
    std::vector<double> values;

    Kernel() = default;
    Kernel(std::size_t lags, std::size_t ch, std::size_t d) : n_lags(lags), channels(ch), dims(d), values(lags * ch * d, 0.0) {}
    double& at(std::size_t l, std::size_t c, std::size_t d) { return values[(l * channels + c) * dims + d]; }
    double at(std::size_t l, std::size_t c, std::size_t d) const { return values[(l * channels + c) * dims + d]; }
    /// Index of the lag carrying the most energy.
    std::size_t peak_lag() const;
    bool is_zero() const;
};

struct KernelShape {
    double peak_lag = 8.0;    // lag index of the bump centre
    double width_lags = 6.0;  // half-width of the raised cosine
    double width_jitter = 0.25;  // relative spread of per-(channel, dim) widths
};

struct SynthConfig {
    std::uint64_t seed = 1;
    std::string dataset_id = "SYN";
    std::size_t n_subjects = 2;
    std::size_t n_trials_per_subject = 10;
    double trial_duration_s = 60.0;
    std::size_t n_eeg_channels = 8;
    std::size_t feature_dims = 1;
    std::string feature_label = "envelope";  // manifest label of the feature streams
    decoder::LagConfig lags{};
    Generation generation = Generation::forward;

    KernelShape attended_shape{8.0, 6.0, 0.25};
    KernelShape unattended_shape{14.0, 6.0, 0.25};
    bool identical_kernels = false;  // h_u = h_a
    bool zero_kernels = false;       // pure-noise EEG
    double rho = 0.5;
    double noise_sigma = 1.0;
    Nonlinearity unattended_nonlinearity = Nonlinearity::none;

    double feature_cutoff_hz = 8.0;
    /// Backward mode EEG: 0 draws white noise, otherwise low-passed at this cutoff.
    double eeg_cutoff_hz = 0.0;

    /// When above the feature rate, EEG is written at this rate with line noise
    /// added so the preprocessing chain has work to do.
    double raw_rate_hz = 0.0;
    double line_noise_hz = 50.0;
    double line_noise_amplitude = 0.0;

    void validate() const;
};

struct SynthTrial {
    std::string trial_id;
    std::string subject_id;
    TimeSeries eeg;         // 64 Hz, or raw_rate_hz when set
    TimeSeries attended;    // 64 Hz, feature_dims columns
    TimeSeries unattended;
};

struct SubjectTruth {
    Kernel attended;    // forward: h_a; backward: W
    Kernel unattended;  // forward: h_u
};

std::string subject_name(std::size_t subject);
std::string trial_name(std::size_t subject, std::size_t trial);

SubjectTruth make_subject_truth(const SynthConfig& cfg, std::size_t subject);

/// Deterministic given (cfg.seed, subject, trial); independent of call order.
SynthTrial generate_trial(const SynthConfig& cfg, const SubjectTruth& truth, std::size_t subject, std::size_t trial);

/// All trials of one subject, generated in parallel.
std::vector<SynthTrial> generate_subject(const SynthConfig& cfg, const SubjectTruth& truth, std::size_t subject);

/// Band-limited unit-variance Gaussian feature process, `dims` columns at 64 Hz.
TimeSeries feature_process(std::size_t samples, std::size_t dims, double cutoff_hz, std::uint64_t seed);

/// Writes manifest.json, eeg/, features/ and truth/ under `dir`.
void write_dataset(const SynthConfig& cfg, const std::filesystem::path& dir);

struct OracleSolution {
    Eigen::MatrixXd weights;    // (n_lags * C) x D, decoder layout
    Eigen::VectorXd intercept;  // D
    std::size_t rank = 0;
    bool rank_deficient = false;  // minimum-norm solution returned
};

/// Brute-force reference: stacks explicit lagged design rows of every trial
/// (plus a ones column) and solves least squares with a rank-revealing
/// complete orthogonal decomposition.
OracleSolution oracle_least_squares(std::span<const decoder::TrialRef> trials, const decoder::LagConfig& lags);

}  // namespace aad::synth
