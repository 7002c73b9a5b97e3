#pragma once

#include "aad/decoder.hpp"
#include "aad/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aad::eval {

enum class DecoderMode { attended, unattended };
std::string_view mode_name(DecoderMode mode);
DecoderMode parse_decoder_mode(std::string_view name);

inline const std::vector<double> kDefaultWindowSizes{1, 2, 5, 10, 20, 30, 60};

struct SampleRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

/// floor(T / W) non-overlapping windows from t = 0; the partial tail is dropped.
std::vector<SampleRange> tile_windows(std::size_t samples, std::size_t window);

/// Per-dimension Pearson correlation over the window, averaged across dims.
/// A zero-variance dimension contributes 0 and increments *zero_variance.
double window_correlation(const TimeSeries& predicted, const TimeSeries& candidate, SampleRange window,
                          std::size_t* zero_variance = nullptr);

/// Attended: correct iff c_att >= c_unatt. Unattended: correct iff c_unatt >= c_att.
bool decide_window(double corr_attended, double corr_unattended, DecoderMode mode);

struct WindowDecision {
    std::string trial_id;
    std::size_t window_index = 0;
    double window_size_s = 0;
    double corr_attended = 0;
    double corr_unattended = 0;
    bool attended_chosen = false;
    bool correct = false;
    bool tie = false;
};

struct EvalTrial {
    std::string trial_id;
    const TimeSeries* eeg;
    const TimeSeries* attended;
    const TimeSeries* unattended;
};

/// Per window size outcome of one decoder over a subject's test trials.
struct ModeResult {
    double window_s = 0;
    std::size_t n_windows = 0;
    std::size_t n_correct = 0;
    std::size_t n_ties = 0;
    std::vector<double> trial_accuracy;  // trials that produced at least one window
    double accuracy() const { return n_windows ? static_cast<double>(n_correct) / n_windows : 0.0; }
};

struct ModeEvaluation {
    std::vector<ModeResult> per_window;  // same order as the requested sizes, skipped sizes omitted
    std::vector<WindowDecision> decisions;
    std::size_t zero_variance_dims = 0;
};

ModeEvaluation evaluate_mode(const decoder::Decoder& decoder, std::span<const EvalTrial> trials,
                             std::span<const double> window_sizes_s, DecoderMode mode);

struct RowKey {
    std::string dataset;
    std::string subject;
    std::string feature;
    std::string layer_mode;  // "ll", "fml" or "-" for shallow features
};

struct ReportRow {
    RowKey key;
    std::string decoder_mode;
    double window_s = 0;
    double accuracy = 0;
    double std = 0;  // across trials for subject rows, across subjects for aggregate rows
    std::size_t n_windows = 0;
    std::size_t n_ties = 0;
};

inline constexpr std::string_view kAggregateSubject = "ALL";

/// Both decoders over the same test trials; one row per (mode, window size).
std::vector<ReportRow> evaluate_subject(const decoder::Decoder& attended_decoder,
                                        const decoder::Decoder& unattended_decoder, std::span<const EvalTrial> trials,
                                        std::span<const double> window_sizes_s, const RowKey& key);

struct EvaluationReport {
    std::vector<ReportRow> rows;

    void validate() const;
    /// Appends one "ALL" row per (dataset, feature, layer_mode, mode, window) group.
    void add_aggregates();
    std::vector<ReportRow> subject_rows() const;
};

/// Exact binomial quantiles of Bin(n, p) as accuracies: an equal-tailed
/// interval holding at least `confidence` of the mass.
std::pair<double, double> binomial_interval(std::size_t n, double p = 0.5, double confidence = 0.95);

/// Smallest k/n with P(Bin(n, 0.5) >= k) < alpha, capped at 1.0.
double chance_level(std::size_t n_windows, double alpha = 0.05);

// ---- rendering -------------------------------------------------------------

std::string render_csv(const EvaluationReport& report);
EvaluationReport parse_csv(std::string_view text);

/// Features x datasets with "Attended Decoder" / "Unattended Decoder" column
/// groups and an Avg column; cells "mean ± std" over subjects.
std::string render_table(const EvaluationReport& report, double window_s);

/// Display name of a feature spec, e.g. "tera_ll" -> "Tera_ll".
std::string feature_display_name(std::string_view feature);

/// Writes report.csv, table.txt and accuracy.{dataset}.{feature}.{mode}.dat
/// curves under `dir`.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

/// Two-column "delay_ms energy" rows.
std::string render_weight_energy(const decoder::Decoder& decoder);

}  // namespace aad::eval
