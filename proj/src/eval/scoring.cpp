#include "aad/eval.hpp"

#include "aad/error.hpp"
#include "aad/log.hpp"
#include "aad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace aad::eval {

std::string_view mode_name(DecoderMode mode) {
    return mode == DecoderMode::attended ? "attended" : "unattended";
}

DecoderMode parse_decoder_mode(std::string_view name) {
    if (name == "attended") return DecoderMode::attended;
    if (name == "unattended") return DecoderMode::unattended;
    throw ConfigError("unknown decoder mode '" + std::string(name) + "'");
}

std::vector<SampleRange> tile_windows(std::size_t samples, std::size_t window) {
    if (window == 0) throw ConfigError("window length must be positive");
    std::vector<SampleRange> out;
    for (std::size_t b = 0; b + window <= samples; b += window) out.push_back({b, b + window});
    return out;
}

double window_correlation(const TimeSeries& predicted, const TimeSeries& candidate, SampleRange window,
                          std::size_t* zero_variance) {
    if (predicted.channels() != candidate.channels())
        throw ValidationError("window_correlation: dims differ (" + std::to_string(predicted.channels()) + " vs " +
                              std::to_string(candidate.channels()) + ")");
    if (std::abs(predicted.sample_rate_hz - candidate.sample_rate_hz) > 1e-9)
        throw ValidationError("window_correlation: sample rates differ");
    if (window.end < window.begin || window.end > predicted.samples() || window.end > candidate.samples())
        throw ValidationError("window_correlation: window [" + std::to_string(window.begin) + ", " +
                              std::to_string(window.end) + ") is out of range");
    if (window.size() < 4) throw ValidationError("window_correlation: window shorter than 4 samples");
    const std::size_t D = predicted.channels(), n = window.size();
    std::vector<double> a(n), b(n);
    double total = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = predicted.matrix(window.begin + i, d);
            b[i] = candidate.matrix(window.begin + i, d);
        }
        if (const auto r = pearson(a, b)) total += *r;
        else if (zero_variance) ++*zero_variance;
    }
    return total / static_cast<double>(D);
}

bool decide_window(double corr_attended, double corr_unattended, DecoderMode mode) {
    return mode == DecoderMode::attended ? corr_attended >= corr_unattended : corr_unattended >= corr_attended;
}

ModeEvaluation evaluate_mode(const decoder::Decoder& decoder, std::span<const EvalTrial> trials,
                             std::span<const double> window_sizes_s, DecoderMode mode) {
    if (window_sizes_s.empty()) throw ConfigError("no window sizes given");
    for (double w : window_sizes_s)
        if (!(w > 0)) throw ConfigError("window sizes must be positive");

    std::vector<TimeSeries> recon;
    recon.reserve(trials.size());
    for (const auto& tr : trials) {
        if (tr.attended->samples() != tr.eeg->samples() || tr.unattended->samples() != tr.eeg->samples())
            throw ValidationError("trial " + tr.trial_id + ": EEG and feature lengths differ");
        recon.push_back(decoder::reconstruct(decoder, *tr.eeg));
    }

    ModeEvaluation out;
    for (double w_s : window_sizes_s) {
        ModeResult res;
        res.window_s = w_s;
        for (std::size_t k = 0; k < trials.size(); ++k) {
            const auto& tr = trials[k];
            const auto W = static_cast<std::size_t>(std::lround(w_s * tr.eeg->sample_rate_hz));
            if (W > tr.eeg->samples()) {
                log_warn("window_skipped")
                    .kv("trial", tr.trial_id)
                    .kv("window_s", w_s)
                    .kv("trial_s", tr.eeg->duration_seconds());
                continue;
            }
            std::size_t correct = 0;
            const auto windows = tile_windows(tr.eeg->samples(), W);
            for (std::size_t i = 0; i < windows.size(); ++i) {
                WindowDecision d;
                d.trial_id = tr.trial_id;
                d.window_index = i;
                d.window_size_s = w_s;
                d.corr_attended = window_correlation(recon[k], *tr.attended, windows[i], &out.zero_variance_dims);
                d.corr_unattended =
                    window_correlation(recon[k], *tr.unattended, windows[i], &out.zero_variance_dims);
                d.attended_chosen = d.corr_attended >= d.corr_unattended;
                d.correct = decide_window(d.corr_attended, d.corr_unattended, mode);
                d.tie = d.corr_attended == d.corr_unattended;
                correct += d.correct;
                res.n_ties += d.tie;
                out.decisions.push_back(std::move(d));
            }
            res.n_windows += windows.size();
            res.n_correct += correct;
            res.trial_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(windows.size()));
        }
        if (res.n_windows > 0) out.per_window.push_back(std::move(res));
    }
    if (out.zero_variance_dims > 0) log_warn("zero_variance_windows").kv("dims", out.zero_variance_dims);
    return out;
}

namespace {

std::pair<double, double> mean_std(std::span<const double> v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<ReportRow> evaluate_subject(const decoder::Decoder& attended_decoder,
                                        const decoder::Decoder& unattended_decoder, std::span<const EvalTrial> trials,
                                        std::span<const double> window_sizes_s, const RowKey& key) {
    std::vector<ReportRow> rows;
    for (const auto mode : {DecoderMode::attended, DecoderMode::unattended}) {
        const auto& dec = mode == DecoderMode::attended ? attended_decoder : unattended_decoder;
        const ModeEvaluation ev = evaluate_mode(dec, trials, window_sizes_s, mode);
        for (const auto& r : ev.per_window) {
            ReportRow row;
            row.key = key;
            row.decoder_mode = std::string(mode_name(mode));
            row.window_s = r.window_s;
            row.accuracy = r.accuracy();
            row.std = mean_std(r.trial_accuracy).second;
            row.n_windows = r.n_windows;
            row.n_ties = r.n_ties;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void EvaluationReport::validate() const {
    if (rows.empty()) throw ValidationError("evaluation report is empty");
    for (const auto& r : rows) {
        if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0))
            throw ValidationError("report accuracy outside [0, 1] for subject " + r.key.subject);
        if (r.n_windows == 0) throw ValidationError("report row with zero windows for subject " + r.key.subject);
        for (const auto* s : {&r.key.dataset, &r.key.subject, &r.key.feature, &r.key.layer_mode, &r.decoder_mode})
            if (s->empty() || s->find_first_of(",\n") != std::string::npos)
                throw ValidationError("report key field '" + *s + "' is empty or contains a separator");
    }
}

std::vector<ReportRow> EvaluationReport::subject_rows() const {
    std::vector<ReportRow> out;
    for (const auto& r : rows)
        if (r.key.subject != kAggregateSubject) out.push_back(r);
    return out;
}

void EvaluationReport::add_aggregates() {
    using Key = std::tuple<std::string, std::string, std::string, std::string, double>;
    std::map<Key, std::vector<const ReportRow*>> groups;
    for (const auto& r : rows)
        if (r.key.subject != kAggregateSubject)
            groups[{r.key.dataset, r.key.feature, r.key.layer_mode, r.decoder_mode, r.window_s}].push_back(&r);
    std::vector<ReportRow> extra;
    for (const auto& [k, members] : groups) {
        std::vector<double> acc;
        ReportRow row;
        row.key = {std::get<0>(k), std::string(kAggregateSubject), std::get<1>(k), std::get<2>(k)};
        row.decoder_mode = std::get<3>(k);
        row.window_s = std::get<4>(k);
        for (const auto* m : members) {
            acc.push_back(m->accuracy);
            row.n_windows += m->n_windows;
            row.n_ties += m->n_ties;
        }
        std::tie(row.accuracy, row.std) = mean_std(acc);
        extra.push_back(std::move(row));
    }
    rows.insert(rows.end(), extra.begin(), extra.end());
}

namespace {

std::vector<double> binomial_pmf(std::size_t n, double p) {
    std::vector<double> pmf(n + 1);
    const double N = static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
        const double K = static_cast<double>(k);
        double lp = std::lgamma(N + 1) - std::lgamma(K + 1) - std::lgamma(N - K + 1);
        if (k > 0) lp += K * std::log(p);
        if (k < n) lp += (N - K) * std::log1p(-p);
        pmf[k] = (p == 0.0 && k > 0) || (p == 1.0 && k < n) ? 0.0 : std::exp(lp);
    }
    return pmf;
}

}  // namespace

std::pair<double, double> binomial_interval(std::size_t n, double p, double confidence) {
    if (n == 0) throw ValidationError("binomial_interval: n must be >= 1");
    if (!(p >= 0 && p <= 1) || !(confidence > 0 && confidence < 1))
        throw ConfigError("binomial_interval: p must be in [0, 1] and confidence in (0, 1)");
    const double tail = (1.0 - confidence) / 2.0;
    const auto pmf = binomial_pmf(n, p);
    std::size_t lo = 0, hi = n;
    double cdf = 0.0;
    bool lo_set = false;
    for (std::size_t k = 0; k <= n; ++k) {
        cdf += pmf[k];
        if (!lo_set && cdf >= tail) {
            lo = k;
            lo_set = true;
        }
        if (cdf >= 1.0 - tail) {
            hi = k;
            break;
        }
    }
    return {static_cast<double>(lo) / n, static_cast<double>(hi) / n};
}

double chance_level(std::size_t n_windows, double alpha) {
    if (n_windows == 0) throw ValidationError("chance_level: n_windows must be >= 1");
    if (!(alpha > 0 && alpha < 1)) throw ConfigError("chance_level: alpha must be in (0, 1)");
    const auto pmf = binomial_pmf(n_windows, 0.5);
    // upper[k] = P(X >= k), summed from the top for accuracy in the tail.
    std::vector<double> upper(n_windows + 2, 0.0);
    for (std::size_t k = n_windows + 1; k-- > 0;) upper[k] = upper[k + 1] + pmf[k];
    for (std::size_t k = 0; k <= n_windows; ++k)
        if (upper[k] < alpha) return static_cast<double>(k) / static_cast<double>(n_windows);
    return 1.0;
}

}  // namespace aad::eval
