#include "aad/decoder.hpp"

#include "aad/error.hpp"
#include "aad/log.hpp"
#include "aad/stats.hpp"

#include <algorithm>

namespace aad::decoder {

namespace {

/// Mean Pearson correlation across dims; a constant dim scores 0.
double reconstruction_score(const TimeSeries& predicted, const TimeSeries& target) {
    double total = 0.0;
    for (std::size_t d = 0; d < target.channels(); ++d) {
        const auto p = predicted.matrix.column(d);
        const auto t = target.matrix.column(d);
        total += pearson(p, t).value_or(0.0);
    }
    return total / static_cast<double>(target.channels());
}

}  // namespace

CvResult loo_cv_lambda(std::span<const TrialRef> trials, std::span<const double> lambdas, const LagConfig& lags) {
    if (trials.size() < 2)
        throw ValidationError("leave-one-trial-out cross-validation needs at least 2 trials, got " +
                              std::to_string(trials.size()) + "; segment a single trial into pseudo-trials first");
    if (lambdas.empty()) throw ConfigError("empty lambda grid");
    if (!std::is_sorted(lambdas.begin(), lambdas.end())) throw ConfigError("lambda grid must be ascending");

    const std::size_t C = trials.front().eeg->channels(), D = trials.front().target->channels();
    std::vector<CovarianceAccumulator> per_trial;
    per_trial.reserve(trials.size());
    CovarianceAccumulator total(C, D, lags);
    for (const auto& tr : trials) {
        per_trial.emplace_back(C, D, lags);
        per_trial.back().accumulate(*tr.eeg, *tr.target);
        total += per_trial.back();
    }

    const std::size_t K = trials.size(), N = lambdas.size();
    CvResult res;
    res.lambdas.assign(lambdas.begin(), lambdas.end());
    res.mean_scores.assign(N, 0.0);
    std::vector<double> scores(N * K);
    for (std::size_t k = 0; k < K; ++k) {
        const RidgeSolver solver(total - per_trial[k]);
        for (std::size_t i = 0; i < N; ++i) {
            const Decoder dec = solver.solve(lambdas[i]);
            scores[i * K + k] = reconstruction_score(reconstruct(dec, *trials[k].eeg), *trials[k].target);
        }
    }
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            res.records.push_back({lambdas[i], k, scores[i * K + k]});
            res.mean_scores[i] += scores[i * K + k];
        }
        res.mean_scores[i] /= static_cast<double>(K);
    }
    // Ascending grid, so >= hands ties to the larger lambda.
    for (std::size_t i = 1; i < N; ++i)
        if (res.mean_scores[i] >= res.mean_scores[res.best_index]) res.best_index = i;
    res.best_lambda = lambdas[res.best_index];
    log_info("cv_selected")
        .kv("lambda", res.best_lambda)
        .kv("score", res.mean_scores[res.best_index])
        .kv("folds", K);
    return res;
}

std::vector<std::pair<TimeSeries, TimeSeries>> segment_trial(const TimeSeries& eeg, const TimeSeries& target,
                                                             std::size_t pieces) {
    if (pieces < 2) throw ConfigError("segmenting needs at least 2 pieces");
    if (eeg.samples() != target.samples()) throw ValidationError("EEG and target lengths differ");
    const std::size_t T = eeg.samples();
    if (T < pieces) throw ValidationError("trial too short to segment into " + std::to_string(pieces) + " pieces");
    std::vector<std::pair<TimeSeries, TimeSeries>> out;
    for (std::size_t k = 0; k < pieces; ++k) {
        const std::size_t b = k * T / pieces, e = (k + 1) * T / pieces;
        out.emplace_back(TimeSeries(eeg.matrix.slice_rows(b, e), eeg.sample_rate_hz),
                         TimeSeries(target.matrix.slice_rows(b, e), target.sample_rate_hz));
    }
    return out;
}

}  // namespace aad::decoder
