#pragma once

// Subcommand implementations. Output layout under RunConfig::out:
//   preprocessed/{trial}.eeg64.aadm        cleaned EEG at 64 Hz
//   preprocessed/norm/{subject}.aadm       EEG train-split mean/std (2 x C)
//   features/{feature}/{trial}.{att,unatt}.aadm   normalized feature series
//   features/{feature}/norm/{subject}.aadm       feature train-split mean/std
//   features/{feature}/pca/layer{k}.*.aadm       embedding PCA models
//   decoders/{subject}.{feature}.{mode}.*        weights, intercept, meta, cv.csv
//   report/report.csv, table.txt, accuracy.*.dat, weight_energy.*.dat

#include "aad/config.hpp"
#include "aad/manifest.hpp"

#include <cstddef>
#include <filesystem>
#include <string>

namespace aad::pipeline {

struct Layout {
    std::filesystem::path root;

    std::filesystem::path preprocessed(const std::string& trial) const;
    std::filesystem::path eeg_norm(const std::string& subject) const;
    std::filesystem::path feature(const std::string& feature, const std::string& trial, bool attended) const;
    std::filesystem::path feature_norm(const std::string& feature, const std::string& subject) const;
    std::filesystem::path pca_prefix(const std::string& feature, std::size_t layer) const;
    std::filesystem::path decoder_prefix(const std::string& subject, const std::string& feature,
                                         const std::string& mode) const;
    std::filesystem::path report_dir() const;
};

struct StepSummary {
    std::size_t written = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

StepSummary cmd_preprocess(const RunConfig& cfg);
StepSummary cmd_features(const RunConfig& cfg);
StepSummary cmd_train(const RunConfig& cfg);
StepSummary cmd_evaluate(const RunConfig& cfg);
StepSummary cmd_synth(const RunConfig& cfg);
StepSummary cmd_report(const RunConfig& cfg);

/// Power ratio in dB of the `hz` component before vs after, averaged over channels.
double tone_attenuation_db(const TimeSeries& before, const TimeSeries& after, double hz);

}  // namespace aad::pipeline
