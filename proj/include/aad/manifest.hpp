#pragma once

#include "aad/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aad {

enum class Split { train, test };

/// Where a trial's speech stream comes from: raw audio to be transformed, or
/// a precomputed feature series (e.g. synthetic data).
struct SourceRef {
    enum class Kind { audio, feature };
    Kind kind = Kind::audio;
    std::filesystem::path path;           // resolved against the manifest directory
    std::optional<double> sample_rate_hz;  // required for .aadm sources; WAV carries its own
    std::string feature_label;             // kind == feature only
};

struct TrialDescriptor {
    std::string trial_id;
    std::string subject_id;
    std::filesystem::path eeg_path;
    double eeg_sample_rate_hz = 0.0;
    SourceRef attended;
    SourceRef unattended;
    Split split = Split::train;
};

struct DatasetManifest {
    std::string dataset_id;
    std::size_t eeg_channel_count = 0;
    int line_noise_hz = 50;
    std::string language;
    std::filesystem::path root;  // directory holding the manifest
    std::vector<TrialDescriptor> trials;

    std::vector<std::string> subjects() const;  // in first-appearance order
    std::vector<const TrialDescriptor*> trials_of(const std::string& subject, std::optional<Split> split = {}) const;
};

struct ManifestOptions {
    std::uint64_t seed = 17;
    bool check_resources = true;
};

/// Parses and validates a JSON manifest (schema in docs/manifest.md). Trials
/// flagged `exclude: true` are dropped. Subjects without split tags receive a
/// seeded per-subject 90/10 split.
DatasetManifest load_manifest(const std::filesystem::path& path, ManifestOptions opts = {});
DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& root, ManifestOptions opts = {});

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// max(1, round(0.1 * T)).
std::size_t test_trial_count(std::size_t n_trials);

/// Deterministic Fisher-Yates permutation of [0, n) driven by mt19937_64.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

// ---- feature specs ---------------------------------------------------------

struct FeatureSpec {
    enum class Kind { envelope, melspec, embedding };
    enum class LayerMode { LL, FML };

    Kind kind = Kind::envelope;
    std::string embedding_model_id;  // kind == embedding only
    std::optional<LayerMode> layer_mode;

    std::size_t dims() const;
    /// "envelope", "melspec", "<model>_ll", "<model>_fml".
    std::string name() const;
    std::string layer_mode_name() const;  // "" / "LL" / "FML"

    static FeatureSpec parse(const std::string& name);
    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

}  // namespace aad
