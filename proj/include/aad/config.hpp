#pragma once

#include "aad/decoder.hpp"
#include "aad/dsp.hpp"
#include "aad/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aad {

/// Declarative run description. JSON keys mirror the CLI flags; unknown keys
/// are rejected so typos surface as config errors.
struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path out = "out";
    std::filesystem::path embeddings_dir;  // default: <manifest dir>/embeddings
    std::uint64_t seed = 17;
    int jobs = 0;  // 0: OpenMP default
    bool force = false;

    std::vector<std::string> features{"envelope"};
    decoder::LagConfig lags{};
    /// Multipliers of mean(diag(XtX)); empty selects the default 13-point grid.
    std::vector<double> lambda_grid;
    std::vector<double> window_sizes{1, 2, 5, 10, 20, 30, 60};
    /// Split each training trial into this many pieces when a subject has
    /// fewer than 2 training trials; 0 turns that case into an error.
    std::size_t pseudo_trials = 0;

    std::optional<int> notch_hz;  // default: the manifest's line_noise_hz
    dsp::FilterConfig filter{};
    bool artifact_clip = true;
    double k_mad = 8.0;

    synth::SynthConfig synth{};

    void validate() const;
};

/// `base_dir` resolves relative paths in the document.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Comma-separated numbers, e.g. "1,2,5".
std::vector<double> parse_number_list(const std::string& text);

}  // namespace aad
