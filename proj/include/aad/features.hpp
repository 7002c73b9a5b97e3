#pragma once

#include "aad/dsp.hpp"
#include "aad/manifest.hpp"
#include "aad/matrix.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aad::features {

inline constexpr double kAudioRateHz = 16000.0;
inline constexpr double kFeatureRateHz = 64.0;
inline constexpr double kEnvelopePower = 0.6;
inline constexpr std::size_t kPcaComponents = 20;
inline constexpr std::size_t kEmbeddingDims = 768;

// ---- envelope --------------------------------------------------------------

/// Per-sample mean over the 28 gammatone channels of |y_k|^0.6 at the audio
/// rate, before any rate change.
TimeSeries envelope_full_rate(const TimeSeries& audio, const dsp::GammatoneBank& bank);

/// 16 kHz mono audio -> 1-dim envelope at 64 Hz, before normalization.
TimeSeries extract_envelope(const TimeSeries& audio);
TimeSeries extract_envelope(const TimeSeries& audio, const dsp::GammatoneBank& bank);

// ---- mel spectrogram -------------------------------------------------------

struct MelConfig {
    std::size_t n_fft = 512;
    std::size_t win_length = 400;  // 25 ms at 16 kHz
    std::size_t hop_length = 250;  // 64 frames per second
    std::size_t n_mels = 20;
    double f_min_hz = 0.0;
    double f_max_hz = 8000.0;
};

// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// n_mels x (n_fft/2 + 1) triangular weights with area normalization.
std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg, double sample_rate_hz);

/// 16 kHz mono audio -> log(1 + mel power), floor(N / hop) frames centered
/// at multiples of the hop, zero-padded at the edges. Before normalization.
TimeSeries extract_melspec(const TimeSeries& audio, const MelConfig& cfg = {});

// ---- PCA -------------------------------------------------------------------

struct PcaModel {
    std::vector<double> mean;                  // D
    std::vector<std::vector<double>> components;  // K rows of length D, orthonormal
    std::vector<double> explained_variance;    // K, non-increasing

    std::size_t input_dims() const noexcept { return mean.size(); }
    std::size_t n_components() const noexcept { return components.size(); }
};

/// Top principal axes of the pooled frames (population covariance). Each
/// component's largest-magnitude element is made positive.
PcaModel pca_fit(std::span<const TimeSeries* const> frames, std::size_t n_components = kPcaComponents);
PcaModel pca_fit(std::span<const TimeSeries> frames, std::size_t n_components = kPcaComponents);
TimeSeries pca_apply(const TimeSeries& x, const PcaModel& model);

void save_pca_model(const PcaModel& model, const std::filesystem::path& prefix);
PcaModel load_pca_model(const std::filesystem::path& prefix);

// ---- embeddings ------------------------------------------------------------

struct EmbeddingModelInfo {
    std::string model_id;
    int stride_ms;
    std::size_t layer_count;
};

/// Known self-supervised models: reconstruction family at 10 ms / 4 layers,
/// quantized family at 20 ms / 13 layers.
std::optional<EmbeddingModelInfo> known_embedding_model(const std::string& model_id);

struct EmbeddingBundle {
    std::string model_id;
    int stride_ms = 20;
    std::size_t layer_count = 0;
    std::vector<TimeSeries> layers;  // each at 1000/stride_ms Hz x 768

    void validate() const;
};

std::filesystem::path embedding_layer_path(const std::filesystem::path& dir, const std::string& stem,
                                           const std::string& model_id, std::size_t layer);
std::filesystem::path embedding_meta_path(const std::filesystem::path& dir, const std::string& stem,
                                          const std::string& model_id);

/// Reads `{stem}.{model}.layer{k}.aadm` plus `{stem}.{model}.meta`
/// (key=value: stride_ms, layer_count).
EmbeddingBundle load_embedding_bundle(const std::filesystem::path& dir, const std::string& stem,
                                      const std::string& model_id);
void save_embedding_bundle(const EmbeddingBundle& bundle, const std::filesystem::path& dir, const std::string& stem);

/// LL -> {last}; FML -> {0, floor(n/2), n-1}.
std::vector<std::size_t> selected_layers(std::size_t layer_count, FeatureSpec::LayerMode mode);

/// Per-layer PCA, concatenation, resampling to 64 Hz (before normalization).
TimeSeries assemble_layers(const EmbeddingBundle& bundle, FeatureSpec::LayerMode mode,
                           const std::map<std::size_t, PcaModel>& models);

}  // namespace aad::features
