#include "aad/features.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

#include <array>

namespace aad::features {

std::optional<EmbeddingModelInfo> known_embedding_model(const std::string& model_id) {
    static const std::array<EmbeddingModelInfo, 6> kModels{{
        {"albert", 10, 4},
        {"mockingjay", 10, 4},
        {"tera", 10, 4},
        {"hubert", 20, 13},
        {"wav2vec2", 20, 13},
        {"wavlm", 20, 13},
    }};
    for (const auto& m : kModels)
        if (m.model_id == model_id) return m;
    return std::nullopt;
}

void EmbeddingBundle::validate() const {
    if (stride_ms <= 0) throw ValidationError("embedding bundle '" + model_id + "': stride_ms must be positive");
    if (layers.size() != layer_count || layer_count == 0)
        throw ValidationError("embedding bundle '" + model_id + "': expected " + std::to_string(layer_count) +
                              " layers, have " + std::to_string(layers.size()));
    if (const auto known = known_embedding_model(model_id)) {
        if (known->stride_ms != stride_ms || known->layer_count != layer_count)
            throw ValidationError("embedding bundle '" + model_id + "': stride/layers (" + std::to_string(stride_ms) +
                                  " ms, " + std::to_string(layer_count) + ") do not match the model (" +
                                  std::to_string(known->stride_ms) + " ms, " + std::to_string(known->layer_count) +
                                  ")");
    }
    const double rate = 1000.0 / stride_ms;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].samples() != layers.front().samples())
            throw ValidationError("embedding bundle '" + model_id + "': layer row counts differ");
        if (std::abs(layers[k].sample_rate_hz - rate) > 1e-9)
            throw ValidationError("embedding bundle '" + model_id + "': layer rate does not match stride");
    }
}

std::filesystem::path embedding_layer_path(const std::filesystem::path& dir, const std::string& stem,
                                           const std::string& model_id, std::size_t layer) {
    return dir / (stem + "." + model_id + ".layer" + std::to_string(layer) + ".aadm");
}

std::filesystem::path embedding_meta_path(const std::filesystem::path& dir, const std::string& stem,
                                          const std::string& model_id) {
    return dir / (stem + "." + model_id + ".meta");
}

EmbeddingBundle load_embedding_bundle(const std::filesystem::path& dir, const std::string& stem,
                                      const std::string& model_id) {
    const auto meta_path = embedding_meta_path(dir, stem, model_id);
    if (!std::filesystem::exists(meta_path))
        throw ResolutionError("embedding metadata not found: " + meta_path.string(), meta_path.string());
    const auto kv = read_key_values(meta_path);
    EmbeddingBundle b;
    b.model_id = model_id;
    try {
        b.stride_ms = std::stoi(require_key(kv, "stride_ms", meta_path));
        b.layer_count = std::stoul(require_key(kv, "layer_count", meta_path));
    } catch (const std::logic_error&) {
        throw ValidationError(meta_path.string() + ": stride_ms/layer_count must be integers");
    }
    const double rate = 1000.0 / b.stride_ms;
    for (std::size_t k = 0; k < b.layer_count; ++k)
        b.layers.emplace_back(read_matrix_file(embedding_layer_path(dir, stem, model_id, k)), rate);
    b.validate();
    return b;
}

void save_embedding_bundle(const EmbeddingBundle& bundle, const std::filesystem::path& dir, const std::string& stem) {
    bundle.validate();
    for (std::size_t k = 0; k < bundle.layers.size(); ++k)
        write_matrix_file(bundle.layers[k].matrix, embedding_layer_path(dir, stem, bundle.model_id, k));
    write_key_values(embedding_meta_path(dir, stem, bundle.model_id),
                     {{"model_id", bundle.model_id},
                      {"stride_ms", std::to_string(bundle.stride_ms)},
                      {"layer_count", std::to_string(bundle.layer_count)}});
}

std::vector<std::size_t> selected_layers(std::size_t layer_count, FeatureSpec::LayerMode mode) {
    if (layer_count == 0) throw ValidationError("embedding bundle has no layers");
    if (mode == FeatureSpec::LayerMode::LL) return {layer_count - 1};
    return {0, layer_count / 2, layer_count - 1};
}

TimeSeries assemble_layers(const EmbeddingBundle& bundle, FeatureSpec::LayerMode mode,
                           const std::map<std::size_t, PcaModel>& models) {
    const auto layers = selected_layers(bundle.layer_count, mode);
    std::vector<MatrixF32> parts;
    for (auto k : layers) {
        const auto it = models.find(k);
        if (it == models.end())
            throw ConfigError("no PCA model for layer " + std::to_string(k) + " of '" + bundle.model_id + "'");
        parts.push_back(pca_apply(bundle.layers.at(k), it->second).matrix);
    }
    TimeSeries joined(hconcat(parts), bundle.layers.front().sample_rate_hz);
    return dsp::resample(joined, kFeatureRateHz);
}

}  // namespace aad::features
