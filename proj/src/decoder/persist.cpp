#include "aad/decoder.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

namespace aad::decoder {

// prefix.weights.aadm    n_lags x (C * D), column c * D + d
// prefix.intercept.aadm  1 x D
// prefix.meta            key=value

void save_decoder(const Decoder& decoder, const std::filesystem::path& prefix) {
    decoder.validate();
    const std::size_t L = decoder.lag_config.n_lags(), C = decoder.channels, D = decoder.dims;
    MatrixF32 w(L, C * D), b(1, D);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t d = 0; d < D; ++d) w(l, c * D + d) = static_cast<float>(decoder.weight(l, c, d));
    for (std::size_t d = 0; d < D; ++d) b(0, d) = static_cast<float>(decoder.intercept(static_cast<Eigen::Index>(d)));
    write_matrix_file(w, prefix.string() + ".weights.aadm");
    write_matrix_file(b, prefix.string() + ".intercept.aadm");
    const auto& lc = decoder.lag_config;
    write_key_values(prefix.string() + ".meta",
                     {{"lambda", format_double(decoder.lambda)},
                      {"t_min_s", format_double(lc.t_min_s)},
                      {"t_max_s", format_double(lc.t_max_s)},
                      {"fs_hz", format_double(lc.fs_hz)},
                      {"edge", lc.edge == EdgeMode::valid ? "valid" : "zero_pad"},
                      {"n_lags", std::to_string(L)},
                      {"channels", std::to_string(C)},
                      {"dims", std::to_string(D)},
                      {"eeg_norm_ref", decoder.eeg_norm_ref},
                      {"feature_norm_ref", decoder.feature_norm_ref}});
}

Decoder load_decoder(const std::filesystem::path& prefix) {
    const std::filesystem::path meta = prefix.string() + ".meta";
    if (!std::filesystem::exists(meta)) throw ResolutionError("decoder metadata not found: " + meta.string(), meta.string());
    const auto kv = read_key_values(meta);
    Decoder dec;
    try {
        dec.lambda = std::stod(require_key(kv, "lambda", meta));
        dec.lag_config.t_min_s = std::stod(require_key(kv, "t_min_s", meta));
        dec.lag_config.t_max_s = std::stod(require_key(kv, "t_max_s", meta));
        dec.lag_config.fs_hz = std::stod(require_key(kv, "fs_hz", meta));
        dec.channels = std::stoul(require_key(kv, "channels", meta));
        dec.dims = std::stoul(require_key(kv, "dims", meta));
    } catch (const std::logic_error&) {
        throw ValidationError(meta.string() + ": malformed numeric field");
    }
    dec.lag_config.edge = require_key(kv, "edge", meta) == "valid" ? EdgeMode::valid : EdgeMode::zero_pad;
    if (auto it = kv.find("eeg_norm_ref"); it != kv.end()) dec.eeg_norm_ref = it->second;
    if (auto it = kv.find("feature_norm_ref"); it != kv.end()) dec.feature_norm_ref = it->second;

    const std::size_t L = dec.lag_config.n_lags(), C = dec.channels, D = dec.dims;
    const MatrixF32 w = read_matrix_file(prefix.string() + ".weights.aadm");
    const MatrixF32 b = read_matrix_file(prefix.string() + ".intercept.aadm");
    if (w.rows() != L || w.cols() != C * D || b.rows() != 1 || b.cols() != D)
        throw ValidationError("decoder files at " + prefix.string() + " disagree with their metadata");
    dec.weights.resize(static_cast<Eigen::Index>(L * C), static_cast<Eigen::Index>(D));
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t d = 0; d < D; ++d)
                dec.weights(static_cast<Eigen::Index>(l * C + c), static_cast<Eigen::Index>(d)) = w(l, c * D + d);
    dec.intercept.resize(static_cast<Eigen::Index>(D));
    for (std::size_t d = 0; d < D; ++d) dec.intercept(static_cast<Eigen::Index>(d)) = b(0, d);
    dec.validate();
    return dec;
}

}  // namespace aad::decoder
