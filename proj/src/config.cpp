#include "aad/config.hpp"

#include "aad/error.hpp"
#include "aad/manifest.hpp"
#include "aad/util.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace aad {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

void read_shape(const json& j, synth::KernelShape& s, const std::string& where) {
    reject_unknown(j, {"peak_lag", "width_lags", "width_jitter"}, where);
    read(j, "peak_lag", s.peak_lag, where);
    read(j, "width_lags", s.width_lags, where);
    read(j, "width_jitter", s.width_jitter, where);
}

void read_synth(const json& j, synth::SynthConfig& s) {
    const std::string w = "config.synth";
    reject_unknown(j,
                   {"seed", "dataset_id", "n_subjects", "n_trials_per_subject", "trial_duration_s", "n_eeg_channels",
                    "feature_dims", "feature_label", "generation", "attended_kernel", "unattended_kernel",
                    "identical_kernels", "zero_kernels", "rho", "noise_sigma", "unattended_nonlinearity",
                    "feature_cutoff_hz", "eeg_cutoff_hz", "raw_rate_hz", "line_noise_hz", "line_noise_amplitude"},
                   w);
    read(j, "seed", s.seed, w);
    read(j, "dataset_id", s.dataset_id, w);
    read(j, "n_subjects", s.n_subjects, w);
    read(j, "n_trials_per_subject", s.n_trials_per_subject, w);
    read(j, "trial_duration_s", s.trial_duration_s, w);
    read(j, "n_eeg_channels", s.n_eeg_channels, w);
    read(j, "feature_dims", s.feature_dims, w);
    read(j, "feature_label", s.feature_label, w);
    if (j.contains("generation")) {
        const auto g = j.at("generation").get<std::string>();
        if (g == "forward") s.generation = synth::Generation::forward;
        else if (g == "backward") s.generation = synth::Generation::backward;
        else throw ConfigError(w + ": generation must be 'forward' or 'backward'");
    }
    if (j.contains("attended_kernel")) read_shape(j["attended_kernel"], s.attended_shape, w + ".attended_kernel");
    if (j.contains("unattended_kernel"))
        read_shape(j["unattended_kernel"], s.unattended_shape, w + ".unattended_kernel");
    read(j, "identical_kernels", s.identical_kernels, w);
    read(j, "zero_kernels", s.zero_kernels, w);
    read(j, "rho", s.rho, w);
    read(j, "noise_sigma", s.noise_sigma, w);
    if (j.contains("unattended_nonlinearity")) {
        const auto n = j.at("unattended_nonlinearity").get<std::string>();
        if (n == "none") s.unattended_nonlinearity = synth::Nonlinearity::none;
        else if (n == "rectify") s.unattended_nonlinearity = synth::Nonlinearity::rectify;
        else throw ConfigError(w + ": unattended_nonlinearity must be 'none' or 'rectify'");
    }
    read(j, "feature_cutoff_hz", s.feature_cutoff_hz, w);
    read(j, "eeg_cutoff_hz", s.eeg_cutoff_hz, w);
    read(j, "raw_rate_hz", s.raw_rate_hz, w);
    read(j, "line_noise_hz", s.line_noise_hz, w);
    read(j, "line_noise_amplitude", s.line_noise_amplitude, w);
}

}  // namespace

void RunConfig::validate() const {
    lags.validate();
    if (lags.fs_hz != 64.0) throw ConfigError("config: the lag window must be at 64 Hz");
    if (features.empty()) throw ConfigError("config: no feature specs");
    for (const auto& f : features) FeatureSpec::parse(f);
    for (double l : lambda_grid)
        if (!(l >= 0)) throw ConfigError("config: lambda grid values must be >= 0");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i)
        if (lambda_grid[i] < lambda_grid[i - 1]) throw ConfigError("config: lambda grid must be ascending");
    if (window_sizes.empty()) throw ConfigError("config: no window sizes");
    for (double w : window_sizes)
        if (!(w > 0)) throw ConfigError("config: window sizes must be positive");
    if (pseudo_trials == 1) throw ConfigError("config: pseudo_trials must be 0 or >= 2");
    if (notch_hz && *notch_hz <= 0) throw ConfigError("config: notch_hz must be positive");
    if (!(k_mad > 0)) throw ConfigError("config: k_mad must be positive");
    if (jobs < 0) throw ConfigError("config: jobs must be >= 0");
    if (filter.lowpass_hz <= 0 || filter.highpass_hz < 0 || (filter.highpass_hz > 0 && filter.highpass_hz >= filter.lowpass_hz))
        throw ConfigError("config: band edges must satisfy 0 <= highpass < lowpass");
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const std::string w = "config";
    reject_unknown(j,
                   {"manifest", "out", "embeddings_dir", "seed", "jobs", "force", "features", "lag", "lambda_grid",
                    "window_sizes", "pseudo_trials", "notch_hz", "highpass_hz", "lowpass_hz", "filter_order",
                    "artifact_clip", "k_mad", "synth"},
                   w);
    RunConfig c;
    auto path_key = [&](const char* key, std::filesystem::path& dst) {
        std::string s;
        read(j, key, s, w);
        if (!s.empty()) dst = base_dir / s;
    };
    path_key("manifest", c.manifest);
    path_key("out", c.out);
    path_key("embeddings_dir", c.embeddings_dir);
    read(j, "seed", c.seed, w);
    read(j, "jobs", c.jobs, w);
    read(j, "force", c.force, w);
    read(j, "features", c.features, w);
    if (j.contains("lag")) {
        const auto& lj = j["lag"];
        reject_unknown(lj, {"t_min_s", "t_max_s", "edge"}, w + ".lag");
        read(lj, "t_min_s", c.lags.t_min_s, w);
        read(lj, "t_max_s", c.lags.t_max_s, w);
        std::string edge = "zero_pad";
        read(lj, "edge", edge, w);
        if (edge == "valid") c.lags.edge = decoder::EdgeMode::valid;
        else if (edge != "zero_pad") throw ConfigError("config.lag: edge must be 'zero_pad' or 'valid'");
    }
    read(j, "lambda_grid", c.lambda_grid, w);
    read(j, "window_sizes", c.window_sizes, w);
    read(j, "pseudo_trials", c.pseudo_trials, w);
    if (j.contains("notch_hz")) {
        int n = 0;
        read(j, "notch_hz", n, w);
        c.notch_hz = n;
    }
    read(j, "highpass_hz", c.filter.highpass_hz, w);
    read(j, "lowpass_hz", c.filter.lowpass_hz, w);
    read(j, "filter_order", c.filter.order, w);
    read(j, "artifact_clip", c.artifact_clip, w);
    read(j, "k_mad", c.k_mad, w);
    if (j.contains("synth")) read_synth(j["synth"], c.synth);
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) {
        const std::string t = trim(part);
        if (t.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::logic_error&) {
            throw ConfigError("not a number: '" + t + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

}  // namespace aad
