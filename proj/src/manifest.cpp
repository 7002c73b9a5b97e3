#include "aad/manifest.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace aad {

using nlohmann::json;

std::vector<std::string> DatasetManifest::subjects() const {
    std::vector<std::string> out;
    for (const auto& t : trials)
        if (std::find(out.begin(), out.end(), t.subject_id) == out.end()) out.push_back(t.subject_id);
    return out;
}

std::vector<const TrialDescriptor*> DatasetManifest::trials_of(const std::string& subject,
                                                               std::optional<Split> split) const {
    std::vector<const TrialDescriptor*> out;
    for (const auto& t : trials)
        if (t.subject_id == subject && (!split || t.split == *split)) out.push_back(&t);
    return out;
}

std::size_t test_trial_count(std::size_t n_trials) {
    const auto r = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n_trials)));
    return std::max<std::size_t>(1, r);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    // Rejection sampling keeps the draw identical across standard libraries.
    auto bounded = [&](std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do v = rng();
        while (v >= limit);
        return v % bound;
    };
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[bounded(i)]);
    return idx;
}

namespace {

template <typename T>
T get_required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(where + ": field '" + key + "' has wrong type (" + e.what() + ")");
    }
}

SourceRef parse_source(const json& j, const std::filesystem::path& root, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": source must be an object");
    SourceRef s;
    const auto kind = j.value("kind", std::string("audio"));
    if (kind == "audio") s.kind = SourceRef::Kind::audio;
    else if (kind == "feature") s.kind = SourceRef::Kind::feature;
    else throw ValidationError(where + ": unknown source kind '" + kind + "'");
    s.path = root / get_required<std::string>(j, "path", where);
    if (j.contains("sample_rate_hz")) s.sample_rate_hz = get_required<double>(j, "sample_rate_hz", where);
    if (s.kind == SourceRef::Kind::feature) {
        s.feature_label = j.value("feature", std::string("envelope"));
        if (!s.sample_rate_hz) throw ValidationError(where + ": feature sources need sample_rate_hz");
    } else if (s.path.extension() != ".wav" && !s.sample_rate_hz) {
        throw ValidationError(where + ": non-WAV audio sources need sample_rate_hz");
    }
    if (s.sample_rate_hz && !(*s.sample_rate_hz > 0))
        throw ValidationError(where + ": sample_rate_hz must be positive");
    return s;
}

void require_exists(const std::filesystem::path& p, const std::string& where) {
    if (!std::filesystem::exists(p))
        throw ResolutionError(where + ": referenced resource not found: " + p.string(), p.string());
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& root, ManifestOptions opts) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    const std::string where = "manifest";
    DatasetManifest m;
    m.root = root;
    m.dataset_id = get_required<std::string>(doc, "dataset_id", where);
    const auto channels = get_required<long long>(doc, "eeg_channel_count", where);
    if (channels <= 0) throw ValidationError("manifest: eeg_channel_count must be positive");
    m.eeg_channel_count = static_cast<std::size_t>(channels);
    m.line_noise_hz = get_required<int>(doc, "line_noise_hz", where);
    if (m.line_noise_hz != 50 && m.line_noise_hz != 60)
        throw ValidationError("manifest: line_noise_hz must be 50 or 60");
    m.language = doc.value("language", std::string());

    if (!doc.contains("trials") || !doc["trials"].is_array())
        throw ValidationError("manifest: 'trials' must be an array");

    std::set<std::string> seen;
    std::map<std::string, std::pair<int, int>> tagged;  // subject -> (tagged, untagged)
    for (std::size_t i = 0; i < doc["trials"].size(); ++i) {
        const json& jt = doc["trials"][i];
        const std::string tw = "manifest trial[" + std::to_string(i) + "]";
        if (jt.value("exclude", false)) continue;

        TrialDescriptor t;
        t.trial_id = get_required<std::string>(jt, "trial_id", tw);
        t.subject_id = get_required<std::string>(jt, "subject_id", tw);
        if (!seen.insert(t.trial_id).second)
            throw ValidationError("manifest: duplicate trial_id '" + t.trial_id + "'");
        const std::string w = "trial '" + t.trial_id + "'";

        const json& eeg = jt.contains("eeg") ? jt["eeg"] : json();
        if (!eeg.is_object()) throw ValidationError(w + ": missing 'eeg' object");
        t.eeg_path = root / get_required<std::string>(eeg, "path", w + " eeg");
        t.eeg_sample_rate_hz = get_required<double>(eeg, "sample_rate_hz", w + " eeg");
        if (!(t.eeg_sample_rate_hz > 0)) throw ValidationError(w + ": eeg sample_rate_hz must be positive");

        if (!jt.contains("attended") || !jt.contains("unattended"))
            throw ValidationError(w + ": needs both 'attended' and 'unattended' sources");
        t.attended = parse_source(jt["attended"], root, w + " attended");
        t.unattended = parse_source(jt["unattended"], root, w + " unattended");
        if (t.attended.path == t.unattended.path)
            throw ValidationError(w + ": attended and unattended sources must differ");

        auto& counts = tagged[t.subject_id];
        if (jt.contains("split")) {
            const auto s = get_required<std::string>(jt, "split", w);
            if (s == "train") t.split = Split::train;
            else if (s == "test") t.split = Split::test;
            else throw ValidationError(w + ": split must be 'train' or 'test'");
            ++counts.first;
        } else {
            ++counts.second;
        }

        if (opts.check_resources) {
            require_exists(t.eeg_path, w + " eeg");
            require_exists(t.attended.path, w + " attended");
            require_exists(t.unattended.path, w + " unattended");
            if (t.eeg_path.extension() == ".aadm") {
                const auto shape = read_matrix_header(t.eeg_path);
                if (shape.cols != m.eeg_channel_count)
                    throw ValidationError(w + ": eeg has " + std::to_string(shape.cols) + " channels, manifest says " +
                                          std::to_string(m.eeg_channel_count));
            }
        }
        m.trials.push_back(std::move(t));
    }
    if (m.trials.empty()) throw ValidationError("manifest: no (non-excluded) trials");

    for (const auto& [subject, counts] : tagged) {
        if (counts.first > 0 && counts.second > 0)
            throw ValidationError("manifest: subject '" + subject + "' mixes tagged and untagged split assignments");
        if (counts.first > 0) continue;
        std::vector<TrialDescriptor*> mine;
        for (auto& t : m.trials)
            if (t.subject_id == subject) mine.push_back(&t);
        const auto perm = seeded_permutation(mine.size(), mix_seed(opts.seed, hash_string(subject)));
        const auto n_test = test_trial_count(mine.size());
        for (std::size_t k = 0; k < mine.size(); ++k) mine[perm[k]]->split = k < n_test ? Split::test : Split::train;
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path, ManifestOptions opts) {
    std::ifstream in(path);
    if (!in) throw ResolutionError("cannot open manifest " + path.string(), path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path(), opts);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    const auto dir = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) { return std::filesystem::relative(p, dir).generic_string(); };
    auto source = [&](const SourceRef& s) {
        json j{{"kind", s.kind == SourceRef::Kind::audio ? "audio" : "feature"}, {"path", rel(s.path)}};
        if (s.sample_rate_hz) j["sample_rate_hz"] = *s.sample_rate_hz;
        if (s.kind == SourceRef::Kind::feature) j["feature"] = s.feature_label;
        return j;
    };
    json doc{{"dataset_id", manifest.dataset_id},
             {"eeg_channel_count", manifest.eeg_channel_count},
             {"line_noise_hz", manifest.line_noise_hz},
             {"language", manifest.language}};
    json trials = json::array();
    for (const auto& t : manifest.trials) {
        trials.push_back({{"trial_id", t.trial_id},
                          {"subject_id", t.subject_id},
                          {"eeg", {{"path", rel(t.eeg_path)}, {"sample_rate_hz", t.eeg_sample_rate_hz}}},
                          {"attended", source(t.attended)},
                          {"unattended", source(t.unattended)},
                          {"split", t.split == Split::train ? "train" : "test"}});
    }
    doc["trials"] = std::move(trials);
    atomic_write_text(path, doc.dump(2) + "\n");
}

// ---- FeatureSpec -------------------------------------------------------------

std::size_t FeatureSpec::dims() const {
    switch (kind) {
    case Kind::envelope: return 1;
    case Kind::melspec: return 20;
    case Kind::embedding: return layer_mode == LayerMode::FML ? 60 : 20;
    }
    return 0;
}

std::string FeatureSpec::layer_mode_name() const {
    if (!layer_mode) return {};
    return *layer_mode == LayerMode::LL ? "LL" : "FML";
}

std::string FeatureSpec::name() const {
    switch (kind) {
    case Kind::envelope: return "envelope";
    case Kind::melspec: return "melspec";
    case Kind::embedding: return embedding_model_id + (layer_mode == LayerMode::FML ? "_fml" : "_ll");
    }
    return {};
}

FeatureSpec FeatureSpec::parse(const std::string& name) {
    FeatureSpec f;
    if (name == "envelope") return f;
    if (name == "melspec") {
        f.kind = Kind::melspec;
        return f;
    }
    const auto us = name.rfind('_');
    if (us == std::string::npos || us == 0) throw ConfigError("unknown feature spec '" + name + "'");
    std::string mode = name.substr(us + 1);
    std::transform(mode.begin(), mode.end(), mode.begin(), [](unsigned char c) { return std::tolower(c); });
    f.kind = Kind::embedding;
    f.embedding_model_id = name.substr(0, us);
    if (mode == "ll") f.layer_mode = LayerMode::LL;
    else if (mode == "fml") f.layer_mode = LayerMode::FML;
    else throw ConfigError("feature spec '" + name + "': layer mode must be _ll or _fml");
    return f;
}

}  // namespace aad
