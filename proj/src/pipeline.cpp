#include "aad/pipeline.hpp"

#include "aad/audio_io.hpp"
#include "aad/decoder.hpp"
#include "aad/dsp.hpp"
#include "aad/error.hpp"
#include "aad/eval.hpp"
#include "aad/features.hpp"
#include "aad/log.hpp"
#include "aad/synth.hpp"
#include "aad/util.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <set>

namespace aad::pipeline {

namespace fs = std::filesystem;
using features::kFeatureRateHz;

fs::path Layout::preprocessed(const std::string& trial) const { return root / "preprocessed" / (trial + ".eeg64.aadm"); }
fs::path Layout::eeg_norm(const std::string& subject) const { return root / "preprocessed" / "norm" / (subject + ".aadm"); }
fs::path Layout::feature(const std::string& feature, const std::string& trial, bool attended) const {
    return root / "features" / feature / (trial + (attended ? ".att.aadm" : ".unatt.aadm"));
}
fs::path Layout::feature_norm(const std::string& feature, const std::string& subject) const {
    return root / "features" / feature / "norm" / (subject + ".aadm");
}
fs::path Layout::pca_prefix(const std::string& feature, std::size_t layer) const {
    return root / "features" / feature / "pca" / ("layer" + std::to_string(layer));
}
fs::path Layout::decoder_prefix(const std::string& subject, const std::string& feature, const std::string& mode) const {
    return root / "decoders" / (subject + "." + feature + "." + mode);
}
fs::path Layout::report_dir() const { return root / "report"; }

double tone_attenuation_db(const TimeSeries& before, const TimeSeries& after, double hz) {
    // Hann-windowed projection onto the tone keeps broadband leakage out of the estimate.
    auto tone_power = [hz](const TimeSeries& x) {
        const std::size_t T = x.samples();
        double total = 0.0;
        for (std::size_t c = 0; c < x.channels(); ++c) {
            std::complex<double> acc = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(T));
                acc += w * x.matrix(t, c) * std::polar(1.0, -2.0 * M_PI * hz * static_cast<double>(t) / x.sample_rate_hz);
            }
            total += std::norm(acc);
        }
        return total;
    };
    const double pb = tone_power(before), pa = tone_power(after);
    if (pa <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(pb / pa);
}

namespace {

DatasetManifest open_manifest(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw ConfigError("no manifest given (--manifest or config key 'manifest')");
    return load_manifest(cfg.manifest, {cfg.seed, true});
}

bool up_to_date(const fs::path& out, const fs::path& in) {
    std::error_code ec;
    if (!fs::exists(out, ec)) return false;
    return fs::last_write_time(out, ec) >= fs::last_write_time(in, ec);
}

std::string layer_mode_key(const FeatureSpec& spec) {
    if (!spec.layer_mode) return "-";
    return *spec.layer_mode == FeatureSpec::LayerMode::LL ? "ll" : "fml";
}

TimeSeries at_feature_rate(TimeSeries x) {
    if (std::abs(x.sample_rate_hz - kFeatureRateHz) < 1e-9) return x;
    return dsp::resample(x, kFeatureRateHz);
}

TimeSeries load_norm_applied(const fs::path& data, const fs::path& stats) {
    if (!fs::exists(data)) throw ResolutionError("missing " + data.string(), data.string());
    if (!fs::exists(stats)) throw ResolutionError("missing normalization stats " + stats.string(), stats.string());
    return dsp::zscore_apply(TimeSeries(read_matrix_file(data), kFeatureRateHz),
                             dsp::norm_stats_from_matrix(read_matrix_file(stats)));
}

struct TrialData {
    std::string trial_id;
    TimeSeries eeg;
    TimeSeries attended;
    TimeSeries unattended;
};

/// Normalized EEG and both feature streams, trimmed to a common length.
TrialData load_trial(const Layout& layout, const TrialDescriptor& t, const std::string& feature) {
    if (!fs::exists(layout.preprocessed(t.trial_id)))
        throw ResolutionError("trial " + t.trial_id + " has no preprocessed EEG; run 'preprocess' first",
                              layout.preprocessed(t.trial_id).string());
    TrialData d{t.trial_id,
                load_norm_applied(layout.preprocessed(t.trial_id), layout.eeg_norm(t.subject_id)),
                TimeSeries(read_matrix_file(layout.feature(feature, t.trial_id, true)), kFeatureRateHz),
                TimeSeries(read_matrix_file(layout.feature(feature, t.trial_id, false)), kFeatureRateHz)};
    const std::size_t n = std::min({d.eeg.samples(), d.attended.samples(), d.unattended.samples()});
    const std::size_t most = std::max({d.eeg.samples(), d.attended.samples(), d.unattended.samples()});
    if (most - n > static_cast<std::size_t>(kFeatureRateHz))
        log_warn("length_mismatch").kv("trial", t.trial_id).kv("eeg", d.eeg.samples()).kv("feature", d.attended.samples());
    for (auto* s : {&d.eeg, &d.attended, &d.unattended})
        if (s->samples() != n) s->matrix = s->matrix.slice_rows(0, n);
    return d;
}

std::string exporter_hint(const std::string& model, const fs::path& dir) {
    return "aad-embed export --model " + model + " --checkpoint <ref> --audio-dir <audio dir> --out " + dir.string();
}

}  // namespace

StepSummary cmd_preprocess(const RunConfig& cfg) {
    const DatasetManifest m = open_manifest(cfg);
    const Layout layout{cfg.out};
    StepSummary sum;
    for (const auto& t : m.trials) {
        const fs::path out = layout.preprocessed(t.trial_id);
        if (!cfg.force && up_to_date(out, t.eeg_path)) {
            ++sum.skipped;
            log_info("preprocess_skip").kv("trial", t.trial_id).kv("reason", "up to date");
            continue;
        }
        try {
            if (t.eeg_path.extension() != ".aadm")
                throw ValidationError("EEG must be a .aadm matrix, got " + t.eeg_path.string());
            TimeSeries x(read_matrix_file(t.eeg_path), t.eeg_sample_rate_hz);
            const int notch = cfg.notch_hz.value_or(m.line_noise_hz);
            if (notch >= x.sample_rate_hz / 2) {
                log_info("notch_skipped").kv("trial", t.trial_id).kv("notch_hz", notch).kv("nyquist_hz", x.sample_rate_hz / 2);
            } else {
                TimeSeries y = dsp::notch_filter(x, notch, cfg.filter.notch_quality);
                log_info("notch_check")
                    .kv("trial", t.trial_id)
                    .kv("hz", notch)
                    .kv("attenuation_db", tone_attenuation_db(x, y, notch));
                x = std::move(y);
            }
            x = dsp::average_reference(x);
            x = dsp::band_limit(x, cfg.filter);
            if (cfg.artifact_clip) {
                auto clipped = dsp::artifact_clip(x, cfg.k_mad);
                log_info("artifact_clip")
                    .kv("trial", t.trial_id)
                    .kv("replaced_fraction", clipped.replaced_fraction)
                    .kv("skipped_channels", clipped.skipped_channels.size());
                x = std::move(clipped.series);
            }
            x = at_feature_rate(std::move(x));
            write_matrix_file(x.matrix, out);
            ++sum.written;
            log_info("preprocess_done").kv("trial", t.trial_id).kv("rows", x.samples()).kv("channels", x.channels());
        } catch (const Error& e) {
            ++sum.failed;
            log_error("preprocess_failed").kv("trial", t.trial_id).kv("reason", std::string(e.what()));
        }
    }
    log_info("preprocess_summary").kv("written", sum.written).kv("skipped", sum.skipped).kv("failed", sum.failed);
    return sum;
}

StepSummary cmd_features(const RunConfig& cfg) {
    const DatasetManifest m = open_manifest(cfg);
    const Layout layout{cfg.out};
    StepSummary sum;

    // EEG normalization per subject from its training split.
    for (const auto& subject : m.subjects()) {
        std::vector<TimeSeries> train;
        for (const auto* t : m.trials_of(subject, Split::train)) {
            const fs::path p = layout.preprocessed(t->trial_id);
            if (!fs::exists(p))
                throw ResolutionError("trial " + t->trial_id + " has no preprocessed EEG; run 'preprocess' first",
                                      p.string());
            train.emplace_back(read_matrix_file(p), kFeatureRateHz);
        }
        if (train.empty()) throw ValidationError("subject " + subject + " has no training trials");
        write_matrix_file(dsp::norm_stats_to_matrix(dsp::zscore_fit(std::span<const TimeSeries>(train))),
                          layout.eeg_norm(subject));
    }

    const fs::path bundle_dir = cfg.embeddings_dir.empty() ? m.root / "embeddings" : cfg.embeddings_dir;
    for (const auto& name : cfg.features) {
        const FeatureSpec spec = FeatureSpec::parse(name);
        const std::string fname = spec.name();
        std::map<std::string, std::pair<TimeSeries, TimeSeries>> raw;  // trial -> (att, unatt)
        std::string skip_reason;

        std::map<std::size_t, features::PcaModel> pca;
        if (spec.kind == FeatureSpec::Kind::embedding) {
            for (const auto& t : m.trials)
                for (const auto* src : {&t.attended, &t.unattended})
                    if (src->kind != SourceRef::Kind::audio ||
                        !fs::exists(features::embedding_meta_path(bundle_dir, src->path.stem().string(),
                                                                  spec.embedding_model_id)))
                        skip_reason = "no embedding bundle for " + src->path.stem().string() + " in " +
                                      bundle_dir.string() + "; run: " +
                                      exporter_hint(spec.embedding_model_id, bundle_dir);
            if (skip_reason.empty()) {
                // PCA per selected layer, fit on the training-split audio only.
                std::set<std::string> stems;
                for (const auto& t : m.trials)
                    if (t.split == Split::train)
                        for (const auto* src : {&t.attended, &t.unattended}) stems.insert(src->path.stem().string());
                std::map<std::size_t, std::vector<TimeSeries>> frames;
                std::size_t layer_count = 0;
                for (const auto& stem : stems) {
                    const auto b = features::load_embedding_bundle(bundle_dir, stem, spec.embedding_model_id);
                    layer_count = b.layer_count;
                    for (auto k : features::selected_layers(b.layer_count, *spec.layer_mode))
                        frames[k].push_back(b.layers[k]);
                }
                for (auto& [k, series] : frames) {
                    pca[k] = features::pca_fit(std::span<const TimeSeries>(series));
                    features::save_pca_model(pca[k], layout.pca_prefix(fname, k));
                }
                log_info("pca_fit").kv("feature", fname).kv("layers", pca.size()).kv("layer_count", layer_count);
            }
        }

        for (const auto& t : m.trials) {
            if (!skip_reason.empty()) break;
            std::optional<TimeSeries> streams[2];
            const SourceRef* srcs[2] = {&t.attended, &t.unattended};
            for (int k = 0; k < 2; ++k) {
                const SourceRef& src = *srcs[k];
                if (src.kind == SourceRef::Kind::feature) {
                    if (src.feature_label != fname) {
                        skip_reason = "trial " + t.trial_id + " provides precomputed '" + src.feature_label +
                                      "' features, not '" + fname + "'";
                        break;
                    }
                    streams[k] = at_feature_rate(TimeSeries(read_matrix_file(src.path), *src.sample_rate_hz));
                } else if (spec.kind == FeatureSpec::Kind::embedding) {
                    const auto b =
                        features::load_embedding_bundle(bundle_dir, src.path.stem().string(), spec.embedding_model_id);
                    streams[k] = features::assemble_layers(b, *spec.layer_mode, pca);
                } else {
                    TimeSeries audio = load_audio(src);
                    if (std::abs(audio.sample_rate_hz - features::kAudioRateHz) > 1e-9)
                        audio = dsp::resample(audio, features::kAudioRateHz);
                    streams[k] = spec.kind == FeatureSpec::Kind::envelope ? features::extract_envelope(audio)
                                                                          : features::extract_melspec(audio);
                }
            }
            if (!skip_reason.empty()) break;
            raw.emplace(t.trial_id, std::make_pair(std::move(*streams[0]), std::move(*streams[1])));
        }
        if (!skip_reason.empty()) {
            ++sum.skipped;
            log_warn("feature_skipped").kv("feature", fname).kv("reason", skip_reason);
            continue;
        }

        // Per-subject normalization from training trials, both streams pooled.
        for (const auto& subject : m.subjects()) {
            std::vector<const TimeSeries*> train;
            for (const auto* t : m.trials_of(subject, Split::train)) {
                const auto& p = raw.at(t->trial_id);
                train.push_back(&p.first);
                train.push_back(&p.second);
            }
            const dsp::NormStats stats = dsp::zscore_fit(std::span<const TimeSeries* const>(train));
            write_matrix_file(dsp::norm_stats_to_matrix(stats), layout.feature_norm(fname, subject));
            for (const auto* t : m.trials_of(subject)) {
                const auto& p = raw.at(t->trial_id);
                write_matrix_file(dsp::zscore_apply(p.first, stats).matrix, layout.feature(fname, t->trial_id, true));
                write_matrix_file(dsp::zscore_apply(p.second, stats).matrix, layout.feature(fname, t->trial_id, false));
                ++sum.written;
            }
        }
        log_info("features_done").kv("feature", fname).kv("trials", raw.size()).kv("dims", raw.begin()->second.first.channels());
    }
    return sum;
}

StepSummary cmd_train(const RunConfig& cfg) {
    const DatasetManifest m = open_manifest(cfg);
    const Layout layout{cfg.out};
    const std::vector<double> relative =
        cfg.lambda_grid.empty() ? decoder::default_relative_grid() : cfg.lambda_grid;
    StepSummary sum;
    for (const auto& subject : m.subjects()) {
        for (const auto& name : cfg.features) {
            const std::string fname = FeatureSpec::parse(name).name();
            const auto train = m.trials_of(subject, Split::train);
            std::vector<TrialData> data;
            try {
                for (const auto* t : train) data.push_back(load_trial(layout, *t, fname));
            } catch (const ResolutionError& e) {
                ++sum.skipped;
                log_warn("train_skipped").kv("subject", subject).kv("feature", fname).kv("reason", std::string(e.what()));
                continue;
            }
            for (const auto mode : {eval::DecoderMode::attended, eval::DecoderMode::unattended}) {
                const bool att = mode == eval::DecoderMode::attended;
                std::vector<std::pair<TimeSeries, TimeSeries>> pieces;
                if (data.empty()) throw ValidationError("subject " + subject + " has no training trials");
                if (data.size() < 2) {
                    if (cfg.pseudo_trials < 2)
                        throw ValidationError("subject " + subject + " has " + std::to_string(data.size()) +
                                              " training trial(s); leave-one-out CV needs 2. Set --pseudo-trials N "
                                              "to split trials into N segments");
                    for (const auto& d : data)
                        for (auto& p : decoder::segment_trial(d.eeg, att ? d.attended : d.unattended, cfg.pseudo_trials))
                            pieces.push_back(std::move(p));
                } else {
                    for (const auto& d : data) pieces.emplace_back(d.eeg, att ? d.attended : d.unattended);
                }
                std::vector<decoder::TrialRef> refs;
                for (const auto& p : pieces) refs.push_back({&p.first, &p.second});

                decoder::CovarianceAccumulator total(pieces.front().first.channels(), pieces.front().second.channels(),
                                                     cfg.lags);
                for (const auto& r : refs) total.accumulate(*r.eeg, *r.target);
                const auto lambdas = decoder::scale_lambda_grid(total, relative);
                const auto cv = decoder::loo_cv_lambda(refs, lambdas, cfg.lags);
                decoder::Decoder dec = decoder::RidgeSolver(total).solve(cv.best_lambda);
                dec.eeg_norm_ref = fs::relative(layout.eeg_norm(subject), cfg.out).generic_string();
                dec.feature_norm_ref = fs::relative(layout.feature_norm(fname, subject), cfg.out).generic_string();

                const auto prefix = layout.decoder_prefix(subject, fname, std::string(eval::mode_name(mode)));
                decoder::save_decoder(dec, prefix);
                std::string table = "lambda,fold,score\n";
                for (const auto& r : cv.records)
                    table += format_double(r.lambda) + "," + std::to_string(r.fold) + "," + format_double(r.score) + "\n";
                atomic_write_text(prefix.string() + ".cv.csv", table);
                ++sum.written;
                log_info("decoder_trained")
                    .kv("subject", subject)
                    .kv("feature", fname)
                    .kv("mode", eval::mode_name(mode))
                    .kv("lambda", cv.best_lambda)
                    .kv("lambda_index", cv.best_index)
                    .kv("cv_score", cv.mean_scores[cv.best_index])
                    .kv("folds", refs.size());
            }
        }
    }
    return sum;
}

StepSummary cmd_evaluate(const RunConfig& cfg) {
    const DatasetManifest m = open_manifest(cfg);
    const Layout layout{cfg.out};
    eval::EvaluationReport report;
    StepSummary sum;
    for (const auto& subject : m.subjects()) {
        for (const auto& name : cfg.features) {
            const FeatureSpec spec = FeatureSpec::parse(name);
            const std::string fname = spec.name();
            const auto pa = layout.decoder_prefix(subject, fname, "attended");
            const auto pu = layout.decoder_prefix(subject, fname, "unattended");
            if (!fs::exists(pa.string() + ".meta") || !fs::exists(pu.string() + ".meta")) {
                ++sum.skipped;
                log_warn("evaluate_skipped").kv("subject", subject).kv("feature", fname).kv("reason", "no decoders");
                continue;
            }
            const auto dec_a = decoder::load_decoder(pa);
            const auto dec_u = decoder::load_decoder(pu);
            std::vector<TrialData> data;
            for (const auto* t : m.trials_of(subject, Split::test)) data.push_back(load_trial(layout, *t, fname));
            std::vector<eval::EvalTrial> trials;
            for (const auto& d : data) trials.push_back({d.trial_id, &d.eeg, &d.attended, &d.unattended});
            const auto rows =
                eval::evaluate_subject(dec_a, dec_u, trials, cfg.window_sizes, {m.dataset_id, subject, fname, layer_mode_key(spec)});
            report.rows.insert(report.rows.end(), rows.begin(), rows.end());
            for (const auto& [dec, mode] : {std::pair{&dec_a, "attended"}, std::pair{&dec_u, "unattended"}})
                atomic_write_text(layout.report_dir() / ("weight_energy." + subject + "." + fname + "." + mode + ".dat"),
                                  eval::render_weight_energy(*dec));
            ++sum.written;
        }
    }
    if (report.rows.empty()) throw ValidationError("nothing to evaluate: no decoders or no test windows");
    report.add_aggregates();
    eval::write_report(report, layout.report_dir());
    log_info("report_written").kv("dir", layout.report_dir().string()).kv("rows", report.rows.size());
    return sum;
}

StepSummary cmd_synth(const RunConfig& cfg) {
    synth::write_dataset(cfg.synth, cfg.out);
    return {cfg.synth.n_subjects * cfg.synth.n_trials_per_subject, 0, 0};
}

StepSummary cmd_report(const RunConfig& cfg) {
    const Layout layout{cfg.out};
    const fs::path csv = layout.report_dir() / "report.csv";
    if (!fs::exists(csv)) throw ResolutionError("no report at " + csv.string() + "; run 'evaluate' first", csv.string());
    std::ifstream in(csv);
    std::stringstream ss;
    ss << in.rdbuf();
    eval::EvaluationReport report = eval::parse_csv(ss.str());
    eval::write_report(report, layout.report_dir());
    return {1, 0, 0};
}

}  // namespace aad::pipeline
