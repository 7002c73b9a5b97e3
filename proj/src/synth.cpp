#include "aad/synth.hpp"

#include "aad/dsp.hpp"
#include "aad/error.hpp"
#include "aad/features.hpp"
#include "aad/log.hpp"
#include "aad/manifest.hpp"
#include "aad/util.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace aad::synth {

namespace {

constexpr double kRate = features::kFeatureRateHz;
constexpr double kBurnInS = 4.0;

// Stream tags for mix_seed so every random quantity has its own generator.
enum Stream : std::uint64_t {
    kKernelAttended = 0x6b61,
    kKernelUnattended = 0x6b75,
    kFeatureAttended = 0x6661,
    kFeatureUnattended = 0x6675,
    kNoise = 0x6e6f,
    kEeg = 0x6565,
    kLinePhase = 0x6c70,
};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t subject, std::size_t trial) {
    return mix_seed(mix_seed(seed, subject + 1), trial + 1);
}

Kernel raised_cosine_kernel(std::size_t L, std::size_t C, std::size_t D, const KernelShape& shape,
                            std::uint64_t seed) {
    Kernel k(L, C, D);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t d = 0; d < D; ++d) {
            const double a = amp(rng);
            const double w = std::max(1.0, shape.width_lags * (1.0 + shape.width_jitter * jitter(rng)));
            for (std::size_t l = 0; l < L; ++l) {
                const double x = (static_cast<double>(l) - shape.peak_lag) / w;
                if (std::abs(x) < 1.0) k.at(l, c, d) = a * 0.5 * (1.0 + std::cos(M_PI * x));
            }
        }
    return k;
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

void standardize(std::span<double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    s = std::sqrt(s / static_cast<double>(v.size()));
    for (auto& x : v) x = s > 0 ? (x - m) / s : 0.0;
}

/// Column-major (samples x dims) band-limited process, standardized per column.
std::vector<double> band_limited(std::size_t samples, std::size_t dims, double cutoff_hz, std::uint64_t seed) {
    const auto burn = static_cast<std::size_t>(kBurnInS * kRate);
    const dsp::Sos sos = dsp::butterworth_lowpass(4, cutoff_hz, kRate);
    std::vector<double> out(samples * dims);
    for (std::size_t d = 0; d < dims; ++d) {
        auto v = gaussian(burn + samples, mix_seed(seed, d));
        dsp::sos_filter(sos, v);
        std::copy(v.begin() + static_cast<std::ptrdiff_t>(burn), v.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(d * samples));
        standardize(std::span<double>(out).subspan(d * samples, samples));
    }
    return out;
}

// Rounds through float so EEG is computed from exactly the stored feature values.
void quantize(std::span<double> v) {
    for (auto& x : v) x = static_cast<float>(x);
}

// r(t, c) += gain * sum_{l,d} h[l,c,d] s_d(t + hist - a_l), for t in [0, T).
void convolve_into(std::vector<double>& r, std::size_t T, const Kernel& h, const std::vector<double>& s,
                   std::size_t S, std::size_t hist, int first_lag, double gain) {
    const std::size_t C = h.channels, D = h.dims;
    for (std::size_t l = 0; l < h.n_lags; ++l) {
        const long long a = first_lag + static_cast<long long>(l);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t d = 0; d < D; ++d) {
                const double w = gain * h.at(l, c, d);
                if (w == 0.0) continue;
                const double* src = s.data() + d * S;
                double* dst = r.data() + c * T;
                for (std::size_t t = 0; t < T; ++t)
                    dst[t] += w * src[static_cast<long long>(t + hist) - a];
            }
    }
}

TimeSeries from_columns(const std::vector<double>& cols, std::size_t rows, std::size_t n_cols, std::size_t offset,
                        std::size_t stride, double rate) {
    MatrixF32 m(rows, n_cols);
    for (std::size_t c = 0; c < n_cols; ++c)
        for (std::size_t t = 0; t < rows; ++t) m(t, c) = static_cast<float>(cols[c * stride + offset + t]);
    return TimeSeries(std::move(m), rate);
}

MatrixF32 kernel_matrix(const Kernel& k) {
    MatrixF32 m(k.n_lags, k.channels * k.dims);
    for (std::size_t l = 0; l < k.n_lags; ++l)
        for (std::size_t c = 0; c < k.channels; ++c)
            for (std::size_t d = 0; d < k.dims; ++d) m(l, c * k.dims + d) = static_cast<float>(k.at(l, c, d));
    return m;
}

}  // namespace

std::size_t Kernel::peak_lag() const {
    std::size_t best = 0;
    double best_e = -1.0;
    for (std::size_t l = 0; l < n_lags; ++l) {
        double e = 0.0;
        for (std::size_t i = 0; i < channels * dims; ++i) e += values[l * channels * dims + i] * values[l * channels * dims + i];
        if (e > best_e) {
            best_e = e;
            best = l;
        }
    }
    return best;
}

bool Kernel::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

void SynthConfig::validate() const {
    lags.validate();
    if (std::abs(lags.fs_hz - kRate) > 1e-9) throw ConfigError("synth: lag window must be at 64 Hz");
    if (n_subjects == 0 || n_trials_per_subject == 0) throw ConfigError("synth: need at least one subject and trial");
    if (n_eeg_channels == 0 || feature_dims == 0) throw ConfigError("synth: channels and dims must be positive");
    if (!(trial_duration_s * kRate >= static_cast<double>(lags.n_lags())))
        throw ConfigError("synth: trial shorter than the lag window");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("synth: rho must be in [0, 1]");
    if (!(noise_sigma >= 0.0)) throw ConfigError("synth: noise_sigma must be >= 0");
    if (!(feature_cutoff_hz > 0 && feature_cutoff_hz < kRate / 2))
        throw ConfigError("synth: feature cutoff must be inside (0, 32) Hz");
    if (eeg_cutoff_hz < 0 || eeg_cutoff_hz >= kRate / 2) throw ConfigError("synth: EEG cutoff must be inside [0, 32) Hz");
    if (raw_rate_hz != 0.0 && raw_rate_hz < kRate) throw ConfigError("synth: raw_rate_hz must be 0 or >= 64");
    if (line_noise_amplitude < 0) throw ConfigError("synth: line noise amplitude must be >= 0");
    if (line_noise_hz != 50.0 && line_noise_hz != 60.0) throw ConfigError("synth: line_noise_hz must be 50 or 60");
    for (const auto* s : {&attended_shape, &unattended_shape})
        if (!(s->width_lags > 0) || !(s->width_jitter >= 0 && s->width_jitter < 1))
            throw ConfigError("synth: kernel width must be positive and jitter in [0, 1)");
}

std::string subject_name(std::size_t subject) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%02zu", subject + 1);
    return buf;
}

std::string trial_name(std::size_t subject, std::size_t trial) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "S%02zu_T%03zu", subject + 1, trial + 1);
    return buf;
}

SubjectTruth make_subject_truth(const SynthConfig& cfg, std::size_t subject) {
    cfg.validate();
    const std::size_t L = cfg.lags.n_lags(), C = cfg.n_eeg_channels, D = cfg.feature_dims;
    SubjectTruth truth;
    if (cfg.zero_kernels) {
        truth.attended = Kernel(L, C, D);
        truth.unattended = Kernel(L, C, D);
        return truth;
    }
    const std::uint64_t base = mix_seed(cfg.seed, 0x5355424a + subject);
    truth.attended = raised_cosine_kernel(L, C, D, cfg.attended_shape, mix_seed(base, kKernelAttended));
    if (cfg.generation == Generation::backward) truth.unattended = Kernel(L, C, D);
    else if (cfg.identical_kernels) truth.unattended = truth.attended;
    else truth.unattended = raised_cosine_kernel(L, C, D, cfg.unattended_shape, mix_seed(base, kKernelUnattended));
    return truth;
}

TimeSeries feature_process(std::size_t samples, std::size_t dims, double cutoff_hz, std::uint64_t seed) {
    return from_columns(band_limited(samples, dims, cutoff_hz, seed), samples, dims, 0, samples, kRate);
}

SynthTrial generate_trial(const SynthConfig& cfg, const SubjectTruth& truth, std::size_t subject, std::size_t trial) {
    const std::size_t T = static_cast<std::size_t>(std::lround(cfg.trial_duration_s * kRate));
    const std::size_t C = cfg.n_eeg_channels, D = cfg.feature_dims;
    const int first = cfg.lags.first_lag();
    const int last = cfg.lags.range().last();
    const std::uint64_t ts = trial_seed(cfg.seed, subject, trial);

    SynthTrial out;
    out.trial_id = trial_name(subject, trial);
    out.subject_id = subject_name(subject);
    std::vector<double> r(T * C, 0.0);

    if (cfg.generation == Generation::forward) {
        // Pre- and post-trial stimulus history so every lag sees real signal.
        const std::size_t hist = static_cast<std::size_t>(std::max(0, last));
        const std::size_t fut = static_cast<std::size_t>(std::max(0, -first));
        const std::size_t S = hist + T + fut;
        auto s_att = band_limited(S, D, cfg.feature_cutoff_hz, mix_seed(ts, kFeatureAttended));
        auto s_un = band_limited(S, D, cfg.feature_cutoff_hz, mix_seed(ts, kFeatureUnattended));
        quantize(s_att);
        quantize(s_un);
        std::vector<double> drive = s_un;
        if (cfg.unattended_nonlinearity == Nonlinearity::rectify) {
            for (auto& v : drive) v = std::max(v, 0.0);
            for (std::size_t d = 0; d < D; ++d) standardize(std::span<double>(drive).subspan(d * S, S));
        }
        convolve_into(r, T, truth.attended, s_att, S, hist, first, 1.0);
        if (cfg.rho > 0) convolve_into(r, T, truth.unattended, drive, S, hist, first, cfg.rho);
        out.attended = from_columns(s_att, T, D, hist, S, kRate);
        out.unattended = from_columns(s_un, T, D, hist, S, kRate);
    } else {
        std::vector<double> eeg = cfg.eeg_cutoff_hz > 0
                                      ? band_limited(T, C, cfg.eeg_cutoff_hz, mix_seed(ts, kEeg))
                                      : gaussian(T * C, mix_seed(ts, kEeg));
        quantize(eeg);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(
            static_cast<Eigen::Index>(truth.attended.n_lags * C), static_cast<Eigen::Index>(D));
        std::copy(truth.attended.values.begin(), truth.attended.values.end(), w.data());
        std::vector<double> s(T * D), bias(D, 0.0);
        kernels::serial::lagged_apply(eeg, T, C, cfg.lags.range(),
                                      std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), bias, D, s);
        if (cfg.noise_sigma > 0) {
            const auto n = gaussian(T * D, mix_seed(ts, kNoise));
            for (std::size_t i = 0; i < s.size(); ++i) s[i] += cfg.noise_sigma * n[i];
        }
        MatrixF32 att(T, D);
        for (std::size_t i = 0; i < T * D; ++i) att.data()[i] = static_cast<float>(s[i]);
        out.attended = TimeSeries(std::move(att), kRate);
        out.unattended = from_columns(band_limited(T, D, cfg.feature_cutoff_hz, mix_seed(ts, kFeatureUnattended)), T,
                                      D, 0, T, kRate);
        r = std::move(eeg);
    }

    if (cfg.generation == Generation::forward && cfg.noise_sigma > 0) {
        const auto n = gaussian(T * C, mix_seed(ts, kNoise));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += cfg.noise_sigma * n[i];
    }
    out.eeg = TimeSeries(from_column_major(r, T, C), kRate);

    if (cfg.raw_rate_hz > kRate) {
        out.eeg = dsp::resample(out.eeg, cfg.raw_rate_hz);
        if (cfg.line_noise_amplitude > 0) {
            std::mt19937_64 rng(mix_seed(ts, kLinePhase));
            std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
            for (std::size_t c = 0; c < C; ++c) {
                const double ph = phase(rng);
                for (std::size_t t = 0; t < out.eeg.samples(); ++t)
                    out.eeg.matrix(t, c) += static_cast<float>(
                        cfg.line_noise_amplitude *
                        std::sin(2.0 * M_PI * cfg.line_noise_hz * static_cast<double>(t) / cfg.raw_rate_hz + ph));
            }
        }
    }
    return out;
}

std::vector<SynthTrial> generate_subject(const SynthConfig& cfg, const SubjectTruth& truth, std::size_t subject) {
    std::vector<SynthTrial> out(cfg.n_trials_per_subject);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long k = 0; k < static_cast<long long>(out.size()); ++k)
        out[static_cast<std::size_t>(k)] = generate_trial(cfg, truth, subject, static_cast<std::size_t>(k));
    return out;
}

void write_dataset(const SynthConfig& cfg, const std::filesystem::path& dir) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(dir / "eeg");
    fs::create_directories(dir / "features");
    fs::create_directories(dir / "truth");

    DatasetManifest m;
    m.dataset_id = cfg.dataset_id;
    m.eeg_channel_count = cfg.n_eeg_channels;
    m.line_noise_hz = static_cast<int>(cfg.line_noise_hz);
    m.language = "synthetic";
    m.root = dir;
    const double eeg_rate = cfg.raw_rate_hz > kRate ? cfg.raw_rate_hz : kRate;

    for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
        const SubjectTruth truth = make_subject_truth(cfg, s);
        const std::string subj = subject_name(s);
        write_matrix_file(kernel_matrix(truth.attended), dir / "truth" / (subj + ".h_att.aadm"));
        write_matrix_file(kernel_matrix(truth.unattended), dir / "truth" / (subj + ".h_unatt.aadm"));

        const auto trials = generate_subject(cfg, truth, s);
        const auto perm = seeded_permutation(trials.size(), mix_seed(cfg.seed, hash_string(subj)));
        const auto n_test = test_trial_count(trials.size());
        std::vector<Split> split(trials.size(), Split::train);
        for (std::size_t k = 0; k < n_test; ++k) split[perm[k]] = Split::test;

        for (std::size_t k = 0; k < trials.size(); ++k) {
            const auto& tr = trials[k];
            write_matrix_file(tr.eeg.matrix, dir / "eeg" / (tr.trial_id + ".aadm"));
            write_matrix_file(tr.attended.matrix, dir / "features" / (tr.trial_id + ".att.aadm"));
            write_matrix_file(tr.unattended.matrix, dir / "features" / (tr.trial_id + ".unatt.aadm"));
            TrialDescriptor t;
            t.trial_id = tr.trial_id;
            t.subject_id = tr.subject_id;
            t.eeg_path = dir / "eeg" / (tr.trial_id + ".aadm");
            t.eeg_sample_rate_hz = eeg_rate;
            t.attended = {SourceRef::Kind::feature, dir / "features" / (tr.trial_id + ".att.aadm"), kRate,
                          cfg.feature_label};
            t.unattended = {SourceRef::Kind::feature, dir / "features" / (tr.trial_id + ".unatt.aadm"), kRate,
                            cfg.feature_label};
            t.split = split[k];
            m.trials.push_back(std::move(t));
        }
    }
    write_key_values(dir / "truth" / "synth.meta",
                     {{"seed", std::to_string(cfg.seed)},
                      {"generation", cfg.generation == Generation::forward ? "forward" : "backward"},
                      {"n_subjects", std::to_string(cfg.n_subjects)},
                      {"n_trials_per_subject", std::to_string(cfg.n_trials_per_subject)},
                      {"trial_duration_s", format_double(cfg.trial_duration_s)},
                      {"n_eeg_channels", std::to_string(cfg.n_eeg_channels)},
                      {"feature_dims", std::to_string(cfg.feature_dims)},
                      {"rho", format_double(cfg.rho)},
                      {"noise_sigma", format_double(cfg.noise_sigma)},
                      {"attended_peak_lag", format_double(cfg.attended_shape.peak_lag)},
                      {"unattended_peak_lag", format_double(cfg.unattended_shape.peak_lag)}});
    save_manifest(m, dir / "manifest.json");
    log_info("synth_written")
        .kv("dir", dir.string())
        .kv("subjects", cfg.n_subjects)
        .kv("trials", cfg.n_subjects * cfg.n_trials_per_subject);
}

OracleSolution oracle_least_squares(std::span<const decoder::TrialRef> trials, const decoder::LagConfig& lags) {
    if (trials.empty()) throw ValidationError("oracle: no trials");
    const std::size_t C = trials.front().eeg->channels(), D = trials.front().target->channels();
    const std::size_t L = lags.n_lags(), P = L * C;
    std::size_t rows = 0;
    for (const auto& tr : trials) {
        if (tr.eeg->channels() != C || tr.target->channels() != D)
            throw ValidationError("oracle: trials disagree on channel or dim counts");
        if (tr.eeg->samples() != tr.target->samples())
            throw ValidationError("oracle: EEG has " + std::to_string(tr.eeg->samples()) + " rows but target has " +
                                  std::to_string(tr.target->samples()) + "; inputs must be time x channels");
        if (tr.eeg->samples() < C)
            throw ValidationError("oracle: fewer samples than channels; inputs look transposed");
        rows += tr.eeg->samples();
    }
    if (rows < P + 1) throw ValidationError("oracle: fewer rows than unknowns");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(P + 1));
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(D));
    Eigen::Index r0 = 0;
    for (const auto& tr : trials) {
        const MatrixF32 design = decoder::build_lagged_design(*tr.eeg, lags);
        for (std::size_t t = 0; t < design.rows(); ++t, ++r0) {
            for (std::size_t p = 0; p < P; ++p) X(r0, static_cast<Eigen::Index>(p)) = design(t, p);
            X(r0, static_cast<Eigen::Index>(P)) = 1.0;
            for (std::size_t d = 0; d < D; ++d) Y(r0, static_cast<Eigen::Index>(d)) = (*tr.target).matrix(t, d);
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    OracleSolution sol;
    sol.rank = static_cast<std::size_t>(cod.rank());
    sol.rank_deficient = sol.rank < P + 1;
    if (sol.rank_deficient) log_warn("oracle_rank_deficient").kv("rank", sol.rank).kv("unknowns", P + 1);
    const Eigen::MatrixXd B = cod.solve(Y);
    sol.weights = B.topRows(static_cast<Eigen::Index>(P));
    sol.intercept = B.row(static_cast<Eigen::Index>(P)).transpose();
    return sol;
}

}  // namespace aad::synth
