#include "aad/error.hpp"
#include "aad/manifest.hpp"
#include "aad/stats.hpp"
#include "aad/synth.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace aad;
using namespace aad::synth;

namespace {

SynthConfig small(Generation g = Generation::forward) {
    SynthConfig cfg;
    cfg.n_subjects = 1;
    cfg.n_trials_per_subject = 3;
    cfg.trial_duration_s = 20.0;
    cfg.n_eeg_channels = 4;
    cfg.feature_dims = 2;
    cfg.generation = g;
    return cfg;
}

double rel_frobenius(const Eigen::MatrixXd& a, const Kernel& k) {
    double num = 0, den = 0;
    for (std::size_t l = 0; l < k.n_lags; ++l)
        for (std::size_t c = 0; c < k.channels; ++c)
            for (std::size_t d = 0; d < k.dims; ++d) {
                const double ref = k.at(l, c, d);
                const double got = a(static_cast<Eigen::Index>(l * k.channels + c), static_cast<Eigen::Index>(d));
                num += (got - ref) * (got - ref);
                den += ref * ref;
            }
    return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("trial shape and naming") {
    auto cfg = small();
    cfg.trial_duration_s = 120.0;
    const auto truth = make_subject_truth(cfg, 0);
    const auto t = generate_trial(cfg, truth, 0, 4);
    CHECK(t.trial_id == "S01_T005");
    CHECK(t.subject_id == "S01");
    CHECK(t.eeg.samples() == 7680);
    CHECK(t.eeg.channels() == 4);
    CHECK(t.attended.samples() == 7680);
    CHECK(t.attended.channels() == 2);
    CHECK(truth.attended.n_lags == 33);
}

TEST_CASE("generation is deterministic and independent of call order") {
    const auto cfg = small();
    const auto truth = make_subject_truth(cfg, 0);
    const auto all = generate_subject(cfg, truth, 0);
    const auto again = generate_trial(cfg, truth, 0, 2);
    CHECK(all[2].eeg.matrix == again.eeg.matrix);
    CHECK(all[2].attended.matrix == again.attended.matrix);
    CHECK(!(all[0].eeg.matrix == all[1].eeg.matrix));
    auto other = cfg;
    other.seed = 2;
    CHECK(!(generate_trial(other, make_subject_truth(other, 0), 0, 2).eeg.matrix == again.eeg.matrix));
}

TEST_CASE("kernel shapes") {
    auto cfg = small();
    cfg.attended_shape.peak_lag = 20;
    const auto truth = make_subject_truth(cfg, 0);
    CHECK(truth.attended.peak_lag() == 20);
    CHECK(truth.unattended.peak_lag() == 14);
    cfg.identical_kernels = true;
    const auto same = make_subject_truth(cfg, 0);
    CHECK(same.attended.values == same.unattended.values);
    cfg.zero_kernels = true;
    CHECK(make_subject_truth(cfg, 0).attended.is_zero());
}

TEST_CASE("feature process is band-limited and unit variance") {
    const auto s = feature_process(64 * 60, 1, 8.0, 3);
    const auto v = s.matrix.column(0);
    CHECK(test::rms(v) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("backward generation: oracle recovers the generating weights") {
    auto cfg = small(Generation::backward);
    cfg.noise_sigma = 0.0;
    cfg.rho = 0.0;
    const auto truth = make_subject_truth(cfg, 0);
    const auto trials = generate_subject(cfg, truth, 0);
    std::vector<decoder::TrialRef> refs;
    for (const auto& t : trials) refs.push_back({&t.eeg, &t.attended});
    const auto sol = oracle_least_squares(refs, cfg.lags);
    CHECK(!sol.rank_deficient);
    CHECK(rel_frobenius(sol.weights, truth.attended) < 1e-5);
    CHECK(std::abs(sol.intercept(0)) < 1e-5);
}

TEST_CASE("forward generation without noise is fully explained by the lagged EEG") {
    auto cfg = small();
    cfg.noise_sigma = 0.0;
    cfg.rho = 0.0;
    cfg.n_eeg_channels = 16;
    cfg.feature_dims = 1;
    cfg.trial_duration_s = 60.0;
    const auto truth = make_subject_truth(cfg, 0);
    const auto trials = generate_subject(cfg, truth, 0);
    std::vector<decoder::TrialRef> refs;
    for (const auto& t : trials) refs.push_back({&t.eeg, &t.attended});
    const auto sol = oracle_least_squares(refs, cfg.lags);
    decoder::Decoder d;
    d.weights = sol.weights;
    d.intercept = sol.intercept;
    d.lag_config = cfg.lags;
    d.channels = cfg.n_eeg_channels;
    d.dims = 1;
    const auto rec = decoder::reconstruct(d, trials[0].eeg);
    CHECK(*pearson(rec.matrix.column(0), trials[0].attended.matrix.column(0)) > 0.999);
}

TEST_CASE("oracle misuse") {
    const auto cfg = small();
    const auto truth = make_subject_truth(cfg, 0);
    const auto t = generate_trial(cfg, truth, 0, 0);
    // Channels x time instead of time x channels.
    MatrixF32 tr(t.eeg.channels(), t.eeg.samples());
    TimeSeries transposed(std::move(tr), 64.0);
    TimeSeries short_target(t.attended.matrix.slice_rows(0, 4), 64.0);
    const decoder::TrialRef bad[] = {{&transposed, &short_target}};
    CHECK_THROWS_AS(oracle_least_squares(bad, cfg.lags), ValidationError);
    TimeSeries cut(t.attended.matrix.slice_rows(0, 100), 64.0);
    const decoder::TrialRef mismatch[] = {{&t.eeg, &cut}};
    CHECK_THROWS_AS(oracle_least_squares(mismatch, cfg.lags), ValidationError);
}

TEST_CASE("config validation") {
    auto cfg = small();
    cfg.rho = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small();
    cfg.trial_duration_s = 0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small();
    cfg.raw_rate_hz = 32;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("dataset writer produces a loadable manifest and ground truth") {
    test::TempDir dir("synth");
    auto cfg = small();
    cfg.n_subjects = 2;
    write_dataset(cfg, dir.path());
    const auto m = load_manifest(dir / "manifest.json");
    CHECK(m.trials.size() == 6);
    CHECK(m.subjects().size() == 2);
    CHECK(m.trials[0].attended.kind == SourceRef::Kind::feature);
    CHECK(m.trials[0].attended.feature_label == "envelope");
    CHECK(m.trials_of("S02", Split::test).size() == 1);
    const auto h = read_matrix_file(dir / "truth" / "S01.h_att.aadm");
    CHECK(h.rows() == 33);
    CHECK(h.cols() == 4 * 2);
}

}  // TEST_SUITE
