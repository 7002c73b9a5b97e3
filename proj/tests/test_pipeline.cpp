#include "aad/audio_io.hpp"
#include "aad/config.hpp"
#include "aad/error.hpp"
#include "aad/features.hpp"
#include "aad/log.hpp"
#include "aad/pipeline.hpp"
#include "aad/synth.hpp"
#include "helpers.hpp"

#include <json.hpp>
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace aad;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Two subjects x three 20 s trials with WAV audio and 256 Hz EEG carrying
// 50 Hz line noise. The EEG follows the attended envelope at a short delay.
fs::path write_audio_dataset(const fs::path& root) {
    fs::create_directories(root / "eeg");
    fs::create_directories(root / "audio");
    nlohmann::json trials = nlohmann::json::array();
    const std::size_t n_audio = 16000 * 20, n_eeg = 256 * 20;
    for (int s = 0; s < 2; ++s) {
        for (int k = 0; k < 3; ++k) {
            const std::string id = "S0" + std::to_string(s + 1) + "_T00" + std::to_string(k + 1);
            const std::uint64_t seed = 100 * s + k;
            const auto env_a = synth::feature_process(64 * 20, 1, 4.0, seed * 2 + 1);
            const auto env_u = synth::feature_process(64 * 20, 1, 4.0, seed * 2 + 2);
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g;
            auto carrier = [&](const TimeSeries& env) {
                MatrixF32 m(n_audio, 1);
                for (std::size_t t = 0; t < n_audio; ++t)
                    m(t, 0) = static_cast<float>(0.1 * std::exp(0.5 * env.matrix(t / 250, 0)) * g(rng));
                return TimeSeries(std::move(m), 16000.0);
            };
            write_wav_float(carrier(env_a), root / "audio" / (id + "_a.wav"));
            write_wav_float(carrier(env_u), root / "audio" / (id + "_u.wav"));
            MatrixF32 eeg(n_eeg, 4);
            for (std::size_t t = 0; t < n_eeg; ++t)
                for (std::size_t c = 0; c < 4; ++c) {
                    const std::size_t src = (t / 4 >= 6) ? t / 4 - 6 : 0;
                    eeg(t, c) = static_cast<float>(env_a.matrix(src, 0) * (1.0 + 0.2 * c) + g(rng) +
                                                   2.0 * std::sin(2 * M_PI * 50.0 * t / 256.0 + c));
                }
            write_matrix_file(eeg, root / "eeg" / (id + ".aadm"));
            trials.push_back({{"trial_id", id},
                              {"subject_id", "S0" + std::to_string(s + 1)},
                              {"eeg", {{"path", "eeg/" + id + ".aadm"}, {"sample_rate_hz", 256}}},
                              {"attended", {{"kind", "audio"}, {"path", "audio/" + id + "_a.wav"}}},
                              {"unattended", {{"kind", "audio"}, {"path", "audio/" + id + "_u.wav"}}}});
        }
    }
    const nlohmann::json m{{"dataset_id", "WAVSET"},
                           {"eeg_channel_count", 4},
                           {"line_noise_hz", 50},
                           {"language", "en"},
                           {"trials", trials}};
    std::ofstream(root / "manifest.json") << m.dump(2);
    return root / "manifest.json";
}

int run_cli(const std::string& args, const fs::path& log = {}) {
    std::string cmd = std::string(AAD_CLI_PATH) + " " + args + " 2>" + (log.empty() ? "/dev/null" : log.string());
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("run config parsing is strict") {
    const auto cfg = parse_run_config(
        R"({"manifest":"m.json","out":"o","features":["envelope","tera_fml"],"lag":{"t_min_s":0,"t_max_s":0.25},
            "window_sizes":[5,10],"notch_hz":60,"synth":{"n_subjects":3,"rho":0.2}})",
        "/base");
    CHECK(cfg.manifest == fs::path("/base/m.json"));
    CHECK(cfg.out == fs::path("/base/o"));
    CHECK(cfg.features.size() == 2);
    CHECK(cfg.lags.n_lags() == 17);
    CHECK(cfg.window_sizes == std::vector<double>{5, 10});
    CHECK(*cfg.notch_hz == 60);
    CHECK(cfg.synth.n_subjects == 3);
    CHECK_THROWS_AS(parse_run_config(R"({"windows":[1]})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"synth":{"sigma":1}})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"features":["mfcc"]})", "/"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"window_sizes":[0]})", "/"), ConfigError);
    CHECK(parse_number_list("1, 2.5,10") == std::vector<double>{1, 2.5, 10});
    CHECK_THROWS_AS(parse_number_list("1,x"), ConfigError);
}

TEST_CASE("audio dataset end to end: idempotence, notch check, decoders, stable report") {
    test::TempDir dir("pipe");
    RunConfig cfg;
    cfg.manifest = write_audio_dataset(dir / "data");
    cfg.out = dir / "out";
    cfg.features = {"envelope", "melspec"};
    cfg.window_sizes = {5, 10};
    cfg.lambda_grid = {1e-3, 1e-1, 10};
    const auto log = dir / "run.log";
    Logger::open_file(log);

    const auto pre = pipeline::cmd_preprocess(cfg);
    CHECK(pre.written == 6);
    CHECK(pre.failed == 0);
    const auto again = pipeline::cmd_preprocess(cfg);
    CHECK(again.written == 0);
    CHECK(again.skipped == 6);
    const auto x = read_matrix_file(cfg.out / "preprocessed" / "S01_T001.eeg64.aadm");
    CHECK(x.rows() == 64 * 20);
    CHECK(x.cols() == 4);

    const auto feat = pipeline::cmd_features(cfg);
    CHECK(feat.failed == 0);
    CHECK(read_matrix_file(cfg.out / "features" / "melspec" / "S02_T003.unatt.aadm").cols() == 20);
    CHECK(read_matrix_file(cfg.out / "features" / "envelope" / "S02_T003.att.aadm").cols() == 1);

    CHECK(pipeline::cmd_train(cfg).written == 8);
    std::size_t n_dec = 0;
    for (const auto& e : fs::directory_iterator(cfg.out / "decoders"))
        if (e.path().string().ends_with(".meta")) ++n_dec;
    CHECK(n_dec == 8);
    CHECK(slurp(cfg.out / "decoders" / "S01.envelope.attended.cv.csv").rfind("lambda,fold,score\n", 0) == 0);

    pipeline::cmd_evaluate(cfg);
    const std::string csv1 = slurp(cfg.out / "report" / "report.csv");
    const std::string table1 = slurp(cfg.out / "report" / "table.txt");
    CHECK(table1.find("Spectrogram") != std::string::npos);
    CHECK(fs::exists(cfg.out / "report" / "weight_energy.S01.envelope.attended.dat"));
    pipeline::cmd_evaluate(cfg);
    CHECK(slurp(cfg.out / "report" / "report.csv") == csv1);
    pipeline::cmd_report(cfg);
    CHECK(slurp(cfg.out / "report" / "table.txt") == table1);

    Logger::close_file();
    const std::string text = slurp(log);
    const std::regex re("event=notch_check .*attenuation_db=([-0-9.e+]+)");
    std::size_t checks = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        ++checks;
        CHECK(std::stod((*it)[1]) >= 30.0);
    }
    CHECK(checks == 6);
}

TEST_CASE("single training trial needs pseudo-trials") {
    test::TempDir dir("pseudo");
    RunConfig cfg;
    cfg.synth.n_subjects = 1;
    cfg.synth.n_trials_per_subject = 2;
    cfg.synth.trial_duration_s = 30;
    cfg.out = dir / "data";
    pipeline::cmd_synth(cfg);
    cfg.manifest = dir / "data" / "manifest.json";
    cfg.out = dir / "out";
    cfg.window_sizes = {5};
    pipeline::cmd_preprocess(cfg);
    pipeline::cmd_features(cfg);
    CHECK_THROWS_AS(pipeline::cmd_train(cfg), ValidationError);
    cfg.pseudo_trials = 3;
    CHECK(pipeline::cmd_train(cfg).written == 2);
}

TEST_CASE("command line exit codes") {
    test::TempDir dir("cli");
    CHECK(run_cli("") == 2);
    CHECK(run_cli("train --bogus") == 2);
    CHECK(run_cli("train") == 2);  // no manifest
    CHECK(run_cli("train --manifest " + (dir / "missing.json").string()) == 3);
    std::ofstream(dir / "bad.json") << R"({"not_a_key": 1})";
    CHECK(run_cli("train --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("train --manifest x --feature spectrogram") == 2);

    const auto data = dir / "data";
    CHECK(run_cli("synth --seed 5 --out " + data.string()) == 0);
    CHECK(fs::exists(data / "manifest.json"));
    const std::string common = " --manifest " + (data / "manifest.json").string() + " --out " + (dir / "o").string();
    CHECK(run_cli("preprocess" + common) == 0);
    CHECK(run_cli("report" + common) == 3);  // nothing evaluated yet
}

}  // TEST_SUITE
