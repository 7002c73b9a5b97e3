#include "aad/error.hpp"
#include "aad/manifest.hpp"
#include "aad/util.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

using namespace aad;

namespace {

std::string trial_json(const std::string& id, const std::string& subject, const std::string& extra = "") {
    return R"({"trial_id":")" + id + R"(","subject_id":")" + subject +
           R"(","eeg":{"path":"eeg/)" + id + R"(.aadm","sample_rate_hz":512},)" +
           R"("attended":{"kind":"audio","path":"audio/)" + id + R"(_a.wav"},)" +
           R"("unattended":{"kind":"audio","path":"audio/)" + id + R"(_u.wav"})" + extra + "}";
}

std::string manifest_json(const std::vector<std::string>& trials, int line_noise = 50) {
    std::string t;
    for (std::size_t i = 0; i < trials.size(); ++i) t += (i ? "," : "") + trials[i];
    return R"({"dataset_id":"FU","eeg_channel_count":64,"line_noise_hz":)" + std::to_string(line_noise) +
           R"(,"language":"da","trials":[)" + t + "]}";
}

const ManifestOptions kNoFiles{17, false};

}  // namespace

TEST_SUITE("manifest") {

TEST_CASE("parses fields and resolves paths against the root") {
    const auto m = parse_manifest(manifest_json({trial_json("t1", "s1"), trial_json("t2", "s1")}), "/data", kNoFiles);
    CHECK(m.dataset_id == "FU");
    CHECK(m.eeg_channel_count == 64);
    CHECK(m.line_noise_hz == 50);
    REQUIRE(m.trials.size() == 2);
    CHECK(m.trials[0].eeg_path == std::filesystem::path("/data/eeg/t1.aadm"));
    CHECK(m.trials[0].eeg_sample_rate_hz == 512);
    CHECK(m.trials[0].attended.kind == SourceRef::Kind::audio);
    CHECK(m.subjects() == std::vector<std::string>{"s1"});
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(parse_manifest("{", "/", kNoFiles), ValidationError);
    CHECK_THROWS_AS(parse_manifest(manifest_json({trial_json("t1", "s1")}, 55), "/", kNoFiles), ValidationError);
    CHECK_THROWS_AS(parse_manifest(manifest_json({trial_json("t1", "s1"), trial_json("t1", "s1")}), "/", kNoFiles),
                    ValidationError);
    CHECK_THROWS_AS(parse_manifest(manifest_json({}), "/", kNoFiles), ValidationError);
    // Same file for both streams.
    const std::string same = R"({"trial_id":"x","subject_id":"s","eeg":{"path":"e.aadm","sample_rate_hz":64},)"
                             R"("attended":{"path":"a.wav"},"unattended":{"path":"a.wav"}})";
    CHECK_THROWS_AS(parse_manifest(manifest_json({same}), "/", kNoFiles), ValidationError);
    // Feature sources need a rate.
    const std::string norate = R"({"trial_id":"x","subject_id":"s","eeg":{"path":"e.aadm","sample_rate_hz":64},)"
                               R"("attended":{"kind":"feature","path":"a.aadm"},"unattended":{"kind":"feature","path":"b.aadm","sample_rate_hz":64}})";
    CHECK_THROWS_AS(parse_manifest(manifest_json({norate}), "/", kNoFiles), ValidationError);
}

TEST_CASE("missing resources are resolution errors naming the path") {
    test::TempDir dir("manifest");
    try {
        parse_manifest(manifest_json({trial_json("t1", "s1")}), dir.path());
        FAIL("no exception");
    } catch (const ResolutionError& e) {
        CHECK(e.path.find("t1.aadm") != std::string::npos);
    }
}

TEST_CASE("EEG channel count must match the manifest") {
    test::TempDir dir("manifest_ch");
    std::filesystem::create_directories(dir / "eeg");
    std::filesystem::create_directories(dir / "audio");
    write_matrix_file(MatrixF32(10, 3), dir / "eeg" / "t1.aadm");
    std::ofstream(dir / "audio" / "t1_a.wav") << "x";
    std::ofstream(dir / "audio" / "t1_u.wav") << "x";
    CHECK_THROWS_AS(parse_manifest(manifest_json({trial_json("t1", "s1")}), dir.path()), ValidationError);
}

TEST_CASE("excluded trials are dropped") {
    const auto m = parse_manifest(
        manifest_json({trial_json("t1", "s1"), trial_json("t2", "s1", R"(,"exclude":true)")}), "/", kNoFiles);
    CHECK(m.trials.size() == 1);
}

TEST_CASE("seeded 90/10 split per subject") {
    CHECK(test_trial_count(1) == 1);
    CHECK(test_trial_count(4) == 1);
    CHECK(test_trial_count(10) == 1);
    CHECK(test_trial_count(15) == 2);
    CHECK(test_trial_count(60) == 6);

    std::vector<std::string> trials;
    for (int i = 0; i < 20; ++i) trials.push_back(trial_json("a" + std::to_string(i), "s1"));
    for (int i = 0; i < 30; ++i) trials.push_back(trial_json("b" + std::to_string(i), "s2"));
    const auto m1 = parse_manifest(manifest_json(trials), "/", kNoFiles);
    const auto m2 = parse_manifest(manifest_json(trials), "/", kNoFiles);
    CHECK(m1.trials_of("s1", Split::test).size() == 2);
    CHECK(m1.trials_of("s2", Split::test).size() == 3);
    for (std::size_t i = 0; i < m1.trials.size(); ++i) CHECK(m1.trials[i].split == m2.trials[i].split);

    const auto m3 = parse_manifest(manifest_json(trials), "/", {99, false});
    bool differs = false;
    for (std::size_t i = 0; i < m1.trials.size(); ++i) differs |= m1.trials[i].split != m3.trials[i].split;
    CHECK(differs);
}

TEST_CASE("explicit split tags are honoured and may not be mixed") {
    const auto m = parse_manifest(manifest_json({trial_json("t1", "s1", R"(,"split":"test")"),
                                                 trial_json("t2", "s1", R"(,"split":"train")")}),
                                  "/", kNoFiles);
    CHECK(m.trials[0].split == Split::test);
    CHECK(m.trials[1].split == Split::train);
    CHECK_THROWS_AS(parse_manifest(manifest_json({trial_json("t1", "s1", R"(,"split":"test")"), trial_json("t2", "s1")}),
                                   "/", kNoFiles),
                    ValidationError);
}

TEST_CASE("seeded permutation is a deterministic permutation") {
    const auto p = seeded_permutation(50, 7);
    CHECK(p == seeded_permutation(50, 7));
    std::set<std::size_t> s(p.begin(), p.end());
    CHECK(s.size() == 50);
    CHECK(*s.rbegin() == 49);
    CHECK(p != seeded_permutation(50, 8));
}

TEST_CASE("save and reload") {
    test::TempDir dir("manifest_rt");
    auto m = parse_manifest(manifest_json({trial_json("t1", "s1"), trial_json("t2", "s1")}), dir.path(), kNoFiles);
    save_manifest(m, dir / "manifest.json");
    const auto back = load_manifest(dir / "manifest.json", kNoFiles);
    REQUIRE(back.trials.size() == 2);
    CHECK(back.trials[1].eeg_path == m.trials[1].eeg_path);
    CHECK(back.trials[1].split == m.trials[1].split);
}

TEST_CASE("feature spec names") {
    CHECK(FeatureSpec::parse("envelope").dims() == 1);
    CHECK(FeatureSpec::parse("melspec").dims() == 20);
    const auto ll = FeatureSpec::parse("tera_ll");
    CHECK(ll.kind == FeatureSpec::Kind::embedding);
    CHECK(ll.embedding_model_id == "tera");
    CHECK(ll.dims() == 20);
    CHECK(ll.name() == "tera_ll");
    const auto fml = FeatureSpec::parse("wavlm_fml");
    CHECK(fml.dims() == 60);
    CHECK(fml.layer_mode_name() == "FML");
    CHECK_THROWS_AS(FeatureSpec::parse("spectrogram"), ConfigError);
    CHECK_THROWS_AS(FeatureSpec::parse("tera_xl"), ConfigError);
}

TEST_CASE("seed mixing and hashing are stable") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(hash_string("S01") == hash_string("S01"));
    CHECK(hash_string("") == 14695981039346656037ULL);  // FNV-1a offset basis
}

}  // TEST_SUITE
