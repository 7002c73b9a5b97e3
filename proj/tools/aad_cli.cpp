#include "aad/config.hpp"
#include "aad/error.hpp"
#include "aad/kernels.hpp"
#include "aad/log.hpp"
#include "aad/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
    std::string config;
    std::string manifest;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    bool force = false;
    std::vector<std::string> features;
    std::string window_sizes;
    std::string lambda_grid;
    std::optional<int> notch_hz;
    bool no_artifact_clip = false;
    std::optional<std::size_t> pseudo_trials;
    std::string log_file;
};

aad::RunConfig resolve(const Flags& f) {
    aad::RunConfig cfg = f.config.empty() ? aad::RunConfig{} : aad::load_run_config(f.config);
    if (!f.manifest.empty()) cfg.manifest = f.manifest;
    if (!f.out.empty()) cfg.out = f.out;
    if (f.seed) {
        cfg.seed = *f.seed;
        cfg.synth.seed = *f.seed;
    }
    if (f.jobs) cfg.jobs = *f.jobs;
    if (f.force) cfg.force = true;
    if (!f.features.empty()) cfg.features = f.features;
    if (!f.window_sizes.empty()) cfg.window_sizes = aad::parse_number_list(f.window_sizes);
    if (!f.lambda_grid.empty()) cfg.lambda_grid = aad::parse_number_list(f.lambda_grid);
    if (f.notch_hz) cfg.notch_hz = *f.notch_hz;
    if (f.no_artifact_clip) cfg.artifact_clip = false;
    if (f.pseudo_trials) cfg.pseudo_trials = *f.pseudo_trials;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Auditory attention decoding pipeline"};
    app.require_subcommand(1);
    Flags flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--manifest", flags.manifest, "dataset manifest (JSON)");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "seed for splits and synthetic data");
        sub->add_option("--jobs", flags.jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--force", flags.force, "rewrite outputs that are up to date");
        sub->add_option("--feature", flags.features, "feature spec, repeatable (envelope, melspec, <model>_ll, <model>_fml)");
        sub->add_option("--window-sizes", flags.window_sizes, "comma-separated window sizes in seconds");
        sub->add_option("--lambda-grid", flags.lambda_grid, "comma-separated multipliers of mean(diag(XtX))");
        sub->add_option("--notch-hz", flags.notch_hz, "line-noise notch frequency (default: manifest)");
        sub->add_flag("--no-artifact-clip", flags.no_artifact_clip, "skip MAD-based artifact clipping");
        sub->add_option("--pseudo-trials", flags.pseudo_trials, "segment training trials when fewer than 2 exist");
        sub->add_option("--log-file", flags.log_file, "also append log lines to this file");
    };

    using Command = aad::pipeline::StepSummary (*)(const aad::RunConfig&);
    const std::vector<std::tuple<const char*, const char*, Command>> commands{
        {"preprocess", "clean and resample EEG to 64 Hz", aad::pipeline::cmd_preprocess},
        {"features", "compute and normalize stimulus features", aad::pipeline::cmd_features},
        {"train", "fit attended and unattended decoders with LOO CV", aad::pipeline::cmd_train},
        {"evaluate", "window-level decoding accuracy and report", aad::pipeline::cmd_evaluate},
        {"synth", "write a synthetic dataset with ground truth", aad::pipeline::cmd_synth},
        {"report", "re-render tables and plot data from report.csv", aad::pipeline::cmd_report},
    };
    std::map<CLI::App*, Command> handlers;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        handlers[sub] = fn;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(aad::ErrorClass::config);
    }

    try {
        if (!flags.log_file.empty()) aad::Logger::open_file(flags.log_file);
        const aad::RunConfig cfg = resolve(flags);
        if (cfg.jobs > 0) aad::kernels::set_thread_count(cfg.jobs);
        for (auto& [sub, fn] : handlers) {
            if (!sub->parsed()) continue;
            const auto s = fn(cfg);
            aad::log_info("done")
                .kv("command", sub->get_name())
                .kv("written", s.written)
                .kv("skipped", s.skipped)
                .kv("failed", s.failed);
            return s.failed > 0 ? static_cast<int>(aad::ErrorClass::data) : 0;
        }
    } catch (const aad::Error& e) {
        aad::log_error("fatal").kv("class", e.exit_code()).kv("reason", std::string(e.what()));
        return e.exit_code();
    } catch (const std::exception& e) {
        aad::log_error("fatal").kv("reason", std::string(e.what()));
        return static_cast<int>(aad::ErrorClass::data);
    }
    return 0;
}
