#include <malloc.h>

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gazefake/cli_harness.hpp"
#include "gazefake/errors.hpp"

namespace {

using gazefake::RunConfig;

// Flag values kept as text and routed through the config parser, so flags and config keys share one code path.
struct FlagSet {
    std::vector<std::pair<std::string, std::string>> order;  // key, value as given

    void add(CLI::App& app, const std::string& name, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(
            name, [this, key](const std::string& v) { order.emplace_back(key, v); }, help);
    }
};

int run(int argc, char** argv) {
    CLI::App app{"gazefake: eye and gaze signatures for deep-fake detection"};
    app.require_subcommand(1);
    app.fallthrough();

    FlagSet flags;
    std::string config_path;
    bool quiet = false;
    app.add_option("--config", config_path, "key = value config file");
    flags.add(app, "--seed", "seed", "random seed");
    flags.add(app, "--omega", "omega", "sequence length");
    flags.add(app, "--scheme", "scheme", "voting scheme: mean, majority, confidence, log_odds");
    flags.add(app, "--mask", "mask", "comma-separated feature sets");
    flags.add(app, "--out", "out", "output path");
    app.add_flag("-q,--quiet", quiet, "suppress progress messages");

    auto* synth = app.add_subcommand("synth", "generate paired real/fake synthetic tracks");
    flags.add(*synth, "--n", "n", "videos per class");
    flags.add(*synth, "--frames", "n_frames", "frames per track");
    flags.add(*synth, "--gaze-noise", "gaze_noise_deg", "baseline gaze noise in degrees");
    flags.add(*synth, "--fake-perturbations", "fake_perturbations", "e.g. noise:1.5,asymmetry:30,smooth:5");
    flags.add(*synth, "--inject-noise", "inject_noise_deg", "extra gaze noise on every track, degrees");

    auto* sigs = app.add_subcommand("signatures", "build signatures from a track directory");
    flags.add(*sigs, "--tracks", "tracks", "track directory");
    flags.add(*sigs, "--d-plus", "d_plus_mm", "maximum IPD in mm");

    auto* train = app.add_subcommand("train", "train and validate a classifier");
    flags.add(*train, "--signatures", "signatures", "signature file");
    flags.add(*train, "--split", "split", "random_video_70_30 or kfold_5");
    flags.add(*train, "--epochs", "epochs", "training epochs");
    flags.add(*train, "--batch-size", "batch_size", "mini-batch size");
    flags.add(*train, "--lr", "learning_rate", "Adam learning rate");
    flags.add(*train, "--validate-every", "validate_every", "validation period in epochs");

    auto* eval = app.add_subcommand("eval", "evaluate a model on a signature file");
    flags.add(*eval, "--model", "model", "model file");
    flags.add(*eval, "--signatures", "signatures", "signature file");

    auto* ablate = app.add_subcommand("ablate", "omega sweep and feature ablation");
    flags.add(*ablate, "--tracks", "tracks", "track directory");
    flags.add(*ablate, "--omegas", "ablate_omegas", "comma-separated omega values");
    flags.add(*ablate, "--epochs", "epochs", "training epochs");

    auto* render = app.add_subcommand("render", "render signatures as PPM images");
    flags.add(*render, "--signatures", "signatures", "signature file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    RunConfig cfg;
    if (!config_path.empty()) gazefake::apply_config_file(cfg, config_path);
    for (const auto& [key, value] : flags.order) gazefake::apply_config_value(cfg, key, value);
    cfg.quiet = quiet;

    if (synth->parsed()) {
        gazefake::cmd_synth(cfg);
    } else if (sigs->parsed()) {
        gazefake::cmd_signatures(cfg);
    } else if (train->parsed()) {
        const auto s = gazefake::cmd_train(cfg);
        std::cout << "S.Acc " << s.mean_sequence_accuracy << " V.Acc " << s.mean_video_accuracy;
        if (s.folds.size() > 1) std::cout << " +- " << s.std_video_accuracy;
        std::cout << "\nmetrics " << s.metrics_path.string() << '\n';
    } else if (eval->parsed()) {
        const auto ev = gazefake::cmd_eval(cfg);
        if (cfg.out.empty()) std::cout << gazefake::format_verdict_report(ev);
    } else if (ablate->parsed()) {
        std::cout << gazefake::format_ablation_table(gazefake::cmd_ablate(cfg));
    } else if (render->parsed()) {
        gazefake::cmd_render(cfg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    // Training temporaries are a few MB each; keep them on the heap instead of fresh mappings per batch.
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 128 << 20);
    try {
        return run(argc, argv);
    } catch (const gazefake::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
