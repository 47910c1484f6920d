#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazefake/dense_classifier.hpp"
#include "gazefake/signature.hpp"
#include "gazefake/synth_tracks.hpp"
#include "gazefake/video_verdict.hpp"

namespace gazefake {

namespace fs = std::filesystem;

enum class SplitKind { RandomVideo70_30, KFold5 };

std::string_view to_string(SplitKind k);
SplitKind parse_split(std::string_view name);

// Everything a command needs. Precedence: defaults < config file < command-line flags.
struct RunConfig {
    int omega = 32;
    double d_plus_mm = kDefaultDPlusMm;
    SplitKind split = SplitKind::RandomVideo70_30;
    VoteScheme scheme = VoteScheme::LogOdds;
    std::uint64_t seed = 0;
    std::string mask = "all";
    TrainConfig train;

    // synth
    int n = 0;  // videos per class
    int n_frames = 256;
    double gaze_noise_deg = 0.2;
    std::string fake_perturbations = "noise:1.5,asymmetry:30,smooth:5";
    double inject_noise_deg = 0.0;  // extra angular noise applied to every generated track

    // ablation
    std::vector<int> ablate_omegas{16, 32, 64, 128};

    // paths
    fs::path tracks;
    fs::path signatures;
    fs::path model;
    fs::path out;

    bool quiet = false;
};

// Applies "key = value" lines ('#' starts a comment). Throws UsageError on unknown keys or bad values.
void apply_config_text(RunConfig& cfg, std::string_view text);
void apply_config_file(RunConfig& cfg, const fs::path& path);
void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

// ---- splitting and evaluation ----

struct VideoSplit {
    std::vector<std::string> train_videos;
    std::vector<std::string> test_videos;
};

// Stratified by label and keyed by video_id. RandomVideo70_30 yields one split, KFold5 five.
std::vector<VideoSplit> split_videos(std::span<const Signature> sigs, SplitKind kind, std::uint64_t seed);
std::vector<Signature> select_videos(std::span<const Signature> sigs, const std::vector<std::string>& videos);

struct Confusion {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;  // positive = fake
};

struct Evaluation {
    std::vector<double> sequence_probs;  // aligned with the input signatures
    double sequence_accuracy = 0.0;
    std::map<VoteScheme, double> video_accuracy;
    std::map<VoteScheme, std::vector<VideoVerdict>> verdicts;
    std::map<std::string, Label> truth;
    Confusion confusion;  // for the chosen scheme
    VoteScheme scheme = VoteScheme::LogOdds;

    double chosen_video_accuracy() const { return video_accuracy.at(scheme); }
};

Evaluation evaluate_probs(std::span<const Signature> sigs, std::vector<double> probs, VoteScheme scheme);
Evaluation evaluate(const ModelState& model, std::span<const Signature> sigs, VoteScheme scheme);

// JSON-Lines: one verdict object per video, then {"summary": {...}}.
std::string format_verdict_report(const Evaluation& ev);

// ---- commands ----

struct SynthSummary {
    std::vector<fs::path> files;
    fs::path manifest;
};
SynthSummary cmd_synth(const RunConfig& cfg);

std::vector<Track> load_tracks(const fs::path& dir);
std::vector<Signature> signatures_from_tracks(std::span<const Track> tracks, const RunConfig& cfg,
                                              std::map<std::string, std::size_t>* counts = nullptr);

struct SignaturesSummary {
    std::size_t tracks = 0;
    std::size_t signatures = 0;
    std::map<std::string, std::size_t> per_track;
};
SignaturesSummary cmd_signatures(const RunConfig& cfg);

struct FoldResult {
    fs::path model_path;
    fs::path test_path;
    double sequence_accuracy = 0.0;
    double video_accuracy = 0.0;
};
struct TrainSummary {
    std::vector<FoldResult> folds;
    double mean_video_accuracy = 0.0;
    double std_video_accuracy = 0.0;  // sample standard deviation across folds, 0 for one fold
    double mean_sequence_accuracy = 0.0;
    double std_sequence_accuracy = 0.0;
    fs::path metrics_path;
};
// Writes <out> (or <stem>.fold<k><ext> for kfold_5), the held-out signatures next to each model
// as <model>.test.gzsg, and <out>.metrics.json.
TrainSummary cmd_train(const RunConfig& cfg);

Evaluation cmd_eval(const RunConfig& cfg);

struct AblationRow {
    std::string name;
    std::string mask;
    int omega = 0;
    double sequence_accuracy = 0.0;
    double video_accuracy = 0.0;
};
struct AblationTable {
    std::vector<AblationRow> omega_rows;
    std::vector<AblationRow> condition_rows;
};

// Condition list: All, Spec-only, Temp-only, Geo-only, Visual-only, Metric-only, Raw gaze,
// Gaze vectors, Rows 6 and 7, No metric, No geometric.
std::vector<std::pair<std::string, std::string>> ablation_conditions();

// Sweeps omega over tracks in cfg.tracks and the feature conditions at cfg.omega; writes JSON to
// cfg.out and returns the table.
AblationTable cmd_ablate(const RunConfig& cfg);
std::string format_ablation_table(const AblationTable& t);

// PPM (P6) raster of one signature: width omega, height 40, value * 255 truncated.
std::string render_ppm(const Signature& sig);
std::vector<fs::path> cmd_render(const RunConfig& cfg);

}  // namespace gazefake
