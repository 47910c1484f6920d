#include "gazefake/cli_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

using nlohmann::json;

void note(const RunConfig& cfg, const std::string& msg) {
    if (!cfg.quiet) std::clog << "[gazefake] " << msg << '\n';
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    std::istringstream in{std::string(value)};
    T v{};
    in >> v;
    if (!in || !(in >> std::ws).eof()) throw UsageError("bad value '" + std::string(value) + "' for " + std::string(key));
    return v;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void require_path(const fs::path& p, const char* what) {
    if (p.empty()) throw UsageError(std::string("missing ") + what + " path");
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

TrainConfig train_config(const RunConfig& cfg, int omega) {
    TrainConfig t = cfg.train;
    t.seed = cfg.seed;
    t.omega = omega;
    return t;
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

fs::path fold_path(const fs::path& out, int fold) {
    return out.parent_path() / (out.stem().string() + ".fold" + std::to_string(fold) + out.extension().string());
}

// Trains on the split's train videos and evaluates on its test videos.
struct SplitRun {
    TrainResult trained;
    std::vector<Signature> test;
    Evaluation eval;
};

SplitRun train_on_split(std::span<const Signature> sigs, const VideoSplit& split, const RunConfig& cfg, int omega) {
    const auto train_set = select_videos(sigs, split.train_videos);
    auto test_set = select_videos(sigs, split.test_videos);
    TrainResult trained = train(train_set, train_config(cfg, omega), test_set);
    Evaluation ev = evaluate(trained.model, test_set, cfg.scheme);
    return {std::move(trained), std::move(test_set), std::move(ev)};
}

json validation_json(const TrainResult& r) {
    json arr = json::array();
    for (const auto& v : r.validation)
        arr.push_back({{"epoch", v.epoch}, {"loss", v.loss}, {"sequence_accuracy", v.sequence_accuracy}});
    return arr;
}

}  // namespace

// ---- config ----

std::string_view to_string(SplitKind k) { return k == SplitKind::KFold5 ? "kfold_5" : "random_video_70_30"; }

SplitKind parse_split(std::string_view name) {
    if (name == "random_video_70_30") return SplitKind::RandomVideo70_30;
    if (name == "kfold_5") return SplitKind::KFold5;
    throw UsageError("unknown split '" + std::string(name) + "'");
}

void apply_config_value(RunConfig& cfg, std::string_view key_in, std::string_view value_in) {
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    if (key == "omega") cfg.omega = parse_number<int>(key, value);
    else if (key == "d_plus_mm") cfg.d_plus_mm = parse_number<double>(key, value);
    else if (key == "split") cfg.split = parse_split(value);
    else if (key == "scheme") cfg.scheme = parse_scheme(value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "mask" || key == "feature_mask") {
        parse_feature_mask(value);
        cfg.mask = value;
    } else if (key == "learning_rate") cfg.train.learning_rate = parse_number<double>(key, value);
    else if (key == "batch_size") cfg.train.batch_size = parse_number<int>(key, value);
    else if (key == "epochs") cfg.train.epochs = parse_number<int>(key, value);
    else if (key == "validate_every") cfg.train.validate_every = parse_number<int>(key, value);
    else if (key == "dropout_p") cfg.train.dropout_p = parse_number<double>(key, value);
    else if (key == "leaky_slope") cfg.train.leaky_slope = parse_number<double>(key, value);
    else if (key == "n") cfg.n = parse_number<int>(key, value);
    else if (key == "n_frames") cfg.n_frames = parse_number<int>(key, value);
    else if (key == "gaze_noise_deg") cfg.gaze_noise_deg = parse_number<double>(key, value);
    else if (key == "fake_perturbations") {
        if (parse_perturbations(value).empty()) throw UsageError("fake_perturbations is empty");
        cfg.fake_perturbations = value;
    } else if (key == "inject_noise_deg") cfg.inject_noise_deg = parse_number<double>(key, value);
    else if (key == "ablate_omegas") {
        cfg.ablate_omegas.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) cfg.ablate_omegas.push_back(parse_number<int>(key, trim(item)));
    } else if (key == "tracks") cfg.tracks = value;
    else if (key == "signatures") cfg.signatures = value;
    else if (key == "model") cfg.model = value;
    else if (key == "out") cfg.out = value;
    else throw UsageError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + " lacks '='");
        apply_config_value(cfg, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    }
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str());
}

// ---- splitting / evaluation ----

std::vector<VideoSplit> split_videos(std::span<const Signature> sigs, SplitKind kind, std::uint64_t seed) {
    std::map<std::string, Label> videos;
    for (const auto& s : sigs) videos.emplace(s.video_id, s.label);
    std::vector<std::string> by_label[2];
    for (const auto& [id, label] : videos) by_label[label == Label::Fake ? 1 : 0].push_back(id);

    std::mt19937_64 rng(mix_seed(seed, 0x5B11));
    for (auto& ids : by_label) std::shuffle(ids.begin(), ids.end(), rng);

    std::vector<VideoSplit> out;
    if (kind == SplitKind::RandomVideo70_30) {
        VideoSplit s;
        for (const auto& ids : by_label) {
            const auto n_train = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(ids.size())));
            for (std::size_t i = 0; i < ids.size(); ++i) (i < n_train ? s.train_videos : s.test_videos).push_back(ids[i]);
        }
        out.push_back(std::move(s));
    } else {
        constexpr int kFolds = 5;
        out.resize(kFolds);
        for (const auto& ids : by_label)
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (int f = 0; f < kFolds; ++f)
                    (static_cast<int>(i % kFolds) == f ? out[f].test_videos : out[f].train_videos).push_back(ids[i]);
    }
    for (auto& s : out) {
        std::sort(s.train_videos.begin(), s.train_videos.end());
        std::sort(s.test_videos.begin(), s.test_videos.end());
    }
    return out;
}

std::vector<Signature> select_videos(std::span<const Signature> sigs, const std::vector<std::string>& videos) {
    const std::set<std::string> keep(videos.begin(), videos.end());
    std::vector<Signature> out;
    for (const auto& s : sigs)
        if (keep.count(s.video_id)) out.push_back(s);
    return out;
}

Evaluation evaluate_probs(std::span<const Signature> sigs, std::vector<double> probs, VoteScheme scheme) {
    if (sigs.empty()) throw EmptyDataset("nothing to evaluate");
    Evaluation ev;
    ev.scheme = scheme;
    ev.sequence_probs = std::move(probs);

    std::map<std::string, std::vector<double>> per_video;
    std::vector<std::string> order;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const auto& s = sigs[i];
        const bool fake = s.label == Label::Fake;
        correct += static_cast<std::size_t>((ev.sequence_probs[i] > 0.5) == fake);
        auto [it, inserted] = per_video.try_emplace(s.video_id);
        if (inserted) order.push_back(s.video_id);
        it->second.push_back(ev.sequence_probs[i]);
        ev.truth[s.video_id] = s.label;
    }
    ev.sequence_accuracy = static_cast<double>(correct) / static_cast<double>(sigs.size());

    for (auto scheme_k : kAllSchemes) {
        std::size_t right = 0;
        auto& list = ev.verdicts[scheme_k];
        for (const auto& id : order) {
            list.push_back(aggregate(per_video[id], scheme_k, id));
            right += static_cast<std::size_t>(list.back().label == ev.truth[id]);
        }
        ev.video_accuracy[scheme_k] = static_cast<double>(right) / static_cast<double>(order.size());
    }
    for (const auto& v : ev.verdicts[scheme]) {
        const bool truth_fake = ev.truth[v.video_id] == Label::Fake;
        const bool said_fake = v.label == Label::Fake;
        if (truth_fake && said_fake) ++ev.confusion.tp;
        else if (!truth_fake && !said_fake) ++ev.confusion.tn;
        else if (said_fake) ++ev.confusion.fp;
        else ++ev.confusion.fn;
    }
    return ev;
}

Evaluation evaluate(const ModelState& model, std::span<const Signature> sigs, VoteScheme scheme) {
    return evaluate_probs(sigs, predict_sequences(model, sigs), scheme);
}

std::string format_verdict_report(const Evaluation& ev) {
    std::string out;
    for (const auto& v : ev.verdicts.at(ev.scheme)) {
        json line = {{"video_id", v.video_id},
                     {"scheme", to_string(v.scheme)},
                     {"score", v.score},
                     {"label", to_string(v.label)},
                     {"truth", to_string(ev.truth.at(v.video_id))},
                     {"n_sequences", v.n_sequences()},
                     {"sequence_probs", v.sequence_probs}};
        out += line.dump() + '\n';
    }
    json by_scheme = json::object();
    for (const auto& [s, acc] : ev.video_accuracy) by_scheme[std::string(to_string(s))] = acc;
    json summary = {{"scheme", to_string(ev.scheme)},
                    {"sequence_accuracy", ev.sequence_accuracy},
                    {"video_accuracy", ev.chosen_video_accuracy()},
                    {"video_accuracy_by_scheme", by_scheme},
                    {"n_sequences", ev.sequence_probs.size()},
                    {"n_videos", ev.truth.size()},
                    {"confusion",
                     {{"tp", ev.confusion.tp}, {"tn", ev.confusion.tn}, {"fp", ev.confusion.fp}, {"fn", ev.confusion.fn}}}};
    out += json{{"summary", summary}}.dump() + '\n';
    return out;
}

// ---- commands ----

SynthSummary cmd_synth(const RunConfig& cfg) {
    if (cfg.n <= 0) throw UsageError("synth needs n > 0 videos per class");
    require_path(cfg.out, "output directory");
    const auto perts = parse_perturbations(cfg.fake_perturbations);
    if (perts.empty()) throw EmptyPerturbationList("fake_perturbations is empty");
    fs::create_directories(cfg.out);

    SynthConfig base;
    base.n_frames = cfg.n_frames;
    base.gaze_noise_deg = cfg.gaze_noise_deg;
    const FakePerturbation extra{PerturbationKind::Noise, cfg.inject_noise_deg};

    SynthSummary summary;
    std::string manifest;
    char name[32];
    for (int i = 0; i < cfg.n; ++i) {
        const std::uint64_t subject_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        SynthConfig subject = sample_subject(base, subject_seed);
        std::snprintf(name, sizeof name, "%04d", i);
        for (const bool fake : {false, true}) {
            subject.video_id = std::string(fake ? "fake_" : "real_") + name;
            const SynthTrack real = simulate_real(subject);
            Track track = fake ? gen_fake_track(subject, perts) : real.track;
            if (cfg.inject_noise_deg > 0.0)
                track = perturb_track({track, real.phases, real.fixation_count}, {&extra, 1}, mix_seed(subject.seed, 0x1A7E));
            const fs::path file = cfg.out / (subject.video_id + ".gzt.jsonl");
            write_track(track, file);
            summary.files.push_back(file);
            json entry = {{"file", file.filename().string()},
                          {"video_id", subject.video_id},
                          {"label", to_string(track.label)},
                          {"seed", subject.seed},
                          {"pair", std::string(fake ? "real_" : "fake_") + name},
                          {"perturbations", fake ? format_perturbations(perts) : ""}};
            if (cfg.inject_noise_deg > 0.0) entry["inject_noise_deg"] = cfg.inject_noise_deg;
            manifest += entry.dump() + '\n';
        }
    }
    summary.manifest = cfg.out / "manifest.jsonl";
    write_text(summary.manifest, manifest);
    note(cfg, "wrote " + std::to_string(summary.files.size()) + " tracks to " + cfg.out.string());
    return summary;
}

std::vector<Track> load_tracks(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 10 && name.ends_with(".gzt.jsonl")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Track> tracks;
    tracks.reserve(files.size());
    for (const auto& f : files) tracks.push_back(parse_track(f));
    return tracks;
}

std::vector<Signature> signatures_from_tracks(std::span<const Track> tracks, const RunConfig& cfg,
                                              std::map<std::string, std::size_t>* counts) {
    const FeatureMask mask = parse_feature_mask(cfg.mask);
    const bool masked = !(mask == FeatureMask::all());
    std::vector<Signature> sigs;
    for (const auto& t : tracks) {
        const auto windows = slice_sequences(t, cfg.omega);
        if (windows.empty())
            note(cfg, "warning: NoValidSequences: " + t.video_id + " has no valid window at omega " +
                          std::to_string(cfg.omega));
        for (const auto& w : windows) {
            sigs.push_back(build_signature(w, cfg.d_plus_mm));
            if (masked) apply_mask(sigs.back(), mask);
        }
        if (counts) (*counts)[t.video_id] = windows.size();
    }
    return sigs;
}

SignaturesSummary cmd_signatures(const RunConfig& cfg) {
    require_path(cfg.tracks, "tracks directory");
    require_path(cfg.out, "output signature file");
    const auto tracks = load_tracks(cfg.tracks);
    SignaturesSummary s;
    s.tracks = tracks.size();
    const auto sigs = signatures_from_tracks(tracks, cfg, &s.per_track);
    s.signatures = sigs.size();
    for (const auto& [id, n] : s.per_track) note(cfg, id + ": " + std::to_string(n) + " sequences");
    if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
    write_signatures(sigs, cfg.out, cfg.omega);
    note(cfg, "wrote " + std::to_string(sigs.size()) + " signatures to " + cfg.out.string());
    return s;
}

TrainSummary cmd_train(const RunConfig& cfg) {
    require_path(cfg.signatures, "signature file");
    require_path(cfg.out, "model output");
    auto file = read_signatures(cfg.signatures);
    if (file.signatures.empty()) throw EmptyDataset("signature file " + cfg.signatures.string() + " is empty");
    const FeatureMask mask = parse_feature_mask(cfg.mask);
    if (!(mask == FeatureMask::all()))
        for (auto& s : file.signatures) apply_mask(s, mask);

    const auto splits = split_videos(file.signatures, cfg.split, cfg.seed);
    TrainSummary summary;
    json folds = json::array();
    std::vector<double> v_accs, s_accs;
    for (std::size_t k = 0; k < splits.size(); ++k) {
        note(cfg, "training fold " + std::to_string(k + 1) + "/" + std::to_string(splits.size()));
        auto run = train_on_split(file.signatures, splits[k], cfg, file.omega);
        FoldResult fr;
        fr.model_path = splits.size() == 1 ? cfg.out : fold_path(cfg.out, static_cast<int>(k));
        fr.test_path = with_suffix(fr.model_path, ".test.gzsg");
        if (fr.model_path.has_parent_path()) fs::create_directories(fr.model_path.parent_path());
        save_model(run.trained.model, fr.model_path);
        write_signatures(run.test, fr.test_path, file.omega);
        fr.sequence_accuracy = run.eval.sequence_accuracy;
        fr.video_accuracy = run.eval.chosen_video_accuracy();
        v_accs.push_back(fr.video_accuracy);
        s_accs.push_back(fr.sequence_accuracy);
        folds.push_back({{"model", fr.model_path.filename().string()},
                         {"test_signatures", fr.test_path.filename().string()},
                         {"train_videos", splits[k].train_videos},
                         {"test_videos", splits[k].test_videos},
                         {"epoch_loss", run.trained.epoch_loss},
                         {"validation", validation_json(run.trained)},
                         {"sequence_accuracy", fr.sequence_accuracy},
                         {"video_accuracy", fr.video_accuracy}});
        note(cfg, "fold " + std::to_string(k + 1) + ": S.Acc " + std::to_string(fr.sequence_accuracy) + ", V.Acc " +
                      std::to_string(fr.video_accuracy));
        summary.folds.push_back(fr);
    }
    summary.mean_video_accuracy = mean_of(v_accs);
    summary.std_video_accuracy = sample_std(v_accs);
    summary.mean_sequence_accuracy = mean_of(s_accs);
    summary.std_sequence_accuracy = sample_std(s_accs);

    json metrics = {{"split", to_string(cfg.split)},
                    {"scheme", to_string(cfg.scheme)},
                    {"seed", cfg.seed},
                    {"omega", file.omega},
                    {"mask", cfg.mask},
                    {"folds", folds},
                    {"mean_sequence_accuracy", summary.mean_sequence_accuracy},
                    {"std_sequence_accuracy", summary.std_sequence_accuracy},
                    {"mean_video_accuracy", summary.mean_video_accuracy},
                    {"std_video_accuracy", summary.std_video_accuracy}};
    summary.metrics_path = with_suffix(cfg.out, ".metrics.json");
    write_text(summary.metrics_path, metrics.dump(2) + '\n');
    return summary;
}

Evaluation cmd_eval(const RunConfig& cfg) {
    require_path(cfg.model, "model file");
    require_path(cfg.signatures, "signature file");
    const ModelState model = load_model(cfg.model);
    const auto file = read_signatures(cfg.signatures);
    if (file.omega != model.omega)
        throw ShapeMismatch("model omega " + std::to_string(model.omega) + " vs signature omega " +
                            std::to_string(file.omega));
    Evaluation ev = evaluate(model, file.signatures, cfg.scheme);
    if (!cfg.out.empty()) write_text(cfg.out, format_verdict_report(ev));
    note(cfg, "S.Acc " + std::to_string(ev.sequence_accuracy) + ", V.Acc (" + std::string(to_string(cfg.scheme)) +
                  ") " + std::to_string(ev.chosen_video_accuracy()));
    return ev;
}

std::vector<std::pair<std::string, std::string>> ablation_conditions() {
    return {{"All", "all"},
            {"Spec-only", "spectral"},
            {"Temp-only", "temporal"},
            {"Geo-only", "geometric"},
            {"Visual-only", "visual"},
            {"Metric-only", "metric"},
            {"Raw gaze", "raw_gaze"},
            {"Gaze vectors", "gaze_vectors"},
            {"Rows 6 and 7", "metric,raw_gaze"},
            {"No metric", "visual,geometric"},
            {"No geometric", "visual,metric"}};
}

AblationTable cmd_ablate(const RunConfig& cfg) {
    require_path(cfg.tracks, "tracks directory");
    const auto tracks = load_tracks(cfg.tracks);
    AblationTable table;

    auto run_condition = [&](std::vector<Signature> sigs, int omega, const std::string& name, const std::string& mask) {
        if (sigs.empty()) throw EmptyDataset("no signatures at omega " + std::to_string(omega));
        const FeatureMask m = parse_feature_mask(mask);
        for (auto& s : sigs) apply_mask(s, m);
        const auto split = split_videos(sigs, SplitKind::RandomVideo70_30, cfg.seed).front();
        const auto run = train_on_split(sigs, split, cfg, omega);
        note(cfg, name + ": S.Acc " + std::to_string(run.eval.sequence_accuracy) + ", V.Acc " +
                      std::to_string(run.eval.chosen_video_accuracy()));
        return AblationRow{name, mask, omega, run.eval.sequence_accuracy, run.eval.chosen_video_accuracy()};
    };

    for (int omega : cfg.ablate_omegas) {
        RunConfig c = cfg;
        c.omega = omega;
        c.mask = "all";
        table.omega_rows.push_back(run_condition(signatures_from_tracks(tracks, c), omega, "omega=" + std::to_string(omega), "all"));
    }
    RunConfig c = cfg;
    c.mask = "all";
    const auto base = signatures_from_tracks(tracks, c);
    for (const auto& [name, mask] : ablation_conditions())
        table.condition_rows.push_back(run_condition(base, cfg.omega, name, mask));

    if (!cfg.out.empty()) {
        auto rows_json = [](const std::vector<AblationRow>& rows) {
            json arr = json::array();
            for (const auto& r : rows)
                arr.push_back({{"name", r.name}, {"mask", r.mask}, {"omega", r.omega},
                               {"sequence_accuracy", r.sequence_accuracy}, {"video_accuracy", r.video_accuracy}});
            return arr;
        };
        json out = {{"seed", cfg.seed}, {"scheme", to_string(cfg.scheme)},
                    {"omega_sweep", rows_json(table.omega_rows)}, {"conditions", rows_json(table.condition_rows)}};
        write_text(cfg.out, out.dump(2) + '\n');
    }
    return table;
}

std::string format_ablation_table(const AblationTable& t) {
    std::ostringstream out;
    char line[128];
    out << "omega | S. Acc. | V. Acc.\n";
    for (const auto& r : t.omega_rows) {
        std::snprintf(line, sizeof line, "%5d | %7.2f | %7.2f\n", r.omega, 100.0 * r.sequence_accuracy, 100.0 * r.video_accuracy);
        out << line;
    }
    out << "\nCondition     | S. Acc. | V. Acc.\n";
    for (const auto& r : t.condition_rows) {
        std::snprintf(line, sizeof line, "%-13s | %7.2f | %7.2f\n", r.name.c_str(), 100.0 * r.sequence_accuracy,
                      100.0 * r.video_accuracy);
        out << line;
    }
    return out.str();
}

std::string render_ppm(const Signature& sig) {
    std::string out = "P6\n" + std::to_string(sig.omega) + " " + std::to_string(kSignatureRows) + "\n255\n";
    out.reserve(out.size() + Signature::size_for(sig.omega));
    for (int r = 0; r < kSignatureRows; ++r)
        for (int t = 0; t < sig.omega; ++t)
            for (int c = 0; c < kSignatureChannels; ++c) {
                const double v = std::clamp(static_cast<double>(sig.at(r, t, c)), 0.0, 1.0);
                out.push_back(static_cast<char>(static_cast<unsigned char>(std::min(255.0, v * 255.0))));
            }
    return out;
}

std::vector<fs::path> cmd_render(const RunConfig& cfg) {
    require_path(cfg.signatures, "signature file");
    require_path(cfg.out, "output directory");
    const auto file = read_signatures(cfg.signatures);
    fs::create_directories(cfg.out);
    std::vector<fs::path> written;
    char prefix[16];
    for (std::size_t i = 0; i < file.signatures.size(); ++i) {
        const auto& s = file.signatures[i];
        std::snprintf(prefix, sizeof prefix, "%05zu_", i);
        const fs::path p = cfg.out / (prefix + s.video_id + "_" + std::to_string(s.start_frame) + ".ppm");
        write_text(p, render_ppm(s));
        written.push_back(p);
    }
    note(cfg, "rendered " + std::to_string(written.size()) + " signatures");
    return written;
}

}  // namespace gazefake
