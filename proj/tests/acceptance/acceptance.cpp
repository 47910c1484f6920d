// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only when all pass.

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Geometry>
#include <json.hpp>

#include "../unit/oracles.hpp"
#include "gazefake/cli_harness.hpp"
#include "gazefake/errors.hpp"
#include "gazefake/gaze_geometry.hpp"
#include "gazefake/signal_kit.hpp"
#include "gazefake/signature.hpp"

using namespace gazefake;
using Eigen::Vector3d;
using nlohmann::json;

namespace {

// Tolerances and thresholds.
constexpr double kVergenceTol = 1e-3;      // mm
constexpr double kVergenceSeconds = 5.0;
constexpr double kPsdRelTol = 1e-9;
constexpr double kXcorrTol = 1e-9;
constexpr int kContractCount = 1000;
constexpr double kGradTol = 1e-3;
constexpr int kGradSamples = 200;
constexpr double kMinVideoAcc = 0.95;
constexpr double kMinSequenceAcc = 0.85;
constexpr double kMaxPipelineSeconds = 600.0;
constexpr int kAblationSeeds = 3;
constexpr int kAblationViolationsAllowed = 1;
constexpr double kMaxNoiseDrop = 0.10;
constexpr double kMaxFoldStd = 0.05;

// Synthetic experiment sizes.
constexpr int kVideosPerClass = 200;
constexpr int kAblationVideosPerClass = 40;
constexpr int kAblationEpochs = 30;
constexpr double kInjectedNoiseDeg = 0.5;
constexpr std::uint64_t kSeed = 2024;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---- 1: vergence ----

Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return Vector3d(n(rng), n(rng), n(rng)).normalized();
}

// Direction with components on a 1/1024 grid and norm within 1e-3 of one; keeps every
// intermediate of the closed form exactly representable.
Vector3d grid_direction(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> k(-400, 400);
    const double gx = k(rng) / 1024.0, gy = k(rng) / 1024.0;
    const double gz = std::round(std::sqrt(1.0 - gx * gx - gy * gy) * 1024.0) / 1024.0;
    return {gx, gy, gz};
}

Outcome vergence_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    int degenerate = 0;
    for (int i = 0; i < 100; ++i) {
        const Vector3d target(150 * u(rng), 100 * u(rng), 300 + 100 * u(rng));
        const Vector3d pl(-32 + 3 * u(rng), 2 * u(rng), 600 + 2 * u(rng));
        const Vector3d pr(32 + 3 * u(rng), 2 * u(rng), 600 + 2 * u(rng));
        auto toward = [&](const Vector3d& p) {
            const Vector3d g = (target - p).normalized();
            const Vector3d axis = g.cross(random_unit(rng)).normalized();
            return Vector3d(Eigen::AngleAxisd((2.0 + 2.0 * u(rng)) * M_PI / 180.0, axis) * g);
        };
        const Vector3d gl = toward(pl), gr = toward(pr);
        const auto s = intersect_gaze_rays(pl, gl, pr, gr);
        degenerate += s.degenerate;
        const auto o = oracle::brute_force_rays(pl, gl, pr, gr, -200.0, 1000.0, 300);
        worst = std::max(worst, (s.rho - o.rho).norm());
    }
    int exact = 0;
    for (int i = 0; i < 20; ++i) {
        std::uniform_int_distribution<int> coord(-40, 40), depth(200, 500);
        const Vector3d pl(coord(rng) - 32, coord(rng), 600 + coord(rng));
        const Vector3d gl = grid_direction(rng);
        const Vector3d gr = grid_direction(rng);
        const Vector3d meet = pl + depth(rng) * gl;
        const Vector3d pr = meet - depth(rng) * gr;
        const auto s = intersect_gaze_rays(pl, gl, pr, gr);
        exact += s.rho_hat == 0.0;
    }
    const double secs = seconds_since(t0);
    return {worst <= kVergenceTol && degenerate == 0 && exact == 20 && secs < kVergenceSeconds,
            "max |rho - oracle| = " + fmt("%.3g", worst) + " mm (tol 1e-3), exact zero gap on " + std::to_string(exact) +
                "/20 intersecting pairs, " + fmt("%.2f", secs) + " s (limit 5 s)"};
}

// ---- 2: periodogram ----

Outcome psd_oracle() {
    std::mt19937_64 rng(kSeed + 2);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0, worst_parseval = 0.0;
    for (int omega : {16, 32, 64, 128}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> x(static_cast<std::size_t>(omega));
            for (auto& v : x) v = n(rng) + (rep % 2 ? 3.0 : 0.0);
            const auto p = periodogram(x);
            const auto d = oracle::direct_periodogram(x);
            double peak = 0.0, diff = 0.0, energy = 0.0, total = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                peak = std::max(peak, std::abs(d[k]));
                diff = std::max(diff, std::abs(p[k] - d[k]));
                total += p[k];
                energy += x[k] * x[k];
            }
            worst = std::max(worst, diff / peak);
            worst_parseval = std::max(worst_parseval, std::abs(total - energy) / energy);
        }
    }
    return {worst <= kPsdRelTol && worst_parseval <= kPsdRelTol,
            "max rel. deviation from direct DFT " + fmt("%.3g", worst) + ", Parseval " + fmt("%.3g", worst_parseval) +
                " (tol 1e-9) for omega 16..128"};
}

// ---- 3: cross-correlation ----

Outcome xcorr_oracle() {
    std::mt19937_64 rng(kSeed + 3);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0;
    int shifts = 0, recovered = 0;
    for (int omega : {16, 32, 64, 128}) {
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> a(static_cast<std::size_t>(omega)), b(a.size());
            for (auto& v : a) v = n(rng);
            for (auto& v : b) v = n(rng);
            const auto r = xcorr_raw(a, b);
            const auto d = oracle::direct_xcorr(a, b);
            for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k] - d[k]));
        }
        std::vector<double> a(static_cast<std::size_t>(omega));
        for (auto& v : a) v = n(rng);
        for (int shift = 0; shift <= omega / 4; ++shift) {
            std::vector<double> b(a.size(), 0.0);
            for (int i = 0; i + shift < omega; ++i) b[static_cast<std::size_t>(i + shift)] = a[static_cast<std::size_t>(i)];
            const auto r = xcorr_raw(a, b);
            ++shifts;
            recovered += std::max_element(r.begin(), r.end()) - r.begin() - omega / 2 == shift;
        }
    }
    return {worst <= kXcorrTol && recovered == shifts,
            "max |xcorr - direct| = " + fmt("%.3g", worst) + " (tol 1e-9), shift recovered " + std::to_string(recovered) +
                "/" + std::to_string(shifts)};
}

// ---- 4: signature contract ----

Outcome signature_contract() {
    const auto perts = parse_perturbations("noise:1.5,asymmetry:30,smooth:5");
    std::size_t bad_shape = 0, bad_value = 0, total = 0;
    bool roundtrip = true;
    const int omegas[] = {16, 32, 64, 128};
    for (int oi = 0; oi < 4; ++oi) {
        const int omega = omegas[oi];
        std::vector<Signature> sigs;
        for (std::uint64_t i = 0; static_cast<int>(sigs.size()) < kContractCount / 4; ++i) {
            SynthConfig cfg = sample_subject(SynthConfig{}, mix_seed(kSeed + 4, i + 1000 * static_cast<std::uint64_t>(oi)));
            cfg.n_frames = 512;
            cfg.video_id = "c" + std::to_string(i);
            const Track t = i % 2 ? gen_fake_track(cfg, perts) : gen_real_track(cfg);
            for (const auto& w : slice_sequences(t, omega)) {
                if (static_cast<int>(sigs.size()) == kContractCount / 4) break;
                sigs.push_back(build_signature(w));
            }
        }
        for (const auto& s : sigs) {
            ++total;
            bad_shape += s.omega != omega || s.tensor.size() != static_cast<std::size_t>(kSignatureRows * omega * kSignatureChannels);
            for (float v : s.tensor)
                if (!std::isfinite(v) || v < 0.f || v >= 1.f) {
                    ++bad_value;
                    break;
                }
        }
        const std::string bytes = encode_signatures(sigs);
        const auto back = decode_signatures(bytes);
        roundtrip = roundtrip && back.signatures == sigs && encode_signatures(back.signatures) == bytes;
    }
    return {total == kContractCount && bad_shape == 0 && bad_value == 0 && roundtrip,
            std::to_string(total) + " signatures, " + std::to_string(bad_shape) + " bad shape, " +
                std::to_string(bad_value) + " outside [0,1) or non-finite, bitwise round trip " +
                (roundtrip ? "ok" : "broken")};
}

// ---- 5: gradient check ----

Outcome gradient_check_criterion() {
    TrainConfig cfg;
    cfg.seed = kSeed + 5;
    ModelState model = init_model(16, cfg);
    std::mt19937_64 rng(kSeed + 5);
    std::uniform_real_distribution<float> u(0.f, 0.99f);
    std::vector<Signature> batch;
    for (int i = 0; i < 4; ++i) {
        Signature s;
        s.omega = 16;
        s.video_id = "g" + std::to_string(i);
        s.label = i % 2 ? Label::Fake : Label::Real;
        s.tensor.resize(Signature::size_for(16));
        for (auto& v : s.tensor) v = u(rng);
        batch.push_back(std::move(s));
    }
    GradientCheckOptions opt;
    opt.min_samples = kGradSamples;
    const double err = gradient_check(model, batch, opt);

    // Fault injection: each corruption must be caught.
    const std::vector<std::pair<std::string, std::function<void(std::vector<Eigen::MatrixXd>&)>>> faults = {
        {"scaled dense1 weights", [](auto& g) { g[6] *= 1.05; }},
        {"flipped bn2 shift", [](auto& g) { g[9] = -g[9]; }},
        {"shrunk bn0 scale", [](auto& g) { g[0] *= 0.95; }},
    };
    int caught = 0;
    for (const auto& [name, f] : faults) {
        GradientCheckOptions bad = opt;
        bad.corrupt = f;
        caught += gradient_check(model, batch, bad) > kGradTol;
    }
    return {err <= kGradTol && caught == static_cast<int>(faults.size()),
            "max rel. error " + fmt("%.3g", err) + " over >= 200 entries at omega 16 (tol 1e-3), " +
                std::to_string(caught) + "/" + std::to_string(faults.size()) + " injected faults detected"};
}

// ---- synthetic experiment shared by 6, 8, 9, 10 ----

struct Pipeline {
    fs::path dir;
    fs::path tracks, sigs, model, report;
    TrainSummary train;
    Evaluation eval;
    double seconds = 0.0;
};

RunConfig base_config(const fs::path& dir) {
    RunConfig cfg;
    cfg.quiet = true;
    cfg.seed = kSeed;
    cfg.n = kVideosPerClass;
    cfg.omega = 32;
    cfg.fake_perturbations = "noise:1.5,asymmetry:30,smooth:5";
    cfg.split = SplitKind::RandomVideo70_30;
    cfg.scheme = VoteScheme::LogOdds;
    cfg.out = dir;
    return cfg;
}

Pipeline run_pipeline(const fs::path& dir) {
    const auto t0 = Clock::now();
    fs::remove_all(dir);
    fs::create_directories(dir);
    Pipeline p;
    p.dir = dir;
    p.tracks = dir / "tracks";
    p.sigs = dir / "signatures.gzsg";
    p.model = dir / "model.gzmd";
    p.report = dir / "verdicts.jsonl";

    RunConfig cfg = base_config(p.tracks);
    progress("synth " + std::to_string(2 * kVideosPerClass) + " tracks into " + p.tracks.string());
    cmd_synth(cfg);
    cfg.tracks = p.tracks;
    cfg.out = p.sigs;
    cmd_signatures(cfg);
    cfg.signatures = p.sigs;
    cfg.out = p.model;
    progress("training (default configuration)");
    p.train = cmd_train(cfg);
    RunConfig ec = base_config(p.report);
    ec.model = p.model;
    ec.signatures = p.train.folds.front().test_path;
    p.eval = cmd_eval(ec);
    p.seconds = seconds_since(t0);
    progress("pipeline took " + fmt("%.1f", p.seconds) + " s");
    return p;
}

Outcome end_to_end(const Pipeline& p) {
    const double v = p.eval.chosen_video_accuracy(), s = p.eval.sequence_accuracy;
    return {v >= kMinVideoAcc && s >= kMinSequenceAcc && p.seconds <= kMaxPipelineSeconds,
            "log_odds V.Acc " + fmt("%.4f", v) + " (>= 0.95), S.Acc " + fmt("%.4f", s) + " (>= 0.85) on " +
                std::to_string(p.eval.truth.size()) + " held-out videos, " + fmt("%.1f", p.seconds) +
                " s (limit 600 s)"};
}

Outcome determinism(const Pipeline& first, const fs::path& dir) {
    const Pipeline second = run_pipeline(dir);
    const bool model_same = slurp(first.model) == slurp(second.model);
    const bool report_same = slurp(first.report) == slurp(second.report);
    const bool sigs_same = slurp(first.sigs) == slurp(second.sigs);
    return {model_same && report_same && sigs_same,
            std::string("model files ") + (model_same ? "identical" : "differ") + ", verdict reports " +
                (report_same ? "identical" : "differ") + ", signature files " + (sigs_same ? "identical" : "differ")};
}

Outcome robustness(const Pipeline& p) {
    const fs::path noisy_tracks = p.dir / "tracks_noisy";
    RunConfig cfg = base_config(noisy_tracks);
    cfg.inject_noise_deg = kInjectedNoiseDeg;
    fs::remove_all(noisy_tracks);
    progress("synth noisy copies of the tracks");
    cmd_synth(cfg);
    cfg.tracks = noisy_tracks;
    const auto all = signatures_from_tracks(load_tracks(noisy_tracks), cfg);

    const auto metrics = json::parse(slurp(p.train.metrics_path));
    const auto test_videos = metrics.at("folds")[0].at("test_videos").get<std::vector<std::string>>();
    const auto test = select_videos(all, test_videos);
    const Evaluation noisy = evaluate(load_model(p.model), test, VoteScheme::LogOdds);
    const double clean = p.eval.chosen_video_accuracy(), dirty = noisy.chosen_video_accuracy();
    const double drop = clean - dirty;
    return {drop <= kMaxNoiseDrop + 1e-12 && noisy.truth.size() == p.eval.truth.size(),
            "V.Acc clean " + fmt("%.4f", clean) + " -> " + fmt("%.4f", dirty) + " with 0.5 deg test-only noise, drop " +
                fmt("%.1f", 100.0 * drop) + " points (limit 10)"};
}

Outcome five_fold(const Pipeline& p) {
    RunConfig cfg = base_config(p.dir / "kfold" / "model.gzmd");
    cfg.signatures = p.sigs;
    cfg.split = SplitKind::KFold5;
    progress("five-fold training");
    const auto t0 = Clock::now();
    const TrainSummary s = cmd_train(cfg);
    const auto metrics = json::parse(slurp(s.metrics_path));
    const bool reported = metrics.contains("mean_video_accuracy") && metrics.contains("std_video_accuracy") &&
                          metrics.at("folds").size() == 5;
    std::string per_fold;
    for (const auto& f : s.folds) per_fold += (per_fold.empty() ? "" : ",") + fmt("%.3f", f.video_accuracy);
    return {reported && s.folds.size() == 5 && s.std_video_accuracy <= kMaxFoldStd,
            "V.Acc mean " + fmt("%.2f", 100.0 * s.mean_video_accuracy) + "% std " +
                fmt("%.2f", 100.0 * s.std_video_accuracy) + " points (limit 5) over folds [" + per_fold + "], " +
                fmt("%.0f", seconds_since(t0)) + " s"};
}

// ---- 7: ablation ----

Outcome ablation(const fs::path& work) {
    const std::vector<std::string> expected_names = {"All",          "Spec-only",    "Temp-only",    "Geo-only",
                                                     "Visual-only",  "Metric-only",  "Raw gaze",     "Gaze vectors",
                                                     "Rows 6 and 7", "No metric",    "No geometric"};
    const std::set<std::string> single_domain = {"Spec-only", "Temp-only", "Geo-only", "Visual-only", "Metric-only"};
    bool shape_ok = true;
    int worst_violations = 0;
    std::string detail;
    for (int k = 0; k < kAblationSeeds; ++k) {
        const std::uint64_t seed = kSeed + 70 + static_cast<std::uint64_t>(k);
        const fs::path dir = work / ("ablation_seed" + std::to_string(seed));
        fs::remove_all(dir);
        RunConfig cfg = base_config(dir / "tracks");
        cfg.seed = seed;
        cfg.n = kAblationVideosPerClass;
        cfg.train.epochs = kAblationEpochs;
        progress("ablation seed " + std::to_string(seed));
        cmd_synth(cfg);
        cfg.tracks = dir / "tracks";
        cfg.out = dir / "ablation.json";
        const AblationTable t = cmd_ablate(cfg);
        std::ofstream(dir / "ablation.txt") << format_ablation_table(t);

        std::vector<int> omegas;
        for (const auto& r : t.omega_rows) omegas.push_back(r.omega);
        std::vector<std::string> names;
        for (const auto& r : t.condition_rows) names.push_back(r.name);
        shape_ok = shape_ok && omegas == std::vector<int>{16, 32, 64, 128} && names == expected_names;

        double all_acc = -1.0;
        for (const auto& r : t.condition_rows)
            if (r.name == "All") all_acc = r.video_accuracy;
        int violations = 0;
        for (const auto& r : t.condition_rows)
            if (single_domain.count(r.name) && r.video_accuracy > all_acc) ++violations;
        worst_violations = std::max(worst_violations, violations);
        detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": All " +
                  fmt("%.3f", all_acc) + ", " + std::to_string(violations) + " single-domain above";
    }
    return {shape_ok && worst_violations <= kAblationViolationsAllowed,
            std::string("4 omega rows and 11 conditions ") + (shape_ok ? "present" : "MISSING") + "; " + detail +
                " (allowed 1 per seed)"};
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_THRESHOLD, 32 << 20);
    mallopt(M_TRIM_THRESHOLD, 128 << 20);
    CLI::App app{"gazefake acceptance"};
    fs::path work = fs::temp_directory_path() / "gazefake_acceptance";
    std::vector<int> only;
    app.add_option("--work", work, "scratch directory");
    app.add_option("--only", only, "run only these criteria (1-10)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    fs::create_directories(work);

    std::ofstream results(work / "acceptance.txt", std::ios::trunc);
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
        if (!wanted(id)) return;
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        char head[64];
        std::snprintf(head, sizeof head, "%s %2d %-22s ", o.pass ? "PASS" : "FAIL", id, name.c_str());
        std::printf("%s%s\n", head, o.detail.c_str());
        std::fflush(stdout);
        results << head << o.detail << std::endl;
    };

    report(1, "vergence_oracle", vergence_oracle);
    report(2, "psd_oracle", psd_oracle);
    report(3, "xcorr_oracle", xcorr_oracle);
    report(4, "signature_contract", signature_contract);
    report(5, "gradient_check", gradient_check_criterion);

    std::optional<Pipeline> baseline;
    std::string baseline_error;
    if (wanted(6) || wanted(8) || wanted(9) || wanted(10)) {
        try {
            baseline = run_pipeline(work / "synthetic");
        } catch (const std::exception& e) {
            baseline_error = e.what();
        }
    }
    auto with_baseline = [&](const std::function<Outcome(const Pipeline&)>& f) {
        return [&, f]() -> Outcome {
            if (!baseline) return {false, "synthetic pipeline failed: " + baseline_error};
            return f(*baseline);
        };
    };

    report(6, "end_to_end_synthetic", with_baseline(end_to_end));
    report(7, "ablation", [&] { return ablation(work); });
    report(8, "determinism", with_baseline([&](const Pipeline& p) { return determinism(p, work / "synthetic_rerun"); }));
    report(9, "robustness", with_baseline(robustness));
    report(10, "five_fold", with_baseline(five_fold));

    std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
    results << (failures ? "FAIL" : "PASS") << ": " << failures << " failing" << std::endl;
    return failures ? 1 : 0;
}
