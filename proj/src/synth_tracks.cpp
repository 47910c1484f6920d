#include "gazefake/synth_tracks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "gazefake/errors.hpp"
#include "gazefake/visual_features.hpp"

namespace gazefake {

namespace {

using Eigen::Vector3d;

constexpr double kDeg = std::numbers::pi / 180.0;
// Pupil divergence per mm^2 of iris divergence (14 vs 30 mm^2 fake artifacts).
constexpr double kPupilPerIris = 14.0 / 30.0;
// Fraction of the asymmetry strength reached at the divergence peak; the remainder absorbs area jitter.
constexpr double kAsymmetryPeak = 0.9;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double clipped_normal(std::mt19937_64& rng, double sd) {
    if (sd <= 0.0) return 0.0;
    const double v = std::normal_distribution<double>(0.0, sd)(rng);
    return std::clamp(v, -3.0 * sd, 3.0 * sd);
}

int frames_for(double ms, double fps) { return std::max(1, static_cast<int>(std::lround(ms * fps / 1000.0))); }

double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }

// Rotates a unit vector by independent Gaussian angles (sd in degrees) about two tangent axes.
Vector3d jitter_direction(const Vector3d& g, double sd_deg, std::mt19937_64& rng) {
    if (sd_deg <= 0.0) return g;
    const Vector3d helper = std::abs(g.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
    const Vector3d u = g.cross(helper).normalized();
    const Vector3d v = g.cross(u);
    std::normal_distribution<double> n(0.0, sd_deg * kDeg);
    const double a = n(rng);
    const double b = n(rng);
    const Vector3d out = Eigen::AngleAxisd(a, u) * (Eigen::AngleAxisd(b, v) * g);
    return out.normalized();
}

Rgb jitter_rgb(const Rgb& base, double sd, std::mt19937_64& rng) {
    Rgb out;
    for (int i = 0; i < 3; ++i) out[i] = std::clamp(base[i] + clipped_normal(rng, sd), 0.0, 255.0);
    return out;
}

EyeSample& eye(TrackRecord& r, bool left) { return left ? r.left : r.right; }

// Random walk rescaled so its largest excursion from zero equals `peak`.
std::vector<double> bounded_walk(std::size_t n, double peak, std::mt19937_64& rng) {
    std::vector<double> w(n, 0.0);
    std::normal_distribution<double> step(0.0, 1.0);
    for (std::size_t i = 1; i < n; ++i) w[i] = w[i - 1] + step(rng);
    double m = 0.0;
    for (double v : w) m = std::max(m, std::abs(v));
    if (m > 0.0)
        for (double& v : w) v *= peak / m;
    return w;
}

void apply_smooth(Track& t, double strength) {
    int win = std::max(3, static_cast<int>(std::lround(strength)));
    if (win % 2 == 0) ++win;
    const int half = win / 2;
    const auto n = static_cast<int>(t.records.size());
    for (bool left : {true, false}) {
        std::vector<Vector3d> src(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) src[static_cast<std::size_t>(i)] = eye(t.records[static_cast<std::size_t>(i)], left).gaze_dir;
        for (int i = 0; i < n; ++i) {
            Vector3d acc = Vector3d::Zero();
            int count = 0;
            for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k, ++count) acc += src[static_cast<std::size_t>(k)];
            eye(t.records[static_cast<std::size_t>(i)], left).gaze_dir = (acc / count).normalized();
        }
    }
}

void apply_noise(Track& t, double strength, std::mt19937_64& rng) {
    for (auto& r : t.records) {
        r.left.gaze_dir = jitter_direction(r.left.gaze_dir, strength, rng);
        r.right.gaze_dir = jitter_direction(r.right.gaze_dir, strength, rng);
    }
}

void apply_skip_saccades(Track& t, const std::vector<GazePhase>& phases, double strength, std::mt19937_64& rng) {
    std::vector<std::size_t> saccade_frames;
    for (std::size_t i = 1; i < phases.size() && i < t.records.size(); ++i)
        if (phases[i] == GazePhase::Saccade) saccade_frames.push_back(i);
    const auto take = static_cast<std::size_t>(
        std::lround(std::clamp(strength, 0.0, 1.0) * static_cast<double>(saccade_frames.size())));
    std::shuffle(saccade_frames.begin(), saccade_frames.end(), rng);
    saccade_frames.resize(take);
    std::sort(saccade_frames.begin(), saccade_frames.end());
    for (std::size_t i : saccade_frames) {
        const auto& prev = t.records[i - 1];
        auto& cur = t.records[i];
        cur.left.gaze_dir = prev.left.gaze_dir;
        cur.left.pupil_center = prev.left.pupil_center;
        cur.right.gaze_dir = prev.right.gaze_dir;
        cur.right.pupil_center = prev.right.pupil_center;
    }
}

void apply_asymmetry(Track& t, double strength, std::mt19937_64& rng) {
    const bool left = std::bernoulli_distribution(0.5)(rng);
    const std::size_t n = t.records.size();
    const double period = uniform(rng, 2.0, 6.0) * t.fps;
    const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const auto walk = bounded_walk(n, 1.0, rng);

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / period + phase)) + 0.5 * walk[i];
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double mn = *lo, range = *hi - *lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double div = range > 0.0 ? (d[i] - mn) / range * kAsymmetryPeak * strength : 0.0;
        EyeSample& e = eye(t.records[i], left);
        e.iris_area = std::min(e.iris_area + div, e.eye_area);
        e.pupil_area = std::min(e.pupil_area + div * kPupilPerIris, e.iris_area);
    }
}

void apply_color_drift(Track& t, double strength, std::mt19937_64& rng) {
    const bool left = std::bernoulli_distribution(0.5)(rng);
    const std::size_t n = t.records.size();
    std::vector<double> walks[3];
    for (auto& w : walks) w = bounded_walk(n, strength, rng);
    for (std::size_t i = 0; i < n; ++i) {
        EyeSample& e = eye(t.records[i], left);
        for (Rgb* rgb : {&e.iris_rgb, &e.pupil_rgb}) {
            LabColor lab = srgb_to_lab(*rgb);
            // walk is in 8-bit encoded units; L is encoded as L * 255 / 100
            lab.L = std::clamp(lab.L + walks[0][i] * 100.0 / 255.0, 0.0, 100.0);
            lab.a += walks[1][i];
            lab.b += walks[2][i];
            *rgb = lab_to_srgb(lab);
        }
    }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void SynthConfig::validate() const {
    if (n_frames < 1) throw UsageError("n_frames must be positive");
    if (!(fps > 0.0)) throw UsageError("fps must be positive");
    if (!(ipd_mm > 0.0)) throw UsageError("ipd must be positive");
    if (!(fixation_duration_ms.lo > 0.0) || fixation_duration_ms.hi < fixation_duration_ms.lo)
        throw UsageError("bad fixation duration range");
    if (!(saccade_duration_ms.lo > 0.0) || saccade_duration_ms.hi < saccade_duration_ms.lo)
        throw UsageError("bad saccade duration range");
    if (gaze_noise_deg < 0.0 || color_jitter_8bit < 0.0 || area_jitter_mm2 < 0.0)
        throw UsageError("noise levels must be non-negative");
    if (!(pupil_area_mm2 >= 0.0 && pupil_area_mm2 <= iris_area_mm2 && iris_area_mm2 <= eye_area_mm2))
        throw UsageError("area means must satisfy pupil <= iris <= eye");
    if (!(target_max.z() < face_center.z() - eyeball_radius_mm)) throw UsageError("targets must lie in front of the face");
}

std::string_view to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::Smooth: return "smooth";
        case PerturbationKind::Noise: return "noise";
        case PerturbationKind::SkipSaccades: return "skip_saccades";
        case PerturbationKind::Asymmetry: return "asymmetry";
        case PerturbationKind::ColorDrift: return "color_drift";
    }
    return "?";
}

std::vector<FakePerturbation> parse_perturbations(std::string_view text) {
    std::vector<FakePerturbation> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw UsageError("perturbation '" + item + "' needs kind:strength");
        const std::string kind = item.substr(0, colon);
        FakePerturbation p;
        bool known = false;
        for (auto k : {PerturbationKind::Smooth, PerturbationKind::Noise, PerturbationKind::SkipSaccades,
                       PerturbationKind::Asymmetry, PerturbationKind::ColorDrift})
            if (to_string(k) == kind) p.kind = k, known = true;
        if (!known) throw UsageError("unknown perturbation kind '" + kind + "'");
        try {
            p.strength = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad strength in '" + item + "'");
        }
        if (!(p.strength >= 0.0)) throw UsageError("perturbation strength must be >= 0");
        out.push_back(p);
    }
    return out;
}

std::string format_perturbations(std::span<const FakePerturbation> perts) {
    std::ostringstream out;
    for (std::size_t i = 0; i < perts.size(); ++i)
        out << (i ? "," : "") << to_string(perts[i].kind) << ':' << perts[i].strength;
    return out.str();
}

SynthTrack simulate_real(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    auto sample_target = [&] {
        return Vector3d(uniform(rng, cfg.target_min.x(), cfg.target_max.x()),
                        uniform(rng, cfg.target_min.y(), cfg.target_max.y()),
                        uniform(rng, cfg.target_min.z(), cfg.target_max.z()));
    };

    // Fixation/saccade schedule: a target per frame plus its phase.
    const auto n = static_cast<std::size_t>(cfg.n_frames);
    SynthTrack out;
    std::vector<Vector3d> targets;
    targets.reserve(n);
    out.phases.reserve(n);
    Vector3d current = sample_target();
    while (targets.size() < n) {
        ++out.fixation_count;
        const int fix = frames_for(uniform(rng, cfg.fixation_duration_ms.lo, cfg.fixation_duration_ms.hi), cfg.fps);
        for (int i = 0; i < fix && targets.size() < n; ++i) {
            targets.push_back(current);
            out.phases.push_back(GazePhase::Fixation);
        }
        const Vector3d next = sample_target();
        const int sac = frames_for(uniform(rng, cfg.saccade_duration_ms.lo, cfg.saccade_duration_ms.hi), cfg.fps);
        for (int i = 0; i < sac && targets.size() < n; ++i) {
            const double a = smoothstep(static_cast<double>(i + 1) / static_cast<double>(sac + 1));
            targets.push_back((1.0 - a) * current + a * next);
            out.phases.push_back(GazePhase::Saccade);
        }
        current = next;
    }

    Track& t = out.track;
    t.video_id = cfg.video_id;
    t.fps = cfg.fps;
    t.label = Label::Real;
    t.records.reserve(n);

    const Vector3d half_ipd(cfg.ipd_mm / 2.0, 0.0, 0.0);
    const Vector3d to_lids(0.0, 0.0, -10.0);  // eye-region landmarks sit in front of the eyeball center
    const Vector3d ball[2] = {cfg.face_center - half_ipd, cfg.face_center + half_ipd};

    for (std::size_t i = 0; i < n; ++i) {
        TrackRecord r;
        r.frame_index = static_cast<std::int64_t>(i);
        r.timestamp_ms = static_cast<double>(i) * 1000.0 / cfg.fps;
        for (int side = 0; side < 2; ++side) {
            EyeSample& e = side == 0 ? r.left : r.right;
            // The pupil lies on the segment from the eyeball center to the target, so the ray
            // from the pupil along the gaze passes through the target exactly.
            const Vector3d g = (targets[i] - ball[side]).normalized();
            e.pupil_center = ball[side] + cfg.eyeball_radius_mm * g;
            e.gaze_dir = jitter_direction(g, cfg.gaze_noise_deg, rng);
            e.eye_center = ball[side] + to_lids;
            e.eye_area = cfg.eye_area_mm2 + clipped_normal(rng, cfg.area_jitter_mm2);
            e.iris_area = cfg.iris_area_mm2 + clipped_normal(rng, cfg.area_jitter_mm2);
            e.pupil_area = std::max(0.0, cfg.pupil_area_mm2 + clipped_normal(rng, cfg.area_jitter_mm2));
            e.iris_area = std::min(e.iris_area, e.eye_area);
            e.pupil_area = std::min(e.pupil_area, e.iris_area);
            e.iris_rgb = jitter_rgb(cfg.iris_rgb, cfg.color_jitter_8bit, rng);
            e.pupil_rgb = jitter_rgb(cfg.pupil_rgb, cfg.color_jitter_8bit, rng);
            e.valid = true;
        }
        t.records.push_back(r);
    }
    return out;
}

Track gen_real_track(const SynthConfig& cfg) { return simulate_real(cfg).track; }

Track perturb_track(const SynthTrack& src, std::span<const FakePerturbation> perts, std::uint64_t seed) {
    if (perts.empty()) throw EmptyPerturbationList("at least one perturbation is required");
    Track t = src.track;
    for (std::size_t k = 0; k < perts.size(); ++k) {
        std::mt19937_64 rng(mix_seed(seed, k));
        const double s = perts[k].strength;
        switch (perts[k].kind) {
            case PerturbationKind::Smooth: apply_smooth(t, s); break;
            case PerturbationKind::Noise: apply_noise(t, s, rng); break;
            case PerturbationKind::SkipSaccades: apply_skip_saccades(t, src.phases, s, rng); break;
            case PerturbationKind::Asymmetry: apply_asymmetry(t, s, rng); break;
            case PerturbationKind::ColorDrift: apply_color_drift(t, s, rng); break;
        }
    }
    return t;
}

Track gen_fake_track(const SynthConfig& cfg, std::span<const FakePerturbation> perts) {
    if (perts.empty()) throw EmptyPerturbationList("a fake track needs at least one perturbation");
    Track t = perturb_track(simulate_real(cfg), perts, mix_seed(cfg.seed, 0xFA4E));
    t.label = Label::Fake;
    return t;
}

SynthConfig sample_subject(const SynthConfig& base, std::uint64_t seed) {
    static constexpr Rgb kIrisPalette[] = {
        {96.0, 64.0, 40.0}, {70.0, 45.0, 30.0}, {110.0, 130.0, 150.0}, {90.0, 110.0, 70.0}, {130.0, 100.0, 60.0}};
    std::mt19937_64 rng(seed);
    SynthConfig c = base;
    c.seed = mix_seed(seed, 1);
    c.ipd_mm = uniform(rng, 58.0, 70.0);
    c.face_center = base.face_center + Vector3d(uniform(rng, -30.0, 30.0), uniform(rng, -20.0, 20.0), uniform(rng, -50.0, 50.0));
    c.eye_area_mm2 = base.eye_area_mm2 * uniform(rng, 0.85, 1.15);
    c.iris_area_mm2 = base.iris_area_mm2 * uniform(rng, 0.9, 1.1);
    c.pupil_area_mm2 = base.pupil_area_mm2 * uniform(rng, 0.8, 1.2);
    const auto& iris = kIrisPalette[std::uniform_int_distribution<std::size_t>(0, std::size(kIrisPalette) - 1)(rng)];
    for (int i = 0; i < 3; ++i) c.iris_rgb[i] = std::clamp(iris[i] + uniform(rng, -10.0, 10.0), 0.0, 255.0);
    return c;
}

}  // namespace gazefake
