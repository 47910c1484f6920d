#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gazefake/trackio.hpp"

namespace gazefake {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Generator parameters. Camera space in mm: the camera looks down +z, the face sits at
// face_center facing the camera, and gaze targets are drawn between the camera and the face.
struct SynthConfig {
    std::uint64_t seed = 0;
    std::string video_id = "synth";
    int n_frames = 300;
    double fps = 30.0;
    double ipd_mm = 64.0;
    Range fixation_duration_ms{200.0, 400.0};
    Range saccade_duration_ms{20.0, 80.0};
    double gaze_noise_deg = 0.2;
    Eigen::Vector3d target_min{-150.0, -100.0, 150.0};
    Eigen::Vector3d target_max{150.0, 100.0, 400.0};
    Eigen::Vector3d face_center{0.0, 0.0, 600.0};
    double eyeball_radius_mm = 12.0;
    double eye_area_mm2 = 600.0;
    double iris_area_mm2 = 140.0;
    double pupil_area_mm2 = 20.0;
    double area_jitter_mm2 = 0.25;  // per-frame Gaussian sd, clipped at 3 sd
    Rgb iris_rgb{96.0, 64.0, 40.0};
    Rgb pupil_rgb{22.0, 20.0, 20.0};
    double color_jitter_8bit = 1.0;

    // Throws UsageError on non-positive durations/fps/ipd/frames or negative noise.
    void validate() const;
};

enum class PerturbationKind { Smooth, Noise, SkipSaccades, Asymmetry, ColorDrift };

struct FakePerturbation {
    PerturbationKind kind = PerturbationKind::Noise;
    double strength = 0.0;
};

std::string_view to_string(PerturbationKind k);

// "noise:1.5,asymmetry:30,smooth:5" -> list in that order. Throws UsageError.
std::vector<FakePerturbation> parse_perturbations(std::string_view text);
std::string format_perturbations(std::span<const FakePerturbation> perts);

enum class GazePhase : std::uint8_t { Fixation, Saccade };

// A real track together with the schedule that produced it.
struct SynthTrack {
    Track track;
    std::vector<GazePhase> phases;  // per frame
    int fixation_count = 0;
};

SynthTrack simulate_real(const SynthConfig& cfg);
Track gen_real_track(const SynthConfig& cfg);

// Applies perturbations in order to a copy of src.track; the label is left as is.
// Throws EmptyPerturbationList.
Track perturb_track(const SynthTrack& src, std::span<const FakePerturbation> perts, std::uint64_t seed);

// The paired real track of cfg, perturbed and labeled fake. Throws EmptyPerturbationList.
Track gen_fake_track(const SynthConfig& cfg, std::span<const FakePerturbation> perts);

// Per-subject variation (IPD, head placement, region sizes, iris color) drawn around base.
SynthConfig sample_subject(const SynthConfig& base, std::uint64_t seed);

// Deterministic 64-bit seed mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gazefake
