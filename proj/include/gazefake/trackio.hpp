#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gazefake {

enum class Label : std::uint8_t { Real = 0, Fake = 1, Unknown = 2 };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

using Rgb = std::array<double, 3>;

// Raw per-eye measurements for one frame. Units: mm, mm^2, 8-bit sRGB.
struct EyeSample {
    double eye_area = 0.0;
    double iris_area = 0.0;
    double pupil_area = 0.0;
    Rgb iris_rgb{};
    Rgb pupil_rgb{};
    Eigen::Vector3d pupil_center = Eigen::Vector3d::Zero();
    Eigen::Vector3d gaze_dir = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d eye_center = Eigen::Vector3d::Zero();
    bool valid = true;

    bool operator==(const EyeSample&) const = default;
};

struct TrackRecord {
    std::int64_t frame_index = 0;
    double timestamp_ms = 0.0;
    EyeSample left;
    EyeSample right;

    // Both eyes usable.
    bool valid() const { return left.valid && right.valid; }
    bool operator==(const TrackRecord&) const = default;
};

struct Track {
    std::string video_id;
    double fps = 30.0;
    Label label = Label::Unknown;
    std::vector<TrackRecord> records;

    bool operator==(const Track&) const = default;
};

// Semantic checks on one eye: finite fields, area ordering, unit gaze, colors in range.
bool eye_sample_ok(const EyeSample& eye);

// Reads a .gzt.jsonl file. Parseable records failing semantic checks are kept with valid = false.
Track parse_track(const std::filesystem::path& path);
Track parse_track_text(std::string_view text);

void write_track(const Track& track, const std::filesystem::path& path);
std::string format_track(const Track& track);

// Mirrors a record: left and right eye samples exchanged.
TrackRecord swap_lr(const TrackRecord& rec);

}  // namespace gazefake
