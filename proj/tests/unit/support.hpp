#pragma once

#include <cmath>
#include <string>

#include "gazefake/signal_kit.hpp"
#include "gazefake/synth_tracks.hpp"
#include "gazefake/trackio.hpp"

namespace gazefake::testing {

// Two eyes 64 mm apart looking at a common point 400 mm in front of them.
inline TrackRecord fixating_record(std::int64_t frame, const Eigen::Vector3d& target = {0.0, 0.0, 400.0}) {
    TrackRecord r;
    r.frame_index = frame;
    r.timestamp_ms = static_cast<double>(frame) * 1000.0 / 30.0;
    for (int side = 0; side < 2; ++side) {
        EyeSample& e = side == 0 ? r.left : r.right;
        const double x = side == 0 ? -32.0 : 32.0;
        e.eye_area = 600.0;
        e.iris_area = 140.0;
        e.pupil_area = 20.0;
        e.iris_rgb = {96.0, 64.0, 40.0};
        e.pupil_rgb = {22.0, 20.0, 20.0};
        e.pupil_center = {x, 0.0, 0.0};
        e.eye_center = {x, 0.0, -10.0};
        e.gaze_dir = (target - e.pupil_center).normalized();
    }
    return r;
}

inline Track fixating_track(int n, Label label = Label::Real, std::string id = "t") {
    Track t;
    t.video_id = std::move(id);
    t.label = label;
    for (int i = 0; i < n; ++i) t.records.push_back(fixating_record(i));
    return t;
}

inline SynthConfig small_synth(std::uint64_t seed, int frames = 128) {
    SynthConfig c;
    c.seed = seed;
    c.n_frames = frames;
    c.video_id = "s" + std::to_string(seed);
    return c;
}

}  // namespace gazefake::testing
