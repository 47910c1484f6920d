#pragma once

#include <span>
#include <string>
#include <vector>

#include "gazefake/gaze_geometry.hpp"
#include "gazefake/trackio.hpp"
#include "gazefake/visual_features.hpp"

namespace gazefake {

struct FrameFeatures {
    std::int64_t frame_index = 0;
    VisualFrame visual;
    GeoFrame geo;
};

// omega consecutive, valid, frame-contiguous records of one video.
struct SequenceWindow {
    std::string video_id;
    Label label = Label::Unknown;
    std::int64_t start_frame = 0;
    int omega = 0;
    std::vector<FrameFeatures> frames;
};

// One or three channels of equal length.
struct Signal {
    std::vector<std::vector<double>> channels;

    Signal() = default;
    explicit Signal(std::vector<std::vector<double>> ch) : channels(std::move(ch)) {}
    static Signal single(std::vector<double> values) { return Signal({std::move(values)}); }

    std::size_t num_channels() const { return channels.size(); }
    std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

inline constexpr double kSsEpsilon = 1e-12;

// Non-overlapping windows packed greedily from the left. A window may not contain an invalid
// record or a gap in frame_index; packing restarts right after the offending record.
// Throws InvalidWindow when omega < 2.
std::vector<SequenceWindow> slice_sequences(const Track& track, int omega);

// Per channel (x - min) / (max - min + eps).
void ss_normalize_inplace(std::span<double> values);
Signal ss_normalize(const Signal& sig);

// Two-sided periodogram |DFT_k(x)|^2 / n, k = 0..n-1, without normalization.
std::vector<double> periodogram(std::span<const double> x);

// Per-channel periodogram followed by ss_normalize.
Signal psd(const Signal& sig);

// Mean-removed normalized cross-correlation at lags -floor(n/2) .. ceil(n/2)-1; entry j holds
// lag j - floor(n/2). Values lie in [-1,1]; zero everywhere when either input is constant.
std::vector<double> xcorr_raw(std::span<const double> a, std::span<const double> b);

// Channel-wise xcorr_raw followed by ss_normalize. Throws LengthMismatch.
Signal xcorr(const Signal& a, const Signal& b);

}  // namespace gazefake
