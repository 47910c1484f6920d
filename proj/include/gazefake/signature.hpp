#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazefake/signal_kit.hpp"

namespace gazefake {

inline constexpr int kSignatureRows = 40;
inline constexpr int kTemporalRows = 20;
inline constexpr int kSignatureChannels = 3;
inline constexpr double kDefaultDPlusMm = 80.0;

// Largest float strictly below 1; every tensor entry is clamped into [0, kSignatureTop].
inline constexpr float kSignatureTop = 0.99999994f;

struct Signature {
    int omega = 0;
    std::string video_id;
    std::int64_t start_frame = 0;
    Label label = Label::Unknown;
    std::vector<float> tensor;  // [row][col][channel]

    static std::size_t size_for(int omega) {
        return static_cast<std::size_t>(kSignatureRows) * static_cast<std::size_t>(omega) * kSignatureChannels;
    }
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * static_cast<std::size_t>(omega) + static_cast<std::size_t>(col)) *
                   kSignatureChannels +
               static_cast<std::size_t>(ch);
    }
    float at(int row, int col, int ch) const { return tensor[index(row, col, ch)]; }
    float& at(int row, int col, int ch) { return tensor[index(row, col, ch)]; }

    bool operator==(const Signature&) const = default;
};

// Builds the 40 x omega x 3 tensor: rows 0-19 temporal features, rows 20-39 their PSDs.
// Throws InvalidWindow for empty/short windows or non-positive d_plus.
Signature build_signature(const SequenceWindow& win, double d_plus = kDefaultDPlusMm);

// The 20 temporal rows before clamping, each a 3-channel signal. Rows 16-19 are already
// SS-normalized cross-correlations. Exposed for inspection and tests.
std::vector<Signal> temporal_rows(const SequenceWindow& win, double d_plus);

// ---- feature domains and ablation masks ----

enum class FeatureSet { Visual, Geometric, Metric };
enum class FeatureTime { Temporal, Spectral };

FeatureSet feature_set_of(int row, int channel);
FeatureTime feature_time_of(int row);
std::string_view to_string(FeatureSet s);

// Per (row, channel) keep flags. Cells not kept are zeroed.
struct FeatureMask {
    std::array<bool, kSignatureRows * kSignatureChannels> keep{};

    static FeatureMask all();
    bool kept(int row, int ch) const { return keep[static_cast<std::size_t>(row * kSignatureChannels + ch)]; }
    bool is_empty() const;
    bool operator==(const FeatureMask&) const = default;
};

// Comma separated tokens from {all, visual, geometric, metric, temporal, spectral, raw_gaze,
// gaze_vectors}. Feature sets and row groups are united; temporal/spectral restrict the result
// (both when neither is named). Throws UsageError on unknown tokens or an empty result.
FeatureMask parse_feature_mask(std::string_view list);

void apply_mask(Signature& sig, const FeatureMask& mask);

// ---- .gzsg binary container ----

struct SignatureFile {
    int omega = 0;
    std::vector<Signature> signatures;
};

// Throws MixedOmega when signatures disagree on omega, IoError on write failure.
// omega_if_empty is stored in the header when sigs is empty.
void write_signatures(std::span<const Signature> sigs, const std::filesystem::path& path, int omega_if_empty = 0);
SignatureFile read_signatures(const std::filesystem::path& path);

std::string encode_signatures(std::span<const Signature> sigs, int omega_if_empty = 0);
SignatureFile decode_signatures(std::string_view bytes);

}  // namespace gazefake
