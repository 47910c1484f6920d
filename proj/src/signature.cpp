#include "gazefake/signature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

using Channel = std::vector<double>;

constexpr double kColorScale = 256.0;

template <typename F>
Channel gather(const SequenceWindow& win, F&& f) {
    Channel out;
    out.reserve(win.frames.size());
    for (const auto& fr : win.frames) out.push_back(f(fr));
    return out;
}

Channel ss(Channel c) {
    ss_normalize_inplace(c);
    return c;
}

Channel scaled(Channel c, double divisor) {
    for (double& v : c) v /= divisor;
    return c;
}

Signal three(Channel c0, Channel c1, Channel c2) { return Signal({std::move(c0), std::move(c1), std::move(c2)}); }

Signal duplicated(const Channel& c) { return Signal({c, c, c}); }

// Three channels from a per-frame 3-vector accessor.
template <typename F>
Signal vec3_signal(const SequenceWindow& win, F&& f) {
    Signal s({Channel{}, Channel{}, Channel{}});
    for (const auto& fr : win.frames) {
        const auto v = f(fr);
        for (int c = 0; c < 3; ++c) s.channels[c].push_back(v[c]);
    }
    return s;
}

Signal lab_signal(const SequenceWindow& win, LabColor VisualFrame::*member) {
    return vec3_signal(win, [member](const FrameFeatures& fr) { return (fr.visual.*member).encoded(); });
}

Signal map_channels(Signal s, double (*fn)(double)) {
    for (auto& ch : s.channels)
        for (double& v : ch) v = fn(v);
    return s;
}

double clamp_unit(double v) {
    if (!(v > 0.0)) return 0.0;  // also maps NaN to 0
    return std::min(v, static_cast<double>(kSignatureTop));
}

// ---- little-endian byte helpers ----

template <typename T>
void put(std::string& out, T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) { put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("signature file truncated");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'G', 'Z', 'S', 'G'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::vector<Signal> temporal_rows(const SequenceWindow& win, double d_plus) {
    if (win.frames.size() < 2 || win.frames.size() != static_cast<std::size_t>(win.omega))
        throw InvalidWindow("window of " + std::to_string(win.frames.size()) + " frames, omega " +
                            std::to_string(win.omega));
    if (!(d_plus > 0.0)) throw InvalidWindow("d_plus must be positive");

    const auto& V = [](const FrameFeatures& f) -> const VisualFrame& { return f.visual; };
    const auto& G = [](const FrameFeatures& f) -> const GeoFrame& { return f.geo; };

    const Channel area_eye_l = gather(win, [&](auto& f) { return V(f).area_eye_l; });
    const Channel area_eye_r = gather(win, [&](auto& f) { return V(f).area_eye_r; });
    const Channel area_iris_l = gather(win, [&](auto& f) { return V(f).area_iris_l; });
    const Channel area_iris_r = gather(win, [&](auto& f) { return V(f).area_iris_r; });
    const Channel area_pupil_l = gather(win, [&](auto& f) { return V(f).area_pupil_l; });
    const Channel area_pupil_r = gather(win, [&](auto& f) { return V(f).area_pupil_r; });

    const Signal iris_l = lab_signal(win, &VisualFrame::iris_color_l);
    const Signal iris_r = lab_signal(win, &VisualFrame::iris_color_r);
    const Signal pupil_l = lab_signal(win, &VisualFrame::pupil_color_l);
    const Signal pupil_r = lab_signal(win, &VisualFrame::pupil_color_r);
    const Signal gaze_l = vec3_signal(win, [&](auto& f) { return G(f).gaze_left; });
    const Signal gaze_r = vec3_signal(win, [&](auto& f) { return G(f).gaze_right; });

    auto by_256 = [](double v) { return v / kColorScale; };
    auto unit_shift = [](double v) { return (v + 1.0) / 2.0; };

    std::vector<Signal> rows;
    rows.reserve(kTemporalRows);
    rows.push_back(map_channels(iris_l, by_256));
    rows.push_back(map_channels(iris_r, by_256));
    rows.push_back(map_channels(pupil_l, by_256));
    rows.push_back(map_channels(pupil_r, by_256));

    rows.push_back(three(ss(area_eye_l), ss(area_eye_r),
                         scaled(gather(win, [&](auto& f) { return G(f).area_diff_eye; }), d_plus)));
    rows.push_back(three(ss(area_iris_l), ss(area_iris_r),
                         ss(gather(win, [&](auto& f) { return G(f).area_diff_iris; }))));
    rows.push_back(three(ss(area_pupil_l), ss(area_pupil_r),
                         scaled(gather(win, [&](auto& f) { return G(f).area_diff_pupil; }), d_plus)));

    rows.push_back(map_channels(vec3_signal(win, [&](auto& f) { return V(f).iris_color_diff; }), by_256));
    rows.push_back(map_channels(vec3_signal(win, [&](auto& f) { return V(f).pupil_color_diff; }), by_256));

    rows.push_back(map_channels(gaze_l, unit_shift));
    rows.push_back(map_channels(gaze_r, unit_shift));
    rows.push_back(ss_normalize(vec3_signal(win, [&](auto& f) { return G(f).vergence.rho; })));
    rows.push_back(vec3_signal(win, [&](auto& f) -> Eigen::Vector3d {
        return G(f).vergence.rho_gap.cwiseAbs() / d_plus;
    }));

    rows.push_back(duplicated(ss(gather(win, [&](auto& f) { return G(f).vergence.delta_rho; }))));
    rows.push_back(duplicated(ss(gather(win, [&](auto& f) { return G(f).eye_dist; }))));
    rows.push_back(duplicated(ss(gather(win, [&](auto& f) { return G(f).pupil_dist; }))));

    rows.push_back(xcorr(iris_l, iris_r));
    rows.push_back(xcorr(pupil_l, pupil_r));
    {
        const Signal ai = xcorr(Signal::single(area_iris_l), Signal::single(area_iris_r));
        const Signal ap = xcorr(Signal::single(area_pupil_l), Signal::single(area_pupil_r));
        const Signal ae = xcorr(Signal::single(area_eye_l), Signal::single(area_eye_r));
        rows.push_back(three(ai.channels[0], ap.channels[0], ae.channels[0]));
    }
    rows.push_back(xcorr(gaze_l, gaze_r));
    return rows;
}

Signature build_signature(const SequenceWindow& win, double d_plus) {
    auto rows = temporal_rows(win, d_plus);

    Signature sig;
    sig.omega = win.omega;
    sig.video_id = win.video_id;
    sig.start_frame = win.start_frame;
    sig.label = win.label;
    sig.tensor.assign(Signature::size_for(win.omega), 0.f);

    for (int r = 0; r < kTemporalRows; ++r) {
        Signal& temporal = rows[static_cast<std::size_t>(r)];
        temporal = map_channels(std::move(temporal), clamp_unit);
        const Signal spectral = psd(temporal);
        for (int c = 0; c < kSignatureChannels; ++c) {
            for (int t = 0; t < win.omega; ++t) {
                sig.at(r, t, c) = static_cast<float>(clamp_unit(temporal.channels[c][t]));
                sig.at(r + kTemporalRows, t, c) = static_cast<float>(clamp_unit(spectral.channels[c][t]));
            }
        }
    }
    for (float& v : sig.tensor) v = std::clamp(v, 0.f, kSignatureTop);
    return sig;
}

// ---- domains ----

FeatureSet feature_set_of(int row, int channel) {
    const int r = row % kTemporalRows;
    if (r >= 16) return FeatureSet::Metric;
    if (r >= 9) return FeatureSet::Geometric;
    if (r >= 4 && r <= 6) return channel == 2 ? FeatureSet::Geometric : FeatureSet::Visual;
    return FeatureSet::Visual;
}

FeatureTime feature_time_of(int row) { return row < kTemporalRows ? FeatureTime::Temporal : FeatureTime::Spectral; }

std::string_view to_string(FeatureSet s) {
    switch (s) {
        case FeatureSet::Visual: return "visual";
        case FeatureSet::Geometric: return "geometric";
        case FeatureSet::Metric: return "metric";
    }
    return "?";
}

FeatureMask FeatureMask::all() {
    FeatureMask m;
    m.keep.fill(true);
    return m;
}

bool FeatureMask::is_empty() const {
    return std::none_of(keep.begin(), keep.end(), [](bool b) { return b; });
}

FeatureMask parse_feature_mask(std::string_view list) {
    bool sets[3] = {false, false, false};
    bool temporal = false, spectral = false;
    bool raw_gaze = false, gaze_vectors = false;
    bool any_content = false;

    std::string text(list);
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) continue;
        if (tok == "all") {
            sets[0] = sets[1] = sets[2] = true;
            any_content = true;
        } else if (tok == "visual") {
            sets[0] = any_content = true;
        } else if (tok == "geometric") {
            sets[1] = any_content = true;
        } else if (tok == "metric") {
            sets[2] = any_content = true;
        } else if (tok == "temporal") {
            temporal = true;
        } else if (tok == "spectral") {
            spectral = true;
        } else if (tok == "raw_gaze") {
            raw_gaze = any_content = true;
        } else if (tok == "gaze_vectors") {
            gaze_vectors = any_content = true;
        } else {
            throw UsageError("unknown feature mask token '" + tok + "'");
        }
    }
    if (!any_content) sets[0] = sets[1] = sets[2] = true;
    if (!temporal && !spectral) temporal = spectral = true;

    FeatureMask m;
    for (int row = 0; row < kSignatureRows; ++row) {
        const bool time_ok = feature_time_of(row) == FeatureTime::Temporal ? temporal : spectral;
        const int r = row % kTemporalRows;
        for (int ch = 0; ch < kSignatureChannels; ++ch) {
            bool content = sets[static_cast<int>(feature_set_of(row, ch))];
            if (raw_gaze && r >= 9 && r <= 13) content = true;
            if (gaze_vectors && (r == 9 || r == 10)) content = true;
            m.keep[static_cast<std::size_t>(row * kSignatureChannels + ch)] = time_ok && content;
        }
    }
    if (m.is_empty()) throw UsageError("feature mask '" + text + "' selects nothing");
    return m;
}

void apply_mask(Signature& sig, const FeatureMask& mask) {
    for (int r = 0; r < kSignatureRows; ++r)
        for (int c = 0; c < kSignatureChannels; ++c)
            if (!mask.kept(r, c))
                for (int t = 0; t < sig.omega; ++t) sig.at(r, t, c) = 0.f;
}

// ---- container ----

std::string encode_signatures(std::span<const Signature> sigs, int omega_if_empty) {
    const int omega = sigs.empty() ? omega_if_empty : sigs.front().omega;
    for (const auto& s : sigs) {
        if (s.omega != omega) throw MixedOmega("signatures with omega " + std::to_string(s.omega) + " and " +
                                               std::to_string(omega));
        if (s.tensor.size() != Signature::size_for(s.omega)) throw ShapeMismatch("tensor size does not match omega");
        if (s.video_id.size() > 0xFFFF) throw UsageError("video id too long");
        if (s.start_frame < 0 || s.start_frame > 0xFFFFFFFFLL) throw UsageError("start frame out of range for the container");
    }
    if (omega < 0 || omega > 0xFFFF) throw UsageError("omega out of range for the container");

    std::string out(kMagic, sizeof kMagic);
    put<std::uint16_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(sigs.size()));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(omega));
    put<std::uint16_t>(out, kSignatureRows);
    put<std::uint16_t>(out, kSignatureChannels);
    for (const auto& s : sigs) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(s.video_id.size()));
        out += s.video_id;
        put<std::uint32_t>(out, static_cast<std::uint32_t>(s.start_frame));
        put<std::uint8_t>(out, static_cast<std::uint8_t>(s.label));
        for (float f : s.tensor) put_f32(out, f);
    }
    return out;
}

SignatureFile decode_signatures(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw BadMagic("not a GZSG signature file");
    Reader rd(bytes.substr(sizeof kMagic));
    const auto version = rd.get<std::uint16_t>();
    if (version != kVersion) throw VersionMismatch("signature file version " + std::to_string(version));
    const auto count = rd.get<std::uint32_t>();
    SignatureFile file;
    file.omega = rd.get<std::uint16_t>();
    const auto rows = rd.get<std::uint16_t>();
    const auto channels = rd.get<std::uint16_t>();
    if (rows != kSignatureRows || channels != kSignatureChannels)
        throw ShapeMismatch("signature file has " + std::to_string(rows) + "x" + std::to_string(channels) + " layout");

    const std::size_t n = Signature::size_for(file.omega);
    file.signatures.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Signature s;
        s.omega = file.omega;
        s.video_id = rd.get_bytes(rd.get<std::uint16_t>());
        s.start_frame = rd.get<std::uint32_t>();
        const auto label = rd.get<std::uint8_t>();
        if (label > 2) throw IoError("bad label byte " + std::to_string(label));
        s.label = static_cast<Label>(label);
        s.tensor.resize(n);
        for (auto& f : s.tensor) f = rd.get_f32();
        file.signatures.push_back(std::move(s));
    }
    return file;
}

void write_signatures(std::span<const Signature> sigs, const std::filesystem::path& path, int omega_if_empty) {
    const std::string bytes = encode_signatures(sigs, omega_if_empty);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

SignatureFile read_signatures(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_signatures(buf.str());
}

}  // namespace gazefake
