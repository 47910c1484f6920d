#include "gazefake/trackio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

using nlohmann::json;

constexpr double kUnitTolerance = 1e-6;

// Shortest decimal form that reads back to the same double.
std::string fmt_num(double v) {
    if (!std::isfinite(v)) return "null";
    return json(v).dump();
}

std::string fmt_array(const double* v, int n) {
    std::string out = "[";
    for (int i = 0; i < n; ++i) {
        if (i) out += ',';
        out += fmt_num(v[i]);
    }
    return out + ']';
}

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string format_eye(const EyeSample& e) {
    std::string out = "{\"eye_area\":" + fmt_num(e.eye_area);
    out += ",\"iris_area\":" + fmt_num(e.iris_area);
    out += ",\"pupil_area\":" + fmt_num(e.pupil_area);
    out += ",\"iris_rgb\":" + fmt_array(e.iris_rgb.data(), 3);
    out += ",\"pupil_rgb\":" + fmt_array(e.pupil_rgb.data(), 3);
    out += ",\"pupil_center\":" + fmt_array(e.pupil_center.data(), 3);
    out += ",\"gaze_dir\":" + fmt_array(e.gaze_dir.data(), 3);
    out += ",\"eye_center\":" + fmt_array(e.eye_center.data(), 3);
    out += e.valid ? ",\"valid\":true}" : ",\"valid\":false}";
    return out;
}

double read_number(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw std::invalid_argument(std::string(key) + " is not a number");
    return v.get<double>();
}

template <typename Out>
void read_triple(const json& obj, const char* key, Out& out) {
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != 3) throw std::invalid_argument(std::string(key) + " must be a 3-array");
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw std::invalid_argument(std::string(key) + " has a non-number entry");
        out[i] = v[i].get<double>();
    }
}

EyeSample parse_eye(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("eye entry is not an object");
    EyeSample e;
    e.eye_area = read_number(obj, "eye_area");
    e.iris_area = read_number(obj, "iris_area");
    e.pupil_area = read_number(obj, "pupil_area");
    read_triple(obj, "iris_rgb", e.iris_rgb);
    read_triple(obj, "pupil_rgb", e.pupil_rgb);
    read_triple(obj, "pupil_center", e.pupil_center);
    read_triple(obj, "gaze_dir", e.gaze_dir);
    read_triple(obj, "eye_center", e.eye_center);
    const auto& valid = obj.at("valid");
    if (!valid.is_boolean()) throw std::invalid_argument("valid is not a boolean");
    e.valid = valid.get<bool>();
    if (e.valid && !eye_sample_ok(e)) e.valid = false;
    return e;
}

bool finite3(const Eigen::Vector3d& v) { return v.allFinite(); }

bool rgb_ok(const Rgb& c) {
    for (double x : c)
        if (!std::isfinite(x) || x < 0.0 || x > 255.0) return false;
    return true;
}

}  // namespace

std::string_view to_string(Label label) {
    switch (label) {
        case Label::Real: return "real";
        case Label::Fake: return "fake";
        case Label::Unknown: return "unknown";
    }
    return "unknown";
}

Label parse_label(std::string_view text) {
    if (text == "real") return Label::Real;
    if (text == "fake") return Label::Fake;
    if (text == "unknown") return Label::Unknown;
    throw UsageError("unknown label '" + std::string(text) + "'");
}

bool eye_sample_ok(const EyeSample& e) {
    if (!std::isfinite(e.eye_area) || !std::isfinite(e.iris_area) || !std::isfinite(e.pupil_area)) return false;
    if (e.pupil_area < 0.0 || e.pupil_area > e.iris_area || e.iris_area > e.eye_area) return false;
    if (!rgb_ok(e.iris_rgb) || !rgb_ok(e.pupil_rgb)) return false;
    if (!finite3(e.pupil_center) || !finite3(e.eye_center) || !finite3(e.gaze_dir)) return false;
    return std::abs(e.gaze_dir.norm() - 1.0) <= kUnitTolerance;
}

Track parse_track_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;

    Track track;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            if (!have_header) throw MalformedHeader(e.what());
            throw MalformedRecord(line_no, e.what());
        }
        if (!have_header) {
            try {
                track.video_id = obj.at("video_id").get<std::string>();
                track.fps = obj.at("fps").get<double>();
                track.label = parse_label(obj.at("label").get<std::string>());
            } catch (const std::exception& e) {
                throw MalformedHeader(e.what());
            }
            if (!(track.fps > 0.0) || !std::isfinite(track.fps)) throw MalformedHeader("fps must be positive");
            have_header = true;
            continue;
        }
        TrackRecord rec;
        try {
            const auto& frame = obj.at("frame");
            if (!frame.is_number_integer() || frame.get<std::int64_t>() < 0)
                throw std::invalid_argument("frame must be a non-negative integer");
            rec.frame_index = frame.get<std::int64_t>();
            rec.timestamp_ms = read_number(obj, "t_ms");
            rec.left = parse_eye(obj.at("left"));
            rec.right = parse_eye(obj.at("right"));
        } catch (const std::exception& e) {
            throw MalformedRecord(line_no, e.what());
        }
        if (!track.records.empty() && rec.frame_index <= track.records.back().frame_index)
            throw MalformedRecord(line_no, "frame index not strictly increasing");
        if (!(rec.timestamp_ms >= 0.0)) rec.left.valid = rec.right.valid = false;
        track.records.push_back(rec);
    }
    if (!have_header) throw MalformedHeader("missing header line");
    if (track.records.empty()) throw EmptyTrack("track '" + track.video_id + "' has no records");
    return track;
}

Track parse_track(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_track_text(buf.str());
}

std::string format_track(const Track& track) {
    std::string out = "{\"video_id\":" + json_string(track.video_id) + ",\"fps\":" + fmt_num(track.fps) + ",\"label\":\"" +
                      std::string(to_string(track.label)) + "\"}\n";
    for (const auto& r : track.records) {
        out += "{\"frame\":" + std::to_string(r.frame_index) + ",\"t_ms\":" + fmt_num(r.timestamp_ms);
        out += ",\"left\":" + format_eye(r.left) + ",\"right\":" + format_eye(r.right) + "}\n";
    }
    return out;
}

void write_track(const Track& track, const std::filesystem::path& path) {
    if (track.records.empty()) throw EmptyTrack("refusing to write an empty track");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const std::string text = format_track(track);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

TrackRecord swap_lr(const TrackRecord& rec) {
    TrackRecord out = rec;
    std::swap(out.left, out.right);
    return out;
}

}  // namespace gazefake
