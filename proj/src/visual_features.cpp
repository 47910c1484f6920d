#include "gazefake/visual_features.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

// D65 reference white, Y normalized to 1.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

constexpr double kDelta = 6.0 / 29.0;

const Eigen::Matrix3d& to_xyz() {
    static const Eigen::Matrix3d m = (Eigen::Matrix3d() << 0.4124564, 0.3575761, 0.1804375,  //
                                      0.2126729, 0.7151522, 0.0721750,                       //
                                      0.0193339, 0.1191920, 0.9503041)
                                         .finished();
    return m;
}

// Exact inverse of the forward matrix, so a round trip returns the input.
const Eigen::Matrix3d& from_xyz() {
    static const Eigen::Matrix3d m = to_xyz().inverse();
    return m;
}

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::array<double, 3> abs_diff(const std::array<double, 3>& x, const std::array<double, 3>& y) {
    return {std::abs(x[0] - y[0]), std::abs(x[1] - y[1]), std::abs(x[2] - y[2])};
}

}  // namespace

std::array<double, 3> LabColor::encoded() const {
    constexpr double hi = 256.0 - 1e-9;
    return {std::clamp(L * 255.0 / 100.0, 0.0, hi), std::clamp(a + 128.0, 0.0, hi),
            std::clamp(b + 128.0, 0.0, hi)};
}

LabColor srgb_to_lab(const Rgb& rgb) {
    Eigen::Vector3d lin;
    for (int i = 0; i < 3; ++i) {
        const double c = rgb[i];
        if (!std::isfinite(c) || c < 0.0 || c > 255.0)
            throw OutOfRangeChannel("sRGB channel " + std::to_string(c) + " outside [0,255]");
        lin[i] = srgb_to_linear(c / 255.0);
    }
    const Eigen::Vector3d xyz = to_xyz() * lin;
    const double fx = lab_f(xyz.x() / kWhiteX);
    const double fy = lab_f(xyz.y() / kWhiteY);
    const double fz = lab_f(xyz.z() / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_srgb(const LabColor& lab) {
    const double fy = (lab.L + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;
    const Eigen::Vector3d xyz(kWhiteX * lab_f_inv(fx), kWhiteY * lab_f_inv(fy), kWhiteZ * lab_f_inv(fz));
    const Eigen::Vector3d lin = from_xyz() * xyz;
    Rgb out;
    for (int i = 0; i < 3; ++i) {
        const double c = linear_to_srgb(std::clamp(lin[i], 0.0, 1.0)) * 255.0;
        out[i] = std::clamp(c, 0.0, 255.0);
    }
    return out;
}

VisualFrame visual_frame(const TrackRecord& rec) {
    if (!rec.valid()) throw InvalidRecord("frame " + std::to_string(rec.frame_index) + " is not valid");
    const auto& l = rec.left;
    const auto& r = rec.right;

    VisualFrame v;
    v.iris_color_l = srgb_to_lab(l.iris_rgb);
    v.iris_color_r = srgb_to_lab(r.iris_rgb);
    v.pupil_color_l = srgb_to_lab(l.pupil_rgb);
    v.pupil_color_r = srgb_to_lab(r.pupil_rgb);
    v.area_eye_l = l.eye_area;
    v.area_eye_r = r.eye_area;
    v.area_iris_l = l.iris_area;
    v.area_iris_r = r.iris_area;
    v.area_pupil_l = l.pupil_area;
    v.area_pupil_r = r.pupil_area;
    v.iris_color_diff = abs_diff(v.iris_color_l.encoded(), v.iris_color_r.encoded());
    v.pupil_color_diff = abs_diff(v.pupil_color_l.encoded(), v.pupil_color_r.encoded());
    return v;
}

}  // namespace gazefake
