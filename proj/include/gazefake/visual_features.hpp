#pragma once

#include <array>

#include "gazefake/trackio.hpp"

namespace gazefake {

struct LabColor {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;

    // 8-bit encoding (L*255/100, a+128, b+128); every channel lands in [0,256).
    std::array<double, 3> encoded() const;
};

// sRGB (D65, standard piecewise transfer curve) to CIE L*a*b*. Throws OutOfRangeChannel
// for channels outside [0,255] or non-finite.
LabColor srgb_to_lab(const Rgb& rgb);

// Inverse of srgb_to_lab; channels are clamped to [0,255] when the color is out of gamut.
Rgb lab_to_srgb(const LabColor& lab);

struct VisualFrame {
    LabColor iris_color_l, iris_color_r;
    LabColor pupil_color_l, pupil_color_r;
    double area_eye_l = 0.0, area_eye_r = 0.0;
    double area_iris_l = 0.0, area_iris_r = 0.0;
    double area_pupil_l = 0.0, area_pupil_r = 0.0;
    std::array<double, 3> iris_color_diff{};   // |enc(C_I^l) - enc(C_I^r)| per channel
    std::array<double, 3> pupil_color_diff{};  // |enc(C_P^l) - enc(C_P^r)| per channel
};

// Throws InvalidRecord for records with an invalid eye.
VisualFrame visual_frame(const TrackRecord& rec);

}  // namespace gazefake
