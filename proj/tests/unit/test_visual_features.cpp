#include <doctest.h>

#include <random>

#include "gazefake/errors.hpp"
#include "gazefake/visual_features.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gazefake;

namespace {

// Lab agreement between the library and the primaries-derived oracle. The published matrix and
// white point are rounded, which moves a and b by up to about 0.011 over the gamut.
constexpr double kLabTol = 2e-2;

void check_against_oracle(const Rgb& rgb) {
    const LabColor lab = srgb_to_lab(rgb);
    const auto ref = oracle::srgb_to_lab(rgb[0], rgb[1], rgb[2]);
    CHECK(std::abs(lab.L - ref[0]) < kLabTol);
    CHECK(std::abs(lab.a - ref[1]) < kLabTol);
    CHECK(std::abs(lab.b - ref[2]) < kLabTol);
}

}  // namespace

TEST_CASE("white and black") {
    const LabColor w = srgb_to_lab({255, 255, 255});
    CHECK(std::abs(w.L - 100.0) < 0.1);
    CHECK(std::abs(w.a) < 0.1);
    CHECK(std::abs(w.b) < 0.1);
    const LabColor k = srgb_to_lab({0, 0, 0});
    CHECK(std::abs(k.L) < 0.1);
    CHECK(std::abs(k.a) < 0.1);
    CHECK(std::abs(k.b) < 0.1);
}

TEST_CASE("independent conversion agrees") {
    check_against_oracle({128, 64, 200});
    check_against_oracle({96, 64, 40});
    check_against_oracle({1, 2, 3});  // linear segment of both curves
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int i = 0; i < 200; ++i) check_against_oracle({u(rng), u(rng), u(rng)});
}

TEST_CASE("out of range channels") {
    CHECK_THROWS_AS(srgb_to_lab({256, 0, 0}), OutOfRangeChannel);
    CHECK_THROWS_AS(srgb_to_lab({0, -0.5, 0}), OutOfRangeChannel);
    CHECK_THROWS_AS(srgb_to_lab({0, 0, std::nan("")}), OutOfRangeChannel);
}

TEST_CASE("encoding stays in [0,256) and inverts") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int i = 0; i < 500; ++i) {
        const Rgb rgb{u(rng), u(rng), u(rng)};
        const LabColor lab = srgb_to_lab(rgb);
        for (double e : lab.encoded()) {
            CHECK(e >= 0.0);
            CHECK(e < 256.0);
        }
        const Rgb back = lab_to_srgb(lab);
        for (int c = 0; c < 3; ++c) CHECK(back[c] == doctest::Approx(rgb[c]).scale(1).epsilon(1e-6));
    }
    const auto enc = srgb_to_lab({255, 255, 255}).encoded();
    CHECK(enc[0] == doctest::Approx(255.0).epsilon(1e-4));
    CHECK(enc[1] == doctest::Approx(128.0).epsilon(1e-4));
}

TEST_CASE("visual_frame") {
    TrackRecord r = testing::fixating_record(0);
    VisualFrame v = visual_frame(r);
    CHECK(v.iris_color_diff == std::array<double, 3>{0, 0, 0});
    CHECK(v.pupil_color_diff == std::array<double, 3>{0, 0, 0});

    r.left.pupil_area = 34.0;
    r.left.iris_rgb = {120, 60, 30};
    v = visual_frame(r);
    CHECK(v.area_pupil_l == 34.0);
    CHECK(v.area_pupil_r == 20.0);
    CHECK(v.area_pupil_l - v.area_pupil_r == 14.0);
    const auto el = srgb_to_lab(r.left.iris_rgb).encoded(), er = srgb_to_lab(r.right.iris_rgb).encoded();
    for (int c = 0; c < 3; ++c) CHECK(v.iris_color_diff[c] == std::abs(el[c] - er[c]));

    const VisualFrame s = visual_frame(swap_lr(r));
    CHECK(s.area_pupil_r == v.area_pupil_l);
    CHECK(s.area_pupil_l == v.area_pupil_r);
    CHECK(s.iris_color_l.L == v.iris_color_r.L);
    CHECK(s.iris_color_r.b == v.iris_color_l.b);
    CHECK(s.iris_color_diff == v.iris_color_diff);
    CHECK(s.pupil_color_diff == v.pupil_color_diff);

    r.left.valid = false;
    CHECK_THROWS_AS(visual_frame(r), InvalidRecord);
}
