#include "gazefake/gaze_geometry.hpp"

#include <cmath>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

constexpr double kDirectionTolerance = 1e-3;

void require_unit(const Eigen::Vector3d& g, const char* which) {
    if (!g.allFinite() || std::abs(g.norm() - 1.0) > kDirectionTolerance)
        throw NonUnitDirection(std::string(which) + " gaze direction is not unit length");
}

}  // namespace

VergenceSolution intersect_gaze_rays(const Eigen::Vector3d& p_left, const Eigen::Vector3d& g_left,
                                     const Eigen::Vector3d& p_right, const Eigen::Vector3d& g_right) {
    require_unit(g_left, "left");
    require_unit(g_right, "right");

    VergenceSolution s;
    const Eigen::Vector3d w0 = p_left - p_right;
    const double a = g_left.dot(g_left);
    const double b = g_left.dot(g_right);
    const double c = g_right.dot(g_right);
    const double d = g_left.dot(w0);
    const double e = g_right.dot(w0);
    const double cos2 = b * b / (a * c);

    if (std::abs(1.0 - cos2) < kParallelThreshold) {
        s.degenerate = true;
    } else {
        // Normal equations of min |w0 + t_l g_l - t_r g_r|^2.
        const double denom = a * c - b * b;
        s.t_left = (b * e - c * d) / denom;
        s.t_right = (a * e - b * d) / denom;
    }

    const Eigen::Vector3d q_left = p_left + s.t_left * g_left;
    const Eigen::Vector3d q_right = p_right + s.t_right * g_right;
    s.rho = 0.5 * (q_left + q_right);
    s.rho_gap = q_right - q_left;
    s.rho_hat = s.rho_gap.norm();
    s.delta_rho = s.rho_gap.squaredNorm();
    return s;
}

GeoFrame geo_frame(const TrackRecord& rec) {
    if (!rec.valid()) throw InvalidRecord("frame " + std::to_string(rec.frame_index) + " is not valid");
    const auto& l = rec.left;
    const auto& r = rec.right;

    GeoFrame f;
    f.gaze_left = l.gaze_dir;
    f.gaze_right = r.gaze_dir;
    const Eigen::Vector3d pl = l.pupil_center;
    const Eigen::Vector3d pr = r.pupil_center;
    f.vergence = intersect_gaze_rays(pl, f.gaze_left, pr, f.gaze_right);
    f.eye_dist = (l.eye_center - r.eye_center).norm();
    f.pupil_dist = (pl - pr).norm();
    f.area_diff_eye = std::abs(l.eye_area - r.eye_area);
    f.area_diff_iris = std::abs(l.iris_area - r.iris_area);
    f.area_diff_pupil = std::abs(l.pupil_area - r.pupil_area);
    return f;
}

}  // namespace gazefake
