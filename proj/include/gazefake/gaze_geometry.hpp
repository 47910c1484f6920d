#pragma once

#include <Eigen/Core>

#include "gazefake/trackio.hpp"

namespace gazefake {

// Rays whose directions satisfy |1 - (g_l . g_r)^2| below this are treated as parallel.
inline constexpr double kParallelThreshold = 1e-8;

struct VergenceSolution {
    Eigen::Vector3d rho = Eigen::Vector3d::Zero();      // midpoint of the two closest points
    Eigen::Vector3d rho_gap = Eigen::Vector3d::Zero();  // right closest point minus left closest point
    double rho_hat = 0.0;                               // |rho_gap|
    double delta_rho = 0.0;                             // minimized squared distance
    double t_left = 0.0;
    double t_right = 0.0;
    bool degenerate = false;
};

struct GeoFrame {
    Eigen::Vector3d gaze_left = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d gaze_right = Eigen::Vector3d::UnitZ();
    VergenceSolution vergence;
    double eye_dist = 0.0;
    double pupil_dist = 0.0;
    double area_diff_eye = 0.0;
    double area_diff_iris = 0.0;
    double area_diff_pupil = 0.0;
};

// Closest approach of two rays p + t g (t unconstrained), solved in closed form.
// Throws NonUnitDirection if either |g| deviates from 1 by more than 1e-3.
VergenceSolution intersect_gaze_rays(const Eigen::Vector3d& p_left, const Eigen::Vector3d& g_left,
                                     const Eigen::Vector3d& p_right, const Eigen::Vector3d& g_right);

// Throws InvalidRecord for records with an invalid eye.
GeoFrame geo_frame(const TrackRecord& rec);

}  // namespace gazefake
