#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "regolith/geometry.hpp"

namespace regolith {

struct EkfNoiseConfig {
    double process_xy = 7e-5;       // position process noise density, m^2/s
    double process_heading = 2e-5;  // heading process noise density, rad^2/s
    /// Yaw-rate blend: omega = (1 - w)*odometry + w*imu. The IMU is the
    /// lower-noise yaw source in the default sensor model.
    double imu_yaw_weight = 0.8;
};

/// Planar localization belief: (x, y, heading) mean with 3x3 covariance.
/// Odometry twist is treated as a control input, not a filter state.
struct EkfState {
    Pose2 mean;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity() * 1e-4;
};

namespace ekf {

/// Propagate by the unicycle-with-strafe model. Uses the same integrator as
/// the simulator so a noise-free filter tracks ground truth exactly.
inline void predict(EkfState& state, const Twist& odometry, double imu_yaw_rate, double dt,
                    const EkfNoiseConfig& cfg = {}) {
    const double w = cfg.imu_yaw_weight;
    const Twist blended{odometry.vx, odometry.vy,
                        (1.0 - w) * odometry.omega + w * imu_yaw_rate};

    const double c = std::cos(state.mean.heading), s = std::sin(state.mean.heading);
    state.mean = advance(state.mean, blended, dt);

    Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
    f(0, 2) = (-blended.vx * s - blended.vy * c) * dt;
    f(1, 2) = (blended.vx * c - blended.vy * s) * dt;

    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    q(0, 0) = q(1, 1) = cfg.process_xy * dt;
    q(2, 2) = cfg.process_heading * dt;

    const Eigen::Matrix3d p = f * state.covariance * f.transpose() + q;
    state.covariance = 0.5 * (p + p.transpose());
}

/// Hard reset from an absolute pose measurement: the mean is replaced and the
/// covariance becomes the measurement covariance, independent of the prior.
inline void reset_from_pose(EkfState& state, const Pose2& measured,
                            const Eigen::Matrix3d& measurement_covariance) {
    state.mean = {measured.x, measured.y, normalize_angle(measured.heading)};
    state.covariance = 0.5 * (measurement_covariance + measurement_covariance.transpose());
}

/// Euclidean distance between estimated and true position.
inline double position_error(const EkfState& state, const Pose2& truth) {
    return std::hypot(state.mean.x - truth.x, state.mean.y - truth.y);
}

}  // namespace ekf
}  // namespace regolith
