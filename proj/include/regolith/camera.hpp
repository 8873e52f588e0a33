#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "regolith/geometry.hpp"
#include "regolith/rng.hpp"

namespace regolith {

/// Pinhole camera. Camera frame follows the usual vision convention:
/// +Z along the optical axis, +X right, +Y down.
struct CameraModel {
    double fx = 600.0;
    double fy = 600.0;
    double cx = 320.0;
    double cy = 240.0;
    int width = 640;
    int height = 480;
    double mount_height = 1.2;  // meters above the rover body origin
    double pan = 0.0;           // radians, CCW from body forward

    bool valid() const {
        return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
               cy < height;
    }
};

/// One 2D-3D match: a pixel observation of a known model point.
struct Correspondence {
    int landmark_id = -1;
    Vec2 image;               // pixels
    Eigen::Vector3d model;    // meters, station body frame
};

using Iso3 = Eigen::Isometry3d;

/// Lift a planar pose onto the ground plane (z = 0, yaw about +Z).
inline Iso3 lift(const Pose2& p) {
    Iso3 t = Iso3::Identity();
    t.linear() = Eigen::AngleAxisd(p.heading, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    t.translation() = Eigen::Vector3d(p.x, p.y, 0.0);
    return t;
}

/// Planar projection of a 6DoF pose: keep x, y and the yaw of the body x-axis.
inline Pose2 flatten(const Iso3& t) {
    const Eigen::Vector3d fwd = t.linear().col(0);
    return {t.translation().x(), t.translation().y(), std::atan2(fwd.y(), fwd.x())};
}

/// Body -> camera extrinsics: the camera sits mount_height above the body
/// origin looking along body-forward rotated by pan.
inline Iso3 camera_extrinsics(const CameraModel& cam) {
    const double c = std::cos(cam.pan), s = std::sin(cam.pan);
    Eigen::Matrix3d r;
    // Columns: camera X (right), Y (down), Z (forward) in body coordinates.
    r.col(0) = Eigen::Vector3d(s, -c, 0);
    r.col(1) = Eigen::Vector3d(0, 0, -1);
    r.col(2) = Eigen::Vector3d(c, s, 0);
    Iso3 t = Iso3::Identity();
    t.linear() = r;
    t.translation() = Eigen::Vector3d(0, 0, cam.mount_height);
    return t;
}

/// World pose of the camera for a rover at the given planar pose.
inline Iso3 camera_pose(const Pose2& rover, const CameraModel& cam) {
    return lift(rover) * camera_extrinsics(cam);
}

/// Project a camera-frame point. Empty when behind the camera or off-image.
inline std::optional<Vec2> project_point(const CameraModel& cam, const Eigen::Vector3d& p_cam) {
    constexpr double kNearPlane = 0.1;
    if (p_cam.z() < kNearPlane)
        return std::nullopt;
    const double u = cam.fx * p_cam.x() / p_cam.z() + cam.cx;
    const double v = cam.fy * p_cam.y() / p_cam.z() + cam.cy;
    if (u < 0 || u >= cam.width || v < 0 || v >= cam.height)
        return std::nullopt;
    return Vec2{u, v};
}

/// Deterministic landmark table for one station: points scattered over the
/// station structure, non-coplanar as a set by construction of the heights.
inline std::vector<Eigen::Vector3d> make_station_landmarks(std::uint64_t world_seed,
                                                           int station_index, int count = 35) {
    SeededStream rng(world_seed, "station-landmarks-" + std::to_string(station_index));
    std::vector<Eigen::Vector3d> points;
    points.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double angle = rng.uniform(-kPi, kPi);
        const double radial = rng.uniform(1.2, 3.0);
        const double height = rng.uniform(0.3, 3.2);
        points.emplace_back(radial * std::cos(angle), radial * std::sin(angle), height);
    }
    return points;
}

/// Noisy landmark-detector oracle: projects every station landmark through the
/// true camera pose, adds Gaussian pixel noise, and independently replaces
/// correspondences with uniform image points at the outlier rate.
inline std::vector<Correspondence> project_landmarks(const std::vector<Eigen::Vector3d>& landmarks,
                                                     const Pose2& station_pose,
                                                     const Iso3& camera_pose_world,
                                                     const CameraModel& cam, double pixel_sigma,
                                                     double outlier_rate, SeededStream& rng) {
    if (pixel_sigma < 0 || outlier_rate < 0 || outlier_rate >= 1)
        throw std::invalid_argument("project_landmarks: bad noise parameters");
    const Iso3 cam_from_station = camera_pose_world.inverse() * lift(station_pose);
    std::vector<Correspondence> out;
    for (int id = 0; id < static_cast<int>(landmarks.size()); ++id) {
        const auto pixel = project_point(cam, cam_from_station * landmarks[id]);
        if (!pixel)
            continue;
        Vec2 image = *pixel;
        if (pixel_sigma > 0) {
            image.x += rng.normal(0.0, pixel_sigma);
            image.y += rng.normal(0.0, pixel_sigma);
        }
        if (rng.bernoulli(outlier_rate))
            image = {rng.uniform(0.0, cam.width - 1e-9), rng.uniform(0.0, cam.height - 1e-9)};
        if (image.x < 0 || image.x >= cam.width || image.y < 0 || image.y >= cam.height)
            continue;  // noise pushed the point off-image: not detected
        out.push_back({id, image, landmarks[id]});
    }
    return out;
}

}  // namespace regolith
