#pragma once

#include <array>
#include <optional>
#include <string>

#include "regolith/camera.hpp"
#include "regolith/geometry.hpp"
#include "regolith/pnp.hpp"
#include "regolith/rng.hpp"
#include "regolith/swerve.hpp"
#include "regolith/world.hpp"

namespace regolith {

struct StationInitConfig {
    double rotate_rate = 0.5;   // rad/s spin while scanning
    double spin_margin = 0.3;   // radians past a full revolution
    CameraModel camera{};
    RansacConfig ransac{};
};

struct StationInitResult {
    bool ok = false;
    std::array<Pose2, 2> stations{};
    std::array<double, 2> reprojection_rms{-1.0, -1.0};  // -1 marks never sighted
    double duration = 0.0;                               // sim seconds spent
    Pose2 final_pose{};  // truth position + dead-reckoned heading at spin end
};

/// Spawn-time initialization: the rover consumes its one ground-truth pose
/// query, then spins a full revolution solving the camera-relative pose of
/// each station whenever it is in frame; the best solve per station (most
/// inliers, then lowest RMS) is propagated through the truth pose to an
/// absolute station pose. Heading during the spin is dead-reckoned from the
/// IMU. Fails when either station is never sighted over the revolution.
inline StationInitResult initialize_stations(World& world, int rover_id,
                                             const StationInitConfig& cfg = {}) {
    StationInitResult result;
    const auto truth = world.query_truth_pose_once(rover_id);
    if (!truth.has_value())
        return result;

    const double dt = world.config().sim_dt;
    SeededStream ransac_rng(world.config().seed, "station-init-" + std::to_string(rover_id));

    std::array<std::array<swerve::WheelCommand, 4>, kRoverCount> commands{};
    commands[rover_id] = swerve::to_wheel_commands(
        swerve::inverse_kinematics({0.0, 0.0, cfg.rotate_rate}, world.config().wheel_layout));

    struct Sighting {
        RelativePose pose;
        double heading = 0.0;  // dead-reckoned body heading at the solve
    };
    std::array<std::optional<Sighting>, 2> best;

    double heading = truth->heading;
    double spun = 0.0;
    while (spun < 2.0 * kPi + cfg.spin_margin) {
        world.step(commands, dt);
        const SensorFrame frame = world.sense(rover_id);
        heading += frame.imu_yaw_rate * dt;
        spun += std::abs(cfg.rotate_rate) * dt;
        result.duration += dt;

        for (int s = 0; s < 2; ++s) {
            const auto correspondences = world.observe_landmarks(rover_id, s, cfg.camera);
            if (static_cast<int>(correspondences.size()) < cfg.ransac.min_consensus)
                continue;
            const PnpResult solved =
                solve_pnp_ransac(correspondences, cfg.camera, cfg.ransac, ransac_rng);
            if (!solved.ok())
                continue;
            const auto& pose = solved.pose;
            if (!best[s].has_value() ||
                pose.inlier_ids.size() > best[s]->pose.inlier_ids.size() ||
                (pose.inlier_ids.size() == best[s]->pose.inlier_ids.size() &&
                 pose.reprojection_rms < best[s]->pose.reprojection_rms)) {
                best[s] = Sighting{pose, heading};
            }
        }
    }

    result.final_pose = {truth->x, truth->y, normalize_angle(heading)};
    if (!best[0].has_value() || !best[1].has_value())
        return result;

    for (int s = 0; s < 2; ++s) {
        const Pose2 body{truth->x, truth->y, best[s]->heading};
        const Iso3 world_from_station =
            lift(body) * camera_extrinsics(cfg.camera) * best[s]->pose.transform();
        result.stations[s] = flatten(world_from_station);
        result.reprojection_rms[s] = best[s]->pose.reprojection_rms;
    }
    result.ok = true;
    return result;
}

}  // namespace regolith
