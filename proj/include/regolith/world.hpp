#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regolith/camera.hpp"
#include "regolith/geometry.hpp"
#include "regolith/rng.hpp"
#include "regolith/semantic_map.hpp"
#include "regolith/swerve.hpp"

namespace regolith {

inline constexpr int kRoverCount = 6;
inline constexpr int kTeamCount = 2;

enum class RoverRole { scout, excavator, hauler };

inline const char* to_string(RoverRole r) {
    switch (r) {
        case RoverRole::scout: return "scout";
        case RoverRole::excavator: return "excavator";
        case RoverRole::hauler: return "hauler";
    }
    return "?";
}

inline int team_of(int rover_id) { return rover_id / 3; }
inline RoverRole role_of(int rover_id) { return static_cast<RoverRole>(rover_id % 3); }
inline int scout_of(int team) { return 3 * team; }
inline int excavator_of(int team) { return 3 * team + 1; }
inline int hauler_of(int team) { return 3 * team + 2; }

struct WorldConfig {
    double map_side = 200.0;
    std::uint64_t seed = 0;
    double sim_dt = 0.1;
    double duration = 7200.0;

    int volatile_count = 30;
    int volatile_units_min = 5;
    int volatile_units_max = 12;
    double volatile_separation = 5.0;
    double volatile_detection_radius = 2.0;
    double volatile_range_sigma = 0.1;
    double volatile_sensor_offset = 0.5;  // sensor head sits ahead of center

    int mound_count = 22;
    int crater_count = 14;
    int hill_count = 8;
    double obstacle_gap = 8.0;       // free corridor between obstacle rims
    double exclusion_radius = 15.0;  // no volatiles/obstacles near stations

    double odometry_speed_noise_frac = 0.02;
    double odometry_speed_noise_add = 0.01;
    double imu_yaw_sigma = 0.005;

    double detection_recall = 0.88;
    double detection_range_frac_sigma = 0.02;
    double detection_bearing_sigma = 1.0 * kPi / 180.0;
    double detection_confusion = 0.02;
    double false_positive_rate = 0.005;
    double fov_half_angle = 60.0 * kPi / 180.0;
    double detection_max_range = 40.0;
    double detection_rate_hz = 5.0;

    double lidar_max_range = 20.0;
    double lidar_sigma = 0.02;

    double pixel_sigma = 0.6;          // landmark detector pixel noise
    double camera_outlier_rate = 0.1;  // landmark mismatch probability
    double camera_max_range = 40.0;    // landmark detector gives up beyond this

    double rover_collision_radius = 0.5;
    double rover_body_radius = 1.0;  // as seen by other sensors
    double dig_range = 3.5;
    double transfer_range = 3.5;
    double plant_deposit_radius = 8.0;
    double transfer_success = 0.848;

    swerve::WheelLayout wheel_layout = swerve::WheelLayout::rectangular(0.5, 0.5, 1.5);

    bool valid() const {
        return map_side > 0.0 && sim_dt > 0.0 && duration >= 0.0 && volatile_count >= 0 &&
               volatile_units_min >= 0 && volatile_units_max >= volatile_units_min &&
               mound_count >= 0 && crater_count >= 0 && hill_count >= 0 &&
               odometry_speed_noise_frac >= 0.0 && odometry_speed_noise_add >= 0.0 &&
               imu_yaw_sigma >= 0.0 && volatile_range_sigma >= 0.0 &&
               detection_recall >= 0.0 && detection_recall <= 1.0 &&
               transfer_success >= 0.0 && transfer_success <= 1.0 &&
               detection_rate_hz > 0.0 && pixel_sigma >= 0.0 && camera_outlier_rate >= 0.0 &&
               camera_outlier_rate < 1.0 && camera_max_range > 0.0;
    }
};

struct VolatileDeposit {
    Vec2 position;
    int units_remaining = 0;
    double detection_radius = 2.0;
};

struct TerrainObstacle {
    ObjectClass cls = ObjectClass::mound;
    Vec2 center;
    double radius = 1.0;
};

struct BaseStation {
    ObjectClass kind = ObjectClass::processing_plant;
    Pose2 pose;
    std::vector<Eigen::Vector3d> landmarks;  // body frame
};

struct LidarBeam {
    double bearing = 0.0;  // body frame, radians
    double range = 0.0;
};

struct SensorFrame {
    Twist odometry;
    double imu_yaw_rate = 0.0;
    std::optional<double> volatile_range;
    std::array<LidarBeam, 5> lidar{};
    std::vector<Detection> detections;
    bool detections_fresh = false;  // oracle is throttled below the physics rate
};

struct RoverState {
    Pose2 pose;
    Twist twist;  // ground-truth body twist achieved last step
    double camera_pan = 0.0;
    int scoop_units = 0;
    int bin_units = 0;
    bool truth_query_used = false;
    double odometer = 0.0;
    bool colliding = false;
    bool out_of_bounds = false;
};

struct WorldEvent {
    double t = 0.0;
    std::string type;
    int rover = -1;
    Vec2 where;
    int units = 0;
    bool success = false;
};

/// Conservation ledger: every volatile unit is exactly one of these at all times.
struct VolatileLedger {
    int initial = 0;
    int in_ground = 0;
    int in_scoops = 0;
    int in_bins = 0;
    int scored = 0;
    int lost = 0;

    bool balanced() const {
        return in_ground + in_scoops + in_bins + scored + lost == initial;
    }
};

/// Deterministic ground-truth world: terrain, deposits, stations, rover
/// kinematics, and every noisy sensor the autonomy stack consumes. All
/// randomness flows from named substreams of the config seed.
class World {
public:
    explicit World(const WorldConfig& cfg)
        : cfg_(cfg), transfer_rng_(cfg.seed, "transfer") {
        if (!cfg.valid())
            throw std::invalid_argument("invalid world config");
        const double half = cfg_.map_side / 2.0;

        stations_[0].kind = ObjectClass::processing_plant;
        stations_[0].pose = {-10.0, 0.0, 0.0};
        stations_[1].kind = ObjectClass::repair_station;
        stations_[1].pose = {10.0, 0.0, kPi};
        for (int s = 0; s < 2; ++s)
            stations_[s].landmarks = make_station_landmarks(cfg_.seed, s);

        // Teams spawn on opposite sides of the station row, facing their
        // half of the map.
        const Pose2 spawns[kRoverCount] = {
            {-14.0, -16.0, -kPi / 2.0}, {-10.0, -16.0, -kPi / 2.0}, {-6.0, -16.0, -kPi / 2.0},
            {14.0, 16.0, kPi / 2.0},    {10.0, 16.0, kPi / 2.0},    {6.0, 16.0, kPi / 2.0}};
        for (int i = 0; i < kRoverCount; ++i)
            rovers_[i].pose = spawns[i];

        generate_obstacles(half);
        generate_volatiles(half);

        for (const auto& v : volatiles_)
            ledger_initial_ += v.units_remaining;

        for (int i = 0; i < kRoverCount; ++i) {
            const std::string tag = std::to_string(i);
            streams_.push_back({SeededStream(cfg_.seed, "odometry-" + tag),
                                SeededStream(cfg_.seed, "imu-" + tag),
                                SeededStream(cfg_.seed, "volatile-" + tag),
                                SeededStream(cfg_.seed, "detections-" + tag),
                                SeededStream(cfg_.seed, "lidar-" + tag),
                                SeededStream(cfg_.seed, "camera-" + tag)});
            last_detection_time_[i] = -1e18;
        }
    }

    const WorldConfig& config() const { return cfg_; }
    double now() const { return now_; }
    const std::vector<TerrainObstacle>& obstacles() const { return obstacles_; }
    const std::vector<VolatileDeposit>& volatiles() const { return volatiles_; }
    const std::array<BaseStation, 2>& stations() const { return stations_; }
    const BaseStation& processing_plant() const { return stations_[0]; }
    const BaseStation& repair_station() const { return stations_[1]; }
    const std::array<RoverState, kRoverCount>& rovers() const { return rovers_; }
    const RoverState& rover(int id) const { return rovers_.at(id); }
    int score() const { return score_; }

    void set_camera_pan(int rover_id, double pan) {
        rovers_.at(rover_id).camera_pan = normalize_angle(pan);
    }

    /// Scripted-scenario hook: place a rover somewhere directly. Ground truth
    /// only; estimators are not informed.
    void teleport(int rover_id, const Pose2& pose) {
        RoverState& rv = rovers_.at(rover_id);
        rv.pose = {pose.x, pose.y, normalize_angle(pose.heading)};
        rv.twist = {};
        rv.colliding = false;
        rv.out_of_bounds = false;
    }

    /// Advance ground truth one step under per-rover wheel commands. Rovers
    /// halt on obstacle contact (event logged, no crash physics) and clamp at
    /// the map edge.
    void step(const std::array<std::array<swerve::WheelCommand, 4>, kRoverCount>& commands,
              double dt) {
        now_ += dt;
        const double half = cfg_.map_side / 2.0;
        for (int i = 0; i < kRoverCount; ++i) {
            RoverState& rv = rovers_[i];
            const Twist twist = swerve::forward_kinematics(commands[i], cfg_.wheel_layout);
            Pose2 next = advance(rv.pose, twist, dt);

            bool hit = false;
            for (const auto& obs : obstacles_) {
                if ((next.position() - obs.center).norm() <
                    obs.radius + cfg_.rover_collision_radius) {
                    hit = true;
                    break;
                }
            }
            if (hit) {
                if (!rv.colliding)
                    push_event({now_, "collision", i, rv.pose.position(), 0, false});
                rv.colliding = true;
                rv.twist = {};
                continue;
            }
            rv.colliding = false;

            const bool clamped = next.x < -half || next.x > half || next.y < -half || next.y > half;
            next.x = std::clamp(next.x, -half, half);
            next.y = std::clamp(next.y, -half, half);
            if (clamped && !rv.out_of_bounds)
                push_event({now_, "map_edge", i, next.position(), 0, false});
            rv.out_of_bounds = clamped;

            rv.odometer += (next.position() - rv.pose.position()).norm();
            rv.pose = next;
            rv.twist = twist;
        }
    }

    /// One sensor frame for a rover: noisy odometry twist, noisy IMU yaw
    /// rate, the short-range volatile sensor, 5 LiDAR beams, and (at the
    /// throttled oracle rate) class detections.
    SensorFrame sense(int rover_id) {
        RoverState& rv = rovers_.at(rover_id);
        Streams& st = streams_[rover_id];
        SensorFrame frame;

        auto speed_noise = [&](double v) {
            return v * (1.0 + cfg_.odometry_speed_noise_frac * st.odometry.standard_normal()) +
                   cfg_.odometry_speed_noise_add * st.odometry.standard_normal();
        };
        frame.odometry = {speed_noise(rv.twist.vx), speed_noise(rv.twist.vy),
                          speed_noise(rv.twist.omega)};
        frame.imu_yaw_rate = rv.twist.omega + cfg_.imu_yaw_sigma * st.imu.standard_normal();

        // The prospecting sensor reads from a head mounted ahead of the
        // body center, so rotating in place sweeps the reading — that
        // gradient is what the pinpoint routine descends.
        const Vec2 sensor =
            rv.pose.position() + unit_vector(rv.pose.heading) * cfg_.volatile_sensor_offset;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& dep : volatiles_) {
            if (dep.units_remaining <= 0)
                continue;
            best = std::min(best, (dep.position - sensor).norm());
        }
        if (best <= cfg_.volatile_detection_radius)
            frame.volatile_range =
                std::max(0.0, best + cfg_.volatile_range_sigma * st.volatile_range.standard_normal());

        fill_lidar(rover_id, frame);

        if (now_ - last_detection_time_[rover_id] >= 1.0 / cfg_.detection_rate_hz - 1e-9) {
            last_detection_time_[rover_id] = now_;
            frame.detections_fresh = true;
            fill_detections(rover_id, frame);
        }
        return frame;
    }

    /// Each rover may ask the simulator for its exact pose exactly once.
    std::optional<Pose2> query_truth_pose_once(int rover_id) {
        RoverState& rv = rovers_.at(rover_id);
        if (rv.truth_query_used)
            return std::nullopt;
        rv.truth_query_used = true;
        return rv.pose;
    }

    /// Landmark-detector oracle for one station as seen by a rover's camera:
    /// noisy pixel correspondences, or empty when the station is out of range
    /// or outside the frame. The camera pan always comes from world state (set
    /// via set_camera_pan); the passed model supplies intrinsics and mount.
    std::vector<Correspondence> observe_landmarks(int rover_id, int station_index,
                                                  const CameraModel& camera) {
        RoverState& rv = rovers_.at(rover_id);
        const BaseStation& st = stations_.at(station_index);
        if ((st.pose.position() - rv.pose.position()).norm() > cfg_.camera_max_range)
            return {};
        CameraModel cam = camera;
        cam.pan = rv.camera_pan;
        return project_landmarks(st.landmarks, st.pose, camera_pose(rv.pose, cam), cam,
                                 cfg_.pixel_sigma, cfg_.camera_outlier_rate,
                                 streams_[rover_id].camera);
    }

    /// Extract one unit from a deposit into the excavator's scoop.
    bool dig_scoop(int excavator_id, int deposit_index) {
        RoverState& rv = rovers_.at(excavator_id);
        if (deposit_index < 0 || deposit_index >= static_cast<int>(volatiles_.size()))
            return false;
        VolatileDeposit& dep = volatiles_[deposit_index];
        if (dep.units_remaining <= 0 || rv.scoop_units > 0)
            return false;
        if ((dep.position - rv.pose.position()).norm() > cfg_.dig_range)
            return false;
        dep.units_remaining -= 1;
        rv.scoop_units = 1;
        push_event({now_, "dig", excavator_id, dep.position, 1, true});
        return true;
    }

    /// Dig whatever live deposit lies closest within reach; the excavator has
    /// no truth index, only a drill that hits or misses.
    bool dig_scoop_nearest(int excavator_id) {
        const Vec2 at = rovers_.at(excavator_id).pose.position();
        int nearest = -1;
        double nearest_d = cfg_.dig_range;
        for (int i = 0; i < static_cast<int>(volatiles_.size()); ++i) {
            if (volatiles_[i].units_remaining <= 0)
                continue;
            const double d = (volatiles_[i].position - at).norm();
            if (d <= nearest_d) {
                nearest_d = d;
                nearest = i;
            }
        }
        return nearest >= 0 && dig_scoop(excavator_id, nearest);
    }

    /// Tip the scoop into the hauler's bin; the handoff fails with the
    /// configured probability and the unit is lost.
    bool transfer_scoop(int excavator_id, int hauler_id) {
        RoverState& ex = rovers_.at(excavator_id);
        RoverState& ha = rovers_.at(hauler_id);
        if (ex.scoop_units <= 0)
            return false;
        if ((ex.pose.position() - ha.pose.position()).norm() > cfg_.transfer_range)
            return false;
        ex.scoop_units = 0;
        const bool success = transfer_rng_.bernoulli(cfg_.transfer_success);
        if (success)
            ha.bin_units += 1;
        else
            lost_ += 1;
        push_event({now_, "transfer", excavator_id, ex.pose.position(), 1, success});
        return success;
    }

    /// Empty the hauler's bin at the processing plant. Returns units scored.
    int deposit_bin(int hauler_id) {
        RoverState& rv = rovers_.at(hauler_id);
        if (rv.bin_units <= 0)
            return 0;
        if ((rv.pose.position() - stations_[0].pose.position()).norm() > cfg_.plant_deposit_radius)
            return 0;
        const int units = rv.bin_units;
        rv.bin_units = 0;
        score_ += units;
        push_event({now_, "scored", hauler_id, rv.pose.position(), units, true});
        return units;
    }

    VolatileLedger ledger() const {
        VolatileLedger lg;
        lg.initial = ledger_initial_;
        for (const auto& dep : volatiles_)
            lg.in_ground += dep.units_remaining;
        for (const auto& rv : rovers_) {
            lg.in_scoops += rv.scoop_units;
            lg.in_bins += rv.bin_units;
        }
        lg.scored = score_;
        lg.lost = lost_;
        return lg;
    }

    std::vector<WorldEvent> drain_events() {
        std::vector<WorldEvent> out;
        out.swap(events_);
        return out;
    }

private:
    struct Streams {
        SeededStream odometry;
        SeededStream imu;
        SeededStream volatile_range;
        SeededStream detections;
        SeededStream lidar;
        SeededStream camera;
    };

    void push_event(WorldEvent e) { events_.push_back(std::move(e)); }

    bool clear_of_stations(const Vec2& p, double margin) const {
        for (const auto& st : stations_)
            if ((p - st.pose.position()).norm() < margin)
                return false;
        return true;
    }

    void generate_obstacles(double half) {
        SeededStream rng(cfg_.seed, "world-obstacles");
        struct ClassSpec {
            ObjectClass cls;
            int count;
            double r_min, r_max;
        };
        const ClassSpec classes[] = {{ObjectClass::mound, cfg_.mound_count, 1.5, 2.5},
                                     {ObjectClass::crater, cfg_.crater_count, 2.0, 3.0},
                                     {ObjectClass::hill, cfg_.hill_count, 3.0, 4.5}};
        for (const auto& spec : classes) {
            for (int i = 0; i < spec.count; ++i) {
                bool placed = false;
                for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                    const double r = rng.uniform(spec.r_min, spec.r_max);
                    const Vec2 c{rng.uniform(-half + r + 2.0, half - r - 2.0),
                                 rng.uniform(-half + r + 2.0, half - r - 2.0)};
                    if (!clear_of_stations(c, cfg_.exclusion_radius + r))
                        continue;
                    bool clear = true;
                    for (const auto& rv : rovers_)
                        clear &= (c - rv.pose.position()).norm() >= r + 4.0;
                    for (const auto& other : obstacles_)
                        clear &= (c - other.center).norm() >= r + other.radius + cfg_.obstacle_gap;
                    if (!clear)
                        continue;
                    obstacles_.push_back({spec.cls, c, r});
                    placed = true;
                }
                if (!placed)
                    throw std::runtime_error("obstacle placement infeasible for this config");
            }
        }
    }

    void generate_volatiles(double half) {
        SeededStream rng(cfg_.seed, "world-volatiles");
        SeededStream units(cfg_.seed, "world-volatile-units");
        for (int i = 0; i < cfg_.volatile_count; ++i) {
            bool placed = false;
            for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                const Vec2 p{rng.uniform(-half + 5.0, half - 5.0),
                             rng.uniform(-half + 5.0, half - 5.0)};
                if (!clear_of_stations(p, cfg_.exclusion_radius))
                    continue;
                bool clear = true;
                for (const auto& dep : volatiles_)
                    clear &= (p - dep.position).norm() >= cfg_.volatile_separation;
                for (const auto& obs : obstacles_)
                    clear &= (p - obs.center).norm() >= obs.radius + 2.0;
                if (!clear)
                    continue;
                volatiles_.push_back({p, units.uniform_int(cfg_.volatile_units_min,
                                                           cfg_.volatile_units_max),
                                      cfg_.volatile_detection_radius});
                placed = true;
            }
            if (!placed)
                throw std::runtime_error("volatile placement infeasible for this config");
        }
    }

    static double ray_circle(const Vec2& origin, const Vec2& dir, const Vec2& center,
                             double radius) {
        const Vec2 rel = center - origin;
        const double along = rel.dot(dir);
        if (along <= 0.0)
            return std::numeric_limits<double>::infinity();
        const double off2 = rel.squared_norm() - along * along;
        if (off2 > radius * radius)
            return std::numeric_limits<double>::infinity();
        return std::max(0.0, along - std::sqrt(radius * radius - off2));
    }

    void fill_lidar(int rover_id, SensorFrame& frame) {
        const RoverState& rv = rovers_[rover_id];
        Streams& st = streams_[rover_id];
        static constexpr double kOffsets[5] = {-10.0 * kPi / 180.0, -5.0 * kPi / 180.0, 0.0,
                                               5.0 * kPi / 180.0, 10.0 * kPi / 180.0};
        for (int b = 0; b < 5; ++b) {
            const double bearing = normalize_angle(rv.camera_pan + kOffsets[b]);
            const Vec2 dir = unit_vector(rv.pose.heading + bearing);
            double range = cfg_.lidar_max_range;
            for (int other = 0; other < kRoverCount; ++other) {
                if (other == rover_id)
                    continue;
                range = std::min(range, ray_circle(rv.pose.position(), dir,
                                                   rovers_[other].pose.position(),
                                                   cfg_.rover_body_radius));
            }
            for (const auto& obs : obstacles_)
                range = std::min(range, ray_circle(rv.pose.position(), dir, obs.center, obs.radius));
            if (range < cfg_.lidar_max_range)
                range = std::max(0.0, range + cfg_.lidar_sigma * st.lidar.standard_normal());
            frame.lidar[b] = {bearing, std::min(range, cfg_.lidar_max_range)};
        }
    }

    void add_detection(const Vec2& target, ObjectClass cls, const RoverState& rv, Streams& st,
                       SensorFrame& frame) {
        const Vec2 rel = target - rv.pose.position();
        const double range = rel.norm();
        if (range < 1e-9 || range > cfg_.detection_max_range)
            return;
        const double bearing = normalize_angle(rel.angle() - rv.pose.heading);
        if (std::abs(normalize_angle(bearing - rv.camera_pan)) > cfg_.fov_half_angle)
            return;
        if (!st.detections.bernoulli(cfg_.detection_recall))
            return;
        ObjectClass reported = cls;
        if (st.detections.bernoulli(cfg_.detection_confusion)) {
            const int shift = st.detections.uniform_int(1, 7);
            reported = static_cast<ObjectClass>((static_cast<int>(cls) + shift) % 8);
        }
        frame.detections.push_back(
            {reported,
             std::max(0.0, range * (1.0 + cfg_.detection_range_frac_sigma *
                                              st.detections.standard_normal())),
             bearing + cfg_.detection_bearing_sigma * st.detections.standard_normal()});
    }

    void fill_detections(int rover_id, SensorFrame& frame) {
        const RoverState& rv = rovers_[rover_id];
        Streams& st = streams_[rover_id];
        for (const auto& obs : obstacles_)
            add_detection(obs.center, obs.cls, rv, st, frame);
        for (int other = 0; other < kRoverCount; ++other) {
            if (other == rover_id)
                continue;
            const ObjectClass cls = role_of(other) == RoverRole::scout  ? ObjectClass::scout
                                    : role_of(other) == RoverRole::excavator
                                        ? ObjectClass::excavator
                                        : ObjectClass::hauler;
            add_detection(rovers_[other].pose.position(), cls, rv, st, frame);
        }
        for (const auto& station : stations_)
            add_detection(station.pose.position(), station.kind, rv, st, frame);
        if (st.detections.bernoulli(cfg_.false_positive_rate)) {
            const ObjectClass cls = static_cast<ObjectClass>(st.detections.uniform_int(0, 2));
            frame.detections.push_back(
                {cls, st.detections.uniform(5.0, cfg_.detection_max_range),
                 rv.camera_pan + st.detections.uniform(-cfg_.fov_half_angle, cfg_.fov_half_angle)});
        }
    }

    WorldConfig cfg_;
    double now_ = 0.0;
    std::array<BaseStation, 2> stations_;
    std::vector<TerrainObstacle> obstacles_;
    std::vector<VolatileDeposit> volatiles_;
    std::array<RoverState, kRoverCount> rovers_;
    std::vector<Streams> streams_;
    std::array<double, kRoverCount> last_detection_time_{};
    SeededStream transfer_rng_;
    std::vector<WorldEvent> events_;
    int score_ = 0;
    int lost_ = 0;
    int ledger_initial_ = 0;
};

}  // namespace regolith
