#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

/// Detector / map object classes. Rovers are distinguished by specialization
/// so planners can exclude a rendezvous target from obstacle avoidance.
enum class ObjectClass {
    mound,
    crater,
    hill,
    scout,
    excavator,
    hauler,
    processing_plant,
    repair_station,
};

inline bool is_rover_class(ObjectClass c) {
    return c == ObjectClass::scout || c == ObjectClass::excavator || c == ObjectClass::hauler;
}

inline bool is_station_class(ObjectClass c) {
    return c == ObjectClass::processing_plant || c == ObjectClass::repair_station;
}

inline const char* to_string(ObjectClass c) {
    switch (c) {
        case ObjectClass::mound: return "mound";
        case ObjectClass::crater: return "crater";
        case ObjectClass::hill: return "hill";
        case ObjectClass::scout: return "scout";
        case ObjectClass::excavator: return "excavator";
        case ObjectClass::hauler: return "hauler";
        case ObjectClass::processing_plant: return "processing_plant";
        case ObjectClass::repair_station: return "repair_station";
    }
    return "?";
}

/// One oracle detection: class plus noisy polar coordinates in the body frame.
struct Detection {
    ObjectClass cls = ObjectClass::mound;
    double range = 0.0;    // meters
    double bearing = 0.0;  // radians, CCW from body forward
};

struct MapConfig {
    double ttl = 40.0;               // seconds
    double merge_radius = 1.5;       // meters
    double clearance_margin = 1.5;   // inflation added for planning
    double freeze_radius = 7.0;      // records inside never expire
    double stationary_speed = 0.05;  // |v| below which the rover "is not moving"
    double stationary_yaw = 0.02;

    double class_radius(ObjectClass c) const {
        switch (c) {
            case ObjectClass::mound: return 2.0;
            case ObjectClass::crater: return 2.5;
            case ObjectClass::hill: return 4.5;
            case ObjectClass::scout:
            case ObjectClass::excavator:
            case ObjectClass::hauler: return 1.5;
            case ObjectClass::processing_plant:
            case ObjectClass::repair_station: return 6.0;
        }
        return 2.0;
    }
};

struct ObstacleRecord {
    ObjectClass cls = ObjectClass::mound;
    Vec2 center;
    double radius = 1.0;
    double ttl_remaining = 0.0;
    bool frozen = false;
};

/// Per-rover persistent obstacle map: detections are georeferenced through the
/// owner's pose estimate, merged by proximity, and expired by TTL.
class LocalMap {
public:
    explicit LocalMap(const MapConfig& cfg = {}) : cfg_(cfg) {}

    const MapConfig& config() const { return cfg_; }
    const std::vector<ObstacleRecord>& records() const { return records_; }

    /// Georeference a detection and merge it into the map. Same-class records
    /// within the merge radius are averaged and their TTL refreshed.
    void insert_detection(const Detection& det, const Pose2& estimated_pose) {
        if (!std::isfinite(det.range) || !std::isfinite(det.bearing))
            return;
        const double angle = estimated_pose.heading + det.bearing;
        const Vec2 center = estimated_pose.position() + unit_vector(angle) * det.range;

        for (auto& rec : records_) {
            if (rec.cls == det.cls && (rec.center - center).norm() < cfg_.merge_radius) {
                rec.center = (rec.center + center) * 0.5;
                rec.ttl_remaining = cfg_.ttl;
                return;
            }
        }
        records_.push_back({det.cls, center, cfg_.class_radius(det.cls), cfg_.ttl, false});
    }

    /// Advance TTL bookkeeping. Records within the freeze radius are paused
    /// indefinitely; a stationary rover pauses the entire map; otherwise TTLs
    /// count down and expired records are dropped.
    void tick(const Pose2& rover_pose, bool is_moving, double dt) {
        const Vec2 at = rover_pose.position();
        for (auto& rec : records_)
            rec.frozen = (rec.center - at).norm() < cfg_.freeze_radius;
        if (!is_moving)
            return;
        for (auto& rec : records_)
            if (!rec.frozen)
                rec.ttl_remaining -= dt;
        records_.erase(std::remove_if(records_.begin(), records_.end(),
                                      [](const ObstacleRecord& r) {
                                          return !r.frozen && r.ttl_remaining <= 0.0;
                                      }),
                       records_.end());
    }

    /// Inflated obstacle discs for the path planner, with selected classes
    /// omitted (for example the rendezvous target rover).
    std::vector<Disc> obstacles_for_planning(const std::set<ObjectClass>& exclude = {}) const {
        std::vector<Disc> out;
        out.reserve(records_.size());
        for (const auto& rec : records_) {
            if (exclude.count(rec.cls))
                continue;
            out.push_back({rec.center, rec.radius + cfg_.clearance_margin});
        }
        return out;
    }

    static bool is_moving(const Twist& twist, const MapConfig& cfg) {
        return std::hypot(twist.vx, twist.vy) >= cfg.stationary_speed ||
               std::abs(twist.omega) >= cfg.stationary_yaw;
    }

private:
    MapConfig cfg_;
    std::vector<ObstacleRecord> records_;
};

}  // namespace regolith
