#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

struct ParkingConfig {
    double dig_standoff = 1.8;    // excavator center to deposit center
    double lateral_offset = 2.7;  // hauler center from excavator center
    double slot_clearance = 1.3;  // rover footprint radius for the free-space test
    int angular_steps = 12;       // fixed increments tried around the deposit
    double start_angle = 0.0;
};

/// A matched pair of triangular parking slots beside a deposit: the excavator
/// faces the deposit at dig reach, the hauler sits abeam within scoop reach.
struct ParkingTriangle {
    Pose2 excavator_park;
    Pose2 hauler_park;
    std::array<Vec2, 3> excavator_slot{};
    std::array<Vec2, 3> hauler_slot{};
    double angle = 0.0;  // accepted rotation about the deposit
};

/// Triangle footprint for a park pose: tip ahead of the rover, base behind.
inline std::array<Vec2, 3> slot_triangle(const Pose2& park) {
    const Vec2 fwd = unit_vector(park.heading);
    const Vec2 side = fwd.rotated(kPi / 2.0);
    const Vec2 c = park.position();
    return {c + fwd * 1.2, c - fwd * 1.0 + side * 1.0, c - fwd * 1.0 - side * 1.0};
}

namespace detail {

inline bool pose_clear(const Pose2& park, const std::vector<Disc>& obstacles, double clearance) {
    const auto tri = slot_triangle(park);
    for (const auto& d : obstacles) {
        if ((park.position() - d.center).norm() < d.radius + clearance)
            return false;
        for (const auto& v : tri)
            if (d.contains(v))
                return false;
    }
    return true;
}

}  // namespace detail

/// Rotate the slot pair about the deposit in fixed increments until both
/// slots clear the supplied (already inflated) obstacle discs; empty when no
/// rotation fits.
inline std::optional<ParkingTriangle> plan_parking_triangle(const Vec2& deposit,
                                                            const std::vector<Disc>& obstacles,
                                                            const ParkingConfig& cfg = {}) {
    for (int k = 0; k < cfg.angular_steps; ++k) {
        const double angle = cfg.start_angle + 2.0 * kPi * k / cfg.angular_steps;
        const Vec2 out = unit_vector(angle);  // deposit -> excavator direction

        ParkingTriangle t;
        t.angle = angle;
        const Vec2 ex = deposit + out * cfg.dig_standoff;
        t.excavator_park = {ex.x, ex.y, normalize_angle(angle + kPi)};  // face the deposit
        const Vec2 ha = ex + out.rotated(kPi / 2.0) * cfg.lateral_offset;
        t.hauler_park = {ha.x, ha.y, (ex - ha).angle()};  // face the excavator

        if (!detail::pose_clear(t.excavator_park, obstacles, cfg.slot_clearance) ||
            !detail::pose_clear(t.hauler_park, obstacles, cfg.slot_clearance))
            continue;
        t.excavator_slot = slot_triangle(t.excavator_park);
        t.hauler_slot = slot_triangle(t.hauler_park);
        return t;
    }
    return std::nullopt;
}

}  // namespace regolith
