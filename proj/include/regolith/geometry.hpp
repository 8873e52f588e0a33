#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace regolith {

inline constexpr double kPi = std::numbers::pi;

/// Wrap an angle to (-pi, pi]; the result is congruent to the input mod 2*pi.
inline double normalize_angle(double a) {
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double angle() const { return std::atan2(y, x); }

    Vec2 rotated(double a) const {
        const double c = std::cos(a), s = std::sin(a);
        return {c * x - s * y, s * x + c * y};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Planar pose: position in meters, heading in radians CCW from world +X.
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;

    Vec2 position() const { return {x, y}; }

    /// Map a point given in this pose's frame into the parent frame.
    Vec2 transform(const Vec2& p) const { return position() + p.rotated(heading); }

    /// Inverse of transform: map a parent-frame point into this pose's frame.
    Vec2 to_local(const Vec2& p) const { return (p - position()).rotated(-heading); }
};

inline Pose2 compose(const Pose2& a, const Pose2& b) {
    const Vec2 t = a.transform({b.x, b.y});
    return {t.x, t.y, normalize_angle(a.heading + b.heading)};
}

inline Pose2 invert(const Pose2& p) {
    const Vec2 t = Vec2{-p.x, -p.y}.rotated(-p.heading);
    return {t.x, t.y, normalize_angle(-p.heading)};
}

/// Commanded body velocity: linear x/y in m/s plus angular rate in rad/s.
struct Twist {
    double vx = 0.0;
    double vy = 0.0;
    double omega = 0.0;
};

/// One explicit-Euler step of a planar pose under a body twist. Both the
/// ground-truth integrator and the EKF prediction use this exact routine so
/// that a noise-free filter tracks the simulator bit for bit.
inline Pose2 advance(const Pose2& pose, const Twist& t, double dt) {
    const Vec2 world_vel = Vec2{t.vx, t.vy}.rotated(pose.heading);
    return {pose.x + world_vel.x * dt,
            pose.y + world_vel.y * dt,
            normalize_angle(pose.heading + t.omega * dt)};
}

struct Disc {
    Vec2 center;
    double radius = 0.0;

    bool contains(const Vec2& p) const { return (p - center).norm() < radius; }
};

/// Distance from a point to the closed segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace regolith
