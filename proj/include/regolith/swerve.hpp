#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "regolith/geometry.hpp"

namespace regolith::swerve {

/// Four independently steered/driven wheels. Body frame: X forward, Y left.
/// rectangular() uses the wheel order front-left, front-right, rear-right,
/// rear-left for half-separations L1 (fore/aft) and L2 (lateral).
struct WheelLayout {
    std::array<Vec2, 4> positions;
    double v_max = 1.0;

    static WheelLayout rectangular(double l1, double l2, double v_max) {
        return {{Vec2{l1, l2}, Vec2{l1, -l2}, Vec2{-l1, -l2}, Vec2{-l1, l2}}, v_max};
    }

    bool is_rectangular(double tol = 1e-9) const {
        const double l1 = positions[0].x, l2 = positions[0].y;
        auto near = [tol](const Vec2& a, const Vec2& b) {
            return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol;
        };
        return l1 > 0 && l2 > 0 && near(positions[1], {l1, -l2}) &&
               near(positions[2], {-l1, -l2}) && near(positions[3], {-l1, l2});
    }

    bool is_equidistant(double tol = 1e-9) const {
        const double r0 = positions[0].norm();
        for (const auto& p : positions)
            if (std::abs(p.norm() - r0) > tol) return false;
        return true;
    }
};

/// Steering angle in (-pi, pi] plus signed drive speed (negative = reverse).
struct WheelCommand {
    double angle = 0.0;
    double speed = 0.0;

    /// The velocity vector this command produces at the contact point.
    Vec2 velocity() const { return unit_vector(angle) * speed; }
};

/// Drive efforts as fractions of the per-axis maxima, each in [-1, 1].
struct EffortInput {
    double k_x = 0.0;
    double k_y = 0.0;
    double k_omega = 0.0;
};

/// Per-wheel velocity for a body twist: v_n = (vx - w*y_n, vy + w*x_n).
inline std::array<Vec2, 4> inverse_kinematics(const Twist& t, const WheelLayout& layout) {
    std::array<Vec2, 4> v;
    for (int n = 0; n < 4; ++n) {
        const Vec2& r = layout.positions[n];
        v[n] = {t.vx - t.omega * r.y, t.vy + t.omega * r.x};
    }
    return v;
}

/// Angle via quadrant-aware arctangent, speed via Euclidean norm. The zero
/// vector maps to angle 0 by convention. Speeds here are non-negative;
/// optimize_reversal applies the sign.
inline std::array<WheelCommand, 4> to_wheel_commands(const std::array<Vec2, 4>& vectors) {
    std::array<WheelCommand, 4> cmds;
    for (int n = 0; n < 4; ++n) {
        const Vec2& v = vectors[n];
        const double speed = v.norm();
        cmds[n] = {speed > 0.0 ? std::atan2(v.y, v.x) : 0.0, speed};
    }
    return cmds;
}

struct MaxAngularRate {
    double value = 0.0;
    bool approximate = false;  // true when wheels are not equidistant from the COR
};

/// w_max = v_max / r for equidistant wheels (each wheel at 45 degrees driven
/// at v_max). Non-equidistant layouts get v_max / max|r_n|, flagged.
inline MaxAngularRate max_angular_velocity(const WheelLayout& layout) {
    double r_max = 0.0;
    for (const auto& p : layout.positions) r_max = std::max(r_max, p.norm());
    if (r_max <= 0.0) throw std::invalid_argument("wheel layout has zero extent");
    return {layout.v_max / r_max, !layout.is_equidistant()};
}

/// Normalized effort vectors p_n = sin(Theta) * K for a rectangular layout,
/// with theta = arctan(L1/L2). |p_n| = 1 is full wheel speed.
inline std::array<Vec2, 4> normalized_efforts(const EffortInput& k, const WheelLayout& layout) {
    if (!layout.is_rectangular())
        throw std::invalid_argument("normalized_efforts requires a rectangular layout");
    const double l1 = layout.positions[0].x, l2 = layout.positions[0].y;
    const double theta = std::atan2(l1, l2);
    const double s = std::sin(theta), c = std::cos(theta);
    return {Vec2{k.k_x - k.k_omega * c, k.k_y + k.k_omega * s},
            Vec2{k.k_x + k.k_omega * c, k.k_y + k.k_omega * s},
            Vec2{k.k_x + k.k_omega * c, k.k_y - k.k_omega * s},
            Vec2{k.k_x - k.k_omega * c, k.k_y - k.k_omega * s}};
}

/// Re-encode a desired wheel velocity as (angle, signed speed), driving in
/// reverse when that keeps the steering move under 90 degrees.
///
/// The reference direction is the wheel's current angular position (which for
/// a forward-rolling wheel coincides with its velocity direction); when the
/// dot product with the desired vector is negative the wheel is steered to
/// the opposite angle and driven backwards. An exactly perpendicular desired
/// vector does not flip. A zero desired vector keeps the current angle.
inline WheelCommand optimize_reversal(const WheelCommand& current, const Vec2& desired) {
    const double speed = desired.norm();
    if (speed <= 0.0) return {current.angle, 0.0};
    if (unit_vector(current.angle).dot(desired) < 0.0)
        return {normalize_angle(std::atan2(-desired.y, -desired.x)), -speed};
    return {std::atan2(desired.y, desired.x), speed};
}

/// Least-squares body twist for four wheel commands: minimizes the total
/// squared mismatch against v_n(twist); exact when the commands are
/// kinematically consistent.
inline Twist forward_kinematics(const std::array<WheelCommand, 4>& commands,
                                const WheelLayout& layout) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (int n = 0; n < 4; ++n) {
        const Vec2& r = layout.positions[n];
        const Vec2 v = commands[n].velocity();
        // Row (1, 0, -y_n) -> v_nx and row (0, 1, x_n) -> v_ny.
        ata(0, 0) += 1.0;
        ata(0, 2) += -r.y;
        ata(1, 1) += 1.0;
        ata(1, 2) += r.x;
        ata(2, 2) += r.y * r.y + r.x * r.x;
        atb(0) += v.x;
        atb(1) += v.y;
        atb(2) += -r.y * v.x + r.x * v.y;
    }
    ata(2, 0) = ata(0, 2);
    ata(2, 1) = ata(1, 2);
    const Eigen::Vector3d u = ata.ldlt().solve(atb);
    return {u(0), u(1), u(2)};
}

}  // namespace regolith::swerve
