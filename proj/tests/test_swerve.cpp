#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "regolith/rng.hpp"
#include "regolith/swerve.hpp"

using namespace regolith;
using namespace regolith::swerve;

namespace {

Twist random_twist(SeededStream& rng, double scale = 3.0) {
    return {rng.uniform(-scale, scale), rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

WheelLayout random_layout(SeededStream& rng) {
    WheelLayout layout;
    for (auto& p : layout.positions)
        p = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    layout.v_max = rng.uniform(0.5, 4.0);
    return layout;
}

}  // namespace

TEST_CASE("inverse kinematics per-wheel velocities", "[swerve]") {
    const WheelLayout layout = WheelLayout::rectangular(1.0, 1.0, 2.0);

    SECTION("pure translation reaches every wheel unchanged") {
        const auto v = inverse_kinematics({1, 0, 0}, layout);
        for (const auto& w : v) {
            CHECK(w.x == Catch::Approx(1.0));
            CHECK(w.y == Catch::Approx(0.0).margin(1e-15));
        }
    }

    SECTION("pure rotation gives the tangential term (-w*y, w*x)") {
        WheelLayout single = layout;
        single.positions[0] = {1.0, 1.0};
        const auto v = inverse_kinematics({0, 0, 1}, single);
        CHECK(v[0].x == Catch::Approx(-1.0));
        CHECK(v[0].y == Catch::Approx(1.0));
    }

    SECTION("mixed twist by direct substitution") {
        WheelLayout single = layout;
        single.positions[2] = {2.0, -1.0};
        const auto v = inverse_kinematics({1, 1, 0.5}, single);
        CHECK(v[2].x == Catch::Approx(1.5));
        CHECK(v[2].y == Catch::Approx(2.0));
    }

    SECTION("linearity over random twists") {
        SeededStream rng(31, "ik-linearity");
        for (int i = 0; i < 200; ++i) {
            const WheelLayout l = random_layout(rng);
            const Twist t1 = random_twist(rng), t2 = random_twist(rng);
            const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
            const Twist mix{a * t1.vx + b * t2.vx, a * t1.vy + b * t2.vy,
                            a * t1.omega + b * t2.omega};
            const auto vm = inverse_kinematics(mix, l);
            const auto v1 = inverse_kinematics(t1, l);
            const auto v2 = inverse_kinematics(t2, l);
            for (int n = 0; n < 4; ++n) {
                CHECK(vm[n].x == Catch::Approx(a * v1[n].x + b * v2[n].x).margin(1e-12));
                CHECK(vm[n].y == Catch::Approx(a * v1[n].y + b * v2[n].y).margin(1e-12));
            }
        }
    }
}

TEST_CASE("wheel command encoding", "[swerve]") {
    const auto cmds = to_wheel_commands({Vec2{0, 1}, Vec2{-1, 0}, Vec2{1, 1}, Vec2{0, 0}});
    CHECK(cmds[0].angle == Catch::Approx(kPi / 2));
    CHECK(cmds[0].speed == Catch::Approx(1.0));
    CHECK(cmds[1].angle == Catch::Approx(kPi));
    CHECK(cmds[1].speed == Catch::Approx(1.0));
    CHECK(cmds[2].angle == Catch::Approx(kPi / 4));
    CHECK(cmds[2].speed == Catch::Approx(std::sqrt(2.0)));
    CHECK(cmds[3].angle == 0.0);  // zero vector convention
    CHECK(cmds[3].speed == 0.0);
}

TEST_CASE("normalized efforts follow the sin-theta pattern", "[swerve]") {
    SECTION("pure forward effort") {
        const auto p = normalized_efforts({1, 0, 0}, WheelLayout::rectangular(1, 1, 1));
        for (const auto& v : p) {
            CHECK(v.x == Catch::Approx(1.0));
            CHECK(v.y == Catch::Approx(0.0).margin(1e-15));
        }
    }

    SECTION("square layout pure rotation: unit speed at the +/-45 degree tangent") {
        const auto p = normalized_efforts({0, 0, 1}, WheelLayout::rectangular(1, 1, 1));
        for (const auto& v : p) {
            CHECK(v.norm() == Catch::Approx(1.0));
            const double folded = std::abs(std::remainder(v.angle(), kPi / 2));
            CHECK(folded == Catch::Approx(kPi / 4));
        }
    }

    SECTION("3-4-5 layout pure rotation components") {
        const auto p = normalized_efforts({0, 0, 1}, WheelLayout::rectangular(3, 4, 1));
        for (const auto& v : p) {
            CHECK(std::abs(v.x) == Catch::Approx(4.0 / 5.0));
            CHECK(std::abs(v.y) == Catch::Approx(3.0 / 5.0));
        }
    }

    SECTION("agrees with inverse kinematics under max-value scaling") {
        SeededStream rng(77, "efforts");
        for (int i = 0; i < 200; ++i) {
            const double l1 = rng.uniform(0.2, 3.0), l2 = rng.uniform(0.2, 3.0);
            const WheelLayout layout = WheelLayout::rectangular(l1, l2, rng.uniform(0.5, 3.0));
            const EffortInput k{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const double omega_max = max_angular_velocity(layout).value;
            const auto p = normalized_efforts(k, layout);
            const auto v = inverse_kinematics(
                {k.k_x * layout.v_max, k.k_y * layout.v_max, k.k_omega * omega_max}, layout);
            for (int n = 0; n < 4; ++n) {
                CHECK(p[n].x * layout.v_max == Catch::Approx(v[n].x).margin(1e-9));
                CHECK(p[n].y * layout.v_max == Catch::Approx(v[n].y).margin(1e-9));
            }
        }
    }
}

TEST_CASE("maximum angular velocity", "[swerve]") {
    CHECK(max_angular_velocity(WheelLayout::rectangular(1, 1, 1)).value ==
          Catch::Approx(1.0 / std::sqrt(2.0)));

    const auto r2 = max_angular_velocity(WheelLayout::rectangular(std::sqrt(2.0), std::sqrt(2.0), 2.0));
    CHECK(r2.value == Catch::Approx(1.0));
    CHECK_FALSE(r2.approximate);

    CHECK(max_angular_velocity(WheelLayout::rectangular(3, 4, 1)).value == Catch::Approx(0.2));

    WheelLayout skew;
    skew.positions = {Vec2{1, 0}, Vec2{0, 2}, Vec2{-1, 0}, Vec2{0, -2}};
    skew.v_max = 1.0;
    const auto approx = max_angular_velocity(skew);
    CHECK(approx.value == Catch::Approx(0.5));
    CHECK(approx.approximate);
}

TEST_CASE("reversal optimization", "[swerve]") {
    SECTION("reverse instead of steering 180 degrees") {
        const WheelCommand c = optimize_reversal({0.0, 1.0}, {-1.0, 0.0});
        CHECK(c.angle == Catch::Approx(0.0).margin(1e-15));
        CHECK(c.speed == Catch::Approx(-1.0));
    }

    SECTION("slightly-past-opposite desired vector, by the dot-product rule") {
        const WheelCommand c = optimize_reversal({0.0, 1.0}, {-0.9, 0.1});
        CHECK(c.angle == Catch::Approx(std::atan2(-0.1, 0.9)));
        CHECK(c.speed == Catch::Approx(-std::sqrt(0.82)));
    }

    SECTION("exactly perpendicular does not flip") {
        const WheelCommand c = optimize_reversal({0.0, 1.0}, {0.0, 1.0});
        CHECK(c.angle == Catch::Approx(kPi / 2));
        CHECK(c.speed == Catch::Approx(1.0));
    }

    SECTION("zero desired keeps the current angle") {
        const WheelCommand c = optimize_reversal({0.8, 1.0}, {0.0, 0.0});
        CHECK(c.angle == Catch::Approx(0.8));
        CHECK(c.speed == 0.0);
    }

    SECTION("velocity vector is preserved and steering change stays under 90 degrees") {
        SeededStream rng(5150, "reversal");
        for (int i = 0; i < 10000; ++i) {
            const WheelCommand current{rng.uniform(-kPi, kPi), rng.uniform(-2.0, 2.0)};
            const Vec2 desired{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
            const WheelCommand out = optimize_reversal(current, desired);
            CHECK(out.velocity().x == Catch::Approx(desired.x).margin(1e-12));
            CHECK(out.velocity().y == Catch::Approx(desired.y).margin(1e-12));
            const double change = std::abs(normalize_angle(out.angle - current.angle));
            CHECK(change <= kPi / 2 + 1e-9);
        }
    }
}

TEST_CASE("forward kinematics", "[swerve]") {
    const WheelLayout layout = WheelLayout::rectangular(0.7, 0.6, 2.0);

    SECTION("all wheels straight ahead at 1 m/s") {
        std::array<WheelCommand, 4> cmds;
        cmds.fill({0.0, 1.0});
        const Twist t = forward_kinematics(cmds, layout);
        CHECK(t.vx == Catch::Approx(1.0));
        CHECK(t.vy == Catch::Approx(0.0).margin(1e-12));
        CHECK(t.omega == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("round trip recovers the twist") {
        SeededStream rng(99, "roundtrip");
        for (int i = 0; i < 500; ++i) {
            const Twist t = random_twist(rng);
            const Twist back =
                forward_kinematics(to_wheel_commands(inverse_kinematics(t, layout)), layout);
            CHECK(back.vx == Catch::Approx(t.vx).margin(1e-12));
            CHECK(back.vy == Catch::Approx(t.vy).margin(1e-12));
            CHECK(back.omega == Catch::Approx(t.omega).margin(1e-12));
        }
    }

    SECTION("inconsistent commands give the least-squares twist") {
        // Oracle: assemble the full 8x3 system and solve it with Eigen's SVD,
        // independently of the accumulated normal equations in the library.
        auto cmds = to_wheel_commands(inverse_kinematics({1.0, -0.5, 0.8}, layout));
        cmds[1].speed += 0.4;  // perturb one wheel
        cmds[1].angle += 0.1;

        Eigen::Matrix<double, 8, 3> a;
        Eigen::Matrix<double, 8, 1> b;
        for (int n = 0; n < 4; ++n) {
            const Vec2 r = layout.positions[n];
            const Vec2 v = cmds[n].velocity();
            a.row(2 * n) << 1, 0, -r.y;
            a.row(2 * n + 1) << 0, 1, r.x;
            b(2 * n) = v.x;
            b(2 * n + 1) = v.y;
        }
        const Eigen::Vector3d expect = a.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(b);

        const Twist t = forward_kinematics(cmds, layout);
        CHECK(t.vx == Catch::Approx(expect(0)).margin(1e-9));
        CHECK(t.vy == Catch::Approx(expect(1)).margin(1e-9));
        CHECK(t.omega == Catch::Approx(expect(2)).margin(1e-9));

        const double residual = (a * expect - b).norm();
        CHECK(residual > 0.01);
    }
}
