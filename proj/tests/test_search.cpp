#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "regolith/rng.hpp"
#include "regolith/search.hpp"

using namespace regolith;

namespace {

/// Closed-loop pinpoint harness: ground-truth kinematics, offset sensor
/// head, optional range noise, deposit removable mid-run.
struct PinpointSim {
    Vec2 deposit;
    Pose2 pose;
    double sigma = 0.0;
    bool deposit_alive = true;
    SeededStream rng{0, "pinpoint"};
    PinpointConfig cfg;

    std::optional<double> reading() {
        if (!deposit_alive)
            return std::nullopt;
        const Vec2 sensor = pose.position() + unit_vector(pose.heading) * cfg.sensor_offset;
        const double true_range = (deposit - sensor).norm();
        if (true_range > 2.0)
            return std::nullopt;
        return std::max(0.0, true_range + sigma * rng.standard_normal());
    }
};

}  // namespace

TEST_CASE("spiral arcs sit at exactly their scheduled radii", "[search]") {
    SpiralPlan plan;
    plan.center = {3.0, -2.0};
    plan.start_radius = 10.0;
    plan.radial_step = 6.0;
    plan.arc_count = 3;
    plan.arc_spacing = 2.0;
    const auto waypoints = spiral_waypoints(plan);
    REQUIRE_FALSE(waypoints.empty());

    for (const auto& wp : waypoints) {
        const double r = (wp - plan.center).norm();
        const double nearest = std::min({std::abs(r - 10.0), std::abs(r - 16.0),
                                         std::abs(r - 22.0)});
        CHECK(nearest < 1e-9);
    }
    // Increasing radius: deposits closer to base are visited first.
    double last_radius = 0.0;
    for (const auto& wp : waypoints) {
        const double r = (wp - plan.center).norm();
        CHECK(r >= last_radius - 1e-9);
        last_radius = std::max(last_radius, r);
    }
}

TEST_CASE("waypoints along an arc are no farther apart than the spacing", "[search]") {
    SpiralPlan plan;
    plan.start_radius = 25.0;
    plan.radial_step = 3.5;
    plan.arc_count = 5;
    plan.arc_spacing = 2.0;
    const auto waypoints = spiral_waypoints(plan);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double r_prev = (waypoints[i - 1] - plan.center).norm();
        const double r_here = (waypoints[i] - plan.center).norm();
        if (std::abs(r_prev - r_here) < 1e-6)  // same arc, not a radial hop
            CHECK((waypoints[i] - waypoints[i - 1]).norm() <= plan.arc_spacing + 1e-9);
    }
}

TEST_CASE("teams sweep opposite half-planes", "[search]") {
    SpiralPlan plan;
    plan.arc_count = 4;
    plan.team = 0;
    for (const auto& wp : spiral_waypoints(plan))
        CHECK(wp.y <= 1e-9);
    plan.team = 1;
    for (const auto& wp : spiral_waypoints(plan))
        CHECK(wp.y >= -1e-9);
}

TEST_CASE("a tight spiral covers its annulus within sensor radius", "[search]") {
    SpiralPlan plan;
    plan.start_radius = 6.0;
    plan.radial_step = 3.5;  // below twice the 2 m sensor radius
    plan.arc_count = 5;
    plan.arc_spacing = 1.5;
    plan.team = 0;
    const auto waypoints = spiral_waypoints(plan);

    const double r_max = 6.0 + 4 * 3.5;
    for (double x = -r_max; x <= r_max; x += 0.5) {
        for (double y = -r_max; y <= 0.0; y += 0.5) {
            const Vec2 p{x, y};
            const double r = p.norm();
            if (r < plan.start_radius || r > r_max)
                continue;
            double nearest = 1e18;
            for (const auto& wp : waypoints)
                nearest = std::min(nearest, (p - wp).norm());
            REQUIRE(nearest <= 2.0);
        }
    }
}

TEST_CASE("spiral generation is pure and repeatable", "[search]") {
    SpiralPlan plan;
    plan.arc_count = 6;
    const auto a = spiral_waypoints(plan);
    const auto b = spiral_waypoints(plan);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
    }
}

TEST_CASE("noiseless pinpoint nails a deposit ahead-left", "[search]") {
    PinpointSim sim;
    sim.pose = {0.0, 0.0, 0.0};
    sim.deposit = Vec2{1.5 * std::cos(0.7), 1.5 * std::sin(0.7)};

    Pinpointer pin(sim.cfg);
    double t = 0.0;
    while (pin.phase() != PinpointPhase::done && pin.phase() != PinpointPhase::lost &&
           t < 120.0) {
        const Twist cmd = pin.update(sim.reading(), sim.pose, t);
        sim.pose = advance(sim.pose, cmd, 0.1);
        t += 0.1;
    }
    REQUIRE(pin.phase() == PinpointPhase::done);
    CHECK((pin.estimate() - sim.deposit).norm() < 0.05);
}

TEST_CASE("pinpoint survives realistic range noise", "[search]") {
    int done = 0, accurate = 0;
    for (int trial = 0; trial < 100; ++trial) {
        PinpointSim sim;
        sim.sigma = 0.1;
        sim.rng = SeededStream(1000 + trial, "pinpoint-mc");
        SeededStream layout(500 + trial, "pinpoint-layout");
        sim.pose = {0.0, 0.0, 0.0};
        const double d = layout.uniform(1.0, 1.8);
        const double bearing = layout.uniform(-kPi, kPi);
        sim.deposit = unit_vector(bearing) * d;

        Pinpointer pin(sim.cfg);
        double t = 0.0;
        while (pin.phase() != PinpointPhase::done && pin.phase() != PinpointPhase::lost &&
               t < 180.0) {
            const auto range = sim.reading();
            const Twist cmd = pin.update(range, sim.pose, t);
            // Bounded commands: the routine must never lunge.
            REQUIRE(std::abs(cmd.vx) <= sim.cfg.advance_speed + 1e-12);
            REQUIRE(std::abs(cmd.vy) == 0.0);
            REQUIRE(std::abs(cmd.omega) <= sim.cfg.rotate_rate + 1e-12);
            sim.pose = advance(sim.pose, cmd, 0.1);
            t += 0.1;
        }
        if (pin.phase() == PinpointPhase::done) {
            ++done;
            if ((pin.estimate() - sim.deposit).norm() < 0.3)
                ++accurate;
        }
    }
    INFO("done " << done << " accurate " << accurate);
    CHECK(accurate >= 90);
}

TEST_CASE("a deposit vanishing mid-run times out to lost", "[search]") {
    PinpointSim sim;
    sim.pose = {0.0, 0.0, 0.0};
    sim.deposit = Vec2{1.2, 0.4};

    Pinpointer pin(sim.cfg);
    double t = 0.0;
    bool removed = false;
    while (pin.phase() != PinpointPhase::done && pin.phase() != PinpointPhase::lost &&
           t < 120.0) {
        if (!removed && pin.phase() == PinpointPhase::advance) {
            sim.deposit_alive = false;  // excavated by someone else
            removed = true;
        }
        const Twist cmd = pin.update(sim.reading(), sim.pose, t);
        sim.pose = advance(sim.pose, cmd, 0.1);
        t += 0.1;
    }
    REQUIRE(removed);
    CHECK(pin.phase() == PinpointPhase::lost);
}
