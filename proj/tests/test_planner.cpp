#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "regolith/planner.hpp"
#include "regolith/rng.hpp"

using namespace regolith;

namespace {

/// Reference shortest path on the planner's own graph, no heuristic involved.
double dijkstra_cost(const VisibilityGraph& graph) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.nodes.size(), inf);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[0] = 0.0;
    open.push({0.0, 0});
    while (!open.empty()) {
        const auto [d, node] = open.top();
        open.pop();
        if (d > dist[node])
            continue;
        for (const auto& [next, cost] : graph.adjacency[node]) {
            if (dist[node] + cost < dist[next]) {
                dist[next] = dist[node] + cost;
                open.push({dist[next], next});
            }
        }
    }
    return dist[1];
}

bool path_collides(const Vec2& start, const Path& path, const std::vector<Disc>& obstacles) {
    Vec2 prev = start;
    for (const auto& wp : path.waypoints) {
        for (const auto& disc : obstacles)
            if (segment_intersects_disc(prev, wp, disc))
                return true;
        prev = wp;
    }
    return false;
}

PlanRequest random_instance(std::uint64_t seed) {
    SeededStream rng(seed, "plan-instance");
    PlanRequest request;
    request.start = {-25.0, rng.uniform(-5.0, 5.0)};
    request.goal = {25.0, rng.uniform(-5.0, 5.0)};
    const int discs = rng.uniform_int(3, 8);
    for (int i = 0; i < discs; ++i) {
        const Disc disc{{rng.uniform(-18.0, 18.0), rng.uniform(-15.0, 15.0)},
                        rng.uniform(1.5, 4.5)};
        if (!disc.contains(request.start) && !disc.contains(request.goal))
            request.obstacles.push_back(disc);
    }
    return request;
}

}  // namespace

TEST_CASE("segment-disc intersection uses a strict boundary", "[planner]") {
    const Vec2 a{0.0, 0.0}, b{10.0, 0.0};
    CHECK(segment_intersects_disc(a, b, {{5.0, 0.5}, 1.0}));
    CHECK_FALSE(segment_intersects_disc(a, b, {{5.0, 2.0}, 1.0}));
    // Endpoint exactly on the circle: tangential contact does not count.
    CHECK_FALSE(segment_intersects_disc(a, b, {{11.0, 0.0}, 1.0}));
    CHECK_FALSE(segment_intersects_disc(a, b, {{5.0, 1.0}, 1.0}));
}

TEST_CASE("open terrain plans straight to the goal", "[planner]") {
    PlanRequest request;
    request.start = {1.0, 2.0};
    request.goal = {13.0, -3.0};
    const PlanResult result = plan(request);
    REQUIRE(result.ok());
    REQUIRE(result.path.waypoints.size() == 1);
    CHECK(result.path.waypoints[0].x == request.goal.x);
    CHECK(result.path.waypoints[0].y == request.goal.y);
    CHECK(result.path.total_length ==
          Catch::Approx((request.goal - request.start).norm()));
}

TEST_CASE("a blocking disc detours the path at reference-optimal cost", "[planner]") {
    PlanRequest request;
    request.start = {-10.0, 0.0};
    request.goal = {10.0, 0.0};
    request.obstacles = {{{0.0, 0.0}, 3.5}};

    const PlanResult result = plan(request);
    REQUIRE(result.ok());
    CHECK(result.path.total_length > 20.0);
    CHECK_FALSE(path_collides(request.start, result.path, request.obstacles));

    const double reference = dijkstra_cost(build_visibility_graph(request));
    CHECK(result.path.total_length == Catch::Approx(reference).margin(1e-9));
}

TEST_CASE("a goal inside an obstacle is rejected", "[planner]") {
    PlanRequest request;
    request.start = {-10.0, 0.0};
    request.goal = {0.5, 0.0};
    request.obstacles = {{{0.0, 0.0}, 3.5}};
    const PlanResult result = plan(request);
    CHECK(result.failure == PlanFailure::goal_blocked);
}

TEST_CASE("an enclosing ring of obstacles yields no path", "[planner]") {
    PlanRequest request;
    request.start = {20.0, 0.0};
    request.goal = {0.0, 0.0};
    for (int i = 0; i < 12; ++i) {
        const double angle = 2.0 * kPi * i / 12;
        request.obstacles.push_back({unit_vector(angle) * 5.0, 3.0});
    }
    const PlanResult result = plan(request);
    CHECK(result.failure == PlanFailure::no_path);
}

TEST_CASE("search cost matches the reference on random instances", "[planner]") {
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PlanRequest request = random_instance(seed);
        const PlanResult result = plan(request);
        const double reference = dijkstra_cost(build_visibility_graph(request));

        if (result.ok()) {
            ++solved;
            REQUIRE(std::isfinite(reference));
            REQUIRE(result.path.total_length == Catch::Approx(reference).margin(1e-9));
            REQUIRE_FALSE(path_collides(request.start, result.path, request.obstacles));
            REQUIRE_FALSE(result.path.waypoints.empty());
            CHECK(result.path.waypoints.back().x == request.goal.x);
            CHECK(result.path.waypoints.back().y == request.goal.y);
        } else {
            REQUIRE_FALSE(std::isfinite(reference));
        }
    }
    CHECK(solved > 90);  // these instances are rarely fully blocked
}

TEST_CASE("planning is deterministic", "[planner]") {
    const PlanRequest request = random_instance(17);
    const PlanResult a = plan(request);
    const PlanResult b = plan(request);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    REQUIRE(a.path.waypoints.size() == b.path.waypoints.size());
    for (std::size_t i = 0; i < a.path.waypoints.size(); ++i) {
        CHECK(a.path.waypoints[i].x == b.path.waypoints[i].x);
        CHECK(a.path.waypoints[i].y == b.path.waypoints[i].y);
    }
}

TEST_CASE("denser boundary sampling does not lengthen paths", "[planner]") {
    int comparable = 0, shorter_or_equal = 0;
    double total_coarse = 0.0, total_fine = 0.0;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        PlanRequest request = random_instance(seed);
        request.boundary_samples = 8;
        const PlanResult coarse = plan(request);
        request.boundary_samples = 20;
        const PlanResult fine = plan(request);
        if (!coarse.ok() || !fine.ok())
            continue;
        ++comparable;
        total_coarse += coarse.path.total_length;
        total_fine += fine.path.total_length;
        if (fine.path.total_length <= coarse.path.total_length + 1e-9)
            ++shorter_or_equal;
    }
    REQUIRE(comparable > 30);
    CHECK(total_fine <= total_coarse);
    CHECK(shorter_or_equal >= comparable * 3 / 4);
}

TEST_CASE("motion control drives, aligns, or stops as distance demands", "[planner]") {
    const ControllerConfig cfg;

    const Twist ahead = motion_control({0.0, 0.0, 0.0}, {10.0, 0.0}, cfg);
    CHECK(ahead.vx == Catch::Approx(cfg.v_max));
    CHECK(ahead.vy == 0.0);
    CHECK(ahead.omega == Catch::Approx(0.0).margin(1e-12));

    const Twist behind = motion_control({0.0, 0.0, 0.0}, {-10.0, 0.0}, cfg);
    CHECK(behind.vx == 0.0);
    CHECK(behind.vy == 0.0);
    CHECK(std::abs(behind.omega) == Catch::Approx(cfg.omega_max));

    const Twist there = motion_control({0.0, 0.0, 0.0}, {0.5, 0.0}, cfg);
    CHECK(there.vx == 0.0);
    CHECK(there.vy == 0.0);
    CHECK(there.omega == 0.0);

    // Close but misaligned: slow approach with proportional correction.
    const Twist offset = motion_control({0.0, 0.0, 0.0}, {1.5, 0.4}, cfg);
    CHECK(offset.vx == Catch::Approx(cfg.k_v * std::hypot(1.5, 0.4)));
    CHECK(offset.omega == Catch::Approx(cfg.k_omega * std::atan2(0.4, 1.5)));
}

TEST_CASE("navigator reaches a clear goal along a near-straight track", "[planner]") {
    Navigator nav;
    nav.set_goal({20.0, 0.0});
    Pose2 pose{0.0, 0.0, 0.0};
    const double dt = 0.1;
    double traveled = 0.0;
    int steps = 0;
    while (nav.status() == NavStatus::moving && steps < 2000) {
        const Twist twist = nav.update(pose, {}, steps * dt);
        const Pose2 next = advance(pose, twist, dt);
        traveled += (next.position() - pose.position()).norm();
        pose = next;
        ++steps;
    }
    REQUIRE(nav.status() == NavStatus::arrived);
    CHECK((pose.position() - Vec2{20.0, 0.0}).norm() < 0.75);
    CHECK(std::abs(traveled - 20.0) < 0.05 * 20.0);
}

TEST_CASE("an obstacle appearing mid-drive forces a collision-free replan", "[planner]") {
    Navigator nav;
    nav.set_goal({30.0, 0.0});
    Pose2 pose{0.0, 0.0, 0.0};
    const double dt = 0.1;
    const Disc true_obstacle{{15.0, 0.0}, 2.0};
    const Disc inflated{{15.0, 0.0}, 3.5};

    int steps = 0;
    bool entered_true_disc = false;
    while (nav.status() == NavStatus::moving && steps < 4000) {
        const double now = steps * dt;
        std::vector<Disc> obstacles;
        if (now >= 3.0)
            obstacles.push_back(inflated);  // detection pops in mid-drive
        const Twist twist = nav.update(pose, obstacles, now);
        pose = advance(pose, twist, dt);
        entered_true_disc |= true_obstacle.contains(pose.position());
        ++steps;
    }
    REQUIRE(nav.status() == NavStatus::arrived);
    CHECK_FALSE(entered_true_disc);
    CHECK(nav.replan_count() >= 2);
}

TEST_CASE("preemption halts the navigator within one control period", "[planner]") {
    Navigator nav;
    nav.set_goal({20.0, 0.0});
    Pose2 pose{0.0, 0.0, 0.0};
    const Twist rolling = nav.update(pose, {}, 0.0);
    CHECK(rolling.vx > 0.0);

    nav.preempt();
    CHECK(nav.status() == NavStatus::preempted);
    const Twist stopped = nav.update(pose, {}, 0.1);
    CHECK(stopped.vx == 0.0);
    CHECK(stopped.vy == 0.0);
    CHECK(stopped.omega == 0.0);
}

TEST_CASE("navigator escapes a disc that swallowed its estimate", "[planner]") {
    Navigator nav;
    nav.set_goal({12.0, 0.0});
    Pose2 pose{0.0, 0.0, 0.0};
    const std::vector<Disc> obstacles = {{{-0.8, 0.0}, 2.5}};  // start is inside
    const double dt = 0.1;
    int steps = 0;
    while (nav.status() == NavStatus::moving && steps < 3000) {
        const Twist twist = nav.update(pose, obstacles, steps * dt);
        pose = advance(pose, twist, dt);
        ++steps;
    }
    REQUIRE(nav.status() == NavStatus::arrived);
}

TEST_CASE("a goal that becomes blocked reports blocked", "[planner]") {
    Navigator nav;
    nav.set_goal({10.0, 0.0});
    Pose2 pose{0.0, 0.0, 0.0};
    const std::vector<Disc> obstacles = {{{10.0, 0.0}, 3.0}};
    const Twist twist = nav.update(pose, obstacles, 0.0);
    CHECK(nav.status() == NavStatus::blocked);
    CHECK(twist.vx == 0.0);
}
