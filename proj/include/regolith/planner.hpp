#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

/// Strict-interior test: a segment grazing the circle boundary does not count
/// as an intersection, so paths may touch inflated discs tangentially.
inline bool segment_intersects_disc(const Vec2& a, const Vec2& b, const Disc& disc) {
    return point_segment_distance(disc.center, a, b) < disc.radius;
}

struct PlanRequest {
    Vec2 start;
    Vec2 goal;
    std::vector<Disc> obstacles;
    int boundary_samples = 12;       // nodes per disc, >= 6
    double node_epsilon = 0.2;       // extra inflation for node placement
    // Optional departure-turn cost: with a finite start_heading and positive
    // weight, the first edge pays turn_weight per radian of initial turn.
    // Near-tie routes then stop flapping between replans, since the rover is
    // already facing the one it committed to.
    double start_heading = std::numeric_limits<double>::quiet_NaN();
    double turn_weight = 0.0;
};

struct Path {
    std::vector<Vec2> waypoints;  // start exclusive, goal inclusive
    double total_length = 0.0;
};

enum class PlanFailure { none, goal_blocked, no_path };

struct PlanResult {
    PlanFailure failure = PlanFailure::none;
    Path path;

    bool ok() const { return failure == PlanFailure::none; }
};

/// Shared node/edge structure so tests can run reference algorithms on the
/// exact graph the planner searched. Node 0 is the start, node 1 the goal.
struct VisibilityGraph {
    std::vector<Vec2> nodes;
    std::vector<std::vector<std::pair<int, double>>> adjacency;  // (node, cost)
};

inline VisibilityGraph build_visibility_graph(const PlanRequest& request) {
    VisibilityGraph graph;
    graph.nodes.push_back(request.start);
    graph.nodes.push_back(request.goal);

    const int samples = std::max(6, request.boundary_samples);
    for (const auto& disc : request.obstacles) {
        // Node circles sit far enough out that the chord between adjacent
        // samples clears the disc it surrounds; a fixed epsilon alone is not
        // enough for large radii.
        const double chord_safe = disc.radius / std::cos(kPi / samples) + 1e-9;
        const double ring = std::max(disc.radius + request.node_epsilon, chord_safe);
        for (int i = 0; i < samples; ++i) {
            const double angle = 2.0 * kPi * i / samples;
            const Vec2 node = disc.center + unit_vector(angle) * ring;
            bool usable = true;
            for (const auto& other : request.obstacles)
                usable &= !other.contains(node);
            if (usable)
                graph.nodes.push_back(node);
        }
    }

    const int n = static_cast<int>(graph.nodes.size());
    graph.adjacency.assign(n, {});
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            bool clear = true;
            for (const auto& disc : request.obstacles) {
                if (segment_intersects_disc(graph.nodes[i], graph.nodes[j], disc)) {
                    clear = false;
                    break;
                }
            }
            if (!clear)
                continue;
            const double cost = (graph.nodes[i] - graph.nodes[j]).norm();
            graph.adjacency[i].push_back({j, cost});
            graph.adjacency[j].push_back({i, cost});
        }
    }
    if (request.turn_weight > 0.0 && std::isfinite(request.start_heading)) {
        for (auto& [next, cost] : graph.adjacency[0]) {
            const double edge_angle = (graph.nodes[next] - graph.nodes[0]).angle();
            cost += request.turn_weight *
                    std::abs(normalize_angle(edge_angle - request.start_heading));
        }
    }
    return graph;
}

/// A* from node 0 to node 1 with the Euclidean heuristic. Ties break on
/// (f, h, node id) so the search is deterministic. Returns the node sequence,
/// or empty when unreachable.
inline std::vector<int> astar_route(const VisibilityGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, inf);
    std::vector<int> parent(n, -1);
    std::vector<bool> closed(n, false);

    auto heuristic = [&](int i) { return (graph.nodes[i] - graph.nodes[1]).norm(); };

    using Entry = std::tuple<double, double, int>;  // (f, h, node)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[0] = 0.0;
    open.push({heuristic(0), heuristic(0), 0});

    while (!open.empty()) {
        const auto [f, h, node] = open.top();
        open.pop();
        if (closed[node])
            continue;
        closed[node] = true;
        if (node == 1)
            break;
        for (const auto& [next, cost] : graph.adjacency[node]) {
            if (closed[next])
                continue;
            const double candidate = g[node] + cost;
            if (candidate < g[next]) {
                g[next] = candidate;
                parent[next] = node;
                open.push({candidate + heuristic(next), heuristic(next), next});
            }
        }
    }

    std::vector<int> route;
    if (g[1] == inf)
        return route;
    for (int node = 1; node != -1; node = parent[node])
        route.push_back(node);
    std::reverse(route.begin(), route.end());
    return route;
}

inline PlanResult plan(const PlanRequest& request) {
    PlanResult result;
    for (const auto& disc : request.obstacles) {
        if (disc.contains(request.goal)) {
            result.failure = PlanFailure::goal_blocked;
            return result;
        }
    }

    const VisibilityGraph graph = build_visibility_graph(request);
    const std::vector<int> route = astar_route(graph);
    if (route.empty()) {
        result.failure = PlanFailure::no_path;
        return result;
    }

    for (std::size_t i = 1; i < route.size(); ++i) {
        result.path.waypoints.push_back(graph.nodes[route[i]]);
        result.path.total_length += (graph.nodes[route[i]] - graph.nodes[route[i - 1]]).norm();
    }
    return result;
}

struct ControllerConfig {
    double k_omega = 1.5;
    double k_v = 0.8;
    double align_threshold = kPi / 6.0;  // rotate in place beyond 30 degrees
    double arrival_radius = 0.75;
    double v_max = 1.5;
    double omega_max = 1.0;
};

/// Waypoint driver: align-then-drive proportional controller on the planar
/// pose estimate. Cruise motion is forward-only; strafing is reserved for
/// parking maneuvers elsewhere.
inline Twist motion_control(const Pose2& pose, const Vec2& waypoint,
                            const ControllerConfig& cfg = {}) {
    const Vec2 to = waypoint - pose.position();
    const double distance = to.norm();
    if (distance < cfg.arrival_radius)
        return {};

    const double heading_error = normalize_angle(to.angle() - pose.heading);
    const double omega =
        std::clamp(cfg.k_omega * heading_error, -cfg.omega_max, cfg.omega_max);
    if (std::abs(heading_error) > cfg.align_threshold)
        return {0.0, 0.0, omega};
    return {std::clamp(cfg.k_v * distance, 0.0, cfg.v_max), 0.0, omega};
}

enum class NavStatus { idle, moving, arrived, blocked, preempted };

inline const char* to_string(NavStatus s) {
    switch (s) {
        case NavStatus::idle: return "idle";
        case NavStatus::moving: return "moving";
        case NavStatus::arrived: return "arrived";
        case NavStatus::blocked: return "blocked";
        case NavStatus::preempted: return "preempted";
    }
    return "?";
}

/// Incremental goal-seeking: plans against the latest obstacle snapshot,
/// feeds waypoints to the motion controller, and replans periodically or as
/// soon as a new obstacle invalidates the remaining path.
class Navigator {
public:
    explicit Navigator(const ControllerConfig& cfg = {}, double replan_period = 2.0)
        : cfg_(cfg), replan_period_(replan_period) {}

    void set_goal(const Vec2& goal) {
        goal_ = goal;
        waypoints_.clear();
        status_ = NavStatus::moving;
        last_plan_time_ = -1e18;
    }

    void preempt() {
        status_ = NavStatus::preempted;
        waypoints_.clear();
    }

    NavStatus status() const { return status_; }
    const Vec2& goal() const { return *goal_; }
    bool has_goal() const { return goal_.has_value(); }
    const std::vector<Vec2>& waypoints() const { return waypoints_; }
    int replan_count() const { return replans_; }

    /// One control period: returns the twist to command right now.
    Twist update(const Pose2& pose, const std::vector<Disc>& obstacles, double now) {
        if (status_ != NavStatus::moving)
            return {};
        const Vec2 at = pose.position();

        if ((at - *goal_).norm() < cfg_.arrival_radius) {
            status_ = NavStatus::arrived;
            waypoints_.clear();
            return {};
        }

        // Escape an inflated disc the estimate has drifted into: planning is
        // impossible from inside, so back straight out first.
        for (const auto& disc : obstacles) {
            if (disc.contains(at)) {
                const Vec2 away = (at - disc.center).norm() > 1e-9
                                      ? (at - disc.center) * (1.0 / (at - disc.center).norm())
                                      : Vec2{1.0, 0.0};
                const double c = std::cos(pose.heading), s = std::sin(pose.heading);
                return {0.5 * (c * away.x + s * away.y), 0.5 * (-s * away.x + c * away.y), 0.0};
            }
        }

        const bool stale = now - last_plan_time_ >= replan_period_;
        if (waypoints_.empty() || stale || path_invalidated(at, obstacles)) {
            PlanRequest request;
            request.start = at;
            request.goal = *goal_;
            request.obstacles = obstacles;
            // Turning pi around costs ~pi/omega_max seconds, i.e. about
            // v_max * pi / omega_max meters of lost travel; charging for it
            // keeps replans loyal to the route the rover already faces.
            request.start_heading = pose.heading;
            request.turn_weight = cfg_.v_max / cfg_.omega_max;
            const PlanResult result = plan(request);
            last_plan_time_ = now;
            ++replans_;
            if (!result.ok()) {
                status_ = NavStatus::blocked;
                waypoints_.clear();
                return {};
            }
            waypoints_ = result.path.waypoints;
        }

        while (!waypoints_.empty() &&
               (waypoints_.front() - at).norm() < cfg_.arrival_radius)
            waypoints_.erase(waypoints_.begin());
        if (waypoints_.empty())
            return motion_control(pose, *goal_, cfg_);
        return motion_control(pose, waypoints_.front(), cfg_);
    }

private:
    bool path_invalidated(const Vec2& at, const std::vector<Disc>& obstacles) const {
        if (waypoints_.empty())
            return false;
        Vec2 prev = at;
        for (const auto& wp : waypoints_) {
            for (const auto& disc : obstacles)
                if (segment_intersects_disc(prev, wp, disc))
                    return true;
            prev = wp;
        }
        return false;
    }

    ControllerConfig cfg_;
    double replan_period_;
    std::optional<Vec2> goal_;
    std::vector<Vec2> waypoints_;
    NavStatus status_ = NavStatus::idle;
    double last_plan_time_ = -1e18;
    int replans_ = 0;
};

}  // namespace regolith
