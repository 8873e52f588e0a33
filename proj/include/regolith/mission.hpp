#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "regolith/battery.hpp"
#include "regolith/config.hpp"
#include "regolith/coordination.hpp"
#include "regolith/ekf.hpp"
#include "regolith/events.hpp"
#include "regolith/messages.hpp"
#include "regolith/planner.hpp"
#include "regolith/pnp.hpp"
#include "regolith/search.hpp"
#include "regolith/semantic_map.hpp"
#include "regolith/station_init.hpp"
#include "regolith/swerve.hpp"
#include "regolith/world.hpp"

namespace regolith {

/// Classes excluded from path planning: rovers are transient (the world has
/// no rover-rover contact) and stations are rendezvous targets, not terrain.
inline const std::set<ObjectClass>& planning_exclusions() {
    static const std::set<ObjectClass> ex = {
        ObjectClass::scout,    ObjectClass::excavator,        ObjectClass::hauler,
        ObjectClass::processing_plant, ObjectClass::repair_station};
    return ex;
}

/// One rover's full onboard stack: EKF, obstacle map, navigator, battery,
/// and the task executors that turn coordinator assignments into wheel-level
/// twists plus world actions. Everything it knows comes through its own
/// sensors and its one spawn-time truth query.
class RoverAgent {
public:
    RoverAgent(int id, const MissionConfig& cfg)
        : id_(id),
          role_(static_cast<RoverRole>(id % 3)),
          team_(id / 3),
          cfg_(cfg),
          nav_(cfg.controller),
          pinpointer_(cfg.pinpoint),
          reloc_rng_(cfg.world.seed, "relocalize-" + std::to_string(id)) {}

    /// Spawn-time seeding from the station-init result. The scout's search
    /// pattern is laid out here because it steers around the station aprons,
    /// which are only known once both stations have been fixed.
    void seed(const StationInitResult& init) {
        ekf_.mean = init.final_pose;
        ekf_.covariance = Eigen::Matrix3d::Identity() * 1e-4;
        stations_[0] = init.stations[0];
        stations_[1] = init.stations[1];
        if (role_ == RoverRole::scout) {
            SpiralPlan plan = cfg_.spiral;
            plan.center = {0.0, 0.0};
            plan.team = team_;
            spiral_.clear();
            for (const Vec2& wp : spiral_waypoints(plan))
                if ((wp - stations_[0].position()).norm() >= 9.0 &&
                    (wp - stations_[1].position()).norm() >= 9.0)
                    spiral_.push_back(wp);
        }
    }

    const EkfState& ekf() const { return ekf_; }
    const BatteryState& battery() const { return battery_; }
    const LocalMap& map() const { return map_; }
    const Navigator& nav() const { return nav_; }
    int relocalizations() const { return reloc_count_; }
    bool take_reset_flag() {
        const bool f = reloc_flag_;
        reloc_flag_ = false;
        return f;
    }
    std::vector<TeamMessage> drain_outbox() {
        std::vector<TeamMessage> out;
        out.swap(outbox_);
        return out;
    }

    /// One control period. The frame was sensed this tick; the assignment
    /// comes from the coordinator's reduction of last tick's messages.
    Twist step(World& world, const SensorFrame& frame, const Assignment& assign, double now,
               double dt) {
        ekf::predict(ekf_, frame.odometry, frame.imu_yaw_rate, dt, cfg_.ekf);

        if (frame.detections_fresh) {
            for (const auto& det : frame.detections)
                map_.insert_detection(det, ekf_.mean);
        }
        const bool moving = std::hypot(frame.odometry.vx, frame.odometry.vy) >
                                map_.config().stationary_speed ||
                            std::abs(frame.odometry.omega) > map_.config().stationary_yaw;
        map_.tick(ekf_.mean, moving, dt);

        const bool charging = assign.task == RoverTask::recharge &&
                              (position() - assign.target).norm() < 8.0;
        const double moved = std::hypot(frame.odometry.vx, frame.odometry.vy) * dt;
        if (battery_tick(battery_, cfg_.battery, moved, dt, charging))
            send(TeamMessage::battery_low(now, id_));
        if (battery_depleted(battery_))
            return {};  // immobilized; the mission continues without this rover

        if (assign.task != current_task_) {
            current_task_ = assign.task;
            task_entry_ = now;
            nav_.preempt();
            nav_goal_.reset();
            blocked_start_ = -1.0;
            timer_start_ = -1.0;
            arrived_sent_ = false;
            find_reported_ = false;
            pinpoint_active_ = false;
            load_request_sent_ = false;
            depleted_sent_ = false;
            recharge_reported_ = false;
            parked_stage_ = 0;
            bin_validated_ = false;
            adjust_sent_ = false;
            validation_samples_.clear();
            prev_hauler_ready_ = false;
            if (assign.task == RoverTask::follow_scout)
                frame_offset_ = {0.0, 0.0};  // episode over; frame tie-in expires
        }
        team_positions_ = assign.team_positions;

        return contact_guard(frame, execute_task(world, frame, assign, now, dt), now, dt);
    }

private:
    Twist execute_task(World& world, const SensorFrame& frame, const Assignment& assign,
                       double now, double dt) {
        switch (assign.task) {
            case RoverTask::idle:
            case RoverTask::initialize:
                if (!init_reported_) {
                    init_reported_ = true;
                    send(TeamMessage::task_complete(now, id_, RoverTask::initialize));
                }
                return {};
            case RoverTask::spiral_search:
                return do_spiral(frame, assign, now);
            case RoverTask::pinpoint:
                return do_pinpoint(frame, now);
            case RoverTask::wait_as_marker:
                return creep_to(assign.target, 0.2);
            case RoverTask::follow_scout:
                return do_follow(assign, now);
            case RoverTask::approach_broadcast:
                return do_approach_broadcast(assign, now);
            case RoverTask::approach_visual:
                return do_approach_visual(world, frame, assign, now);
            case RoverTask::park_in_triangle:
                return do_park(assign, now);
            case RoverTask::excavate:
                return do_excavate(world, frame, assign, now, dt);
            case RoverTask::load_hauler:
                return do_load(world, assign, now);
            case RoverTask::haul_to_plant:
                relocalize_if_close(world, now);
                return drive_and_report(assign.target, cfg_.world.plant_deposit_radius * 0.75,
                                        RoverTask::haul_to_plant, now);
            case RoverTask::dump_at_plant:
                relocalize_if_close(world, now);
                return do_dump(world, now);
            case RoverTask::return_to_station:
                relocalize_if_close(world, now);
                return drive_and_report(assign.target, 6.0, RoverTask::return_to_station, now);
            case RoverTask::recharge:
                relocalize_if_close(world, now);
                if (!battery_.low_latched && !recharge_reported_) {
                    recharge_reported_ = true;
                    send(TeamMessage::task_complete(now, id_, RoverTask::recharge));
                }
                return {};
        }
        return {};
    }

    /// The chassis has no bumper, but a commanded cruise that produces no
    /// odometry is one: something unmapped is holding the rover. Record a
    /// synthetic obstacle at the contact heading, then back away so the next
    /// plan can route around it.
    Twist contact_guard(const SensorFrame& frame, Twist tw, double now, double dt) {
        if (now < backoff_until_) {
            const double c = std::cos(ekf_.mean.heading), s = std::sin(ekf_.mean.heading);
            return {0.45 * (c * backoff_dir_.x + s * backoff_dir_.y),
                    0.45 * (-s * backoff_dir_.x + c * backoff_dir_.y), 0.0};
        }
        const double commanded = std::hypot(tw.vx, tw.vy);
        const double measured = std::hypot(frame.odometry.vx, frame.odometry.vy);
        if (commanded < 0.15 || measured > 0.05) {
            stuck_time_ = 0.0;
            return tw;
        }
        stuck_time_ += dt;
        if (stuck_time_ < 3.0)
            return tw;
        const double c = std::cos(ekf_.mean.heading), s = std::sin(ekf_.mean.heading);
        const Vec2 world_v{c * tw.vx - s * tw.vy, s * tw.vx + c * tw.vy};
        const Vec2 dir = world_v * (1.0 / std::max(1e-9, world_v.norm()));
        bumps_.push_back({Disc{position() + dir * 1.9, 2.4}, now + 90.0});
        backoff_dir_ = dir * -1.0;
        backoff_until_ = now + 3.0;
        stuck_time_ = 0.0;
        nav_.preempt();
        nav_goal_.reset();
        return {};
    }

public:
    /// Hauler bin bookkeeping, fed by the runner from the rover's own bin
    /// weight sensor reading.
    void observe_bin(int bin_units, double now) {
        if (role_ != RoverRole::hauler)
            return;
        if (bin_units >= cfg_.coordination.bin_capacity && !bin_full_latched_) {
            bin_full_latched_ = true;
            send(TeamMessage::simple(MessageKind::bin_full, now, id_));
        }
        if (bin_units == 0)
            bin_full_latched_ = false;
    }

private:
    Vec2 position() const { return ekf_.mean.position(); }

    void send(const TeamMessage& m) { outbox_.push_back(m); }

    // --- navigation helpers -------------------------------------------------

    /// Map discs the planner should respect, minus two phantom families the
    /// detector's confusion rate keeps refreshing. Terrain records near a
    /// station estimate can only be misclassified station sightings (stations
    /// sit in cleared aprons), and left in place they permanently blockade
    /// the dump and recharge approaches. Terrain records riding on a
    /// teammate's reported position are misclassified teammates; followers
    /// trail close enough that these would otherwise wall in the rover they
    /// shadow. Contact bumps recorded by the stall guard are appended last —
    /// they are the one obstacle source that is never second-guessed.
    std::vector<Disc> planning_obstacles(double now) {
        std::vector<Disc> discs = map_.obstacles_for_planning(planning_exclusions());
        std::erase_if(discs, [&](const Disc& d) {
            if ((d.center - stations_[0].position()).norm() < 10.0 ||
                (d.center - stations_[1].position()).norm() < 10.0)
                return true;
            for (int r = 0; r < 3; ++r)
                if (r != static_cast<int>(role_) &&
                    (d.center - team_positions_[r]).norm() < 3.0)
                    return true;
            return false;
        });
        std::erase_if(bumps_, [&](const auto& b) { return b.second < now; });
        for (const auto& b : bumps_)
            discs.push_back(b.first);
        return discs;
    }

    Twist navigate(const Vec2& goal, double now, double retarget = 1.5) {
        if (!nav_goal_ || (goal - *nav_goal_).norm() > retarget ||
            (nav_.status() == NavStatus::blocked && now - last_goal_set_ > 2.0) ||
            nav_.status() == NavStatus::preempted ||
            (nav_.status() == NavStatus::arrived &&
             (goal - position()).norm() > cfg_.controller.arrival_radius * 2.0)) {
            nav_.set_goal(goal);
            nav_goal_ = goal;
            last_goal_set_ = now;
        }
        const Twist tw = nav_.update(ekf_.mean, planning_obstacles(now), now);
        if (nav_.status() != NavStatus::blocked) {
            blocked_start_ = -1.0;
            return tw;
        }
        if (blocked_start_ < 0.0)
            blocked_start_ = now;
        const double stuck = now - blocked_start_;
        if (stuck < 6.0)
            return tw;  // replans and waypoint skips get the first chance
        // Persistent blockage means spurious records have the planner
        // cornered. Creep toward the goal anyway — motion resumes the map's
        // decay — and scan the heading if the straight line stays pinned.
        const int slot = static_cast<int>((stuck - 6.0) / 5.0);
        const double ang =
            (goal - position()).angle() + 0.9 * static_cast<double>(slot % 7);
        const Vec2 dir = unit_vector(ang);
        const double c = std::cos(ekf_.mean.heading), s = std::sin(ekf_.mean.heading);
        return {0.45 * (c * dir.x + s * dir.y), 0.45 * (-s * dir.x + c * dir.y), 0.0};
    }

    /// Gentle omnidirectional move for short, precise repositioning.
    Twist creep_to(const Vec2& target, double stop_radius, double speed = 0.3) const {
        const Vec2 err = target - position();
        const double d = err.norm();
        if (d < stop_radius)
            return {};
        const double v = std::min(speed, 0.8 * d);
        const double c = std::cos(ekf_.mean.heading), s = std::sin(ekf_.mean.heading);
        return {v * (c * err.x + s * err.y) / d, v * (-s * err.x + c * err.y) / d, 0.0};
    }

    Twist drive_and_report(const Vec2& goal, double arrive_radius, RoverTask task, double now) {
        if ((goal - position()).norm() < arrive_radius) {
            if (!arrived_sent_) {
                arrived_sent_ = true;
                send(TeamMessage::task_complete(now, id_, task));
            }
            return {};
        }
        return navigate(goal, now);
    }

    // --- scout --------------------------------------------------------------

    Twist do_spiral(const SensorFrame& frame, const Assignment& assign, double now) {
        if (pending_departure_ &&
            (position() - *pending_departure_).norm() >= 3.0) {
            send(TeamMessage::simple(MessageKind::scout_departed, now, id_));
            pending_departure_.reset();
        }

        if (frame.volatile_range.has_value()) {
            const Vec2 head =
                position() + unit_vector(ekf_.mean.heading) * cfg_.pinpoint.sensor_offset;
            if (!is_claimed(head)) {
                if (assign.accept_finds && !pending_departure_) {
                    if (!find_reported_) {
                        find_reported_ = true;
                        send(TeamMessage::task_complete(now, id_, RoverTask::spiral_search));
                        request_time_ = now;
                    } else if (now - request_time_ > 10.0) {
                        find_reported_ = false;  // request evaporated; retry
                    }
                    return {};
                }
                if (!pending_departure_)
                    return {};  // hold on the find until reporting reopens
            }
        }

        if (spiral_.empty())
            return {};
        if ((spiral_[spiral_index_ % spiral_.size()] - position()).norm() <
            cfg_.controller.arrival_radius * 1.5)
            ++spiral_index_;
        if (nav_.status() == NavStatus::blocked && blocked_start_ >= 0.0 &&
            now - blocked_start_ > 4.0)
            ++spiral_index_;  // no route there right now; move on
        // A waypoint inside a mapped disc can never be planned to; skip ahead
        // rather than burning a replan cycle learning that.
        const std::vector<Disc> discs = planning_obstacles(now);
        Vec2 wp = spiral_[spiral_index_ % spiral_.size()];
        for (std::size_t hops = 0; hops < spiral_.size(); ++hops) {
            const bool covered = std::any_of(discs.begin(), discs.end(),
                                             [&](const Disc& d) { return d.contains(wp); });
            if (!covered)
                break;
            ++spiral_index_;
            wp = spiral_[spiral_index_ % spiral_.size()];
        }
        return navigate(wp, now);
    }

    Twist do_pinpoint(const SensorFrame& frame, double now) {
        if (!pinpoint_active_) {
            pinpoint_active_ = true;
            pinpointer_ = Pinpointer(cfg_.pinpoint);
        }
        const Twist tw = pinpointer_.update(frame.volatile_range, ekf_.mean, now);
        if (find_reported_)
            return tw;

        if (pinpointer_.phase() == PinpointPhase::done) {
            find_reported_ = true;
            const Vec2 est = pinpointer_.estimate();
            claimed_.push_back(est);
            const auto triangle = plan_parking_triangle(
                est, planning_obstacles(now),
                cfg_.coordination.parking);
            if (triangle.has_value()) {
                send(TeamMessage::volatile_found(now, id_, est, *triangle));
                pending_departure_ = est;
            } else {
                TeamMessage m = TeamMessage::simple(MessageKind::volatile_found, now, id_);
                m.estimate = est;
                send(m);  // found, but no safe parking: reported as a skip
            }
        } else if (pinpointer_.phase() == PinpointPhase::lost) {
            find_reported_ = true;
            claimed_.push_back(position() +
                               unit_vector(ekf_.mean.heading) * cfg_.pinpoint.sensor_offset);
            send(TeamMessage::task_complete(now, id_, RoverTask::pinpoint, false));
        }
        return tw;
    }

    bool is_claimed(const Vec2& p) const {
        for (const auto& c : claimed_)
            if ((c - p).norm() < 4.0)
                return true;
        return false;
    }

    // --- excavator / hauler -------------------------------------------------

    Twist do_follow(const Assignment& assign, double now) {
        if ((position() - assign.target).norm() <= cfg_.follow_standoff) {
            nav_.preempt();
            nav_goal_.reset();
            return {};
        }
        return navigate(assign.target, now, 3.0);
    }

    Twist do_approach_broadcast(const Assignment& assign, double now) {
        if (role_ == RoverRole::excavator) {
            const double d = (position() - assign.target).norm();
            if (d < cfg_.coordination.handoff_radius * 0.9 && !arrived_sent_) {
                arrived_sent_ = true;
                send(TeamMessage::task_complete(now, id_, RoverTask::approach_broadcast));
            }
            if (d < cfg_.coordination.handoff_radius * 0.8)
                return {};
        } else if ((position() - assign.target).norm() <
                   cfg_.controller.arrival_radius * 2.0) {
            return {};  // hauler holds at the staging point
        }
        return navigate(assign.target, now);
    }

    Twist do_approach_visual(World& world, const SensorFrame& frame, const Assignment& assign,
                             double now) {
        const Vec2 to_deposit = assign.target - position();
        world.set_camera_pan(id_, normalize_angle(to_deposit.angle() - ekf_.mean.heading));

        if (!find_reported_ && frame.detections_fresh) {
            for (const auto& det : frame.detections) {
                if (det.cls != ObjectClass::scout || det.range > 15.0)
                    continue;
                const Vec2 fix =
                    position() + unit_vector(ekf_.mean.heading + det.bearing) * det.range;
                frame_offset_ = fix - assign.target;  // scout body marks the deposit
                find_reported_ = true;
                send(TeamMessage::task_complete(now, id_, RoverTask::approach_visual, true));
                break;
            }
        }
        if (!find_reported_ && now - task_entry_ > cfg_.coordination.visual_timeout) {
            find_reported_ = true;
            send(TeamMessage::task_complete(now, id_, RoverTask::approach_visual, false));
        }

        if (to_deposit.norm() > cfg_.coordination.handoff_radius * 0.8)
            return navigate(assign.target, now);
        return {};
    }

    Twist do_park(const Assignment& assign, double now) {
        const Vec2 target =
            assign.target + (role_ == RoverRole::excavator ? frame_offset_ : Vec2{0.0, 0.0});
        const Vec2 err = target - position();

        // The slot area was validated free when the find was accepted; whatever the map
        // has accumulated there since (e.g. the departed scout) must not block parking.
        park_clear_center_ = target;
        park_clear_stamp_ = now;

        if (parked_stage_ == 0) {
            if (err.norm() > cfg_.controller.arrival_radius * 3.0)
                return navigate(target, now);
            parked_stage_ = 1;
            nav_.preempt();
        }

        const double heading_err = normalize_angle(assign.heading - ekf_.mean.heading);
        if (err.norm() > 0.15) {
            const double v = std::min(0.4, 1.2 * err.norm());
            const double c = std::cos(ekf_.mean.heading), s = std::sin(ekf_.mean.heading);
            return {v * (c * err.x + s * err.y) / err.norm(),
                    v * (-s * err.x + c * err.y) / err.norm(),
                    std::clamp(1.5 * heading_err, -0.6, 0.6)};
        }
        if (std::abs(heading_err) > 0.05)
            return {0.0, 0.0, std::clamp(1.5 * heading_err, -0.6, 0.6)};

        if (!arrived_sent_) {
            arrived_sent_ = true;
            if (role_ == RoverRole::excavator) {
                send(TeamMessage::simple(MessageKind::excavator_parked, now, id_));
            } else {
                send(TeamMessage::hauler_parked(now, id_,
                                                (assign.aux - position()).norm()));
            }
        }
        return {};
    }

    Twist do_excavate(World& world, const SensorFrame& frame, const Assignment& assign,
                      double now, double dt) {
        if (assign.hauler_ready && !prev_hauler_ready_) {
            bin_validated_ = false;
            adjust_sent_ = false;
            validation_samples_.clear();
            validation_start_ = now;
        }
        prev_hauler_ready_ = assign.hauler_ready;

        if (assign.hauler_ready && !bin_validated_ && !adjust_sent_) {
            const Vec2 to_hauler = assign.aux - position();
            world.set_camera_pan(id_, normalize_angle(to_hauler.angle() - ekf_.mean.heading));
            if (now - validation_start_ > 1.5 * dt) {
                double nearest = cfg_.world.lidar_max_range;
                for (const auto& beam : frame.lidar)
                    if (beam.range < cfg_.world.lidar_max_range * 0.99)
                        nearest = std::min(nearest, beam.range);
                if (nearest < cfg_.world.lidar_max_range * 0.99)
                    validation_samples_.push_back(nearest);
                if (validation_samples_.size() >= 5) {
                    double sum = 0.0;
                    for (double v : validation_samples_)
                        sum += v;
                    const double measured = sum / validation_samples_.size();
                    if (measured >= cfg_.coordination.bin_band_min &&
                        measured <= cfg_.coordination.bin_band_max) {
                        bin_validated_ = true;
                    } else {
                        const double center = 0.5 * (cfg_.coordination.bin_band_min +
                                                     cfg_.coordination.bin_band_max);
                        adjust_sent_ = true;
                        send(TeamMessage::adjust_park(now, id_, measured - center));
                    }
                    validation_samples_.clear();
                }
            }
        }

        if (!scoop_full_ && !depleted_sent_) {
            if (timer_start_ < 0.0)
                timer_start_ = now;
            if (now - timer_start_ >= cfg_.coordination.dig_duration) {
                timer_start_ = -1.0;
                if (world.dig_scoop_nearest(id_)) {
                    scoop_full_ = true;
                } else {
                    depleted_sent_ = true;
                    send(TeamMessage::simple(MessageKind::deposit_depleted, now, id_));
                }
            }
        }

        if (scoop_full_ && bin_validated_ && assign.hauler_ready && !load_request_sent_) {
            load_request_sent_ = true;
            send(TeamMessage::task_complete(now, id_, RoverTask::excavate));
        }
        return {};
    }

    Twist do_load(World& world, const Assignment& assign, double now) {
        const Vec2 to_hauler = assign.target - position();
        world.set_camera_pan(id_, normalize_angle(to_hauler.angle() - ekf_.mean.heading));
        if (timer_start_ < 0.0)
            timer_start_ = now;
        if (now - timer_start_ >= cfg_.coordination.dump_duration && !arrived_sent_) {
            arrived_sent_ = true;
            const bool ok = world.transfer_scoop(id_, team_ * 3 + 2);
            scoop_full_ = false;
            send(TeamMessage::scoop_transferred(now, id_, 1, ok));
            send(TeamMessage::task_complete(now, id_, RoverTask::load_hauler));
        }
        return {};
    }

    Twist do_dump(World& world, double now) {
        if (!arrived_sent_) {
            arrived_sent_ = true;
            const int units = world.deposit_bin(id_);
            send(TeamMessage::scored(now, id_, units));
            send(TeamMessage::task_complete(now, id_, RoverTask::dump_at_plant));
            bin_full_latched_ = false;
        }
        return {};
    }

    // --- relocalization -----------------------------------------------------

    void relocalize_if_close(World& world, double now) {
        if (now - last_reloc_attempt_ < cfg_.relocalize_period)
            return;
        int station = -1;
        double best = cfg_.relocalize_radius;
        for (int s = 0; s < 2; ++s) {
            const double d = (stations_[s].position() - position()).norm();
            if (d < best) {
                best = d;
                station = s;
            }
        }
        if (station < 0)
            return;
        last_reloc_attempt_ = now;

        const Vec2 to_station = stations_[station].position() - position();
        world.set_camera_pan(id_, normalize_angle(to_station.angle() - ekf_.mean.heading));
        const auto correspondences =
            world.observe_landmarks(id_, station, cfg_.station_init.camera);
        if (static_cast<int>(correspondences.size()) < cfg_.station_init.ransac.min_consensus)
            return;
        const PnpResult solved = solve_pnp_ransac(correspondences, cfg_.station_init.camera,
                                                  cfg_.station_init.ransac, reloc_rng_);
        if (!solved.ok())
            return;
        const Relocalization rel =
            relocalize(stations_[station], solved.pose, cfg_.station_init.camera);
        ekf::reset_from_pose(ekf_, rel.pose, rel.covariance);
        ++reloc_count_;
        reloc_flag_ = true;
    }

    int id_;
    RoverRole role_;
    int team_;
    const MissionConfig& cfg_;

    EkfState ekf_;
    LocalMap map_;
    Navigator nav_;
    BatteryState battery_;
    Pinpointer pinpointer_;
    SeededStream reloc_rng_;
    std::array<Pose2, 2> stations_{};
    std::vector<TeamMessage> outbox_;

    RoverTask current_task_ = RoverTask::idle;
    double task_entry_ = 0.0;
    std::optional<Vec2> nav_goal_;
    double last_goal_set_ = -1e18;
    double blocked_start_ = -1.0;  // wall-clock start of the current blockage
    std::array<Vec2, 3> team_positions_{};
    std::vector<std::pair<Disc, double>> bumps_;  // (disc, expiry)
    double stuck_time_ = 0.0;
    Vec2 backoff_dir_{};
    double backoff_until_ = -1.0;
    double timer_start_ = -1.0;
    bool arrived_sent_ = false;
    bool init_reported_ = false;
    bool find_reported_ = false;
    double request_time_ = -1e18;
    bool recharge_reported_ = false;

    // Scout state.
    std::vector<Vec2> spiral_;
    std::size_t spiral_index_ = 0;
    bool pinpoint_active_ = false;
    std::vector<Vec2> claimed_;
    std::optional<Vec2> pending_departure_;

    // Excavator state.
    bool scoop_full_ = false;
    Vec2 frame_offset_{};  // visual-fix correction tying targets to own frame
    int parked_stage_ = 0;
    bool bin_validated_ = false;
    bool adjust_sent_ = false;
    bool prev_hauler_ready_ = false;
    double validation_start_ = 0.0;
    std::vector<double> validation_samples_;
    bool load_request_sent_ = false;
    bool depleted_sent_ = false;

    // Hauler state.
    bool bin_full_latched_ = false;

    // Relocalization.
    double last_reloc_attempt_ = -1e18;
    int reloc_count_ = 0;
    bool reloc_flag_ = false;
};

struct MissionResult {
    RunSummary summary;
    EventLog log;
    std::vector<TraceRow> score_trace;
    std::array<std::vector<LocalizationRow>, kRoverCount> localization;
    std::array<bool, kRoverCount> enabled{};
};

/// Deterministic mission executor: spawn-time station initialization, then a
/// fixed-step loop of sense -> estimate -> coordinate -> act -> simulate.
class MissionRunner {
public:
    explicit MissionRunner(const MissionConfig& cfg) : cfg_(cfg), world_(cfg.world) {}

    World& world() { return world_; }

    MissionResult run() {
        MissionResult result;
        RunSummary& summary = result.summary;
        summary.seed = cfg_.world.seed;
        summary.volatile_units_initial = world_.ledger().initial;

        std::vector<int> enabled;
        for (int id = 0; id < kRoverCount; ++id) {
            const bool on = (id < 3) ? cfg_.team_a : cfg_.team_b;
            result.enabled[id] = on;
            if (on)
                enabled.push_back(id);
        }

        std::vector<RoverAgent> agents;
        agents.reserve(kRoverCount);
        for (int id = 0; id < kRoverCount; ++id)
            agents.emplace_back(id, cfg_);

        // Spawn-time initialization: each enabled rover spins in place and
        // fixes both stations while the others hold still.
        for (int id : enabled) {
            const StationInitResult init = initialize_stations(world_, id, cfg_.station_init);
            for (const auto& e : world_.drain_events())
                result.log.world_event(e);
            if (!init.ok) {
                summary.ok = false;
                summary.failure = std::string("station initialization failed for ") +
                                  rover_name(id);
                summary.duration = world_.now();
                return result;
            }
            agents[id].seed(init);
            Json extra;
            extra["duration"] = log_round(init.duration);
            extra["rms_plant"] = log_round(init.reprojection_rms[0]);
            extra["rms_repair"] = log_round(init.reprojection_rms[1]);
            result.log.milestone(world_.now(), "init", id, extra);
        }

        std::array<TeamCoordinator, 2> coordinators{
            TeamCoordinator(0, cfg_.coordination), TeamCoordinator(1, cfg_.coordination)};

        const double dt = cfg_.world.sim_dt;
        double next_trace = world_.now();
        std::array<std::array<int, 4>, 2> ledger_cache{};  // found/skip/depleted/scored
        std::array<int, kRoverCount> reloc_cache{};
        std::array<bool, kRoverCount> depleted_logged{};
        int ticks = 0;

        while (world_.now() < cfg_.world.duration - 1e-9) {
            const double now = world_.now();

            // Trace sampling happens on the state *before* this tick's motion.
            if (now + 1e-9 >= next_trace) {
                sample_traces(result, agents, enabled, now);
                next_trace += cfg_.trace_period;
            }

            std::array<std::array<Assignment, 3>, 2> assignments{};
            if (cfg_.team_a)
                assignments[0] = coordinators[0].step(now);
            if (cfg_.team_b)
                assignments[1] = coordinators[1].step(now);

            std::array<std::array<swerve::WheelCommand, 4>, kRoverCount> commands{};
            for (int id : enabled) {
                const int team = id / 3;
                const int role = id % 3;
                const SensorFrame frame = world_.sense(id);
                agents[id].observe_bin(world_.rover(id).bin_units, now);
                const Twist twist =
                    agents[id].step(world_, frame, assignments[team][role], now, dt);
                commands[id] = swerve::to_wheel_commands(
                    swerve::inverse_kinematics(twist, cfg_.world.wheel_layout));
                for (const auto& m : agents[id].drain_outbox()) {
                    result.log.message(team, m);
                    coordinators[team].post(m);
                }
                coordinators[team].report_pose(role, agents[id].ekf().mean);
            }

            world_.step(commands, dt);

            for (const auto& e : world_.drain_events()) {
                result.log.world_event(e);
                if (e.type == "transfer") {
                    ++summary.transfer_attempts;
                    if (e.success)
                        ++summary.transfer_successes;
                } else if (e.type == "collision") {
                    ++summary.collisions;
                }
            }

            for (int team = 0; team < 2; ++team) {
                if (!(team == 0 ? cfg_.team_a : cfg_.team_b))
                    continue;
                const TeamCoordinator& c = coordinators[team];
                const std::array<int, 4> counters{c.deposits_found(), c.deposits_skipped(),
                                                  c.deposits_depleted(), c.scored_units()};
                if (counters != ledger_cache[team]) {
                    ledger_cache[team] = counters;
                    result.log.ledger(world_.now(), team, counters[0], counters[1],
                                      counters[2], counters[3]);
                }
            }

            for (int id : enabled) {
                const double err =
                    ekf::position_error(agents[id].ekf(), world_.rover(id).pose);
                summary.rovers[id].max_localization_error =
                    std::max(summary.rovers[id].max_localization_error, err);
                if (agents[id].relocalizations() > reloc_cache[id]) {
                    reloc_cache[id] = agents[id].relocalizations();
                    summary.rovers[id].max_post_reset_error =
                        std::max(summary.rovers[id].max_post_reset_error, err);
                    Json extra;
                    extra["error_after"] = log_round(err);
                    result.log.milestone(world_.now(), "relocalization", id, extra);
                }
                if (battery_depleted(agents[id].battery()) && !depleted_logged[id]) {
                    depleted_logged[id] = true;
                    result.log.milestone(world_.now(), "battery_depleted", id);
                }
            }

            if (++ticks % 100 == 0 && !world_.ledger().balanced()) {
                summary.ok = false;
                summary.failure = "volatile ledger imbalance";
                break;
            }
        }

        // Final trace row and summary assembly.
        sample_traces(result, agents, enabled, world_.now());
        summary.duration = world_.now();
        summary.total_scored = world_.score();
        summary.ledger_balanced = world_.ledger().balanced();
        for (int team = 0; team < 2; ++team) {
            const TeamCoordinator& c = coordinators[team];
            summary.teams[team].scored = c.scored_units();
            summary.teams[team].deposits_found = c.deposits_found();
            summary.teams[team].deposits_skipped = c.deposits_skipped();
            summary.teams[team].deposits_depleted = c.deposits_depleted();
            summary.teams[team].protocol_violations =
                static_cast<int>(c.violations().size());
        }
        for (int id : enabled) {
            summary.rovers[id].distance = world_.rover(id).odometer;
            summary.rovers[id].relocalizations = agents[id].relocalizations();
            summary.rovers[id].battery_final = agents[id].battery().charge;
            summary.rovers[id].depleted = battery_depleted(agents[id].battery());
        }
        if (summary.failure.empty())
            summary.ok = true;
        return result;
    }

private:
    void sample_traces(MissionResult& result, std::vector<RoverAgent>& agents,
                       const std::vector<int>& enabled, double now) {
        int bins = 0;
        for (int id : enabled)
            bins += world_.rover(id).bin_units;
        result.score_trace.push_back({now, world_.score(), bins});
        for (int id : enabled) {
            const double err = ekf::position_error(agents[id].ekf(), world_.rover(id).pose);
            result.localization[id].push_back({now, err, agents[id].take_reset_flag()});
        }
    }

    MissionConfig cfg_;
    World world_;
};

/// Write the full output set for one run into a directory.
inline bool write_mission_outputs(const std::string& out_dir, const MissionResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        return false;
    bool ok = true;
    ok &= write_summary(out_dir + "/summary.json", result.summary);
    ok &= result.log.write(out_dir + "/events.jsonl");
    ok &= write_score_trace(out_dir + "/score_trace.csv", result.score_trace);
    for (int id = 0; id < kRoverCount; ++id) {
        if (!result.enabled[id])
            continue;
        ok &= write_localization_trace(
            out_dir + "/localization_error_" + rover_name(id) + ".csv",
            result.localization[id]);
    }
    return ok;
}

}  // namespace regolith
