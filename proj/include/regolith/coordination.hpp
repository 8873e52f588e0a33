#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "regolith/geometry.hpp"
#include "regolith/messages.hpp"
#include "regolith/parking.hpp"
#include "regolith/world.hpp"

namespace regolith {

/// Shared mission policy constants consumed by the coordinator and the rover
/// agents it directs.
struct CoordinationConfig {
    double handoff_radius = 10.0;   // broadcast -> visual approach switch
    double stage_distance = 15.0;   // hauler holds this far from the deposit
    int bin_capacity = 20;          // units before the hauler must dump
    double bin_band_min = 1.2;      // acceptable projected bin distance
    double bin_band_max = 2.2;
    double visual_timeout = 25.0;   // seconds to sight the scout before aborting
    double dig_duration = 15.0;     // seconds per scoop
    double dump_duration = 10.0;    // seconds per scoop transfer
    ParkingConfig parking{};
};

enum class EpisodePhase {
    none,            // searching; no active deposit
    approach,        // excavator driving on the broadcast estimate
    visual,          // excavator inside handoff radius, fixing on the scout
    scout_leaving,   // fix taken; scout clearing the site
    park_excavator,  // excavator moving into its slot
    park_hauler,     // hauler moving into its slot
    dig,             // excavation loop running
};

inline const char* to_string(EpisodePhase p) {
    switch (p) {
        case EpisodePhase::none: return "none";
        case EpisodePhase::approach: return "approach";
        case EpisodePhase::visual: return "visual";
        case EpisodePhase::scout_leaving: return "scout_leaving";
        case EpisodePhase::park_excavator: return "park_excavator";
        case EpisodePhase::park_hauler: return "park_hauler";
        case EpisodePhase::dig: return "dig";
    }
    return "?";
}

struct Assignment {
    RoverTask task = RoverTask::idle;
    Vec2 target{};
    double heading = 0.0;       // meaningful for park assignments
    Vec2 aux{};                 // excavator: hauler slot, for bin-distance checks
    bool hauler_ready = false;  // excavator: hauler parked and not hauling
    bool accept_finds = false;  // scout: a new find may be reported right now
    std::array<Vec2, 3> team_positions{};  // last reported pose per role
};

struct ProtocolViolation {
    double t = 0.0;
    int sender = -1;
    MessageKind kind = MessageKind::task_complete;
    EpisodePhase phase = EpisodePhase::none;
};

/// Deterministic per-team reducer: folds the (timestamp, sender)-ordered
/// inbox into team state, then derives every rover's assignment from that
/// state. Undefined (phase, message) pairs are recorded as protocol
/// violations and dropped. Two instances share nothing.
class TeamCoordinator {
public:
    TeamCoordinator(int team, const CoordinationConfig& cfg = {}) : team_(team), cfg_(cfg) {}

    void set_stations(const Pose2& plant, const Pose2& repair) {
        plant_ = plant;
        repair_ = repair;
    }

    void post(const TeamMessage& m) { inbox_.push_back(m); }

    void report_pose(int role, const Pose2& pose) { poses_[role] = pose; }

    std::array<Assignment, 3> step(double now) {
        std::stable_sort(inbox_.begin(), inbox_.end(), message_before);
        for (const auto& m : inbox_)
            handle(m);
        inbox_.clear();
        last_step_time_ = now;
        return derive();
    }

    // Introspection (tests, logging, summaries).
    EpisodePhase phase() const { return phase_; }
    const std::vector<ProtocolViolation>& violations() const { return violations_; }
    int deposits_found() const { return deposits_found_; }
    int deposits_skipped() const { return deposits_skipped_; }
    int deposits_depleted() const { return deposits_depleted_; }
    int scored_units() const { return scored_units_; }
    bool hauler_parked() const { return hauler_parked_; }
    bool excavator_parked() const { return excavator_parked_; }
    const Vec2& deposit() const { return deposit_; }
    const ParkingTriangle& triangle() const { return triangle_; }
    const CoordinationConfig& config() const { return cfg_; }

private:
    int role_of_sender(int sender) const { return sender - 3 * team_; }

    bool from(const TeamMessage& m, RoverRole role) const {
        return role_of_sender(m.sender) == static_cast<int>(role);
    }

    void violation(const TeamMessage& m) {
        violations_.push_back({m.t, m.sender, m.kind, phase_});
    }

    void end_episode() {
        phase_ = EpisodePhase::none;
        excavator_parked_ = false;
        hauler_parked_ = false;
        load_requested_ = false;
        if (bin_estimate_ > 0 && !hauler_hauling_) {
            hauler_hauling_ = true;  // bank the partial bin before moving on
            hauler_parked_ = false;
        }
    }

    void handle(const TeamMessage& m) {
        switch (m.kind) {
            case MessageKind::volatile_found:
                if (!from(m, RoverRole::scout) || phase_ != EpisodePhase::none ||
                    !scout_pinpointing_)
                    return violation(m);
                scout_pinpointing_ = false;
                ++deposits_found_;
                if (!m.triangle.has_value()) {
                    ++deposits_skipped_;  // no safe parking layout; never retried
                    return;
                }
                deposit_ = m.estimate;
                triangle_ = *m.triangle;
                phase_ = EpisodePhase::approach;
                return;
            case MessageKind::scout_departed:
                if (!from(m, RoverRole::scout) || phase_ != EpisodePhase::scout_leaving)
                    return violation(m);
                phase_ = EpisodePhase::park_excavator;
                return;
            case MessageKind::excavator_parked:
                if (!from(m, RoverRole::excavator) ||
                    (phase_ != EpisodePhase::park_excavator && phase_ != EpisodePhase::dig))
                    return violation(m);
                excavator_parked_ = true;
                if (phase_ == EpisodePhase::park_excavator)
                    phase_ = EpisodePhase::park_hauler;
                return;
            case MessageKind::hauler_parked:
                if (!from(m, RoverRole::hauler) || hauler_parked_ || hauler_hauling_ ||
                    (phase_ != EpisodePhase::park_hauler && phase_ != EpisodePhase::dig))
                    return violation(m);
                hauler_parked_ = true;
                if (phase_ == EpisodePhase::park_hauler)
                    phase_ = EpisodePhase::dig;
                return;
            case MessageKind::adjust_park: {
                if (!from(m, RoverRole::excavator) || phase_ != EpisodePhase::dig ||
                    !hauler_parked_)
                    return violation(m);
                hauler_parked_ = false;
                Pose2& park = triangle_.hauler_park;
                const Vec2 shifted = park.position() + unit_vector(park.heading) * m.delta;
                park.x = shifted.x;
                park.y = shifted.y;
                triangle_.hauler_slot = slot_triangle(park);
                return;
            }
            case MessageKind::scoop_transferred:
                if (!from(m, RoverRole::excavator) || phase_ != EpisodePhase::dig)
                    return violation(m);
                if (m.success)
                    bin_estimate_ += m.units;
                return;
            case MessageKind::deposit_depleted:
                if (!from(m, RoverRole::excavator) || phase_ != EpisodePhase::dig)
                    return violation(m);
                ++deposits_depleted_;
                end_episode();
                return;
            case MessageKind::bin_full:
                if (!from(m, RoverRole::hauler) || hauler_hauling_ ||
                    phase_ != EpisodePhase::dig)
                    return violation(m);
                hauler_hauling_ = true;
                hauler_parked_ = false;
                return;
            case MessageKind::scored:
                if (!from(m, RoverRole::hauler) || !hauler_hauling_)
                    return violation(m);
                scored_units_ += m.units;
                bin_estimate_ = 0;
                return;
            case MessageKind::battery_low: {
                const int role = role_of_sender(m.sender);
                if (role < 0 || role > 2 || returning_[role])
                    return violation(m);
                returning_[role] = true;
                if (role == static_cast<int>(RoverRole::excavator))
                    excavator_parked_ = false;
                if (role == static_cast<int>(RoverRole::hauler) && !hauler_hauling_)
                    hauler_parked_ = false;
                if (role == static_cast<int>(RoverRole::scout) &&
                    (phase_ == EpisodePhase::approach || phase_ == EpisodePhase::visual ||
                     phase_ == EpisodePhase::scout_leaving)) {
                    ++deposits_skipped_;  // marker abandoned; deposit not retried
                    end_episode();
                }
                if (role == static_cast<int>(RoverRole::scout))
                    scout_pinpointing_ = false;
                return;
            }
            case MessageKind::task_complete:
                return handle_task_complete(m);
        }
        violation(m);
    }

    void handle_task_complete(const TeamMessage& m) {
        const int role = role_of_sender(m.sender);
        if (role < 0 || role > 2)
            return violation(m);
        switch (m.task) {
            case RoverTask::initialize:
                if (initialized_[role])
                    return violation(m);
                initialized_[role] = true;
                return;
            case RoverTask::spiral_search:  // scout found a reading worth chasing
                if (role != static_cast<int>(RoverRole::scout) || scout_pinpointing_ ||
                    phase_ != EpisodePhase::none)
                    return violation(m);
                scout_pinpointing_ = true;
                return;
            case RoverTask::pinpoint:  // only reported on failure (lost)
                if (role != static_cast<int>(RoverRole::scout) || !scout_pinpointing_)
                    return violation(m);
                scout_pinpointing_ = false;
                return;
            case RoverTask::approach_broadcast:
                if (role != static_cast<int>(RoverRole::excavator) ||
                    phase_ != EpisodePhase::approach)
                    return violation(m);
                phase_ = EpisodePhase::visual;
                return;
            case RoverTask::approach_visual:
                if (role != static_cast<int>(RoverRole::excavator) ||
                    phase_ != EpisodePhase::visual)
                    return violation(m);
                if (m.success) {
                    phase_ = EpisodePhase::scout_leaving;
                } else {
                    ++deposits_skipped_;  // scout never sighted: abort, never retry
                    end_episode();
                }
                return;
            case RoverTask::excavate:  // scoop filled, ready to dump
                if (role != static_cast<int>(RoverRole::excavator) ||
                    phase_ != EpisodePhase::dig)
                    return violation(m);
                load_requested_ = true;
                return;
            case RoverTask::load_hauler:
                if (role != static_cast<int>(RoverRole::excavator) || !load_requested_)
                    return violation(m);
                load_requested_ = false;
                return;
            case RoverTask::haul_to_plant:  // arrived at the plant
                if (role != static_cast<int>(RoverRole::hauler) || !hauler_hauling_ ||
                    hauler_dumping_)
                    return violation(m);
                hauler_dumping_ = true;
                return;
            case RoverTask::dump_at_plant:
                if (role != static_cast<int>(RoverRole::hauler) || !hauler_dumping_)
                    return violation(m);
                hauler_dumping_ = false;
                hauler_hauling_ = false;
                return;
            case RoverTask::return_to_station:  // reached the repair station
                if (!returning_[role] || charging_[role])
                    return violation(m);
                charging_[role] = true;
                return;
            case RoverTask::recharge:
                if (!returning_[role] || !charging_[role])
                    return violation(m);
                returning_[role] = false;
                charging_[role] = false;
                return;
            default:
                return violation(m);
        }
    }

    Assignment battery_override(int role) const {
        Assignment a;
        a.task = charging_[role] ? RoverTask::recharge : RoverTask::return_to_station;
        a.target = repair_.position();
        a.heading = repair_.heading;
        return a;
    }

    std::array<Assignment, 3> derive() const {
        std::array<Assignment, 3> out;
        for (auto& a : out)
            for (int r = 0; r < 3; ++r)
                a.team_positions[r] = poses_[r].position();

        // Scout.
        if (returning_[0]) {
            out[0] = battery_override(0);
        } else if (!initialized_[0]) {
            out[0].task = RoverTask::initialize;
        } else if (phase_ == EpisodePhase::approach || phase_ == EpisodePhase::visual) {
            out[0].task = RoverTask::wait_as_marker;
            out[0].target = deposit_;
        } else if (scout_pinpointing_) {
            out[0].task = RoverTask::pinpoint;
        } else {
            out[0].task = RoverTask::spiral_search;
            out[0].accept_finds = phase_ == EpisodePhase::none;
        }

        // Excavator.
        if (returning_[1]) {
            out[1] = battery_override(1);
        } else if (!initialized_[1]) {
            out[1].task = RoverTask::initialize;
        } else {
            switch (phase_) {
                case EpisodePhase::none:
                    out[1].task = RoverTask::follow_scout;
                    out[1].target = poses_[0].position();
                    break;
                case EpisodePhase::approach:
                    out[1].task = RoverTask::approach_broadcast;
                    out[1].target = deposit_;
                    break;
                case EpisodePhase::visual:
                case EpisodePhase::scout_leaving:
                    out[1].task = RoverTask::approach_visual;
                    out[1].target = deposit_;
                    break;
                case EpisodePhase::park_excavator:
                    out[1].task = RoverTask::park_in_triangle;
                    out[1].target = triangle_.excavator_park.position();
                    out[1].heading = triangle_.excavator_park.heading;
                    break;
                case EpisodePhase::park_hauler:
                case EpisodePhase::dig:
                    out[1].aux = triangle_.hauler_park.position();
                    out[1].hauler_ready = hauler_parked_ && !hauler_hauling_;
                    if (!excavator_parked_) {
                        out[1].task = RoverTask::park_in_triangle;
                        out[1].target = triangle_.excavator_park.position();
                        out[1].heading = triangle_.excavator_park.heading;
                    } else if (phase_ == EpisodePhase::dig && load_requested_ &&
                               hauler_parked_ && !hauler_hauling_) {
                        out[1].task = RoverTask::load_hauler;
                        out[1].target = triangle_.hauler_park.position();
                    } else {
                        out[1].task = RoverTask::excavate;
                        out[1].target = deposit_;
                    }
                    break;
            }
        }

        // Hauler.
        if (returning_[2]) {
            out[2] = battery_override(2);
        } else if (!initialized_[2]) {
            out[2].task = RoverTask::initialize;
        } else if (hauler_hauling_) {
            out[2].task = hauler_dumping_ ? RoverTask::dump_at_plant : RoverTask::haul_to_plant;
            out[2].target = plant_.position();
        } else {
            switch (phase_) {
                case EpisodePhase::none:
                    out[2].task = RoverTask::follow_scout;
                    out[2].target = poses_[0].position();
                    break;
                case EpisodePhase::approach:
                case EpisodePhase::visual:
                case EpisodePhase::scout_leaving:
                case EpisodePhase::park_excavator: {
                    out[2].task = RoverTask::approach_broadcast;
                    const Vec2 dir = triangle_.hauler_park.position() - deposit_;
                    out[2].target =
                        deposit_ + unit_vector(dir.angle()) * cfg_.stage_distance;
                    break;
                }
                case EpisodePhase::park_hauler:
                case EpisodePhase::dig:
                    out[2].task = RoverTask::park_in_triangle;
                    out[2].target = triangle_.hauler_park.position();
                    out[2].heading = triangle_.hauler_park.heading;
                    out[2].aux = triangle_.excavator_park.position();
                    break;
            }
        }
        return out;
    }

    int team_;
    CoordinationConfig cfg_;
    Pose2 plant_{-10.0, 0.0, 0.0};
    Pose2 repair_{10.0, 0.0, kPi};

    EpisodePhase phase_ = EpisodePhase::none;
    Vec2 deposit_{};
    ParkingTriangle triangle_{};
    bool scout_pinpointing_ = false;
    bool excavator_parked_ = false;
    bool hauler_parked_ = false;
    bool load_requested_ = false;
    bool hauler_hauling_ = false;
    bool hauler_dumping_ = false;
    int bin_estimate_ = 0;

    std::array<bool, 3> initialized_{false, false, false};
    std::array<bool, 3> returning_{false, false, false};
    std::array<bool, 3> charging_{false, false, false};
    std::array<Pose2, 3> poses_{};

    int deposits_found_ = 0;
    int deposits_skipped_ = 0;
    int deposits_depleted_ = 0;
    int scored_units_ = 0;

    std::vector<TeamMessage> inbox_;
    std::vector<ProtocolViolation> violations_;
    double last_step_time_ = 0.0;
};

}  // namespace regolith
