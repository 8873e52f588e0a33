#pragma once

#include <optional>

#include "regolith/geometry.hpp"
#include "regolith/parking.hpp"

namespace regolith {

enum class RoverTask {
    idle,
    initialize,
    spiral_search,
    pinpoint,
    wait_as_marker,
    follow_scout,
    approach_broadcast,
    approach_visual,
    park_in_triangle,
    excavate,
    load_hauler,
    haul_to_plant,
    dump_at_plant,
    return_to_station,
    recharge,
};

inline const char* to_string(RoverTask t) {
    switch (t) {
        case RoverTask::idle: return "idle";
        case RoverTask::initialize: return "initialize";
        case RoverTask::spiral_search: return "spiral_search";
        case RoverTask::pinpoint: return "pinpoint";
        case RoverTask::wait_as_marker: return "wait_as_marker";
        case RoverTask::follow_scout: return "follow_scout";
        case RoverTask::approach_broadcast: return "approach_broadcast";
        case RoverTask::approach_visual: return "approach_visual";
        case RoverTask::park_in_triangle: return "park_in_triangle";
        case RoverTask::excavate: return "excavate";
        case RoverTask::load_hauler: return "load_hauler";
        case RoverTask::haul_to_plant: return "haul_to_plant";
        case RoverTask::dump_at_plant: return "dump_at_plant";
        case RoverTask::return_to_station: return "return_to_station";
        case RoverTask::recharge: return "recharge";
    }
    return "?";
}

enum class MessageKind {
    volatile_found,
    scout_departed,
    excavator_parked,
    hauler_parked,
    adjust_park,
    scoop_transferred,
    deposit_depleted,
    bin_full,
    scored,
    battery_low,
    task_complete,
};

inline const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::volatile_found: return "volatile_found";
        case MessageKind::scout_departed: return "scout_departed";
        case MessageKind::excavator_parked: return "excavator_parked";
        case MessageKind::hauler_parked: return "hauler_parked";
        case MessageKind::adjust_park: return "adjust_park";
        case MessageKind::scoop_transferred: return "scoop_transferred";
        case MessageKind::deposit_depleted: return "deposit_depleted";
        case MessageKind::bin_full: return "bin_full";
        case MessageKind::scored: return "scored";
        case MessageKind::battery_low: return "battery_low";
        case MessageKind::task_complete: return "task_complete";
    }
    return "?";
}

/// Team bus message. One flat record rather than a class per kind: only the
/// fields a kind documents are meaningful, everything else stays defaulted.
struct TeamMessage {
    double t = 0.0;
    int sender = -1;
    MessageKind kind = MessageKind::task_complete;

    Vec2 estimate{};                          // volatile_found
    std::optional<ParkingTriangle> triangle;  // volatile_found
    double distance = 0.0;                    // hauler_parked
    double delta = 0.0;                       // adjust_park
    int units = 0;                            // scoop_transferred, scored
    bool success = true;                      // scoop_transferred, task_complete
    int rover = -1;                           // battery_low, task_complete
    RoverTask task = RoverTask::idle;         // task_complete

    static TeamMessage volatile_found(double t, int sender, const Vec2& estimate,
                                      const ParkingTriangle& triangle) {
        TeamMessage m = simple(MessageKind::volatile_found, t, sender);
        m.estimate = estimate;
        m.triangle = triangle;
        return m;
    }
    static TeamMessage simple(MessageKind kind, double t, int sender) {
        TeamMessage m;
        m.t = t;
        m.sender = sender;
        m.kind = kind;
        return m;
    }
    static TeamMessage hauler_parked(double t, int sender, double distance) {
        TeamMessage m = simple(MessageKind::hauler_parked, t, sender);
        m.distance = distance;
        return m;
    }
    static TeamMessage adjust_park(double t, int sender, double delta) {
        TeamMessage m = simple(MessageKind::adjust_park, t, sender);
        m.delta = delta;
        return m;
    }
    static TeamMessage scoop_transferred(double t, int sender, int units, bool success) {
        TeamMessage m = simple(MessageKind::scoop_transferred, t, sender);
        m.units = units;
        m.success = success;
        return m;
    }
    static TeamMessage scored(double t, int sender, int units) {
        TeamMessage m = simple(MessageKind::scored, t, sender);
        m.units = units;
        return m;
    }
    static TeamMessage battery_low(double t, int sender) {
        TeamMessage m = simple(MessageKind::battery_low, t, sender);
        m.rover = sender;
        return m;
    }
    static TeamMessage task_complete(double t, int sender, RoverTask task, bool success = true) {
        TeamMessage m = simple(MessageKind::task_complete, t, sender);
        m.rover = sender;
        m.task = task;
        m.success = success;
        return m;
    }
};

/// Inbox ordering: timestamp, then sender id; stable sort preserves per-sender
/// emission order for equal keys.
inline bool message_before(const TeamMessage& a, const TeamMessage& b) {
    if (a.t != b.t)
        return a.t < b.t;
    return a.sender < b.sender;
}

}  // namespace regolith
