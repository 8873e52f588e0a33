#pragma once

#include <algorithm>

namespace regolith {

struct BatteryConfig {
    double drain_per_meter = 2e-4;
    double drain_per_second = 1e-5;
    double low_threshold = 0.30;
    double recharge_rate = 0.005;   // fraction per second at the station
    double resume_threshold = 0.95; // recharge target before resuming work
};

struct BatteryState {
    double charge = 1.0;
    bool low_latched = false;
};

/// One battery step. Returns true exactly once per discharge cycle, on the
/// tick the charge crosses the low threshold; the latch releases only after
/// recharging past the resume threshold.
inline bool battery_tick(BatteryState& b, const BatteryConfig& cfg, double distance_moved,
                         double dt, bool charging) {
    if (charging)
        b.charge = std::min(1.0, b.charge + cfg.recharge_rate * dt);
    else
        b.charge = std::max(0.0, b.charge - cfg.drain_per_meter * distance_moved -
                                     cfg.drain_per_second * dt);
    if (b.low_latched && b.charge >= cfg.resume_threshold)
        b.low_latched = false;
    if (!b.low_latched && !charging && b.charge <= cfg.low_threshold) {
        b.low_latched = true;
        return true;
    }
    return false;
}

inline bool battery_depleted(const BatteryState& b) { return b.charge <= 0.0; }

}  // namespace regolith
