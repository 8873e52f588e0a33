#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regolith/battery.hpp"
#include "regolith/coordination.hpp"
#include "regolith/ekf.hpp"
#include "regolith/planner.hpp"
#include "regolith/search.hpp"
#include "regolith/station_init.hpp"
#include "regolith/world.hpp"

namespace regolith {

/// Everything a mission run needs, fully defaulted: an empty config file is a
/// valid config. Spiral centers and team flags are mission-level policy; the
/// per-module structs keep their own defaults.
struct MissionConfig {
    WorldConfig world{};
    EkfNoiseConfig ekf{};
    BatteryConfig battery{};
    CoordinationConfig coordination{};
    StationInitConfig station_init{};
    PinpointConfig pinpoint{};
    SpiralPlan spiral{};  // center/team filled per scout at runtime
    ControllerConfig controller{};

    bool team_a = true;
    bool team_b = true;
    double trace_period = 5.0;       // seconds between trace rows
    double relocalize_radius = 25.0; // station distance that triggers a PnP reset
    double relocalize_period = 5.0;  // min seconds between reset attempts
    double follow_standoff = 8.0;    // followers hold this far from the scout
};

struct ConfigResult {
    MissionConfig config{};
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

class ConfigReader {
public:
    ConfigReader(const nlohmann::json& root, std::vector<std::string>& errors)
        : errors_(errors) {
        if (!root.is_object()) {
            errors_.push_back("top level: expected a JSON object");
            return;
        }
        root_ = &root;
    }

    /// Visit one group; the callback maps each known key, unknown keys are
    /// reported with their full path.
    template <typename Fn>
    void group(const std::string& name, Fn&& fn) {
        if (!root_)
            return;
        seen_.push_back(name);
        const auto it = root_->find(name);
        if (it == root_->end())
            return;
        if (!it->is_object()) {
            errors_.push_back(name + ": expected an object");
            return;
        }
        for (const auto& [key, value] : it->items()) {
            if (!fn(key, value))
                errors_.push_back("unknown key: " + name + "." + key);
        }
    }

    /// Visit top-level scalars; group names already claimed are skipped.
    template <typename Fn>
    void top_level(Fn&& fn) {
        if (!root_)
            return;
        for (const auto& [key, value] : root_->items()) {
            if (std::find(seen_.begin(), seen_.end(), key) != seen_.end())
                continue;
            if (!fn(key, value))
                errors_.push_back("unknown key: " + key);
        }
    }

    bool number(const std::string& path, const nlohmann::json& v, double& out) {
        if (!v.is_number()) {
            errors_.push_back(path + ": expected a number");
            return false;
        }
        out = v.get<double>();
        return true;
    }

    bool integer(const std::string& path, const nlohmann::json& v, int& out) {
        if (!v.is_number_integer()) {
            errors_.push_back(path + ": expected an integer");
            return false;
        }
        out = v.get<int>();
        return true;
    }

    bool unsigned64(const std::string& path, const nlohmann::json& v, std::uint64_t& out) {
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            errors_.push_back(path + ": expected an unsigned integer");
            return false;
        }
        if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
            errors_.push_back(path + ": expected an unsigned integer");
            return false;
        }
        out = v.get<std::uint64_t>();
        return true;
    }

    bool boolean(const std::string& path, const nlohmann::json& v, bool& out) {
        if (!v.is_boolean()) {
            errors_.push_back(path + ": expected a boolean");
            return false;
        }
        out = v.get<bool>();
        return true;
    }

private:
    const nlohmann::json* root_ = nullptr;
    std::vector<std::string> seen_;
    std::vector<std::string>& errors_;
};

}  // namespace detail

/// Parse mission configuration from JSON text. Every field is optional;
/// unknown keys and type mismatches are collected as diagnostics rather than
/// aborting at the first problem.
inline ConfigResult parse_mission_config(const std::string& text) {
    ConfigResult result;
    MissionConfig& cfg = result.config;

    const bool only_space =
        std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
    if (only_space)
        return result;  // empty file: defaults

    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        result.errors.push_back(std::string("parse error: ") + e.what());
        return result;
    }

    detail::ConfigReader r(root, result.errors);
    bool pinpoint_offset_set = false;

    r.group("world", [&](const std::string& k, const nlohmann::json& v) {
        WorldConfig& w = cfg.world;
        const std::string p = "world." + k;
        if (k == "map_side") return r.number(p, v, w.map_side);
        if (k == "volatile_count") return r.integer(p, v, w.volatile_count);
        if (k == "volatile_units_min") return r.integer(p, v, w.volatile_units_min);
        if (k == "volatile_units_max") return r.integer(p, v, w.volatile_units_max);
        if (k == "volatile_separation") return r.number(p, v, w.volatile_separation);
        if (k == "volatile_detection_radius") return r.number(p, v, w.volatile_detection_radius);
        if (k == "volatile_range_sigma") return r.number(p, v, w.volatile_range_sigma);
        if (k == "volatile_sensor_offset") return r.number(p, v, w.volatile_sensor_offset);
        if (k == "mound_count") return r.integer(p, v, w.mound_count);
        if (k == "crater_count") return r.integer(p, v, w.crater_count);
        if (k == "hill_count") return r.integer(p, v, w.hill_count);
        if (k == "obstacle_gap") return r.number(p, v, w.obstacle_gap);
        if (k == "exclusion_radius") return r.number(p, v, w.exclusion_radius);
        if (k == "odometry_speed_noise_frac") return r.number(p, v, w.odometry_speed_noise_frac);
        if (k == "odometry_speed_noise_add") return r.number(p, v, w.odometry_speed_noise_add);
        if (k == "imu_yaw_sigma") return r.number(p, v, w.imu_yaw_sigma);
        if (k == "detection_recall") return r.number(p, v, w.detection_recall);
        if (k == "detection_range_frac_sigma") return r.number(p, v, w.detection_range_frac_sigma);
        if (k == "detection_bearing_sigma") return r.number(p, v, w.detection_bearing_sigma);
        if (k == "detection_confusion") return r.number(p, v, w.detection_confusion);
        if (k == "false_positive_rate") return r.number(p, v, w.false_positive_rate);
        if (k == "fov_half_angle") return r.number(p, v, w.fov_half_angle);
        if (k == "detection_max_range") return r.number(p, v, w.detection_max_range);
        if (k == "detection_rate_hz") return r.number(p, v, w.detection_rate_hz);
        if (k == "lidar_max_range") return r.number(p, v, w.lidar_max_range);
        if (k == "lidar_sigma") return r.number(p, v, w.lidar_sigma);
        if (k == "pixel_sigma") return r.number(p, v, w.pixel_sigma);
        if (k == "camera_outlier_rate") return r.number(p, v, w.camera_outlier_rate);
        if (k == "camera_max_range") return r.number(p, v, w.camera_max_range);
        if (k == "rover_collision_radius") return r.number(p, v, w.rover_collision_radius);
        if (k == "rover_body_radius") return r.number(p, v, w.rover_body_radius);
        if (k == "dig_range") return r.number(p, v, w.dig_range);
        if (k == "transfer_range") return r.number(p, v, w.transfer_range);
        if (k == "plant_deposit_radius") return r.number(p, v, w.plant_deposit_radius);
        if (k == "transfer_success") return r.number(p, v, w.transfer_success);
        return false;
    });

    r.group("ekf", [&](const std::string& k, const nlohmann::json& v) {
        const std::string p = "ekf." + k;
        if (k == "process_xy") return r.number(p, v, cfg.ekf.process_xy);
        if (k == "process_heading") return r.number(p, v, cfg.ekf.process_heading);
        if (k == "imu_yaw_weight") return r.number(p, v, cfg.ekf.imu_yaw_weight);
        return false;
    });

    r.group("battery", [&](const std::string& k, const nlohmann::json& v) {
        BatteryConfig& b = cfg.battery;
        const std::string p = "battery." + k;
        if (k == "drain_per_meter") return r.number(p, v, b.drain_per_meter);
        if (k == "drain_per_second") return r.number(p, v, b.drain_per_second);
        if (k == "low_threshold") return r.number(p, v, b.low_threshold);
        if (k == "recharge_rate") return r.number(p, v, b.recharge_rate);
        if (k == "resume_threshold") return r.number(p, v, b.resume_threshold);
        return false;
    });

    r.group("coordination", [&](const std::string& k, const nlohmann::json& v) {
        CoordinationConfig& c = cfg.coordination;
        const std::string p = "coordination." + k;
        if (k == "handoff_radius") return r.number(p, v, c.handoff_radius);
        if (k == "stage_distance") return r.number(p, v, c.stage_distance);
        if (k == "bin_capacity") return r.integer(p, v, c.bin_capacity);
        if (k == "bin_band_min") return r.number(p, v, c.bin_band_min);
        if (k == "bin_band_max") return r.number(p, v, c.bin_band_max);
        if (k == "visual_timeout") return r.number(p, v, c.visual_timeout);
        if (k == "dig_duration") return r.number(p, v, c.dig_duration);
        if (k == "dump_duration") return r.number(p, v, c.dump_duration);
        return false;
    });

    r.group("parking", [&](const std::string& k, const nlohmann::json& v) {
        ParkingConfig& pk = cfg.coordination.parking;
        const std::string p = "parking." + k;
        if (k == "dig_standoff") return r.number(p, v, pk.dig_standoff);
        if (k == "lateral_offset") return r.number(p, v, pk.lateral_offset);
        if (k == "slot_clearance") return r.number(p, v, pk.slot_clearance);
        if (k == "angular_steps") return r.integer(p, v, pk.angular_steps);
        if (k == "start_angle") return r.number(p, v, pk.start_angle);
        return false;
    });

    r.group("pinpoint", [&](const std::string& k, const nlohmann::json& v) {
        PinpointConfig& pp = cfg.pinpoint;
        const std::string p = "pinpoint." + k;
        if (k == "sg_window") return r.integer(p, v, pp.sg_window);
        if (k == "sg_order") return r.integer(p, v, pp.sg_order);
        if (k == "rotate_rate") return r.number(p, v, pp.rotate_rate);
        if (k == "advance_speed") return r.number(p, v, pp.advance_speed);
        if (k == "align_tolerance") return r.number(p, v, pp.align_tolerance);
        if (k == "sensor_offset") {
            pinpoint_offset_set = true;
            return r.number(p, v, pp.sensor_offset);
        }
        if (k == "lost_timeout") return r.number(p, v, pp.lost_timeout);
        if (k == "backup_tolerance") return r.number(p, v, pp.backup_tolerance);
        if (k == "advance_limit") return r.number(p, v, pp.advance_limit);
        if (k == "rise_margin") return r.number(p, v, pp.rise_margin);
        return false;
    });

    r.group("spiral", [&](const std::string& k, const nlohmann::json& v) {
        SpiralPlan& s = cfg.spiral;
        const std::string p = "spiral." + k;
        if (k == "start_radius") return r.number(p, v, s.start_radius);
        if (k == "radial_step") return r.number(p, v, s.radial_step);
        if (k == "arc_count") return r.integer(p, v, s.arc_count);
        if (k == "arc_spacing") return r.number(p, v, s.arc_spacing);
        return false;
    });

    r.group("station_init", [&](const std::string& k, const nlohmann::json& v) {
        const std::string p = "station_init." + k;
        if (k == "rotate_rate") return r.number(p, v, cfg.station_init.rotate_rate);
        if (k == "spin_margin") return r.number(p, v, cfg.station_init.spin_margin);
        return false;
    });

    r.group("controller", [&](const std::string& k, const nlohmann::json& v) {
        ControllerConfig& c = cfg.controller;
        const std::string p = "controller." + k;
        if (k == "k_omega") return r.number(p, v, c.k_omega);
        if (k == "k_v") return r.number(p, v, c.k_v);
        if (k == "align_threshold") return r.number(p, v, c.align_threshold);
        if (k == "arrival_radius") return r.number(p, v, c.arrival_radius);
        if (k == "v_max") return r.number(p, v, c.v_max);
        if (k == "omega_max") return r.number(p, v, c.omega_max);
        return false;
    });

    r.top_level([&](const std::string& k, const nlohmann::json& v) {
        if (k == "seed") return r.unsigned64(k, v, cfg.world.seed);
        if (k == "duration") return r.number(k, v, cfg.world.duration);
        if (k == "sim_dt") return r.number(k, v, cfg.world.sim_dt);
        if (k == "team_a") return r.boolean(k, v, cfg.team_a);
        if (k == "team_b") return r.boolean(k, v, cfg.team_b);
        if (k == "trace_period") return r.number(k, v, cfg.trace_period);
        if (k == "relocalize_radius") return r.number(k, v, cfg.relocalize_radius);
        if (k == "relocalize_period") return r.number(k, v, cfg.relocalize_period);
        if (k == "follow_standoff") return r.number(k, v, cfg.follow_standoff);
        return false;
    });

    // The pinpoint geometry model must match the simulated sensor mount
    // unless the operator deliberately splits them.
    if (!pinpoint_offset_set)
        cfg.pinpoint.sensor_offset = cfg.world.volatile_sensor_offset;

    if (result.errors.empty()) {
        if (!cfg.world.valid())
            result.errors.push_back("world: invalid parameter combination");
        if (cfg.trace_period <= 0.0)
            result.errors.push_back("trace_period: must be positive");
        if (cfg.coordination.bin_capacity <= 0)
            result.errors.push_back("coordination.bin_capacity: must be positive");
    }
    return result;
}

inline ConfigResult load_mission_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ConfigResult result;
        result.errors.push_back("cannot open config file: " + path);
        return result;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mission_config(buf.str());
}

}  // namespace regolith
