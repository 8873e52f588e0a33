#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regolith/geometry.hpp"
#include "regolith/savgol.hpp"

namespace regolith {

/// Semi-circular spiral sweep over one team's half of the map: successive
/// arcs of increasing radius about the station row, serpentined so arc ends
/// join by a short radial hop. Team 0 sweeps the lower half-plane, team 1
/// the upper, in opposite rotational directions.
struct SpiralPlan {
    Vec2 center;
    double start_radius = 25.0;
    double radial_step = 3.5;
    int arc_count = 20;
    double arc_spacing = 2.0;  // waypoint spacing along each arc
    int team = 0;
};

inline std::vector<Vec2> spiral_waypoints(const SpiralPlan& plan) {
    std::vector<Vec2> out;
    if (plan.radial_step <= 0.0 || plan.arc_spacing <= 0.0)
        return out;
    for (int k = 0; k < plan.arc_count; ++k) {
        const double r = plan.start_radius + k * plan.radial_step;
        // Both teams start their even arcs at the west axis; team 0 sweeps
        // through south, team 1 through north.
        const double from = (k % 2 == 0) ? kPi : (plan.team == 0 ? 2.0 * kPi : 0.0);
        const double to = (k % 2 == 0) ? (plan.team == 0 ? 2.0 * kPi : 0.0) : kPi;
        const int segments = std::max(1, static_cast<int>(std::ceil(kPi * r / plan.arc_spacing)));
        for (int i = 0; i <= segments; ++i) {
            if (k > 0 && i == 0)
                continue;  // arc joins where the previous one ended
            const double angle = from + (to - from) * i / segments;
            out.push_back(plan.center + unit_vector(angle) * r);
        }
    }
    return out;
}

enum class PinpointPhase { align, advance, done, lost };

inline const char* to_string(PinpointPhase p) {
    switch (p) {
        case PinpointPhase::align: return "align";
        case PinpointPhase::advance: return "advance";
        case PinpointPhase::done: return "done";
        case PinpointPhase::lost: return "lost";
    }
    return "?";
}

struct PinpointConfig {
    int sg_window = 9;
    int sg_order = 2;
    double rotate_rate = 0.6;      // rad/s during the alignment sweep
    double advance_speed = 0.15;   // m/s while closing on the minimum
    double align_tolerance = 0.02;
    double sensor_offset = 0.5;    // must match the world's sensor mount
    double lost_timeout = 8.0;     // s without a reading before giving up
    double backup_tolerance = 0.02;
    double advance_limit = 3.0;    // blind-drive safety stop, meters
    double rise_margin = 0.12;     // smoothed-range rise that confirms the minimum was passed
};

/// Volatile pinpointing by two rounds of rotate-then-advance line searches
/// on Savitzky-Golay-smoothed range readings: sweep a full circle and face
/// the smoothed-range minimum (parabola-refined), creep forward until the
/// smoothed range rises decisively above its running minimum, and repeat
/// the pair once from the much closer vantage before backing onto the
/// minimum and declaring done.
class Pinpointer {
public:
    explicit Pinpointer(const PinpointConfig& cfg = {})
        : cfg_(cfg), filter_(cfg.sg_window, cfg.sg_order) {}

    PinpointPhase phase() const {
        switch (sub_) {
            case Sub::sweep:
            case Sub::face: return PinpointPhase::align;
            case Sub::standoff:
            case Sub::forward:
            case Sub::backup: return PinpointPhase::advance;
            case Sub::done: return PinpointPhase::done;
            case Sub::lost: return PinpointPhase::lost;
        }
        return PinpointPhase::lost;
    }

    /// Deposit position estimate; meaningful once phase() == done.
    const Vec2& estimate() const { return estimate_; }

    /// One control period. `range` is the volatile sensor reading if present;
    /// `pose` is the pose estimate the caller trusts (EKF in the mission,
    /// ground truth in accuracy tests).
    Twist update(std::optional<double> range, const Pose2& pose, double now) {
        if (sub_ == Sub::done || sub_ == Sub::lost)
            return {};
        if (!started_) {
            started_ = true;
            last_reading_time_ = now;
            unwrapped_ = pose.heading;
            prev_heading_ = pose.heading;
            sweep_prev_heading_ = pose.heading;
            prev_position_ = pose.position();
        }
        unwrapped_ += normalize_angle(pose.heading - prev_heading_);
        prev_heading_ = pose.heading;

        if (range.has_value())
            last_reading_time_ = now;
        else if (now - last_reading_time_ > cfg_.lost_timeout) {
            sub_ = Sub::lost;
            return {};
        }

        switch (sub_) {
            case Sub::sweep: return sweep(range, pose);
            case Sub::face: return face(pose);
            case Sub::standoff: return standoff(pose);
            case Sub::forward: return forward(range, pose);
            case Sub::backup: return backup(pose);
            default: return {};
        }
    }

private:
    enum class Sub { sweep, face, standoff, forward, backup, done, lost };

    void clear_window() {
        ranges_.clear();
        keys_.clear();
    }

    void begin_sweep(const Pose2& pose) {
        clear_window();
        profile_.clear();
        swept_ = 0.0;
        sweep_prev_heading_ = pose.heading;
        sub_ = Sub::sweep;
    }

    Twist sweep(const std::optional<double>& range, const Pose2& pose) {
        swept_ += std::abs(normalize_angle(pose.heading - sweep_prev_heading_));
        sweep_prev_heading_ = pose.heading;

        if (!range.has_value()) {
            clear_window();  // a gap breaks the uniform sampling SG assumes
        } else {
            push_sample(unwrapped_, *range);
            if (const auto sg = filter_.smooth(ranges_))
                profile_.push_back({center_key(), sg->value});
        }

        // A full circle plus margin, so every heading gets a two-sided
        // smoothed neighborhood for the vertex fit.
        if (swept_ >= 2.0 * kPi + 1.0) {
            if (profile_.empty()) {
                sub_ = Sub::lost;
                return {};
            }
            target_heading_ = refined_minimum_heading();
            sub_ = Sub::face;
            return {};
        }
        return {0.0, 0.0, cfg_.rotate_rate};
    }

    /// Argmin of the smoothed sweep profile, sharpened by a parabola fit over
    /// its neighborhood.
    double refined_minimum_heading() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < profile_.size(); ++i)
            if (profile_[i].second < profile_[best].second)
                best = i;
        const double k0 = profile_[best].first;

        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        int count = 0;
        for (const auto& [key, value] : profile_) {
            const double phi = key - k0;
            if (std::abs(phi) > 0.45)
                continue;
            const Eigen::Vector3d row(phi * phi, phi, 1.0);
            ata += row * row.transpose();
            atb += row * value;
            ++count;
        }
        if (count < 5)
            return k0;
        const Eigen::Vector3d coeff = ata.ldlt().solve(atb);
        if (coeff(0) <= 1e-9)
            return k0;
        const double vertex = std::clamp(-coeff(1) / (2.0 * coeff(0)), -0.45, 0.45);
        return k0 + vertex;
    }

    Twist face(const Pose2& pose) {
        const double err = normalize_angle(target_heading_ - pose.heading);
        if (std::abs(err) < cfg_.align_tolerance) {
            begin_forward(pose);
            // Round two starts roughly on top of the minimum, so retreat one
            // sensor offset first; the creep then crosses a clean interior
            // minimum instead of beginning past it.
            sub_ = round_ == 1 ? Sub::forward : Sub::standoff;
            return {};
        }
        return {0.0, 0.0, std::clamp(2.0 * err, -cfg_.rotate_rate, cfg_.rotate_rate)};
    }

    void begin_forward(const Pose2& pose) {
        clear_window();
        distance_ = 0.0;
        prev_position_ = pose.position();
        min_value_.reset();
        min_key_ = 0.0;
    }

    Twist standoff(const Pose2& pose) {
        distance_ += (pose.position() - prev_position_).dot(unit_vector(pose.heading));
        prev_position_ = pose.position();
        if (distance_ <= -cfg_.sensor_offset) {
            begin_forward(pose);
            sub_ = Sub::forward;
            return {};
        }
        return {-cfg_.advance_speed, 0.0, 0.0};
    }

    Twist forward(const std::optional<double>& range, const Pose2& pose) {
        distance_ += (pose.position() - prev_position_).dot(unit_vector(pose.heading));
        prev_position_ = pose.position();
        if (distance_ > cfg_.advance_limit) {
            sub_ = Sub::lost;  // drove past anything plausible
            return {};
        }

        if (range.has_value()) {
            push_sample(distance_, *range);
            if (const auto sg = filter_.smooth(ranges_)) {
                if (!min_value_.has_value() || sg->value < *min_value_) {
                    min_value_ = sg->value;
                    min_key_ = center_key();
                }
                // The smoothed range rising decisively above its running
                // minimum marks the closest approach; a reversal of the
                // derivative alone is indistinguishable from noise, and is
                // never seen at all when the advance starts already at the
                // minimum.
                if (sg->value > *min_value_ + cfg_.rise_margin) {
                    if (round_ == 1) {
                        // Passed the minimum once: repeat the whole process
                        // from this much closer vantage.
                        round_ = 2;
                        begin_sweep(pose);
                    } else {
                        target_distance_ = min_key_;
                        residual_range_ = std::max(0.0, *min_value_);
                        sub_ = Sub::backup;
                    }
                    return {};
                }
            }
        }
        return {cfg_.advance_speed, 0.0, 0.0};
    }

    Twist backup(const Pose2& pose) {
        distance_ += (pose.position() - prev_position_).dot(unit_vector(pose.heading));
        prev_position_ = pose.position();

        const double overshoot = distance_ - target_distance_;
        if (std::abs(overshoot) < cfg_.backup_tolerance) {
            estimate_ = pose.position() +
                        unit_vector(pose.heading) * (cfg_.sensor_offset + residual_range_);
            sub_ = Sub::done;
            return {};
        }
        const double v = std::clamp(2.0 * overshoot, -cfg_.advance_speed, cfg_.advance_speed);
        return {-v, 0.0, 0.0};
    }

    void push_sample(double key, double value) {
        keys_.push_back(key);
        ranges_.push_back(value);
    }

    double center_key() const {
        return keys_[keys_.size() - 1 - static_cast<std::size_t>(cfg_.sg_window / 2)];
    }

    PinpointConfig cfg_;
    SgFilter filter_;
    Sub sub_ = Sub::sweep;
    int round_ = 1;
    bool started_ = false;
    double last_reading_time_ = 0.0;
    double unwrapped_ = 0.0;
    double prev_heading_ = 0.0;
    Vec2 prev_position_;
    double swept_ = 0.0;
    double sweep_prev_heading_ = 0.0;

    std::vector<double> keys_;
    std::vector<double> ranges_;
    std::vector<std::pair<double, double>> profile_;  // (heading, smoothed range)
    std::optional<double> min_value_;
    double min_key_ = 0.0;

    double target_heading_ = 0.0;
    double distance_ = 0.0;
    double target_distance_ = 0.0;
    double residual_range_ = 0.0;
    Vec2 estimate_;
};

}  // namespace regolith
