#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "regolith/messages.hpp"
#include "regolith/world.hpp"

namespace regolith {

using Json = nlohmann::ordered_json;

inline const char* rover_name(int id) {
    static const char* names[kRoverCount] = {"scout_a",  "excavator_a", "hauler_a",
                                             "scout_b",  "excavator_b", "hauler_b"};
    return (id >= 0 && id < kRoverCount) ? names[id] : "?";
}

/// Fixed-precision float formatting so serialized logs are byte-stable and
/// free of shortest-roundtrip representation jitter.
inline double log_round(double v, double scale = 1e6) {
    return std::round(v * scale) / scale;
}

/// Append-only JSON-lines mission log. All coordination messages, world
/// events, and mission milestones land here with monotone timestamps.
class EventLog {
public:
    void message(int team, const TeamMessage& m) {
        Json j;
        j["t"] = log_round(m.t);
        j["type"] = "message";
        j["team"] = team;
        j["sender"] = rover_name(m.sender);
        j["kind"] = to_string(m.kind);
        switch (m.kind) {
            case MessageKind::volatile_found:
                j["x"] = log_round(m.estimate.x);
                j["y"] = log_round(m.estimate.y);
                j["parkable"] = m.triangle.has_value();
                break;
            case MessageKind::hauler_parked:
                j["distance"] = log_round(m.distance);
                break;
            case MessageKind::adjust_park:
                j["delta"] = log_round(m.delta);
                break;
            case MessageKind::scoop_transferred:
                j["units"] = m.units;
                j["success"] = m.success;
                break;
            case MessageKind::scored:
                j["units"] = m.units;
                break;
            case MessageKind::battery_low:
                j["rover"] = rover_name(m.rover);
                break;
            case MessageKind::task_complete:
                j["task"] = to_string(m.task);
                j["success"] = m.success;
                break;
            default:
                break;
        }
        push(m.t, std::move(j));
    }

    void world_event(const WorldEvent& e) {
        Json j;
        j["t"] = log_round(e.t);
        j["type"] = e.type;
        j["rover"] = rover_name(e.rover);
        j["x"] = log_round(e.where.x);
        j["y"] = log_round(e.where.y);
        if (e.units > 0)
            j["units"] = e.units;
        if (e.type == "transfer")
            j["success"] = e.success;
        push(e.t, std::move(j));
    }

    void milestone(double t, const std::string& type, int rover, Json extra = Json::object()) {
        Json j;
        j["t"] = log_round(t);
        j["type"] = type;
        if (rover >= 0)
            j["rover"] = rover_name(rover);
        for (auto& [k, v] : extra.items())
            j[k] = v;
        push(t, std::move(j));
    }

    /// Per-team deposit ledger snapshot, emitted whenever a counter moves so
    /// the trace checker can recompute the summary without replaying logic.
    void ledger(double t, int team, int found, int skipped, int depleted, int scored) {
        Json j;
        j["t"] = log_round(t);
        j["type"] = "ledger";
        j["team"] = team;
        j["found"] = found;
        j["skipped"] = skipped;
        j["depleted"] = depleted;
        j["scored"] = scored;
        push(t, std::move(j));
    }

    const std::vector<std::string>& lines() const { return lines_; }
    bool monotone() const { return monotone_; }

    bool write(const std::string& path) const {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f)
            return false;
        for (const auto& line : lines_) {
            std::fwrite(line.data(), 1, line.size(), f);
            std::fputc('\n', f);
        }
        return std::fclose(f) == 0;
    }

private:
    void push(double t, Json&& j) {
        if (t < last_t_ - 1e-9)
            monotone_ = false;
        last_t_ = std::max(last_t_, t);
        lines_.push_back(j.dump());
    }

    std::vector<std::string> lines_;
    double last_t_ = 0.0;
    bool monotone_ = true;
};

struct TraceRow {
    double t = 0.0;
    int score = 0;
    int bin_total = 0;
};

struct LocalizationRow {
    double t = 0.0;
    double error = 0.0;
    bool reset = false;
};

inline bool write_score_trace(const std::string& path, const std::vector<TraceRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        return false;
    std::fputs("t,score,bin_total\n", f);
    for (const auto& r : rows)
        std::fprintf(f, "%.1f,%d,%d\n", r.t, r.score, r.bin_total);
    return std::fclose(f) == 0;
}

inline bool write_localization_trace(const std::string& path,
                                     const std::vector<LocalizationRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        return false;
    std::fputs("t,error,reset\n", f);
    for (const auto& r : rows)
        std::fprintf(f, "%.1f,%.6f,%d\n", r.t, r.error, r.reset ? 1 : 0);
    return std::fclose(f) == 0;
}

struct RoverSummary {
    double distance = 0.0;
    double max_localization_error = 0.0;
    double max_post_reset_error = 0.0;  // worst error immediately after a reset
    int relocalizations = 0;
    double battery_final = 1.0;
    bool depleted = false;
};

struct TeamSummary {
    int scored = 0;
    int deposits_found = 0;
    int deposits_skipped = 0;
    int deposits_depleted = 0;
    int protocol_violations = 0;
};

struct RunSummary {
    bool ok = false;
    std::string failure;
    std::uint64_t seed = 0;
    double duration = 0.0;
    int total_scored = 0;
    std::array<TeamSummary, 2> teams{};
    std::array<RoverSummary, kRoverCount> rovers{};
    int transfer_attempts = 0;
    int transfer_successes = 0;
    int collisions = 0;
    bool ledger_balanced = true;
    int volatile_units_initial = 0;

    double transfer_rate() const {
        return transfer_attempts > 0
                   ? static_cast<double>(transfer_successes) / transfer_attempts
                   : 0.0;
    }

    Json to_json() const {
        Json j;
        j["ok"] = ok;
        if (!failure.empty())
            j["failure"] = failure;
        j["seed"] = seed;
        j["duration"] = log_round(duration);
        j["total_scored"] = total_scored;
        j["volatile_units_initial"] = volatile_units_initial;
        j["ledger_balanced"] = ledger_balanced;
        j["collisions"] = collisions;
        j["transfer"] = {{"attempts", transfer_attempts},
                         {"successes", transfer_successes},
                         {"rate", log_round(transfer_rate())}};
        for (int team = 0; team < 2; ++team) {
            Json tj;
            tj["scored"] = teams[team].scored;
            tj["deposits_found"] = teams[team].deposits_found;
            tj["deposits_skipped"] = teams[team].deposits_skipped;
            tj["deposits_depleted"] = teams[team].deposits_depleted;
            tj["protocol_violations"] = teams[team].protocol_violations;
            j[team == 0 ? "team_a" : "team_b"] = tj;
        }
        Json rj;
        for (int r = 0; r < kRoverCount; ++r) {
            Json one;
            one["distance"] = log_round(rovers[r].distance);
            one["max_localization_error"] = log_round(rovers[r].max_localization_error);
            one["max_post_reset_error"] = log_round(rovers[r].max_post_reset_error);
            one["relocalizations"] = rovers[r].relocalizations;
            one["battery_final"] = log_round(rovers[r].battery_final);
            one["battery_depleted"] = rovers[r].depleted;
            rj[rover_name(r)] = one;
        }
        j["rovers"] = rj;
        return j;
    }
};

inline bool write_summary(const std::string& path, const RunSummary& summary) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f)
        return false;
    const std::string text = summary.to_json().dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    return std::fclose(f) == 0;
}

}  // namespace regolith
