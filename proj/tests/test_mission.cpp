#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "regolith/config.hpp"
#include "regolith/mission.hpp"

namespace regolith {
namespace {

/// Small world that a mini-mission can fully work in a few simulated minutes.
MissionConfig mini_config(std::uint64_t seed, double duration) {
    MissionConfig cfg;
    cfg.world.seed = seed;
    cfg.world.duration = duration;
    cfg.world.map_side = 120.0;
    cfg.world.volatile_count = 1;
    cfg.world.mound_count = 6;
    cfg.world.crater_count = 4;
    cfg.world.hill_count = 2;
    cfg.world.transfer_success = 1.0;
    cfg.spiral.start_radius = 10.0;
    cfg.spiral.radial_step = 3.5;
    cfg.spiral.arc_count = 12;
    return cfg;
}

bool log_contains(const EventLog& log, const std::string& needle) {
    for (const auto& line : log.lines())
        if (line.find(needle) != std::string::npos)
            return true;
    return false;
}

}  // namespace

TEST_CASE("an empty config file means defaults", "[mission]") {
    const ConfigResult r = parse_mission_config("  \n\t ");
    REQUIRE(r.ok());
    CHECK(r.config.world.volatile_count == 30);
    CHECK(r.config.world.duration == 7200.0);
    CHECK(r.config.team_a);
    CHECK(r.config.team_b);
}

TEST_CASE("config values land in their structs", "[mission]") {
    const ConfigResult r = parse_mission_config(R"({
        "seed": 7,
        "duration": 600.5,
        "world": {"volatile_count": 3, "transfer_success": 0.9},
        "coordination": {"bin_capacity": 5},
        "battery": {"low_threshold": 0.4},
        "pinpoint": {"rotate_rate": 0.5},
        "team_b": false
    })");
    REQUIRE(r.ok());
    CHECK(r.config.world.seed == 7);
    CHECK(r.config.world.duration == 600.5);
    CHECK(r.config.world.volatile_count == 3);
    CHECK(r.config.world.transfer_success == 0.9);
    CHECK(r.config.coordination.bin_capacity == 5);
    CHECK(r.config.battery.low_threshold == 0.4);
    CHECK(r.config.pinpoint.rotate_rate == 0.5);
    CHECK_FALSE(r.config.team_b);
}

TEST_CASE("unknown keys and bad types are reported with their paths", "[mission]") {
    const ConfigResult r = parse_mission_config(R"({
        "world": {"volatile_cnt": 3, "transfer_success": "high"},
        "warp_drive": true
    })");
    REQUIRE_FALSE(r.ok());
    bool unknown_nested = false, bad_type = false, unknown_top = false;
    for (const auto& e : r.errors) {
        unknown_nested |= e.find("world.volatile_cnt") != std::string::npos;
        bad_type |= e.find("world.transfer_success") != std::string::npos;
        unknown_top |= e.find("warp_drive") != std::string::npos;
    }
    CHECK(unknown_nested);
    CHECK(bad_type);
    CHECK(unknown_top);
}

TEST_CASE("malformed json is a parse error, not a crash", "[mission]") {
    const ConfigResult r = parse_mission_config("{\"seed\": }");
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors[0].find("parse error") != std::string::npos);
}

TEST_CASE("the pinpoint offset follows the world sensor mount", "[mission]") {
    const ConfigResult r = parse_mission_config(R"({"world": {"volatile_sensor_offset": 0.8}})");
    REQUIRE(r.ok());
    CHECK(r.config.pinpoint.sensor_offset == 0.8);
    const ConfigResult split = parse_mission_config(
        R"({"world": {"volatile_sensor_offset": 0.8}, "pinpoint": {"sensor_offset": 0.3}})");
    REQUIRE(split.ok());
    CHECK(split.config.pinpoint.sensor_offset == 0.3);
}

TEST_CASE("a one-deposit world is fully mined end to end", "[mission]") {
    MissionRunner runner(mini_config(11, 3000.0));
    const MissionResult result = runner.run();

    REQUIRE(result.summary.ok);
    CHECK(result.summary.total_scored > 0);
    CHECK(result.summary.ledger_balanced);
    const int found = result.summary.teams[0].deposits_found +
                      result.summary.teams[1].deposits_found;
    CHECK(found >= 1);
    // Transfer success forced to 1.0: nothing may be lost in handoffs.
    CHECK(result.summary.transfer_successes == result.summary.transfer_attempts);
    CHECK(result.log.monotone());
}

TEST_CASE("identical config and seed reproduce the run byte for byte", "[mission]") {
    const MissionConfig cfg = mini_config(5, 600.0);
    MissionRunner a(cfg), b(cfg);
    const MissionResult ra = a.run();
    const MissionResult rb = b.run();
    REQUIRE(ra.log.lines().size() == rb.log.lines().size());
    CHECK(ra.log.lines() == rb.log.lines());
    CHECK(ra.summary.to_json().dump() == rb.summary.to_json().dump());
    REQUIRE(ra.score_trace.size() == rb.score_trace.size());
    for (std::size_t i = 0; i < ra.score_trace.size(); ++i) {
        CHECK(ra.score_trace[i].t == rb.score_trace[i].t);
        CHECK(ra.score_trace[i].score == rb.score_trace[i].score);
    }
}

TEST_CASE("a world without volatiles runs to completion and scores zero", "[mission]") {
    MissionConfig cfg = mini_config(3, 400.0);
    cfg.world.volatile_count = 0;
    MissionRunner runner(cfg);
    const MissionResult result = runner.run();
    REQUIRE(result.summary.ok);
    CHECK(result.summary.total_scored == 0);
    CHECK(result.summary.teams[0].deposits_found == 0);
    CHECK(result.summary.ledger_balanced);
}

TEST_CASE("low batteries send rovers home and back to work", "[mission]") {
    MissionConfig cfg = mini_config(9, 900.0);
    cfg.world.volatile_count = 0;  // keep everyone roaming
    cfg.battery.drain_per_second = 1e-3;
    cfg.battery.low_threshold = 0.8;
    cfg.battery.recharge_rate = 0.02;
    MissionRunner runner(cfg);
    const MissionResult result = runner.run();

    REQUIRE(result.summary.ok);
    CHECK(log_contains(result.log, "\"kind\":\"battery_low\""));
    CHECK(log_contains(result.log, "\"task\":\"recharge\""));
    int relocs = 0;
    for (int id = 0; id < kRoverCount; ++id)
        relocs += result.summary.rovers[id].relocalizations;
    CHECK(relocs >= 1);  // returning home passes a station close enough to reset
}

TEST_CASE("score trace is monotone and ends at the final score", "[mission]") {
    MissionRunner runner(mini_config(11, 3000.0));
    const MissionResult result = runner.run();
    REQUIRE_FALSE(result.score_trace.empty());
    for (std::size_t i = 1; i < result.score_trace.size(); ++i)
        CHECK(result.score_trace[i].score >= result.score_trace[i - 1].score);
    CHECK(result.score_trace.back().score == result.summary.total_scored);
}

}  // namespace regolith
