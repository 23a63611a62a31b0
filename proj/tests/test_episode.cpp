#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gtnav/episode.hpp"
#include "gtnav/metrics.hpp"

using namespace gtnav;
using Catch::Matchers::WithinAbs;

namespace {

/// Straight constant-velocity track sampled every frame_dt from t0 to t1.
ReplayTrack make_track(AgentId id, Vec2 start, Vec2 velocity, double t0, double t1,
                       double frame_dt) {
    ReplayTrack track;
    track.id = id;
    const int frames = static_cast<int>(std::round((t1 - t0) / frame_dt));
    for (int k = 0; k <= frames; ++k) {
        const double t = t0 + k * frame_dt;
        track.points.push_back({t, {start.x + velocity.x * (t - t0),
                                    start.y + velocity.y * (t - t0)}});
    }
    return track;
}

ObstacleGrid corridor_grid() {
    ObstacleGrid grid(12, 8, 0.5, {0.0, -2.0});
    for (int cx = 0; cx < 12; ++cx)
        for (int cy : {0, 1, 2, 5, 6, 7}) grid.set_occupied(cx, cy, true);
    return grid;
}

} // namespace

TEST_CASE("replay track sampling") {
    SECTION("positions interpolate linearly and hit nodes exactly") {
        ReplayTrack track;
        track.id = 4;
        track.points = {{0.0, {0.0, 0.0}}, {1.0, {2.0, 0.0}}, {2.0, {2.0, 2.0}}};
        validate(track);

        CHECK(*track_position(track, 0.0) == Vec2{0.0, 0.0});
        CHECK(*track_position(track, 1.0) == Vec2{2.0, 0.0});
        CHECK(*track_position(track, 2.0) == Vec2{2.0, 2.0});
        CHECK(*track_position(track, 0.5) == Vec2{1.0, 0.0});
        CHECK(*track_position(track, 1.75) == Vec2{2.0, 1.5});
        CHECK_FALSE(track_position(track, -0.1).has_value());
        CHECK_FALSE(track_position(track, 2.1).has_value());
    }
    SECTION("state reports the segment the walker is about to traverse") {
        ReplayTrack track;
        track.id = 4;
        track.points = {{0.0, {0.0, 0.0}}, {1.0, {2.0, 0.0}}, {2.0, {2.0, 2.0}}};

        const AgentState at_node = *track_state(track, 1.0);
        CHECK(at_node.id == 4);
        CHECK(at_node.kind == AgentKind::ScriptedHuman);
        CHECK_THAT(at_node.speed, WithinAbs(2.0, 1e-12));
        CHECK_THAT(at_node.heading, WithinAbs(kPi / 2.0, 1e-12));

        const AgentState mid = *track_state(track, 0.25);
        CHECK_THAT(mid.speed, WithinAbs(2.0, 1e-12));
        CHECK_THAT(mid.heading, WithinAbs(0.0, 1e-12));

        const AgentState last = *track_state(track, 2.0);
        CHECK_THAT(last.heading, WithinAbs(kPi / 2.0, 1e-12));
    }
    SECTION("single point tracks are stationary") {
        ReplayTrack track;
        track.id = 1;
        track.points = {{0.5, {3.0, 4.0}}};
        validate(track);
        CHECK(*track_position(track, 0.5) == Vec2{3.0, 4.0});
        CHECK_FALSE(track_position(track, 0.6).has_value());
        CHECK(track_state(track, 0.5)->speed == 0.0);
        CHECK(track_mean_speed(track) == 0.0);
    }
    SECTION("mean speeds average per-track path speed") {
        const ReplayTrack a = make_track(1, {0, 5}, {1.0, 0.0}, 0.0, 1.0, 0.5);
        const ReplayTrack b = make_track(2, {0, 6}, {1.5, 0.0}, 0.0, 2.0, 0.5);
        CHECK_THAT(track_mean_speed(a), WithinAbs(1.0, 1e-12));
        CHECK_THAT(track_mean_speed(b), WithinAbs(1.5, 1e-12));
        const std::vector<ReplayTrack> tracks{a, b};
        CHECK_THAT(mean_track_speed(tracks), WithinAbs(1.25, 1e-12));
    }
    SECTION("validation rejects malformed tracks") {
        ReplayTrack empty;
        empty.id = 1;
        CHECK_THROWS_AS(validate(empty), DomainError);

        ReplayTrack reserved;
        reserved.id = kRobotId;
        reserved.points = {{0.0, {0, 0}}};
        CHECK_THROWS_AS(validate(reserved), DomainError);

        ReplayTrack unsorted;
        unsorted.id = 1;
        unsorted.points = {{1.0, {0, 0}}, {1.0, {1, 0}}};
        CHECK_THROWS_AS(validate(unsorted), DomainError);
    }
}

TEST_CASE("replay only episodes pass tracks through") {
    EpisodeOptions opt;
    opt.planner = PlannerKind::ReplayOnly;

    SECTION("tracks on the executive tick come back identical") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(7, {0, 0}, {1.0, 0.0}, 0.0, 1.5, 0.5));
        setup.tracks.push_back(make_track(9, {1, 1}, {0.5, 0.5}, 0.0, 1.5, 0.5));

        const EpisodeResult r = run_episode(setup, opt);
        CHECK_FALSE(r.robot_present);
        CHECK(r.exec_dt == 0.5);
        CHECK(r.final_tick == 3);
        CHECK_FALSE(r.tick_cap_hit);
        REQUIRE(r.walker_trajectories.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& traj = r.walker_trajectories[i];
            REQUIRE(traj.samples.size() == 4);
            for (int k = 0; k <= 3; ++k) {
                CHECK(traj.samples[k].tick == k);
                CHECK(traj.samples[k].position == setup.tracks[i].points[k].position);
            }
        }
        CHECK(r.log.size() == 8);
        CHECK(r.decisions.empty());
        for (const auto& row : r.log) {
            CHECK(row.branch == "replay");
            CHECK(row.kind == AgentKind::ScriptedHuman);
            CHECK(std::isnan(row.cost_total));
        }
    }
    SECTION("finer recordings are resampled onto the executive tick") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(3, {0, 0}, {1.0, 0.0}, 0.0, 2.0, 0.25));

        const EpisodeResult r = run_episode(setup, opt);
        REQUIRE(r.walker_trajectories.size() == 1);
        const auto& traj = r.walker_trajectories[0];
        REQUIRE(traj.samples.size() == 5);
        for (int k = 0; k <= 4; ++k)
            CHECK(traj.samples[k].position == setup.tracks[0].points[2 * k].position);
    }
    SECTION("a walker entering late appears at its first covered tick") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(1, {0, 0}, {1.0, 0.0}, 0.0, 3.0, 0.5));
        setup.tracks.push_back(make_track(2, {5, 5}, {0.0, 1.0}, 1.0, 3.0, 0.5));

        const EpisodeResult r = run_episode(setup, opt);
        CHECK(r.walker_trajectories[0].first_tick() == 0);
        CHECK(r.walker_trajectories[1].first_tick() == 2);
        CHECK(r.walker_trajectories[1].last_tick() == 6);
    }
    SECTION("the tick cap truncates a run") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(1, {0, 0}, {1.0, 0.0}, 0.0, 5.0, 0.5));
        EpisodeOptions capped = opt;
        capped.tick_cap = 2;

        const EpisodeResult r = run_episode(setup, capped);
        CHECK(r.tick_cap_hit);
        CHECK(r.final_tick == 2);
        CHECK(r.walker_trajectories[0].samples.size() == 3);
    }
    SECTION("duplicate track ids are rejected") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(1, {0, 0}, {1, 0}, 0.0, 1.0, 0.5));
        setup.tracks.push_back(make_track(1, {2, 0}, {1, 0}, 0.0, 1.0, 0.5));
        CHECK_THROWS_AS(run_episode(setup, opt), DomainError);
    }
}

TEST_CASE("game planner episode in an empty scene") {
    EpisodeSetup setup;
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{4.8, 0.0};
    setup.robot_speed = 1.3;
    EpisodeOptions opt;
    opt.planner = PlannerKind::GT;

    const EpisodeResult r = run_episode(setup, opt);

    SECTION("the robot reaches the goal within the direct-path bound") {
        CHECK(r.robot_present);
        CHECK(r.goal_reached);
        CHECK_FALSE(r.tick_cap_hit);
        const int bound = static_cast<int>(std::ceil(4.8 / (1.3 * 0.5))) + 1;
        CHECK(r.final_tick <= bound);
    }
    SECTION("the path is a straight optimal line") {
        REQUIRE(r.robot_trajectory.samples.size() >= 2);
        for (const auto& s : r.robot_trajectory.samples) {
            CHECK_THAT(s.position.x, WithinAbs(0.65 * s.tick, 1e-12));
            CHECK(s.position.y == 0.0);
        }
        CHECK_THAT(path_length_ratio(r.robot_trajectory), WithinAbs(1.0, 1e-12));
        CHECK(path_regularity(r.robot_trajectory) == 1.0);
    }
    SECTION("every decision keeps straight and executes step one of its plan") {
        REQUIRE_FALSE(r.decisions.empty());
        for (const auto& d : r.decisions) {
            CHECK_FALSE(d.used_vfh);
            CHECK(d.planner.branch == Branch::KeepStraight);
            CHECK(d.planner.feasible());
            CHECK(d.executed_heading == d.planner.chosen_plan.headings.at(0));
            CHECK(d.executed_speed_factor == d.planner.chosen_plan.speed_factors.at(0));
            CHECK(std::isnan(d.min_separation));
        }
    }
    SECTION("the log carries robot rows with branch and cost columns") {
        REQUIRE_FALSE(r.log.empty());
        CHECK(r.log.front().branch == "keep_straight");
        CHECK(r.log.front().kind == AgentKind::ControlledRobot);
        CHECK(r.log.front().feasible);
        CHECK(r.log.back().branch == "arrived");
    }
}

TEST_CASE("episode configuration errors") {
    SECTION("a planner run without a goal is rejected") {
        EpisodeSetup setup;
        setup.robot_start = Vec2{0, 0};
        EpisodeOptions opt;
        opt.planner = PlannerKind::GT;
        CHECK_THROWS_AS(run_episode(setup, opt), ConfigError);
    }
    SECTION("an empty scene cannot provide a default robot speed") {
        EpisodeSetup setup;
        setup.robot_start = Vec2{0, 0};
        setup.robot_goal = Vec2{4, 0};
        EpisodeOptions opt;
        opt.planner = PlannerKind::GT;
        CHECK_THROWS_AS(run_episode(setup, opt), ConfigError);
    }
    SECTION("the robot speed defaults to the mean walker speed") {
        EpisodeSetup setup;
        setup.tracks.push_back(make_track(1, {0, 5}, {1.0, 0.0}, 0.0, 1.0, 0.5));
        setup.tracks.push_back(make_track(2, {0, 6}, {1.5, 0.0}, 0.0, 2.0, 0.5));
        setup.robot_start = Vec2{0, 0};
        setup.robot_goal = Vec2{2.5, 0};
        EpisodeOptions opt;
        opt.planner = PlannerKind::GT;

        const EpisodeResult r = run_episode(setup, opt);
        CHECK(r.robot_speed == 1.25);
        REQUIRE(r.robot_trajectory.samples.size() >= 2);
        CHECK_THAT(r.robot_trajectory.samples[1].position.x, WithinAbs(0.625, 1e-12));
    }
}

TEST_CASE("game planner avoids a replayed oncoming walker") {
    EpisodeSetup setup;
    setup.tracks.push_back(make_track(1, {4.8, 0.0}, {-1.0, 0.0}, 0.0, 8.0, 0.5));
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{4.8, 0.0};
    setup.robot_speed = 1.0;
    EpisodeOptions opt;
    opt.planner = PlannerKind::GT;
    opt.game.collision_substeps = 12;

    const EpisodeResult r = run_episode(setup, opt);

    CHECK(r.goal_reached);
    bool deviated = false;
    bool all_feasible = true;
    for (const auto& d : r.decisions) {
        if (std::abs(d.executed_heading) > 1e-9) deviated = true;
        if (!d.planner.feasible()) all_feasible = false;
        CHECK(d.executed_heading == d.planner.chosen_plan.headings.at(0));
    }
    CHECK(deviated);
    CHECK(all_feasible);

    const auto scan = scan_min_separation(r);
    REQUIRE(scan.has_value());
    CHECK(scan->min_distance >= 0.6);

    bool saw_nash = false;
    for (const auto& row : r.log)
        if (row.branch == "nash_game") saw_nash = true;
    CHECK(saw_nash);
}

TEST_CASE("blocked corridor episode decelerates and freezes safely") {
    EpisodeSetup setup;
    setup.tracks.push_back(make_track(1, {2.7, 0.0}, {0.0, 0.0}, 0.0, 30.0, 0.5));
    const ObstacleGrid grid = corridor_grid();
    setup.grid = &grid;
    setup.robot_start = Vec2{0.3, 0.0};
    setup.robot_goal = Vec2{10.0, 0.0};
    setup.robot_speed = 1.0;
    EpisodeOptions opt;
    opt.planner = PlannerKind::GT;
    opt.tick_cap = 40;

    const EpisodeResult r = run_episode(setup, opt);

    CHECK_FALSE(r.goal_reached);
    CHECK(r.tick_cap_hit);

    REQUIRE_FALSE(r.decisions.empty());
    const auto& first = r.decisions.front().planner;
    CHECK(first.branch == Branch::Decelerate);
    CHECK(first.decel_feasible);
    CHECK_FALSE(first.nash_feasible);
    CHECK(std::isfinite(first.decel_cost));

    const auto scan = scan_min_separation(r);
    REQUIRE(scan.has_value());
    CHECK(scan->min_distance >= 0.6 - 1e-12);

    bool saw_decelerate = false;
    for (const auto& row : r.log)
        if (row.kind == AgentKind::ControlledRobot && row.branch == "decelerate") {
            saw_decelerate = true;
            CHECK(row.decel_feasible);
            if (row.nash_feasible) CHECK(row.decel_cost <= row.nash_cost);
        }
    CHECK(saw_decelerate);
}

TEST_CASE("vfh episodes") {
    SECTION("an empty scene yields a straight run to the goal") {
        EpisodeSetup setup;
        setup.robot_start = Vec2{0.0, 0.0};
        setup.robot_goal = Vec2{4.0, 0.0};
        setup.robot_speed = 1.0;
        EpisodeOptions opt;
        opt.planner = PlannerKind::VFH;

        const EpisodeResult r = run_episode(setup, opt);
        CHECK(r.goal_reached);
        CHECK(path_regularity(r.robot_trajectory) == 1.0);
        CHECK_THAT(path_length_ratio(r.robot_trajectory), WithinAbs(1.0, 1e-12));
        for (const auto& d : r.decisions) {
            CHECK(d.used_vfh);
            CHECK_FALSE(d.vfh_stopped);
        }
    }
    SECTION("a fully enclosed robot stops in place until the cap") {
        ObstacleGrid grid(3, 3, 0.5, {0.0, 0.0});
        for (int cx = 0; cx < 3; ++cx)
            for (int cy = 0; cy < 3; ++cy)
                if (cx != 1 || cy != 1) grid.set_occupied(cx, cy, true);
        EpisodeSetup setup;
        setup.grid = &grid;
        setup.robot_start = Vec2{0.75, 0.75};
        setup.robot_goal = Vec2{5.0, 0.75};
        setup.robot_speed = 1.0;
        EpisodeOptions opt;
        opt.planner = PlannerKind::VFH;
        opt.tick_cap = 6;

        const EpisodeResult r = run_episode(setup, opt);
        CHECK_FALSE(r.goal_reached);
        CHECK(r.tick_cap_hit);
        for (const auto& d : r.decisions) {
            CHECK(d.vfh_stopped);
            CHECK(d.executed_speed_factor == 0.0);
        }
        for (const auto& s : r.robot_trajectory.samples)
            CHECK(s.position == Vec2{0.75, 0.75});
        for (const auto& row : r.log)
            if (row.kind == AgentKind::ControlledRobot) {
                CHECK(row.branch == "vfh_stopped");
                CHECK_FALSE(row.feasible);
            }
    }
}

TEST_CASE("planner conditions share replay but differ in the robot path") {
    EpisodeSetup setup;
    setup.tracks.push_back(make_track(1, {2.5, 1.6}, {0.0, -1.0}, 0.0, 4.0, 0.5));
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{5.0, 0.0};
    setup.robot_speed = 1.0;

    EpisodeOptions gt_opt;
    gt_opt.planner = PlannerKind::GT;
    EpisodeOptions vfh_opt;
    vfh_opt.planner = PlannerKind::VFH;

    const EpisodeResult gt = run_episode(setup, gt_opt);
    const EpisodeResult vfh = run_episode(setup, vfh_opt);

    CHECK(gt.goal_reached);
    CHECK(vfh.goal_reached);

    const int shared = std::min(gt.walker_trajectories[0].last_tick(),
                                vfh.walker_trajectories[0].last_tick());
    for (int k = 0; k <= shared; ++k)
        CHECK(*gt.walker_trajectories[0].position_at(k) ==
              *vfh.walker_trajectories[0].position_at(k));

    bool differs = false;
    const int shared_robot = std::min(gt.robot_trajectory.last_tick(),
                                      vfh.robot_trajectory.last_tick());
    for (int k = 0; k <= shared_robot; ++k)
        if (!(*gt.robot_trajectory.position_at(k) == *vfh.robot_trajectory.position_at(k)))
            differs = true;
    CHECK(differs);
}

TEST_CASE("episodes are deterministic") {
    EpisodeSetup setup;
    setup.tracks.push_back(make_track(1, {2.5, 1.6}, {0.0, -1.0}, 0.0, 4.0, 0.5));
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{5.0, 0.0};
    setup.robot_speed = 1.0;

    for (PlannerKind kind : {PlannerKind::GT, PlannerKind::VFH}) {
        EpisodeOptions opt;
        opt.planner = kind;
        const EpisodeResult a = run_episode(setup, opt);
        const EpisodeResult b = run_episode(setup, opt);

        std::ostringstream log_a;
        std::ostringstream log_b;
        write_episode_log(a, log_a);
        write_episode_log(b, log_b);
        CHECK(log_a.str() == log_b.str());
        REQUIRE(a.robot_trajectory.samples.size() == b.robot_trajectory.samples.size());
        for (std::size_t i = 0; i < a.robot_trajectory.samples.size(); ++i)
            CHECK(a.robot_trajectory.samples[i].position ==
                  b.robot_trajectory.samples[i].position);
    }
}

TEST_CASE("episode log serialization round trip") {
    EpisodeSetup setup;
    setup.tracks.push_back(make_track(1, {2.5, 1.6}, {0.0, -1.0}, 0.0, 4.0, 0.5));
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{5.0, 0.0};
    setup.robot_speed = 1.0;
    EpisodeOptions opt;
    opt.planner = PlannerKind::GT;

    const EpisodeResult r = run_episode(setup, opt);
    std::ostringstream out;
    write_episode_log(r, out);

    SECTION("parsing recovers every row") {
        std::istringstream in(out.str());
        const ParsedEpisodeLog parsed = read_episode_log(in);
        CHECK(parsed.exec_dt == 0.5);
        REQUIRE(parsed.rows.size() == r.log.size());
        for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
            const auto& got = parsed.rows[i];
            const auto& want = r.log[i];
            CHECK(got.tick == want.tick);
            CHECK(got.agent == want.agent);
            CHECK(got.kind == want.kind);
            CHECK(got.branch == want.branch);
            CHECK_THAT(got.x, WithinAbs(want.x, 5e-10));
            CHECK_THAT(got.y, WithinAbs(want.y, 5e-10));
            CHECK(got.feasible == want.feasible);
            if (std::isnan(want.nash_cost))
                CHECK(std::isnan(got.nash_cost));
            else
                CHECK_THAT(got.nash_cost, WithinAbs(want.nash_cost, 5e-10));
        }
    }
    SECTION("trajectories rebuilt from the log match the episode") {
        std::istringstream in(out.str());
        const auto rebuilt = trajectories_from_log(read_episode_log(in));
        const Trajectory* robot = nullptr;
        for (const auto& [id, traj] : rebuilt)
            if (id == kRobotId) robot = &traj;
        REQUIRE(robot != nullptr);
        REQUIRE(robot->samples.size() == r.robot_trajectory.samples.size());
        for (std::size_t i = 0; i < robot->samples.size(); ++i) {
            CHECK(robot->samples[i].tick == r.robot_trajectory.samples[i].tick);
            CHECK_THAT(robot->samples[i].position.x,
                       WithinAbs(r.robot_trajectory.samples[i].position.x, 5e-10));
        }
    }
    SECTION("malformed input raises parse errors with line numbers") {
        std::istringstream missing_dt("tick\ttime\nbogus");
        CHECK_THROWS_AS(read_episode_log(missing_dt), ParseError);

        std::istringstream bad_header("# exec_dt 0.5\nnot\tthe\theader\n");
        CHECK_THROWS_AS(read_episode_log(bad_header), ParseError);

        std::string good = out.str();
        std::istringstream truncated_row(good + "1\t2\n");
        try {
            read_episode_log(truncated_row);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line > 2);
        }
    }
}
