#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gtnav/core.hpp"
#include "gtnav/errors.hpp"
#include "gtnav/geometry.hpp"
#include "gtnav/obstacle_grid.hpp"
#include "gtnav/planner.hpp"
#include "gtnav/vfh.hpp"

namespace gtnav {

// ---------------------------------------------------------------------------
// Replay tracks
// ---------------------------------------------------------------------------

/// One recorded position with its timestamp in seconds.
struct TimedPoint {
    double time = 0.0;
    Vec2 position;
};

/// A recorded walker: an id plus its timestamped positions. The walker exists
/// only between its first and last timestamps; outside that window it is
/// absent from the scene.
struct ReplayTrack {
    AgentId id = 0;
    std::vector<TimedPoint> points;

    double start_time() const { return points.empty() ? 0.0 : points.front().time; }
    double end_time() const { return points.empty() ? 0.0 : points.back().time; }
};

inline void validate(const ReplayTrack& track) {
    if (track.points.empty()) throw DomainError("replay track: no points");
    if (track.id == kRobotId || track.id >= kGroupIdBase)
        throw DomainError("replay track: id " + std::to_string(track.id) + " is reserved");
    for (std::size_t i = 0; i < track.points.size(); ++i) {
        require_finite(track.points[i].position, "replay track point");
        if (!std::isfinite(track.points[i].time))
            throw DomainError("replay track: non-finite timestamp");
        if (i > 0 && track.points[i].time <= track.points[i - 1].time)
            throw DomainError("replay track: timestamps must be strictly increasing");
    }
}

namespace detail {

/// Index of the segment [points[i], points[i+1]] containing time t, for a
/// track with at least 2 points and t inside its window.
inline std::size_t track_segment(const ReplayTrack& track, double t) {
    std::size_t lo = 0;
    std::size_t hi = track.points.size() - 1;
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (track.points[mid].time <= t)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace detail

/// Tolerance for membership of a sample time in a track's window, so that an
/// executive tick landing arithmetically on the last frame still counts.
inline constexpr double kTrackTimeSlack = 1e-9;

/// Position at time t, linearly interpolated between recorded points; exact
/// at the recorded timestamps. Absent when t is outside the track's window.
inline std::optional<Vec2> track_position(const ReplayTrack& track, double t) {
    if (track.points.empty()) return std::nullopt;
    if (t < track.start_time() - kTrackTimeSlack) return std::nullopt;
    if (t > track.end_time() + kTrackTimeSlack) return std::nullopt;
    if (track.points.size() == 1) return track.points.front().position;
    const double clamped = std::clamp(t, track.start_time(), track.end_time());
    const std::size_t i = detail::track_segment(track, clamped);
    const TimedPoint& a = track.points[i];
    const TimedPoint& b = track.points[i + 1];
    if (clamped == a.time) return a.position;
    if (clamped == b.time) return b.position;
    const double alpha = (clamped - a.time) / (b.time - a.time);
    return Vec2{a.position.x + (b.position.x - a.position.x) * alpha,
                a.position.y + (b.position.y - a.position.y) * alpha};
}

/**
 * @brief Full walker state at time t, or absent if the track does not cover t.
 *
 * Heading and speed come from the segment ahead of t (the one the walker is
 * about to traverse), so straight-line prediction from this state matches the
 * recording while the walker keeps its course; at the final point the segment
 * behind is used. A single-point track yields speed 0.
 */
inline std::optional<AgentState> track_state(const ReplayTrack& track, double t) {
    const auto pos = track_position(track, t);
    if (!pos) return std::nullopt;
    AgentState s;
    s.id = track.id;
    s.kind = AgentKind::ScriptedHuman;
    s.position = *pos;
    if (track.points.size() < 2) return s;
    const double clamped = std::clamp(t, track.start_time(), track.end_time());
    const std::size_t i = detail::track_segment(track, clamped);
    const TimedPoint& a = track.points[i];
    const TimedPoint& b = track.points[i + 1];
    const double span = b.time - a.time;
    s.speed = distance(a.position, b.position) / span;
    s.heading = bearing(a.position, b.position);
    return s;
}

/// Average speed over the whole track: path length over elapsed time.
inline double track_mean_speed(const ReplayTrack& track) {
    if (track.points.size() < 2) return 0.0;
    double length = 0.0;
    for (std::size_t i = 1; i < track.points.size(); ++i)
        length += distance(track.points[i - 1].position, track.points[i].position);
    return length / (track.end_time() - track.start_time());
}

/// Mean of the per-track average speeds; 0 when there are no usable tracks.
inline double mean_track_speed(std::span<const ReplayTrack> tracks) {
    double sum = 0.0;
    int n = 0;
    for (const auto& t : tracks) {
        if (t.points.size() < 2) continue;
        sum += track_mean_speed(t);
        ++n;
    }
    return n > 0 ? sum / n : 0.0;
}

// ---------------------------------------------------------------------------
// Episode simulation
// ---------------------------------------------------------------------------

/// Which controller drives the designated agent during an episode.
enum class PlannerKind { ReplayOnly, GT, VFH };

inline const char* planner_kind_name(PlannerKind k) {
    switch (k) {
        case PlannerKind::ReplayOnly: return "replay_only";
        case PlannerKind::GT: return "gt";
        case PlannerKind::VFH: return "vfh";
    }
    return "unknown";
}

/// Everything an episode consumes: recorded walkers, the static grid, and the
/// optional robot mission. robot_speed 0 means "use the mean walker speed".
struct EpisodeSetup {
    std::vector<ReplayTrack> tracks;
    const ObstacleGrid* grid = nullptr;
    std::optional<Vec2> robot_start;
    std::optional<Vec2> robot_goal;
    double robot_speed = 0.0;
};

/// Knobs of one episode run. tick_cap 0 derives the cap from the replay and
/// mission lengths (three times the longer of the two, plus slack).
struct EpisodeOptions {
    PlannerKind planner = PlannerKind::ReplayOnly;
    GameConfig game;
    VfhConfig vfh;
    int tick_cap = 0;
};

/// The robot's decision at one executive tick, kept for logs and assertions.
struct EpisodeTickRecord {
    int tick = 0;
    double time = 0.0;
    bool used_vfh = false;
    bool vfh_stopped = false;
    /// Game-branch details; default-constructed on VFH ticks.
    PlannerTickResult planner;
    double executed_heading = 0.0;
    double executed_speed_factor = 1.0;
    /// Distance to the nearest walker present at this tick, NaN if none.
    double min_separation = std::numeric_limits<double>::quiet_NaN();
};

/// One row of the columnar episode log; see episode_log_columns().
struct EpisodeLogRow {
    int tick = 0;
    double time = 0.0;
    AgentId agent = 0;
    AgentKind kind = AgentKind::ScriptedHuman;
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
    double speed = 0.0;
    std::string branch = "replay";
    bool feasible = true;
    bool c_obs = false;
    bool c_agents = false;
    double cost_goal = std::numeric_limits<double>::quiet_NaN();
    double cost_smooth = std::numeric_limits<double>::quiet_NaN();
    double cost_obs = std::numeric_limits<double>::quiet_NaN();
    double cost_total = std::numeric_limits<double>::quiet_NaN();
    double nash_cost = std::numeric_limits<double>::quiet_NaN();
    double decel_cost = std::numeric_limits<double>::quiet_NaN();
    bool nash_feasible = false;
    bool decel_feasible = false;
};

/// Everything one episode produces.
struct EpisodeResult {
    double exec_dt = 0.0;
    /// Index of the last sampled tick (samples exist for 0..final_tick).
    int final_tick = 0;
    bool robot_present = false;
    bool goal_reached = false;
    bool tick_cap_hit = false;
    double robot_speed = 0.0;
    Trajectory robot_trajectory;
    std::vector<AgentId> walker_ids;
    std::vector<Trajectory> walker_trajectories;
    std::vector<EpisodeTickRecord> decisions;
    std::vector<EpisodeLogRow> log;
};

namespace detail {

inline EpisodeLogRow walker_log_row(int tick, double time, const AgentState& s) {
    EpisodeLogRow row;
    row.tick = tick;
    row.time = time;
    row.agent = s.id;
    row.kind = AgentKind::ScriptedHuman;
    row.x = s.position.x;
    row.y = s.position.y;
    row.heading = s.heading;
    row.speed = s.speed;
    row.branch = "replay";
    return row;
}

inline EpisodeLogRow robot_log_row(int tick, double time, const AgentState& s) {
    EpisodeLogRow row;
    row.tick = tick;
    row.time = time;
    row.agent = s.id;
    row.kind = AgentKind::ControlledRobot;
    row.x = s.position.x;
    row.y = s.position.y;
    row.heading = s.heading;
    row.speed = s.speed;
    row.branch = "arrived";
    return row;
}

} // namespace detail

/**
 * @brief Simulate one episode on the executive tick.
 *
 * Walkers replay their recorded tracks, interpolated to the executive tick
 * (the replanning interval, 0.5 s at the default 2 Hz); the robot, when a
 * planner is selected, re-solves every tick and executes the first action of
 * its plan until the executed command is refreshed at the next tick. The
 * episode ends when the robot comes within one executive step (or the goal
 * tolerance, whichever is larger) of its goal, when the replay is exhausted
 * in a replay-only run, or at the tick cap.
 */
inline EpisodeResult run_episode(const EpisodeSetup& setup, const EpisodeOptions& opt) {
    validate(opt.game);
    if (opt.planner == PlannerKind::VFH) validate(opt.vfh);
    std::set<AgentId> ids;
    for (const auto& track : setup.tracks) {
        validate(track);
        if (!ids.insert(track.id).second)
            throw DomainError("run_episode: duplicate track id " + std::to_string(track.id));
    }

    const bool wants_robot = opt.planner != PlannerKind::ReplayOnly;
    if (wants_robot && (!setup.robot_start || !setup.robot_goal))
        throw ConfigError("run_episode: planner condition requires robot start and goal");

    EpisodeResult result;
    result.exec_dt = opt.game.replan_interval();
    const double exec_dt = result.exec_dt;

    double replay_end = 0.0;
    for (const auto& track : setup.tracks) replay_end = std::max(replay_end, track.end_time());

    AgentState robot;
    double arrival_radius = 0.0;
    if (wants_robot) {
        require_finite(*setup.robot_start, "run_episode robot start");
        require_finite(*setup.robot_goal, "run_episode robot goal");
        double speed = setup.robot_speed;
        if (speed == 0.0) speed = mean_track_speed(setup.tracks);
        if (!(speed > 0.0))
            throw ConfigError("run_episode: robot speed unresolved (no walkers to average)");
        robot.id = kRobotId;
        robot.kind = AgentKind::ControlledRobot;
        robot.position = *setup.robot_start;
        robot.speed = speed;
        robot.heading = distance(robot.position, *setup.robot_goal) > 1e-12
                            ? bearing(robot.position, *setup.robot_goal)
                            : 0.0;
        result.robot_present = true;
        result.robot_speed = speed;
        result.robot_trajectory.dt = exec_dt;
        arrival_radius = std::max(opt.game.goal_tolerance, speed * exec_dt * (1.0 + 1e-9));
    }

    int cap = opt.tick_cap;
    if (cap <= 0) {
        const int replay_ticks = static_cast<int>(std::ceil(replay_end / exec_dt));
        cap = 3 * replay_ticks;
        if (wants_robot) {
            const double direct = distance(*setup.robot_start, *setup.robot_goal);
            const int direct_ticks =
                static_cast<int>(std::ceil(direct / (robot.speed * exec_dt)));
            cap = std::max(cap, 3 * direct_ticks + 8);
        }
    }

    result.walker_ids.reserve(setup.tracks.size());
    result.walker_trajectories.reserve(setup.tracks.size());
    for (const auto& track : setup.tracks) {
        result.walker_ids.push_back(track.id);
        Trajectory traj;
        traj.dt = exec_dt;
        result.walker_trajectories.push_back(traj);
    }

    VfhState vfh_state;
    for (int tick = 0;; ++tick) {
        const double t = tick * exec_dt;
        result.final_tick = tick;

        std::vector<AgentState> walkers;
        walkers.reserve(setup.tracks.size());
        for (std::size_t i = 0; i < setup.tracks.size(); ++i) {
            const auto s = track_state(setup.tracks[i], t);
            if (!s) continue;
            result.walker_trajectories[i].samples.push_back({tick, s->position});
            result.log.push_back(detail::walker_log_row(tick, t, *s));
            walkers.push_back(*s);
        }

        bool finished = false;
        if (wants_robot) {
            result.robot_trajectory.samples.push_back({tick, robot.position});

            double min_sep = std::numeric_limits<double>::quiet_NaN();
            for (const auto& w : walkers) {
                const double d = distance(robot.position, w.position);
                if (std::isnan(min_sep) || d < min_sep) min_sep = d;
            }

            if (distance(robot.position, *setup.robot_goal) <= arrival_radius) {
                result.goal_reached = true;
                result.log.push_back(detail::robot_log_row(tick, t, robot));
                finished = true;
            } else if (opt.planner == PlannerKind::GT) {
                const PlannerTickResult plan =
                    plan_tick(robot, *setup.robot_goal, walkers, setup.grid, opt.game);

                EpisodeTickRecord rec;
                rec.tick = tick;
                rec.time = t;
                rec.planner = plan;
                rec.executed_heading = plan.executed_heading;
                rec.executed_speed_factor = plan.executed_speed_factor;
                rec.min_separation = min_sep;
                result.decisions.push_back(rec);

                EpisodeLogRow row = detail::robot_log_row(tick, t, robot);
                row.branch = branch_name(plan.branch);
                row.feasible = plan.feasible();
                row.c_obs = plan.flags.c_obs;
                row.c_agents = plan.flags.c_agents;
                row.cost_goal = plan.cost.goal;
                row.cost_smooth = plan.cost.smooth;
                row.cost_obs = plan.cost.obstacle;
                row.cost_total = plan.cost.total();
                row.nash_cost = plan.nash_cost;
                row.decel_cost = plan.decel_cost;
                row.nash_feasible = plan.nash_feasible;
                row.decel_feasible = plan.decel_feasible;
                result.log.push_back(row);

                robot = advance_robot(robot, plan, exec_dt);
            } else {
                const VfhCommand cmd =
                    vfh_tick(robot, *setup.robot_goal, walkers, setup.grid, vfh_state, opt.vfh);

                EpisodeTickRecord rec;
                rec.tick = tick;
                rec.time = t;
                rec.used_vfh = true;
                rec.vfh_stopped = cmd.stopped;
                rec.executed_heading = cmd.heading;
                rec.executed_speed_factor = cmd.stopped ? 0.0 : 1.0;
                rec.min_separation = min_sep;
                result.decisions.push_back(rec);

                EpisodeLogRow row = detail::robot_log_row(tick, t, robot);
                row.branch = cmd.stopped ? "vfh_stopped" : "vfh";
                row.feasible = !cmd.stopped;
                result.log.push_back(row);

                robot.heading = cmd.heading;
                robot.position =
                    step_kinematics(robot.position, cmd.heading, cmd.speed, exec_dt);
            }
        } else if (t >= replay_end - kTrackTimeSlack) {
            finished = true;
        }

        if (finished) break;
        if (tick >= cap) {
            result.tick_cap_hit = true;
            break;
        }
    }
    return result;
}

/// Closest approach between any two agents over all sampled ticks.
struct SeparationScan {
    double min_distance = std::numeric_limits<double>::infinity();
    int tick = -1;
    AgentId a = 0;
    AgentId b = 0;
};

/// Scan every sampled tick for the minimum pairwise distance among all agents
/// present at that tick, the robot included. Absent when no two agents ever
/// share a tick.
inline std::optional<SeparationScan> scan_min_separation(const EpisodeResult& result) {
    std::vector<const Trajectory*> trajs;
    std::vector<AgentId> ids;
    if (result.robot_present) {
        trajs.push_back(&result.robot_trajectory);
        ids.push_back(kRobotId);
    }
    for (std::size_t i = 0; i < result.walker_trajectories.size(); ++i) {
        trajs.push_back(&result.walker_trajectories[i]);
        ids.push_back(result.walker_ids[i]);
    }

    SeparationScan best;
    for (int tick = 0; tick <= result.final_tick; ++tick) {
        for (std::size_t i = 0; i < trajs.size(); ++i) {
            const auto pi = trajs[i]->position_at(tick);
            if (!pi) continue;
            for (std::size_t j = i + 1; j < trajs.size(); ++j) {
                const auto pj = trajs[j]->position_at(tick);
                if (!pj) continue;
                const double d = distance(*pi, *pj);
                if (d < best.min_distance) {
                    best.min_distance = d;
                    best.tick = tick;
                    best.a = ids[i];
                    best.b = ids[j];
                }
            }
        }
    }
    if (best.tick < 0) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------------------
// Episode log serialization
// ---------------------------------------------------------------------------

/// Tab-separated column names of the episode log, in file order.
inline const char* episode_log_columns() {
    return "tick\ttime\tagent\tkind\tx\ty\theading\tspeed\tbranch\tfeasible\tc_obs\t"
           "c_agents\tcost_goal\tcost_smooth\tcost_obs\tcost_total\tnash_cost\t"
           "decel_cost\tnash_feasible\tdecel_feasible";
}

namespace detail {

inline std::string format_log_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline double parse_log_double(const std::string& field, int line_no) {
    if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ParseError("episode log: bad number '" + field + "'", line_no);
    }
}

} // namespace detail

/**
 * @brief Write the log as tab-separated text: a comment carrying the
 * executive tick, the header row, then one row per agent per tick.
 *
 * Booleans are 0/1; costs that were never computed are "nan". Walker rows
 * carry "replay" in the branch column and nan costs.
 */
inline void write_episode_log(const EpisodeResult& result, std::ostream& out) {
    out << "# exec_dt " << detail::format_log_double(result.exec_dt) << "\n";
    out << episode_log_columns() << "\n";
    for (const auto& row : result.log) {
        out << row.tick << '\t' << detail::format_log_double(row.time) << '\t' << row.agent
            << '\t' << (row.kind == AgentKind::ControlledRobot ? "robot" : "human") << '\t'
            << detail::format_log_double(row.x) << '\t' << detail::format_log_double(row.y)
            << '\t' << detail::format_log_double(row.heading) << '\t'
            << detail::format_log_double(row.speed) << '\t' << row.branch << '\t'
            << (row.feasible ? 1 : 0) << '\t' << (row.c_obs ? 1 : 0) << '\t'
            << (row.c_agents ? 1 : 0) << '\t' << detail::format_log_double(row.cost_goal)
            << '\t' << detail::format_log_double(row.cost_smooth) << '\t'
            << detail::format_log_double(row.cost_obs) << '\t'
            << detail::format_log_double(row.cost_total) << '\t'
            << detail::format_log_double(row.nash_cost) << '\t'
            << detail::format_log_double(row.decel_cost) << '\t'
            << (row.nash_feasible ? 1 : 0) << '\t' << (row.decel_feasible ? 1 : 0) << '\n';
    }
}

/// A parsed episode log: the executive tick plus all rows in file order.
struct ParsedEpisodeLog {
    double exec_dt = 0.0;
    std::vector<EpisodeLogRow> rows;
};

/// Parse text produced by write_episode_log. Throws ParseError on malformed
/// lines, with the 1-based line number.
inline ParsedEpisodeLog read_episode_log(std::istream& in) {
    ParsedEpisodeLog parsed;
    std::string line;
    int line_no = 0;
    bool saw_exec_dt = false;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "exec_dt") {
                std::string value;
                ls >> value;
                parsed.exec_dt = detail::parse_log_double(value, line_no);
                saw_exec_dt = true;
            }
            continue;
        }
        if (!saw_header) {
            if (line != episode_log_columns())
                throw ParseError("episode log: unexpected header", line_no);
            saw_header = true;
            continue;
        }

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 20)
            throw ParseError("episode log: expected 20 columns, got " +
                                 std::to_string(fields.size()),
                             line_no);

        EpisodeLogRow row;
        try {
            row.tick = std::stoi(fields[0]);
            row.agent = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw ParseError("episode log: bad integer field", line_no);
        }
        row.time = detail::parse_log_double(fields[1], line_no);
        if (fields[3] == "robot")
            row.kind = AgentKind::ControlledRobot;
        else if (fields[3] == "human")
            row.kind = AgentKind::ScriptedHuman;
        else
            throw ParseError("episode log: bad kind '" + fields[3] + "'", line_no);
        row.x = detail::parse_log_double(fields[4], line_no);
        row.y = detail::parse_log_double(fields[5], line_no);
        row.heading = detail::parse_log_double(fields[6], line_no);
        row.speed = detail::parse_log_double(fields[7], line_no);
        row.branch = fields[8];
        row.feasible = fields[9] == "1";
        row.c_obs = fields[10] == "1";
        row.c_agents = fields[11] == "1";
        row.cost_goal = detail::parse_log_double(fields[12], line_no);
        row.cost_smooth = detail::parse_log_double(fields[13], line_no);
        row.cost_obs = detail::parse_log_double(fields[14], line_no);
        row.cost_total = detail::parse_log_double(fields[15], line_no);
        row.nash_cost = detail::parse_log_double(fields[16], line_no);
        row.decel_cost = detail::parse_log_double(fields[17], line_no);
        row.nash_feasible = fields[18] == "1";
        row.decel_feasible = fields[19] == "1";
        parsed.rows.push_back(row);
    }
    if (!saw_exec_dt) throw ParseError("episode log: missing exec_dt comment");
    if (!saw_header) throw ParseError("episode log: missing header row");
    return parsed;
}

/// Rebuild per-agent trajectories from parsed log rows. The robot, when
/// present, is returned under kRobotId.
inline std::vector<std::pair<AgentId, Trajectory>> trajectories_from_log(
    const ParsedEpisodeLog& parsed) {
    std::vector<std::pair<AgentId, Trajectory>> out;
    auto find = [&out](AgentId id) -> Trajectory& {
        for (auto& [existing, traj] : out)
            if (existing == id) return traj;
        out.emplace_back(id, Trajectory{});
        out.back().second.dt = 0.0;
        return out.back().second;
    };
    for (const auto& row : parsed.rows) {
        Trajectory& traj = find(row.agent);
        traj.dt = parsed.exec_dt;
        traj.samples.push_back({row.tick, {row.x, row.y}});
    }
    return out;
}

} // namespace gtnav
