#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gtnav/config.hpp"
#include "gtnav/episode.hpp"
#include "gtnav/errors.hpp"
#include "gtnav/obstacle_grid.hpp"

namespace gtnav {

/// Supported recording layouts. FrameTable rows are (frame, id, x, y);
/// ObsmatLike rows are the 8-column annotation layout (frame, id, x, _, y,
/// _, _, _) common for surveillance trajectory releases.
enum class TrackFormat { FrameTable, ObsmatLike };

inline const char* track_format_name(TrackFormat f) {
    return f == TrackFormat::FrameTable ? "frame_table" : "obsmat";
}

inline TrackFormat track_format_from_name(const std::string& name) {
    if (name == "frame_table") return TrackFormat::FrameTable;
    if (name == "obsmat") return TrackFormat::ObsmatLike;
    throw ConfigError("unknown track format '" + name + "'");
}

/// Ingested replay tracks plus anything worth telling the user about.
struct IngestResult {
    std::vector<ReplayTrack> tracks;
    std::vector<std::string> warnings;
    /// Raw frame number that became time 0.
    long long base_frame = 0;
};

namespace detail {

struct RawTrackPoint {
    long long frame = 0;
    Vec2 position;
    int line = 0;
};

inline std::vector<std::string> split_whitespace(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string field;
    while (in >> field) fields.push_back(field);
    return fields;
}

inline double parse_track_number(const std::string& field, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        if (!std::isfinite(v)) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ParseError("tracks: not a number: '" + field + "'", line_no);
    }
}

inline long long parse_track_integer(const std::string& field, const char* what, int line_no) {
    const double v = parse_track_number(field, line_no);
    const double rounded = std::round(v);
    if (std::abs(v - rounded) > 1e-6)
        throw ParseError("tracks: " + std::string(what) + " must be an integer, got '" +
                             field + "'",
                         line_no);
    return static_cast<long long>(rounded);
}

/// Insert linearly interpolated points into gaps that are whole multiples of
/// the agent's smallest frame step, so a skipped annotation row becomes an
/// explicit midpoint.
inline void fill_frame_gaps(std::vector<RawTrackPoint>& points) {
    if (points.size() < 2) return;
    long long step = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const long long delta = points[i].frame - points[i - 1].frame;
        if (step == 0 || delta < step) step = delta;
    }
    if (step <= 0) return;
    std::vector<RawTrackPoint> filled;
    filled.push_back(points.front());
    for (std::size_t i = 1; i < points.size(); ++i) {
        const RawTrackPoint& a = points[i - 1];
        const RawTrackPoint& b = points[i];
        const long long delta = b.frame - a.frame;
        if (delta > step && delta % step == 0) {
            const long long missing = delta / step - 1;
            for (long long k = 1; k <= missing; ++k) {
                const double alpha =
                    static_cast<double>(k) / static_cast<double>(missing + 1);
                RawTrackPoint mid;
                mid.frame = a.frame + k * step;
                mid.position = {a.position.x + (b.position.x - a.position.x) * alpha,
                                a.position.y + (b.position.y - a.position.y) * alpha};
                filled.push_back(mid);
            }
        }
        filled.push_back(b);
    }
    points = std::move(filled);
}

} // namespace detail

/**
 * @brief Read replay tracks from annotation text.
 *
 * Rows are whitespace-separated with '#' comments; the column layout is set
 * by the format. Positions are multiplied by scale, the file's smallest
 * frame number becomes time 0, and each frame advances time by frame_dt.
 * Per-agent rows are sorted by frame; gaps that are whole multiples of the
 * agent's frame step are filled by linear interpolation; agents with a
 * single row are dropped with a warning.
 */
inline IngestResult ingest_tracks(std::istream& in, TrackFormat format, double scale,
                                  double frame_dt) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("ingest_tracks: scale must be positive");
    if (!(frame_dt > 0.0) || !std::isfinite(frame_dt))
        throw DomainError("ingest_tracks: frame_dt must be positive");

    const std::size_t expected_fields = format == TrackFormat::FrameTable ? 4 : 8;
    const std::size_t x_index = 2;
    const std::size_t y_index = format == TrackFormat::FrameTable ? 3 : 4;

    std::map<AgentId, std::vector<detail::RawTrackPoint>> raw;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto fields = detail::split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != expected_fields)
            throw ParseError("tracks: expected " + std::to_string(expected_fields) +
                                 " columns, got " + std::to_string(fields.size()),
                             line_no);

        detail::RawTrackPoint point;
        point.frame = detail::parse_track_integer(fields[0], "frame", line_no);
        const long long id = detail::parse_track_integer(fields[1], "agent id", line_no);
        if (id < 0 || id >= kGroupIdBase)
            throw ParseError("tracks: agent id " + std::to_string(id) + " out of range",
                             line_no);
        point.position.x = detail::parse_track_number(fields[x_index], line_no) * scale;
        point.position.y = detail::parse_track_number(fields[y_index], line_no) * scale;
        point.line = line_no;
        raw[static_cast<AgentId>(id)].push_back(point);
    }

    IngestResult result;
    if (raw.empty()) return result;

    long long base_frame = raw.begin()->second.front().frame;
    for (const auto& [id, points] : raw)
        for (const auto& p : points) base_frame = std::min(base_frame, p.frame);
    result.base_frame = base_frame;

    for (auto& [id, points] : raw) {
        std::stable_sort(points.begin(), points.end(),
                         [](const auto& a, const auto& b) { return a.frame < b.frame; });
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].frame == points[i - 1].frame)
                throw ParseError("tracks: agent " + std::to_string(id) +
                                     " has two rows for frame " +
                                     std::to_string(points[i].frame),
                                 points[i].line);
        detail::fill_frame_gaps(points);
        if (points.size() < 2) {
            result.warnings.push_back("agent " + std::to_string(id) +
                                      ": single frame, dropped");
            continue;
        }
        ReplayTrack track;
        track.id = id;
        track.points.reserve(points.size());
        for (const auto& p : points)
            track.points.push_back(
                {static_cast<double>(p.frame - base_frame) * frame_dt, p.position});
        validate(track);
        result.tracks.push_back(std::move(track));
    }
    return result;
}

inline IngestResult ingest_tracks_file(const std::string& path, TrackFormat format,
                                       double scale, double frame_dt) {
    std::ifstream in(path);
    if (!in) throw ConfigError("tracks: cannot open '" + path + "'");
    return ingest_tracks(in, format, scale, frame_dt);
}

/**
 * @brief Write tracks back out in an ingestible format.
 *
 * Positions are divided by scale and times by frame_dt, the inverse of
 * ingestion; coordinates are printed with enough digits that a round trip
 * reproduces them to well under 1e-9 m.
 */
inline void write_tracks(std::ostream& out, std::span<const ReplayTrack> tracks,
                         TrackFormat format, double scale, double frame_dt,
                         long long base_frame = 0) {
    if (!(scale > 0.0)) throw DomainError("write_tracks: scale must be positive");
    if (!(frame_dt > 0.0)) throw DomainError("write_tracks: frame_dt must be positive");
    char buf[128];
    for (const auto& track : tracks) {
        for (const auto& p : track.points) {
            const long long frame = base_frame + std::llround(p.time / frame_dt);
            const double x = p.position.x / scale;
            const double y = p.position.y / scale;
            if (format == TrackFormat::FrameTable)
                std::snprintf(buf, sizeof buf, "%lld\t%d\t%.17g\t%.17g\n", frame, track.id,
                              x, y);
            else
                std::snprintf(buf, sizeof buf, "%lld %d %.17g 0 %.17g 0 0 0\n", frame,
                              track.id, x, y);
            out << buf;
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/**
 * @brief One configured experiment world: bounds, static grid, recorded
 * walkers, and the optional robot mission.
 *
 * robot_speed 0 defers to the mean walker speed at episode time.
 */
struct Scenario {
    std::string name;
    Vec2 world_min;
    Vec2 world_max;
    std::optional<ObstacleGrid> grid;
    std::vector<ReplayTrack> tracks;
    std::optional<Vec2> robot_start;
    std::optional<Vec2> robot_goal;
    double robot_speed = 0.0;
    double scale = 1.0;
    double frame_dt = 1.0;
    std::vector<std::string> warnings;

    double arena_diagonal() const { return distance(world_min, world_max); }

    bool has_robot_mission() const {
        return robot_start.has_value() && robot_goal.has_value();
    }

    /// Episode inputs backed by this scenario. The returned setup borrows the
    /// grid, so the scenario must outlive it.
    EpisodeSetup setup() const {
        EpisodeSetup s;
        s.tracks = tracks;
        s.grid = grid ? &*grid : nullptr;
        s.robot_start = robot_start;
        s.robot_goal = robot_goal;
        s.robot_speed = robot_speed;
        return s;
    }
};

namespace detail {

inline bool inside_rect(const Vec2& p, const Vec2& lo, const Vec2& hi, double slack) {
    return p.x >= lo.x - slack && p.x <= hi.x + slack && p.y >= lo.y - slack &&
           p.y <= hi.y + slack;
}

} // namespace detail

inline void validate(const Scenario& scenario) {
    if (scenario.name.empty()) throw ConfigError("scenario: name must not be empty");
    require_finite(scenario.world_min, "scenario world_min");
    require_finite(scenario.world_max, "scenario world_max");
    if (!(scenario.world_min.x < scenario.world_max.x) ||
        !(scenario.world_min.y < scenario.world_max.y))
        throw ConfigError("scenario: world bounds must satisfy min < max on both axes");
    if (!(scenario.scale > 0.0)) throw ConfigError("scenario: scale must be positive");
    if (!(scenario.frame_dt > 0.0)) throw ConfigError("scenario: frame_dt must be positive");
    if (!(scenario.robot_speed >= 0.0) || !std::isfinite(scenario.robot_speed))
        throw ConfigError("scenario: robot speed must be finite and nonnegative");

    for (const auto& track : scenario.tracks) {
        validate(track);
        for (const auto& p : track.points) {
            if (!detail::inside_rect(p.position, scenario.world_min, scenario.world_max,
                                     1e-9))
                throw ConfigError("scenario: agent " + std::to_string(track.id) +
                                  " leaves the world bounds");
            if (scenario.grid &&
                !detail::inside_rect(p.position, scenario.grid->extent_min(),
                                     scenario.grid->extent_max(), 1e-9))
                throw ConfigError("scenario: agent " + std::to_string(track.id) +
                                  " leaves the obstacle grid");
        }
    }

    if (scenario.robot_start.has_value() != scenario.robot_goal.has_value())
        throw ConfigError("scenario: robot start and goal must be given together");
    if (scenario.has_robot_mission()) {
        require_finite(*scenario.robot_start, "scenario robot start");
        require_finite(*scenario.robot_goal, "scenario robot goal");
        if (distance(*scenario.robot_start, *scenario.robot_goal) <= 1e-9)
            throw ConfigError("scenario: robot start and goal coincide");
        if (!detail::inside_rect(*scenario.robot_start, scenario.world_min,
                                 scenario.world_max, 1e-9) ||
            !detail::inside_rect(*scenario.robot_goal, scenario.world_min,
                                 scenario.world_max, 1e-9))
            throw ConfigError("scenario: robot mission leaves the world bounds");
    }
}

namespace detail {

inline void reject_unknown_keys(const ConfigDoc& doc,
                                std::span<const std::string> allowed,
                                const char* context = "scenario config") {
    for (const auto& [key, value] : doc.values) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
    }
}

inline std::string resolve_path(const std::string& file, const std::string& base_dir) {
    const std::filesystem::path p(file);
    if (p.is_absolute() || base_dir.empty()) return file;
    return (std::filesystem::path(base_dir) / p).string();
}

} // namespace detail

/**
 * @brief Build a scenario from a parsed config document.
 *
 * Referenced files are resolved relative to base_dir. fallback_name is used
 * when the config gives no name (the loader passes the file stem).
 */
inline Scenario scenario_from_config(const ConfigDoc& doc, const std::string& base_dir,
                                     const std::string& fallback_name) {
    static const std::vector<std::string> allowed{
        "name",        "scale",       "frame_dt",   "world.min",   "world.max",
        "tracks.file", "tracks.format", "grid.file", "robot.start", "robot.goal",
        "robot.speed",
    };
    detail::reject_unknown_keys(doc, allowed);

    Scenario scenario;
    scenario.name = doc.get_string_or("name", fallback_name);
    scenario.world_min = doc.get_vec2("world.min");
    scenario.world_max = doc.get_vec2("world.max");
    scenario.scale = doc.get_double_or("scale", 1.0);
    scenario.frame_dt = doc.get_double_or("frame_dt", 1.0);

    if (doc.has("tracks.file")) {
        if (!doc.has("scale") || !doc.has("frame_dt"))
            throw ConfigError(
                "scenario config: scale and frame_dt are required with a tracks file");
        const TrackFormat format =
            track_format_from_name(doc.get_string_or("tracks.format", "frame_table"));
        IngestResult ingested =
            ingest_tracks_file(detail::resolve_path(doc.get_string("tracks.file"), base_dir),
                               format, scenario.scale, scenario.frame_dt);
        scenario.tracks = std::move(ingested.tracks);
        scenario.warnings = std::move(ingested.warnings);
    }

    if (doc.has("grid.file"))
        scenario.grid = ObstacleGrid::load_file(
            detail::resolve_path(doc.get_string("grid.file"), base_dir));

    if (doc.has("robot.start") || doc.has("robot.goal")) {
        if (!doc.has("robot.start") || !doc.has("robot.goal"))
            throw ConfigError("scenario config: robot start and goal must be given together");
        scenario.robot_start = doc.get_vec2("robot.start");
        scenario.robot_goal = doc.get_vec2("robot.goal");
        scenario.robot_speed = doc.get_double_or("robot.speed", 0.0);
    }

    validate(scenario);
    return scenario;
}

/// Load and validate a scenario from a config file; relative file references
/// inside it are resolved against the config's directory.
inline Scenario load_scenario(const std::string& path) {
    const ConfigDoc doc = parse_config_file(path);
    const std::filesystem::path p(path);
    return scenario_from_config(doc, p.parent_path().string(), p.stem().string());
}

} // namespace gtnav
