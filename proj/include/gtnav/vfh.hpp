#pragma once

#include <optional>

#include "gtnav/core.hpp"
#include "gtnav/obstacle_grid.hpp"

namespace gtnav {

/// Tuning of the reactive histogram planner.
struct VfhConfig {
    double active_window_radius = 3.0;
    int sector_count = 72;
    /// Hysteresis thresholds on sector magnitude: above high blocks, below
    /// low frees, in between the previous state is kept.
    double threshold_low = 0.15;
    double threshold_high = 0.30;
    double robot_radius = 0.3;
    double safety_margin = 0.0;
    /// Radius of the disc each other agent occupies in the histogram.
    double agent_disc_radius = 0.6;
    /// Valleys wider than this many sectors are "wide": their edge
    /// candidates sit half this span inside the valley.
    int wide_valley_span = 16;
    double weight_target = 5.0;
    double weight_current = 2.0;
    double weight_previous = 2.0;
    /// Kinematic masking stage; off by default (holonomic agent).
    bool use_masked_stage = false;
    double turning_radius = 0.0;

    double sector_width() const { return 2.0 * kPi / sector_count; }
};

inline void validate(const VfhConfig& cfg) {
    if (cfg.sector_count <= 0) throw DomainError("VfhConfig: sector_count must be positive");
    if (!(cfg.active_window_radius > 0.0))
        throw DomainError("VfhConfig: active_window_radius must be > 0");
    if (cfg.threshold_low > cfg.threshold_high)
        throw DomainError("VfhConfig: threshold_low must not exceed threshold_high");
    if (cfg.weight_target < 0.0 || cfg.weight_current < 0.0 || cfg.weight_previous < 0.0)
        throw DomainError("VfhConfig: steering weights must be nonnegative");
    if (cfg.robot_radius < 0.0 || cfg.safety_margin < 0.0 || cfg.agent_disc_radius < 0.0)
        throw DomainError("VfhConfig: radii must be nonnegative");
    if (cfg.wide_valley_span < 1) throw DomainError("VfhConfig: wide_valley_span must be >= 1");
}

/// Polar obstacle density around the robot, in three stages.
struct PolarHistogram {
    int sector_count = 0;
    double sector_width = 0.0;
    std::vector<double> magnitudes;
    std::vector<std::uint8_t> binary; // 1 = blocked
    std::vector<std::uint8_t> masked; // 1 = blocked

    int sector_of(double angle) const {
        double a = std::fmod(angle, 2.0 * kPi);
        if (a < 0.0) a += 2.0 * kPi;
        int k = static_cast<int>(a / sector_width);
        return std::min(k, sector_count - 1);
    }

    double sector_center(int k) const { return (k + 0.5) * sector_width; }

    bool all_blocked() const {
        for (auto b : masked)
            if (!b) return false;
        return true;
    }
};

/// A point obstacle with an effective radius (grid cells have radius 0,
/// agents their disc radius).
struct VfhObstacle {
    Vec2 position;
    double radius = 0.0;
};

/// Collect histogram obstacles: occupied cells and agent discs whose centers
/// lie inside the active window.
inline std::vector<VfhObstacle> gather_vfh_obstacles(const Vec2& robot_pos,
                                                     std::span<const AgentState> agents,
                                                     const ObstacleGrid* grid,
                                                     const VfhConfig& cfg) {
    std::vector<VfhObstacle> out;
    const double R = cfg.active_window_radius;
    if (grid && !grid->empty()) {
        const auto [cx0, cy0] = grid->cell_of(robot_pos - Vec2(R, R));
        const auto [cx1, cy1] = grid->cell_of(robot_pos + Vec2(R, R));
        for (int cy = std::max(cy0, 0); cy <= std::min(cy1, grid->height_cells() - 1); ++cy)
            for (int cx = std::max(cx0, 0); cx <= std::min(cx1, grid->width_cells() - 1); ++cx)
                if (grid->occupied(cx, cy)) {
                    const Vec2 c = grid->cell_center(cx, cy);
                    if (distance(c, robot_pos) <= R) out.push_back({c, 0.0});
                }
    }
    for (const auto& a : agents)
        if (distance(a.position, robot_pos) <= R)
            out.push_back({a.position, cfg.agent_disc_radius});
    return out;
}

/**
 * @brief Build the three-stage polar histogram around the robot.
 *
 * Each obstacle point inside the active window contributes magnitude
 * 1 - (d/R)^2 to every sector within its enlarged angular width
 * asin((robot radius + safety margin + obstacle radius)/d), clamped to a
 * half circle when the obstacle overlaps the robot. The binary stage applies
 * hysteresis against the previous binary stage when given (mid-band sectors
 * stay blocked on the first tick). The masked stage restricts steering to
 * the arc reachable at the configured turning radius; with masking disabled
 * it equals the binary stage.
 */
inline PolarHistogram build_histogram(const AgentState& robot,
                                      std::span<const VfhObstacle> obstacles,
                                      const VfhConfig& cfg,
                                      const PolarHistogram* previous = nullptr) {
    validate(cfg);
    PolarHistogram hist;
    hist.sector_count = cfg.sector_count;
    hist.sector_width = cfg.sector_width();
    hist.magnitudes.assign(static_cast<std::size_t>(cfg.sector_count), 0.0);
    hist.binary.assign(static_cast<std::size_t>(cfg.sector_count), 0);
    hist.masked.assign(static_cast<std::size_t>(cfg.sector_count), 0);

    const double R = cfg.active_window_radius;
    for (const auto& obs : obstacles) {
        const double d = distance(obs.position, robot.position);
        if (d > R) continue;
        const double magnitude = std::max(0.0, 1.0 - (d * d) / (R * R));
        const double enlarge = cfg.robot_radius + cfg.safety_margin + obs.radius;
        const double ratio = d > 1e-12 ? std::min(1.0, enlarge / d) : 1.0;
        const double gamma = std::asin(ratio);
        const double phi = d > 1e-12 ? bearing(robot.position, obs.position) : robot.heading;
        const int phi_sector = hist.sector_of(phi);
        for (int k = 0; k < cfg.sector_count; ++k) {
            const double delta = std::abs(angle_diff(hist.sector_center(k), phi));
            if (delta <= gamma || k == phi_sector)
                hist.magnitudes[static_cast<std::size_t>(k)] += magnitude;
        }
    }

    for (int k = 0; k < cfg.sector_count; ++k) {
        const double m = hist.magnitudes[static_cast<std::size_t>(k)];
        std::uint8_t state;
        if (m > cfg.threshold_high) {
            state = 1;
        } else if (m < cfg.threshold_low) {
            state = 0;
        } else if (previous && previous->sector_count == cfg.sector_count) {
            state = previous->binary[static_cast<std::size_t>(k)];
        } else {
            state = 1;
        }
        hist.binary[static_cast<std::size_t>(k)] = state;
    }

    hist.masked = hist.binary;
    if (cfg.use_masked_stage && cfg.turning_radius > 0.0) {
        const double r_t = cfg.turning_radius;
        const Vec2 left_center =
            robot.position + r_t * heading_vector(robot.heading + kPi / 2.0);
        const Vec2 right_center =
            robot.position + r_t * heading_vector(robot.heading - kPi / 2.0);
        double left_limit = kPi;
        double right_limit = kPi;
        for (const auto& obs : obstacles) {
            const double d = distance(obs.position, robot.position);
            if (d > R) continue;
            const double block_radius = r_t + cfg.robot_radius + cfg.safety_margin + obs.radius;
            const double offset = angle_diff(bearing(robot.position, obs.position), robot.heading);
            if (offset >= 0.0 && distance(obs.position, left_center) < block_radius)
                left_limit = std::min(left_limit, offset);
            if (offset <= 0.0 && distance(obs.position, right_center) < block_radius)
                right_limit = std::min(right_limit, -offset);
        }
        for (int k = 0; k < cfg.sector_count; ++k) {
            const double offset = angle_diff(hist.sector_center(k), robot.heading);
            if (offset > left_limit || offset < -right_limit)
                hist.masked[static_cast<std::size_t>(k)] = 1;
        }
    }
    return hist;
}

namespace detail {

struct SteeringCandidate {
    double direction = 0.0;
};

} // namespace detail

/**
 * @brief Pick a steering direction from the free valleys of the histogram.
 *
 * Candidates are, per free valley: both edges pulled half the wide-valley
 * span inward (clamped to the valley), the valley center, and the target
 * direction when its sector lies inside the valley. The winner minimizes
 * weight_target * |d(target)| + weight_current * |d(current)| +
 * weight_previous * |d(previous)| with wrapped differences; ties resolve by
 * smaller target deviation, then current-heading deviation, then angle.
 * Returns nullopt when every sector is blocked (stop).
 */
inline std::optional<double> select_steering(const PolarHistogram& hist, double target_dir,
                                             double current_heading, double previous_steering,
                                             const VfhConfig& cfg) {
    const int n = hist.sector_count;
    if (n <= 0) throw DomainError("select_steering: empty histogram");
    if (hist.all_blocked()) return std::nullopt;

    bool all_free = true;
    for (int k = 0; k < n; ++k)
        if (hist.masked[static_cast<std::size_t>(k)]) all_free = false;

    std::vector<double> candidates;
    auto push_sector_angle = [&](double sector_idx) {
        candidates.push_back(normalize_angle((sector_idx + 0.5) * hist.sector_width));
    };

    if (all_free) {
        candidates.push_back(normalize_angle(target_dir));
    } else {
        // Enumerate maximal circular runs of free sectors.
        int start = -1;
        for (int k = 0; k < n; ++k)
            if (hist.masked[static_cast<std::size_t>(k)] &&
                !hist.masked[static_cast<std::size_t>((k + 1) % n)]) {
                start = (k + 1) % n;
                break;
            }
        int k = start;
        while (true) {
            int len = 0;
            while (!hist.masked[static_cast<std::size_t>((k + len) % n)]) ++len;
            const double half_span = std::min(cfg.wide_valley_span / 2.0, (len - 1) / 2.0);
            push_sector_angle(k + half_span);
            push_sector_angle(k + (len - 1) - half_span);
            push_sector_angle(k + (len - 1) / 2.0);
            const int target_sector = hist.sector_of(target_dir);
            const int rel = ((target_sector - k) % n + n) % n;
            if (rel < len) candidates.push_back(normalize_angle(target_dir));
            k = (k + len) % n;
            while (hist.masked[static_cast<std::size_t>(k)]) k = (k + 1) % n;
            if (k == start) break;
        }
    }

    double best_dir = candidates.front();
    double best_cost = std::numeric_limits<double>::infinity();
    double best_dt = std::numeric_limits<double>::infinity();
    double best_dc = std::numeric_limits<double>::infinity();
    for (double c : candidates) {
        const double dt = std::abs(angle_diff(c, target_dir));
        const double dc = std::abs(angle_diff(c, current_heading));
        const double dp = std::abs(angle_diff(c, previous_steering));
        const double cost = cfg.weight_target * dt + cfg.weight_current * dc +
                            cfg.weight_previous * dp;
        const bool better =
            cost < best_cost ||
            (cost == best_cost &&
             (dt < best_dt || (dt == best_dt && (dc < best_dc || (dc == best_dc && c < best_dir)))));
        if (better) {
            best_cost = cost;
            best_dt = dt;
            best_dc = dc;
            best_dir = c;
        }
    }
    return best_dir;
}

/// Carry-over between reactive ticks: last binary stage (for hysteresis) and
/// last commanded direction (for the steering cost).
struct VfhState {
    std::optional<PolarHistogram> previous_histogram;
    std::optional<double> previous_steering;
};

/// The executed command of one reactive tick.
struct VfhCommand {
    double heading = 0.0;
    double speed = 0.0;
    bool stopped = false;
};

/**
 * @brief One reactive step: histogram, steering selection, command.
 *
 * Steers toward the goal bearing at the robot's configured speed; an
 * all-blocked histogram stops the robot in place (speed 0, heading kept).
 */
inline VfhCommand vfh_tick(const AgentState& robot, const Vec2& goal,
                           std::span<const AgentState> walkers, const ObstacleGrid* grid,
                           VfhState& state, const VfhConfig& cfg) {
    const auto obstacles = gather_vfh_obstacles(robot.position, walkers, grid, cfg);
    const PolarHistogram hist = build_histogram(
        robot, obstacles, cfg,
        state.previous_histogram ? &*state.previous_histogram : nullptr);
    const double target = distance(robot.position, goal) > 1e-12
                              ? bearing(robot.position, goal)
                              : robot.heading;
    const double previous = state.previous_steering.value_or(robot.heading);
    const auto steering = select_steering(hist, target, robot.heading, previous, cfg);

    state.previous_histogram = hist;
    VfhCommand cmd;
    if (!steering) {
        cmd.heading = robot.heading;
        cmd.speed = 0.0;
        cmd.stopped = true;
        return cmd;
    }
    state.previous_steering = *steering;
    cmd.heading = *steering;
    cmd.speed = robot.speed;
    return cmd;
}

} // namespace gtnav
