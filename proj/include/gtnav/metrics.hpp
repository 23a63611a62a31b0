#pragma once

#include <span>

#include "gtnav/core.hpp"
#include "gtnav/geometry.hpp"

namespace gtnav {

/// Straight-line displacement over traveled path length, in (0, 1] for any
/// forward-moving path (1 for a perfectly straight one).
inline double path_length_ratio(const Trajectory& traj) {
    if (traj.samples.size() < 2)
        throw MetricError("path_length_ratio: need at least 2 samples");
    double length = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
        length += distance(traj.samples[i - 1].position, traj.samples[i].position);
    if (length <= 0.0)
        throw MetricError("path_length_ratio: zero path length");
    return distance(traj.samples.front().position, traj.samples.back().position) / length;
}

/**
 * @brief How straight the path is: 1 minus the mean normalized turn.
 *
 * Consecutive duplicate positions (e.g. a stopped robot) are collapsed
 * first, since a zero-length segment has no direction. With n distinct
 * points, PR = 1 - sum of |wrapped turn angle| at the n-2 interior points
 * divided by pi*(n-2), clamped to [0,1]. A collinear forward path scores 1;
 * a full reversal at every interior point scores 0.
 */
inline double path_regularity(const Trajectory& traj) {
    if (traj.samples.size() < 3)
        throw MetricError("path_regularity: need at least 3 samples");
    std::vector<Vec2> pts;
    pts.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
        if (pts.empty() || !(pts.back() == s.position)) pts.push_back(s.position);
    if (pts.size() < 3)
        throw MetricError("path_regularity: fewer than 3 distinct positions");

    double turn_sum = 0.0;
    double prev_dir = bearing(pts[0], pts[1]);
    for (std::size_t i = 2; i < pts.size(); ++i) {
        const double dir = bearing(pts[i - 1], pts[i]);
        turn_sum += std::abs(angle_diff(dir, prev_dir));
        prev_dir = dir;
    }
    const double pr = 1.0 - turn_sum / (kPi * static_cast<double>(pts.size() - 2));
    return std::clamp(pr, 0.0, 1.0);
}

/**
 * @brief Closest approach to any pedestrian, normalized by the arena
 * diagonal.
 *
 * The minimum is taken over every tick the robot trajectory shares with a
 * pedestrian trajectory; values near 1 mean the robot stayed far from
 * everyone.
 */
inline double closest_pedestrian_distance(const Trajectory& robot,
                                          std::span<const Trajectory> pedestrians,
                                          double arena_diagonal) {
    if (pedestrians.empty())
        throw MetricError("closest_pedestrian_distance: no pedestrian trajectories");
    if (!(arena_diagonal > 0.0))
        throw MetricError("closest_pedestrian_distance: arena diagonal must be > 0");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sample : robot.samples) {
        for (const auto& ped : pedestrians) {
            const auto p = ped.position_at(sample.tick);
            if (p) best = std::min(best, distance(sample.position, *p));
        }
    }
    if (!std::isfinite(best))
        throw MetricError("closest_pedestrian_distance: no shared ticks with any pedestrian");
    return best / arena_diagonal;
}

} // namespace gtnav
