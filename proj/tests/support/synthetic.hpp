#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gtnav/episode.hpp"

namespace test_support {

/// A generated crossing scene plus the facts tests assert against.
struct SyntheticScene {
    std::vector<gtnav::ReplayTrack> tracks;
    gtnav::Vec2 robot_start;
    gtnav::Vec2 robot_goal;
    double robot_speed = 1.0;
    gtnav::Vec2 world_min;
    gtnav::Vec2 world_max;

    double arena_diagonal() const { return gtnav::distance(world_min, world_max); }

    gtnav::EpisodeSetup setup() const {
        gtnav::EpisodeSetup s;
        s.tracks = tracks;
        s.robot_start = robot_start;
        s.robot_goal = robot_goal;
        s.robot_speed = robot_speed;
        return s;
    }
};

/**
 * @brief Seeded crossing scene: walkers on disjoint vertical lanes cut
 * across a horizontal robot corridor.
 *
 * Every walker moves in a straight line at constant speed. Lanes are spaced
 * at least 0.8 m apart in x, so walker-to-walker distance never drops below
 * 0.8 m regardless of timing; only robot-walker proximity is ever at stake.
 */
inline SyntheticScene crossing_scene(std::uint64_t seed, int walker_count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lane_jitter(0.0, 0.35);
    std::uniform_real_distribution<double> walker_speed(0.8, 1.3);
    std::uniform_real_distribution<double> cross_time(2.0, 6.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> robot_speed(1.0, 1.3);

    SyntheticScene scene;
    scene.world_min = {-1.0, -7.0};
    scene.world_max = {13.0, 7.0};
    scene.robot_start = {0.0, 0.0};
    scene.robot_goal = {12.0, 0.0};
    scene.robot_speed = robot_speed(rng);

    const double track_end = 24.0;
    for (int i = 0; i < walker_count; ++i) {
        // Lane slots 1.2 m wide starting at x = 2; jitter keeps at least
        // 0.8 m + something between neighboring lanes.
        const double lane_x = 2.0 + 1.2 * i + lane_jitter(rng);
        const double v = walker_speed(rng);
        const double tc = cross_time(rng);
        const double dir = coin(rng) == 0 ? 1.0 : -1.0;

        // y(t) = dir * v * (t - tc); keep the track inside |y| <= 6.5.
        const double half_window = 6.5 / v;
        const double t0 = std::max(0.0, tc - half_window);
        const double t1 = std::min(track_end, tc + half_window);

        gtnav::ReplayTrack track;
        track.id = i + 1;
        track.points.push_back({t0, {lane_x, dir * v * (t0 - tc)}});
        track.points.push_back({t1, {lane_x, dir * v * (t1 - tc)}});
        scene.tracks.push_back(std::move(track));
    }
    return scene;
}

} // namespace test_support
