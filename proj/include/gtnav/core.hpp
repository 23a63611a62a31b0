#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gtnav/geometry.hpp"

namespace gtnav {

enum class AgentKind { ScriptedHuman, ControlledRobot };

using AgentId = int;

/// Reserved id for the planner-controlled agent in simulated episodes.
inline constexpr AgentId kRobotId = -1;

/**
 * @brief Snapshot of one agent at one tick.
 *
 * heading is normalized to (-pi, pi], speed is nonnegative m/s.
 */
struct AgentState {
    AgentId id = 0;
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    AgentKind kind = AgentKind::ScriptedHuman;
    std::optional<int> group;
};

inline void validate(const AgentState& s) {
    require_finite(s.position, "AgentState.position");
    require_finite(s.heading, "AgentState.heading");
    if (s.heading <= -kPi - 1e-12 || s.heading > kPi + 1e-12)
        throw DomainError("AgentState.heading: not normalized to (-pi, pi]");
    if (!(s.speed >= 0.0)) throw DomainError("AgentState.speed: negative or NaN");
}

/// Per-step weights favoring the goal term late in the horizon. The
/// four-step schedule is the tuned default; other horizons interpolate
/// linearly between 0.6 and 1.0.
inline std::vector<double> default_gamma(int horizon_T) {
    if (horizon_T == 4) return {0.6, 0.7, 0.8, 1.0};
    std::vector<double> g(static_cast<std::size_t>(horizon_T));
    if (horizon_T == 1) {
        g[0] = 1.0;
        return g;
    }
    for (int t = 0; t < horizon_T; ++t)
        g[static_cast<std::size_t>(t)] = 0.6 + 0.4 * static_cast<double>(t) / (horizon_T - 1);
    return g;
}

inline std::vector<double> default_action_set() {
    return {-kPi / 2, -kPi / 3, -kPi / 6, 0.0, kPi / 6, kPi / 3, kPi / 2};
}

/**
 * @brief All model parameters of the navigation game.
 *
 * - dt: duration of one decision step (s)
 * - horizon_T: number of steps in a plan
 * - beta: vital-space radius every pair of agents must keep (m)
 * - rho: weight of the static-obstacle proximity cost
 * - gamma: horizon_T per-step weights in [0,1] trading goal progress
 *   against smoothness
 * - action_set: admissible per-step heading offsets (rad), symmetric
 *   about 0 and containing 0
 * - collision_substeps: samples per step used when checking the hard
 *   constraints (1 = step endpoints only, 2 adds the midpoint)
 */
struct GameConfig {
    double dt = 1.2;
    int horizon_T = 4;
    double beta = 0.6;
    double rho = 1.0;
    std::vector<double> gamma = {0.6, 0.7, 0.8, 1.0};
    std::vector<double> action_set = default_action_set();
    int max_br_iterations = 20;
    double replan_hz = 2.0;

    double group_heading_tolerance = kPi / 6;
    int collision_substeps = 1;
    double goal_tolerance = 0.3;

    /// Interval between successive replans (the executive tick).
    double replan_interval() const { return 1.0 / replan_hz; }
};

inline void validate(const GameConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw DomainError("GameConfig.dt must be > 0");
    if (cfg.horizon_T < 1) throw DomainError("GameConfig.horizon_T must be >= 1");
    if (!(cfg.beta > 0.0)) throw DomainError("GameConfig.beta must be > 0");
    if (cfg.gamma.size() != static_cast<std::size_t>(cfg.horizon_T))
        throw DomainError("GameConfig.gamma length must equal horizon_T");
    for (double g : cfg.gamma)
        if (!(g >= 0.0 && g <= 1.0)) throw DomainError("GameConfig.gamma entries must lie in [0,1]");
    if (!(cfg.replan_hz > 0.0)) throw DomainError("GameConfig.replan_hz must be > 0");
    if (cfg.max_br_iterations < 1) throw DomainError("GameConfig.max_br_iterations must be >= 1");
    if (cfg.collision_substeps < 1) throw DomainError("GameConfig.collision_substeps must be >= 1");
    bool has_zero = false;
    for (double u : cfg.action_set) {
        require_finite(u, "GameConfig.action_set");
        if (u == 0.0) has_zero = true;
        bool mirrored = false;
        for (double w : cfg.action_set)
            if (std::abs(w + u) <= 1e-12) mirrored = true;
        if (!mirrored) throw DomainError("GameConfig.action_set must be symmetric about 0");
    }
    if (!has_zero) throw DomainError("GameConfig.action_set must contain 0");
}

/**
 * @brief A length-T sequence of absolute headings plus per-step speed factors.
 *
 * Consecutive headings differ by a member of the configured action set;
 * speed factors are 1 unless produced by a deceleration pattern.
 */
struct ActionPlan {
    std::vector<double> headings;
    std::vector<double> speed_factors;

    static ActionPlan straight(double heading, int horizon_T) {
        ActionPlan p;
        p.headings.assign(static_cast<std::size_t>(horizon_T), normalize_angle(heading));
        p.speed_factors.assign(static_cast<std::size_t>(horizon_T), 1.0);
        return p;
    }

    /// Builds a plan from per-step heading offsets applied to start_heading.
    static ActionPlan from_offsets(double start_heading, std::span<const double> offsets) {
        ActionPlan p;
        p.headings.reserve(offsets.size());
        double h = start_heading;
        for (double u : offsets) {
            h = normalize_angle(h + u);
            p.headings.push_back(h);
        }
        p.speed_factors.assign(offsets.size(), 1.0);
        return p;
    }

    bool operator==(const ActionPlan& o) const = default;
};

inline bool action_set_contains(const GameConfig& cfg, double offset) {
    for (double u : cfg.action_set)
        if (std::abs(angle_diff(offset, u)) <= 1e-9) return true;
    return false;
}

/// Checks lengths and that every heading-to-heading offset (including the
/// first one relative to start_heading) is a member of the action set.
inline bool plan_is_valid(const ActionPlan& plan, double start_heading, const GameConfig& cfg) {
    const auto T = static_cast<std::size_t>(cfg.horizon_T);
    if (plan.headings.size() != T || plan.speed_factors.size() != T) return false;
    double prev = start_heading;
    for (std::size_t k = 0; k < T; ++k) {
        if (!action_set_contains(cfg, angle_diff(plan.headings[k], prev))) return false;
        if (!(plan.speed_factors[k] >= 0.0 && plan.speed_factors[k] <= 1.0)) return false;
        prev = plan.headings[k];
    }
    return true;
}

struct TrajectorySample {
    int tick = 0;
    Vec2 position;
};

/**
 * @brief Positions of one agent sampled at strictly increasing ticks.
 */
struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 1.0;

    std::optional<Vec2> position_at(int tick) const {
        for (const auto& s : samples)
            if (s.tick == tick) return s.position;
        return std::nullopt;
    }

    int first_tick() const { return samples.empty() ? 0 : samples.front().tick; }
    int last_tick() const { return samples.empty() ? -1 : samples.back().tick; }
};

/**
 * @brief One constant-heading, constant-speed motion step.
 *
 * Returns pos + speed*dt*(cos heading, sin heading).
 */
inline Vec2 step_kinematics(const Vec2& pos, double heading, double speed, double dt) {
    require_finite(pos, "step_kinematics.pos");
    require_finite(heading, "step_kinematics.heading");
    require_finite(speed, "step_kinematics.speed");
    require_finite(dt, "step_kinematics.dt");
    if (!(dt > 0.0)) throw DomainError("step_kinematics: dt must be > 0");
    if (!(speed >= 0.0)) throw DomainError("step_kinematics: speed must be >= 0");
    return pos + speed * dt * heading_vector(heading);
}

/**
 * @brief Rolls a plan out from a start state.
 *
 * Produces horizon_T + 1 positions at ticks 0..horizon_T; step k moves at
 * start.speed * plan.speed_factors[k] along plan.headings[k].
 */
inline Trajectory roll_out(const AgentState& start, const ActionPlan& plan, const GameConfig& cfg) {
    Trajectory traj;
    traj.dt = cfg.dt;
    traj.samples.reserve(static_cast<std::size_t>(cfg.horizon_T) + 1);
    Vec2 p = start.position;
    traj.samples.push_back({0, p});
    for (int k = 0; k < cfg.horizon_T; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        p = step_kinematics(p, plan.headings[ku], start.speed * plan.speed_factors[ku], cfg.dt);
        traj.samples.push_back({k + 1, p});
    }
    return traj;
}

/// All headings reachable from current_heading in one step, normalized.
inline std::vector<double> candidate_headings(double current_heading, const GameConfig& cfg) {
    std::vector<double> out;
    out.reserve(cfg.action_set.size());
    for (double u : cfg.action_set) out.push_back(normalize_angle(current_heading + u));
    return out;
}

} // namespace gtnav
