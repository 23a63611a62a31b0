#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "gtnav/core.hpp"
#include "gtnav/obstacle_grid.hpp"

namespace gtnav {

/// Per-term decomposition of a plan's cost.
struct CostBreakdown {
    double goal = 0.0;
    double smooth = 0.0;
    double obstacle = 0.0;
    /// True when any obstacle distance was clamped to the half-cell floor.
    bool obstacle_saturated = false;

    double total() const { return goal + smooth + obstacle; }
};

/// Where the agent is headed if it keeps its current heading and speed for
/// the whole horizon. Used as every agent's goal point for one planning round.
inline Vec2 estimate_goal(const AgentState& agent, const GameConfig& cfg) {
    const double reach = agent.speed * cfg.horizon_T * cfg.dt;
    return agent.position + reach * heading_vector(agent.heading);
}

/// Goal attraction: sum over steps t = 1..T of gamma[t-1] * distance(p(t), goal).
inline double phi_goal(const Trajectory& traj, const Vec2& goal, std::span<const double> gamma) {
    if (traj.samples.size() != gamma.size() + 1)
        throw DomainError("phi_goal: trajectory must have one sample per horizon step plus the start");
    double sum = 0.0;
    for (std::size_t t = 1; t < traj.samples.size(); ++t)
        sum += gamma[t - 1] * distance(traj.samples[t].position, goal);
    return sum;
}

/// Smoothness: sum over steps of (1 - gamma[t-1]) * |heading change|, the
/// change wrapped to (-pi, pi].
inline double phi_smooth(double start_heading, const ActionPlan& plan,
                         std::span<const double> gamma) {
    if (plan.headings.size() != gamma.size())
        throw DomainError("phi_smooth: plan length must match gamma length");
    double sum = 0.0;
    double prev = start_heading;
    for (std::size_t t = 0; t < plan.headings.size(); ++t) {
        sum += (1.0 - gamma[t]) * std::abs(angle_diff(plan.headings[t], prev));
        prev = plan.headings[t];
    }
    return sum;
}

/// Obstacle repulsion: sum over steps t = 1..T of rho / d(t) where d(t) is
/// the distance from p(t) to the nearest occupied-cell center, clamped below
/// to half a cell so the term stays bounded. Returns 0 on an empty grid.
inline double phi_obs(const Trajectory& traj, const ObstacleGrid& grid, double rho,
                      bool* saturated = nullptr) {
    if (grid.empty()) return 0.0;
    const double floor_d = grid.cell_size() * 0.5;
    double sum = 0.0;
    for (std::size_t t = 1; t < traj.samples.size(); ++t) {
        const auto nearest = grid.nearest_obstacle_point(traj.samples[t].position);
        if (!nearest) continue;
        double d = distance(traj.samples[t].position, *nearest);
        if (d < floor_d) {
            d = floor_d;
            if (saturated) *saturated = true;
        }
        sum += rho / d;
    }
    return sum;
}

/**
 * @brief Full cost of executing @p plan from @p agent toward @p goal.
 *
 * The obstacle term is only charged when @p grid is non-null; callers pass
 * null for agents whose straight-line first estimate clears the obstacle
 * space.
 */
inline CostBreakdown cost_breakdown(const AgentState& agent, const ActionPlan& plan,
                                    const Vec2& goal, const GameConfig& cfg,
                                    const ObstacleGrid* grid = nullptr) {
    const Trajectory traj = roll_out(agent, plan, cfg);
    CostBreakdown out;
    out.goal = phi_goal(traj, goal, cfg.gamma);
    out.smooth = phi_smooth(agent.heading, plan, cfg.gamma);
    if (grid) out.obstacle = phi_obs(traj, *grid, cfg.rho, &out.obstacle_saturated);
    return out;
}

/// Position along a trajectory at a fractional tick, linearly interpolated
/// between samples and clamped to the trajectory's span.
inline Vec2 sample_position(const Trajectory& traj, double tick) {
    if (traj.samples.empty()) throw DomainError("sample_position: empty trajectory");
    if (tick <= traj.samples.front().tick) return traj.samples.front().position;
    if (tick >= traj.samples.back().tick) return traj.samples.back().position;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double t0 = traj.samples[i - 1].tick;
        const double t1 = traj.samples[i].tick;
        if (tick <= t1) {
            const double a = (tick - t0) / (t1 - t0);
            return traj.samples[i - 1].position + (traj.samples[i].position - traj.samples[i - 1].position) * a;
        }
    }
    return traj.samples.back().position;
}

/// Minimum distance between two rolled-out trajectories over sample times
/// t = k / substeps for k = 0 .. T * substeps.
inline double min_pair_distance(const Trajectory& a, const Trajectory& b, int substeps = 1) {
    if (substeps < 1) throw DomainError("min_pair_distance: substeps must be >= 1");
    const int last = static_cast<int>(std::min(a.samples.back().tick, b.samples.back().tick));
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= last * substeps; ++k) {
        const double tick = static_cast<double>(k) / substeps;
        best = std::min(best, distance(sample_position(a, tick), sample_position(b, tick)));
    }
    return best;
}

/// Feasibility summary for one plan against its hard constraints.
struct ConstraintReport {
    /// Number of violated (step, constraint) pairs; 0 means feasible.
    int violations = 0;
    /// Smallest separation margin seen against any counterpart (distance
    /// minus the required separation), +inf when there are no counterparts.
    double worst_margin = std::numeric_limits<double>::infinity();
    bool obstacle_hit = false;

    bool feasible() const { return violations == 0; }
};

/// A counterpart trajectory the plan must keep clear of.
struct SeparationConstraint {
    const Trajectory* trajectory = nullptr;
    double required_distance = 0.0;
};

/**
 * @brief Check a rolled-out trajectory against pairwise-separation and
 * obstacle-space constraints.
 *
 * Each horizon step t = 1..T contributes one potential violation per
 * counterpart (separation below the required distance anywhere in the step's
 * time window, sampled at @p substeps points) and one for the obstacle space.
 * The start sample is the agent's current state and is not charged.
 */
inline ConstraintReport check_constraints(const Trajectory& traj,
                                          std::span<const SeparationConstraint> others,
                                          const ObstacleGrid* grid, int substeps = 1) {
    if (substeps < 1) throw DomainError("check_constraints: substeps must be >= 1");
    ConstraintReport report;
    const int T = static_cast<int>(traj.samples.size()) - 1;
    for (int t = 1; t <= T; ++t) {
        for (const auto& other : others) {
            double min_margin = std::numeric_limits<double>::infinity();
            for (int k = 1; k <= substeps; ++k) {
                const double tick = (t - 1) + static_cast<double>(k) / substeps;
                const double d = distance(sample_position(traj, tick),
                                          sample_position(*other.trajectory, tick));
                min_margin = std::min(min_margin, d - other.required_distance);
            }
            report.worst_margin = std::min(report.worst_margin, min_margin);
            if (min_margin < 0.0) ++report.violations;
        }
        if (grid && !grid->empty()) {
            bool hit = false;
            for (int k = 1; k <= substeps && !hit; ++k) {
                const double tick = (t - 1) + static_cast<double>(k) / substeps;
                hit = grid->point_in_obstacle(sample_position(traj, tick));
            }
            if (hit) {
                report.obstacle_hit = true;
                ++report.violations;
            }
        }
    }
    return report;
}

} // namespace gtnav
