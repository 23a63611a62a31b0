#pragma once

#include <optional>

#include "gtnav/nash.hpp"

namespace gtnav {

/// Ids at or above this value denote merged group placeholders, not agents.
inline constexpr AgentId kGroupIdBase = 1'000'000;

/// One entity the robot plans against: a walker, or a whole recognized group
/// collapsed to a placeholder at its centroid.
struct PlanningEntity {
    AgentState state;
    /// Extra clearance beyond the base separation (group spread radius).
    double radius_extra = 0.0;
    std::vector<AgentId> members;
};

/// Output of group recognition: a partition of the walkers and the entity
/// that stands in for each part.
struct GroupAssignment {
    std::vector<std::vector<AgentId>> groups;
    std::vector<PlanningEntity> effective_agents;
};

/**
 * @brief Cluster walkers that move together into single planning entities.
 *
 * Two walkers join when they stand closer than the base separation and their
 * headings agree within the configured tolerance; clusters are the transitive
 * closure of that relation. A multi-member cluster becomes a placeholder at
 * the member centroid with circular-mean heading, mean speed, and an extra
 * clearance equal to the largest member distance from the centroid, so that
 * keeping the placeholder at base-plus-extra distance keeps every member at
 * base distance.
 */
inline GroupAssignment recognize_groups(std::span<const AgentState> walkers,
                                        const GameConfig& cfg) {
    const std::size_t n = walkers.size();
    std::vector<int> cluster(n, -1);
    int cluster_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (cluster[i] >= 0) continue;
        const int c = cluster_count++;
        std::vector<std::size_t> frontier{i};
        cluster[i] = c;
        while (!frontier.empty()) {
            const std::size_t a = frontier.back();
            frontier.pop_back();
            for (std::size_t b = 0; b < n; ++b) {
                if (cluster[b] >= 0) continue;
                const bool close = distance(walkers[a].position, walkers[b].position) < cfg.beta;
                const bool aligned = std::abs(angle_diff(walkers[a].heading, walkers[b].heading)) <=
                                     cfg.group_heading_tolerance + 1e-12;
                if (close && aligned) {
                    cluster[b] = c;
                    frontier.push_back(b);
                }
            }
        }
    }

    GroupAssignment out;
    out.groups.resize(static_cast<std::size_t>(cluster_count));
    std::vector<std::vector<std::size_t>> cluster_members(static_cast<std::size_t>(cluster_count));
    for (std::size_t i = 0; i < n; ++i) {
        out.groups[static_cast<std::size_t>(cluster[i])].push_back(walkers[i].id);
        cluster_members[static_cast<std::size_t>(cluster[i])].push_back(i);
    }

    int placeholder_count = 0;
    for (std::size_t c = 0; c < cluster_members.size(); ++c) {
        const auto& members = cluster_members[c];
        PlanningEntity entity;
        if (members.size() == 1) {
            entity.state = walkers[members[0]];
            entity.members = {walkers[members[0]].id};
        } else {
            Vec2 centroid;
            Vec2 heading_sum;
            double speed_sum = 0.0;
            for (std::size_t m : members) {
                centroid = centroid + walkers[m].position;
                heading_sum = heading_sum + heading_vector(walkers[m].heading);
                speed_sum += walkers[m].speed;
            }
            centroid = centroid / static_cast<double>(members.size());
            double spread = 0.0;
            for (std::size_t m : members)
                spread = std::max(spread, distance(walkers[m].position, centroid));

            entity.state.id = kGroupIdBase + placeholder_count++;
            entity.state.position = centroid;
            entity.state.heading = heading_sum.norm() > 1e-12
                                       ? std::atan2(heading_sum.y, heading_sum.x)
                                       : walkers[members[0]].heading;
            entity.state.speed = speed_sum / static_cast<double>(members.size());
            entity.state.kind = AgentKind::ScriptedHuman;
            entity.radius_extra = spread;
            for (std::size_t m : members) entity.members.push_back(walkers[m].id);
        }
        out.effective_agents.push_back(std::move(entity));
    }
    return out;
}

/// Straight-line predictions for the robot and every planning entity.
/// Index 0 is always the robot.
struct JointEstimate {
    std::vector<PlanningEntity> entities;
    std::vector<Trajectory> trajectories;
};

/// Roll every entity straight ahead at its current heading and speed.
inline JointEstimate first_estimation(const PlanningEntity& robot,
                                      std::span<const PlanningEntity> others,
                                      const GameConfig& cfg) {
    JointEstimate joint;
    joint.entities.push_back(robot);
    for (const auto& e : others) joint.entities.push_back(e);
    for (const auto& e : joint.entities)
        joint.trajectories.push_back(
            roll_out(e.state, ActionPlan::straight(e.state.heading, cfg.horizon_T), cfg));
    return joint;
}

/// Predicted conflicts for one entity under the straight-line estimate.
struct CollisionFlags {
    bool c_obs = false;
    bool c_agents = false;
    std::optional<int> first_collision_tick;
};

/**
 * @brief Conflict flags for entity @p i of the joint straight-line estimate.
 *
 * c_agents fires when entity i's prediction comes within the required
 * separation of any other entity's prediction inside the horizon; c_obs when
 * its prediction passes through an occupied cell. first_collision_tick is
 * the earliest step (1-based) whose time window contains an offense.
 */
inline CollisionFlags check_collisions(std::size_t i, const JointEstimate& joint,
                                       const ObstacleGrid* grid, const GameConfig& cfg) {
    if (i >= joint.entities.size()) throw DomainError("check_collisions: entity index out of range");
    CollisionFlags flags;
    const Trajectory& own = joint.trajectories[i];
    const int T = cfg.horizon_T;
    const int substeps = cfg.collision_substeps;
    for (int t = 1; t <= T && !flags.first_collision_tick; ++t) {
        for (int k = 1; k <= substeps; ++k) {
            const double tick = (t - 1) + static_cast<double>(k) / substeps;
            const Vec2 p = sample_position(own, tick);
            for (std::size_t j = 0; j < joint.entities.size(); ++j) {
                if (j == i) continue;
                const double required = cfg.beta + joint.entities[i].radius_extra +
                                        joint.entities[j].radius_extra;
                if (distance(p, sample_position(joint.trajectories[j], tick)) < required) {
                    flags.c_agents = true;
                    if (!flags.first_collision_tick) flags.first_collision_tick = t;
                }
            }
            if (grid && grid->point_in_obstacle(p)) {
                flags.c_obs = true;
                if (!flags.first_collision_tick) flags.first_collision_tick = t;
            }
        }
    }
    if (flags.first_collision_tick) {
        // The loop above stops at the first offending step; scan the rest of
        // the horizon so both flags are reported even when one fires first.
        for (int t = 1; t <= T && !(flags.c_obs && flags.c_agents); ++t) {
            for (int k = 1; k <= substeps; ++k) {
                const double tick = (t - 1) + static_cast<double>(k) / substeps;
                const Vec2 p = sample_position(own, tick);
                if (!flags.c_agents) {
                    for (std::size_t j = 0; j < joint.entities.size(); ++j) {
                        if (j == i) continue;
                        const double required = cfg.beta + joint.entities[i].radius_extra +
                                                joint.entities[j].radius_extra;
                        if (distance(p, sample_position(joint.trajectories[j], tick)) < required)
                            flags.c_agents = true;
                    }
                }
                if (!flags.c_obs && grid && grid->point_in_obstacle(p)) flags.c_obs = true;
            }
        }
    }
    return flags;
}

/// Outcome of the deceleration sweep.
struct DecelerateChoice {
    ActionPlan plan;
    PlanEvaluation eval;
    /// Winning pattern index (0 = stop, 15 = keep full speed), -1 if the
    /// sweep never ran.
    int pattern = -1;
    bool any_feasible = false;
};

/**
 * @brief Evaluate the sixteen speed-scaling patterns on the straight plan.
 *
 * Pattern k keeps the current heading and multiplies speed by k/15 on every
 * step from tick t_c - 1 onward, where t_c is the first predicted collision
 * step. Candidates are scored against the counterparts' straight predictions;
 * the cheapest feasible pattern wins (ties to the pattern that slows least).
 * When no pattern is feasible, the choice carries the least-violating pattern
 * with any_feasible = false, and the caller falls back to the game branch.
 */
inline DecelerateChoice decelerate_options(const PlayerSpec& player, const JointEstimate& joint,
                                           int t_c, const GameConfig& cfg,
                                           const ObstacleGrid* grid) {
    if (t_c < 1 || t_c > cfg.horizon_T)
        throw DomainError("decelerate_options: collision tick outside horizon");
    std::vector<SeparationConstraint> others;
    for (std::size_t j = 1; j < joint.entities.size(); ++j)
        others.push_back({&joint.trajectories[j],
                          cfg.beta + player.radius_extra + joint.entities[j].radius_extra});

    const int slow_from = std::max(t_c - 1, 0);
    DecelerateChoice best;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_penalized = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 15; ++k) {
        ActionPlan plan = ActionPlan::straight(player.state.heading, cfg.horizon_T);
        for (int step = slow_from; step < cfg.horizon_T; ++step)
            plan.speed_factors[static_cast<std::size_t>(step)] = k / 15.0;
        const PlanEvaluation eval = evaluate_plan(player, plan, others, cfg, grid);
        if (eval.feasible()) {
            if (!best.any_feasible || eval.cost.total() <= best_cost) {
                best = {plan, eval, k, true};
                best_cost = eval.cost.total();
            }
        } else if (!best.any_feasible && eval.penalized() <= best_penalized) {
            best = {plan, eval, k, false};
            best_penalized = eval.penalized();
        }
    }
    return best;
}

enum class Branch { KeepStraight, IndividualOptimization, NashGame, Decelerate };

inline const char* branch_name(Branch b) {
    switch (b) {
        case Branch::KeepStraight: return "keep_straight";
        case Branch::IndividualOptimization: return "individual_opt";
        case Branch::NashGame: return "nash_game";
        case Branch::Decelerate: return "decelerate";
    }
    return "unknown";
}

/// Everything one planning round decides for the robot.
struct PlannerTickResult {
    Branch branch = Branch::KeepStraight;
    ActionPlan chosen_plan;
    CostBreakdown cost;
    ConstraintReport constraints;
    CollisionFlags flags;
    double executed_heading = 0.0;
    double executed_speed_factor = 1.0;
    /// Branch-arbitration bookkeeping; NaN when the branch never ran.
    double nash_cost = std::numeric_limits<double>::quiet_NaN();
    double decel_cost = std::numeric_limits<double>::quiet_NaN();
    bool nash_feasible = false;
    bool decel_feasible = false;
    int decel_pattern = -1;
    int nash_passes = 0;
    bool nash_converged = false;

    bool feasible() const { return constraints.feasible(); }
};

namespace detail {

/// Robot's constraints re-checked against every entity: in-game opponents at
/// their equilibrium plans, everyone else on the straight estimate.
inline ConstraintReport recheck_against_all(const PlayerSpec& robot, const ActionPlan& plan,
                                            const JointEstimate& joint,
                                            const std::vector<Trajectory>& replacement,
                                            const std::vector<bool>& replaced,
                                            const ObstacleGrid* grid, const GameConfig& cfg) {
    std::vector<SeparationConstraint> others;
    for (std::size_t j = 1; j < joint.entities.size(); ++j) {
        const Trajectory* traj = replaced[j] ? &replacement[j] : &joint.trajectories[j];
        others.push_back({traj, cfg.beta + robot.radius_extra + joint.entities[j].radius_extra});
    }
    return check_constraints(roll_out(robot.state, plan, cfg), others, grid,
                             cfg.collision_substeps);
}

} // namespace detail

/**
 * @brief Pick the robot's plan for this round.
 *
 * With an agent conflict predicted, the game branch and the deceleration
 * branch are both evaluated and the cheaper one is executed (ties go to the
 * game branch; an infeasible deceleration sweep always falls back to the game
 * branch). With only an obstacle conflict, the robot optimizes alone with the
 * repulsive obstacle term switched on. With no conflict it keeps the straight
 * first-estimation plan.
 */
inline PlannerTickResult compute_solution(const PlayerSpec& robot, const JointEstimate& joint,
                                          const CollisionFlags& flags,
                                          const std::vector<bool>& entity_obstacle_term,
                                          const GameConfig& cfg, const ObstacleGrid* grid) {
    PlannerTickResult result;
    result.flags = flags;

    std::vector<Trajectory> replacement(joint.entities.size());
    std::vector<bool> replaced(joint.entities.size(), false);

    if (flags.c_agents) {
        // Game branch: play against every entity whose straight prediction
        // conflicts with the robot's.
        GameScene scene;
        scene.grid = grid;
        PlayerSpec robot_player = robot;
        robot_player.obstacle_term_active = flags.c_obs;
        scene.players.push_back(robot_player);
        std::vector<std::size_t> in_game;
        for (std::size_t j = 1; j < joint.entities.size(); ++j) {
            const double required =
                cfg.beta + robot.radius_extra + joint.entities[j].radius_extra;
            if (min_pair_distance(joint.trajectories[0], joint.trajectories[j],
                                  cfg.collision_substeps) < required) {
                PlayerSpec p;
                p.state = joint.entities[j].state;
                p.goal = estimate_goal(joint.entities[j].state, cfg);
                p.obstacle_term_active = entity_obstacle_term[j];
                p.radius_extra = joint.entities[j].radius_extra;
                scene.players.push_back(p);
                in_game.push_back(j);
            }
        }

        NashResult nash = solve_nash(scene, cfg);
        result.nash_passes = nash.passes;
        result.nash_converged = nash.converged;
        const ActionPlan& nash_plan = nash.plans.at(robot.state.id);
        for (std::size_t j : in_game) {
            replacement[j] =
                roll_out(joint.entities[j].state, nash.plans.at(joint.entities[j].state.id), cfg);
            replaced[j] = true;
        }
        PlanEvaluation nash_eval;
        nash_eval.cost = cost_breakdown(robot_player.state, nash_plan, robot_player.goal, cfg,
                                        flags.c_obs ? grid : nullptr);
        nash_eval.constraints =
            detail::recheck_against_all(robot_player, nash_plan, joint, replacement, replaced,
                                        grid, cfg);
        result.nash_cost = nash_eval.cost.total();
        result.nash_feasible = nash_eval.feasible();

        const int t_c = flags.first_collision_tick.value_or(1);
        const DecelerateChoice decel = decelerate_options(robot_player, joint, t_c, cfg, grid);
        result.decel_cost = decel.eval.cost.total();
        result.decel_feasible = decel.any_feasible && decel.eval.feasible();
        result.decel_pattern = decel.pattern;

        bool pick_nash = true;
        if (!decel.any_feasible) {
            pick_nash = true;
        } else if (!nash_eval.feasible()) {
            pick_nash = false;
        } else {
            pick_nash = nash_eval.cost.total() <= decel.eval.cost.total();
        }

        if (pick_nash) {
            result.branch = Branch::NashGame;
            result.chosen_plan = nash_plan;
            result.cost = nash_eval.cost;
            result.constraints = nash_eval.constraints;
        } else {
            result.branch = Branch::Decelerate;
            result.chosen_plan = decel.plan;
            result.cost = decel.eval.cost;
            result.constraints = decel.eval.constraints;
        }
    } else if (flags.c_obs) {
        PlayerSpec solo = robot;
        solo.obstacle_term_active = true;
        const BestResponse br = best_response(solo, {}, cfg, grid);
        result.branch = Branch::IndividualOptimization;
        result.chosen_plan = br.plan;
        result.cost = br.eval.cost;
        result.constraints = detail::recheck_against_all(solo, br.plan, joint, replacement,
                                                         replaced, grid, cfg);
    } else {
        result.branch = Branch::KeepStraight;
        result.chosen_plan = ActionPlan::straight(robot.state.heading, cfg.horizon_T);
        result.cost = cost_breakdown(robot.state, result.chosen_plan, robot.goal, cfg, nullptr);
        result.constraints = detail::recheck_against_all(robot, result.chosen_plan, joint,
                                                         replacement, replaced, grid, cfg);
    }

    result.executed_heading = result.chosen_plan.headings.at(0);
    result.executed_speed_factor = result.chosen_plan.speed_factors.at(0);
    return result;
}

/**
 * @brief One full planning round for the robot.
 *
 * Recognizes groups among the walkers, rolls the straight first estimate,
 * checks the robot's conflicts, and arbitrates the branch. The robot plans
 * along the ray to its goal: its planning heading is re-aimed at the goal
 * every round, so an empty scene yields a straight path to the goal.
 */
inline PlannerTickResult plan_tick(const AgentState& robot, const Vec2& robot_goal,
                                   std::span<const AgentState> walkers,
                                   const ObstacleGrid* grid, const GameConfig& cfg) {
    validate(cfg);
    validate(robot);
    require_finite(robot_goal, "plan_tick robot_goal");

    PlanningEntity robot_entity;
    robot_entity.state = robot;
    robot_entity.state.heading = distance(robot.position, robot_goal) > 1e-12
                                     ? bearing(robot.position, robot_goal)
                                     : robot.heading;
    robot_entity.members = {robot.id};

    const GroupAssignment groups = recognize_groups(walkers, cfg);
    const JointEstimate joint = first_estimation(robot_entity, groups.effective_agents, cfg);
    const CollisionFlags flags = check_collisions(0, joint, grid, cfg);

    std::vector<bool> entity_obstacle_term(joint.entities.size(), false);
    if (grid && !grid->empty()) {
        for (std::size_t j = 1; j < joint.entities.size(); ++j) {
            const Trajectory& traj = joint.trajectories[j];
            entity_obstacle_term[j] = grid->segment_hits_obstacle(
                traj.samples.front().position, traj.samples.back().position);
        }
    }

    PlayerSpec robot_player;
    robot_player.state = robot_entity.state;
    robot_player.goal = robot_goal;
    robot_player.radius_extra = 0.0;
    return compute_solution(robot_player, joint, flags, entity_obstacle_term, cfg, grid);
}

/// Advance the robot along the executed first action for one executive tick.
inline AgentState advance_robot(const AgentState& robot, const PlannerTickResult& result,
                                double exec_dt) {
    AgentState next = robot;
    next.heading = result.executed_heading;
    next.position = step_kinematics(robot.position, result.executed_heading,
                                    robot.speed * result.executed_speed_factor, exec_dt);
    return next;
}

} // namespace gtnav
