#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gtnav/game_model.hpp"

namespace gtnav {

/// One participant in a planning round.
struct PlayerSpec {
    AgentState state;
    /// Goal point the participant steers toward this round.
    Vec2 goal;
    /// Whether the repulsive obstacle cost term is charged to this player.
    bool obstacle_term_active = false;
    /// Extra separation this player demands on top of the base clearance
    /// (nonzero for group placeholders that stand in for several walkers).
    double radius_extra = 0.0;
};

/// A planning round: the interacting players plus the static obstacle map.
struct GameScene {
    std::vector<PlayerSpec> players;
    const ObstacleGrid* grid = nullptr;

    const PlayerSpec* find(AgentId id) const {
        for (const auto& p : players)
            if (p.state.id == id) return &p;
        return nullptr;
    }
};

/// Cost plus constraint outcome for one candidate plan.
struct PlanEvaluation {
    CostBreakdown cost;
    ConstraintReport constraints;

    bool feasible() const { return constraints.feasible(); }
    /// Objective used for search and for the least-violating fallback.
    double penalized() const { return cost.total() + 1e6 * constraints.violations; }
};

/// Required center distance between two players.
inline double required_separation(const GameConfig& cfg, const PlayerSpec& a,
                                  const PlayerSpec& b) {
    return cfg.beta + a.radius_extra + b.radius_extra;
}

/// Evaluate one player's plan against fixed counterpart trajectories.
inline PlanEvaluation evaluate_plan(const PlayerSpec& player, const ActionPlan& plan,
                                    std::span<const SeparationConstraint> others,
                                    const GameConfig& cfg, const ObstacleGrid* grid) {
    PlanEvaluation out;
    out.cost = cost_breakdown(player.state, plan, player.goal, cfg,
                              player.obstacle_term_active ? grid : nullptr);
    const Trajectory traj = roll_out(player.state, plan, cfg);
    out.constraints = check_constraints(traj, others, grid, cfg.collision_substeps);
    return out;
}

/// Best response of one player, with the chosen action offsets recorded.
struct BestResponse {
    ActionPlan plan;
    std::vector<int> action_indices;
    PlanEvaluation eval;
};

namespace detail {

/// Positions of a trajectory at ticks k / substeps for k = 0 .. T * substeps.
inline std::vector<Vec2> subsampled_track(const Trajectory& traj, int substeps) {
    const int last = static_cast<int>(traj.samples.back().tick);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(last) * substeps + 1);
    for (int k = 0; k <= last * substeps; ++k)
        out.push_back(sample_position(traj, static_cast<double>(k) / substeps));
    return out;
}

struct BrOther {
    std::vector<Vec2> track;
    double required_distance = 0.0;
};

struct BrSearch {
    const GameConfig* cfg = nullptr;
    const ObstacleGrid* grid = nullptr;
    bool obstacle_term = false;
    Vec2 goal;
    double speed = 0.0;
    std::vector<BrOther> others;

    std::vector<int> best_indices;
    double best_penalized = std::numeric_limits<double>::infinity();
    double best_offset_sum = std::numeric_limits<double>::infinity();
    std::vector<int> current;

    void run(const Vec2& start_pos, double start_heading) {
        current.clear();
        descend(0, start_pos, start_heading, 0.0, 0.0);
    }

    void descend(int depth, const Vec2& pos, double heading, double partial, double offset_sum) {
        const int T = cfg->horizon_T;
        if (depth == T) {
            if (partial < best_penalized ||
                (partial == best_penalized && offset_sum < best_offset_sum)) {
                best_penalized = partial;
                best_offset_sum = offset_sum;
                best_indices = current;
            }
            return;
        }
        // Every remaining step adds a nonnegative amount, so a partial sum
        // already above the incumbent cannot recover.
        if (partial > best_penalized) return;
        const int substeps = cfg->collision_substeps;
        for (int ai = 0; ai < static_cast<int>(cfg->action_set.size()); ++ai) {
            const double offset = cfg->action_set[ai];
            const double new_heading = normalize_angle(heading + offset);
            const Vec2 new_pos = pos + speed * cfg->dt * heading_vector(new_heading);
            const double gamma_t = cfg->gamma[depth];

            double step_cost = gamma_t * distance(new_pos, goal) +
                               (1.0 - gamma_t) * std::abs(offset);
            if (obstacle_term && grid && !grid->empty()) {
                const auto nearest = grid->nearest_obstacle_point(new_pos);
                if (nearest) {
                    const double floor_d = grid->cell_size() * 0.5;
                    step_cost += cfg->rho / std::max(distance(new_pos, *nearest), floor_d);
                }
            }

            int violations = 0;
            for (const auto& other : others) {
                bool violated = false;
                for (int k = 1; k <= substeps && !violated; ++k) {
                    const double a = static_cast<double>(k) / substeps;
                    const Vec2 own = pos + (new_pos - pos) * a;
                    const std::size_t idx =
                        std::min(static_cast<std::size_t>(depth) * substeps + k,
                                 other.track.size() - 1);
                    violated = distance(own, other.track[idx]) < other.required_distance;
                }
                if (violated) ++violations;
            }
            if (grid && !grid->empty()) {
                bool hit = false;
                for (int k = 1; k <= substeps && !hit; ++k) {
                    const double a = static_cast<double>(k) / substeps;
                    hit = grid->point_in_obstacle(pos + (new_pos - pos) * a);
                }
                if (hit) ++violations;
            }

            current.push_back(ai);
            descend(depth + 1, new_pos, new_heading, partial + step_cost + 1e6 * violations,
                    offset_sum + std::abs(offset));
            current.pop_back();
        }
    }
};

inline ActionPlan plan_from_indices(const AgentState& state, const std::vector<int>& indices,
                                    const GameConfig& cfg) {
    std::vector<double> offsets;
    offsets.reserve(indices.size());
    for (int ai : indices) offsets.push_back(cfg.action_set[static_cast<std::size_t>(ai)]);
    return ActionPlan::from_offsets(state.heading, offsets);
}

} // namespace detail

/**
 * @brief Exact best response for one player against fixed counterpart plans.
 *
 * Searches the full |action set|^T plan space depth-first in action-set
 * order, pruning branches whose running objective already exceeds the best
 * complete plan. Infeasible plans carry a large per-violation penalty, so the
 * minimizer is the cheapest feasible plan when one exists and the
 * least-violating plan otherwise. Ties resolve by smaller total |offset|,
 * then by earliest plan in action-set order.
 */
inline BestResponse best_response(const PlayerSpec& player,
                                  std::span<const SeparationConstraint> others,
                                  const GameConfig& cfg, const ObstacleGrid* grid) {
    detail::BrSearch search;
    search.cfg = &cfg;
    search.grid = grid;
    search.obstacle_term = player.obstacle_term_active;
    search.goal = player.goal;
    search.speed = player.state.speed;
    search.others.reserve(others.size());
    for (const auto& o : others)
        search.others.push_back(
            {detail::subsampled_track(*o.trajectory, cfg.collision_substeps), o.required_distance});

    search.run(player.state.position, player.state.heading);

    BestResponse out;
    out.action_indices = search.best_indices;
    out.plan = detail::plan_from_indices(player.state, search.best_indices, cfg);
    out.eval = evaluate_plan(player, out.plan, others, cfg, grid);
    return out;
}

/// Joint outcome of the sequential best-response sweep.
struct NashResult {
    std::map<AgentId, ActionPlan> plans;
    std::map<AgentId, std::vector<int>> action_indices;
    std::map<AgentId, PlanEvaluation> evaluations;
    int passes = 0;
    bool converged = false;
    bool cycle_detected = false;

    bool all_feasible() const {
        for (const auto& [id, eval] : evaluations)
            if (!eval.feasible()) return false;
        return true;
    }

    double total_cost() const {
        double sum = 0.0;
        for (const auto& [id, eval] : evaluations) sum += eval.cost.total();
        return sum;
    }
};

namespace detail {

inline std::string joint_key(const std::map<AgentId, std::vector<int>>& indices) {
    std::string key;
    for (const auto& [id, seq] : indices) {
        key += std::to_string(id);
        key += ':';
        for (int ai : seq) key += static_cast<char>('a' + ai);
        key += ';';
    }
    return key;
}

} // namespace detail

/**
 * @brief Sequential best-response search for a pure-strategy equilibrium.
 *
 * All players start on their straight-line plans. Players are swept in
 * ascending id order (the controlled robot's id sorts first); each in turn
 * best-responds to the others' current plans. The sweep converges when a
 * full pass changes nobody's plan. Revisiting a previously seen joint plan,
 * or exhausting the pass budget, stops the sweep with the current plans.
 */
inline NashResult solve_nash(const GameScene& scene, const GameConfig& cfg) {
    validate(cfg);
    if (scene.players.empty()) throw DomainError("solve_nash: no players");
    {
        std::set<AgentId> ids;
        for (const auto& p : scene.players) {
            validate(p.state);
            if (!ids.insert(p.state.id).second)
                throw DomainError("solve_nash: duplicate player id");
        }
    }

    std::vector<const PlayerSpec*> order;
    for (const auto& p : scene.players) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const PlayerSpec* a, const PlayerSpec* b) { return a->state.id < b->state.id; });

    NashResult result;
    const int straight_idx = [&] {
        for (int i = 0; i < static_cast<int>(cfg.action_set.size()); ++i)
            if (cfg.action_set[static_cast<std::size_t>(i)] == 0.0) return i;
        return 0;
    }();
    for (const auto* p : order) {
        result.plans[p->state.id] = ActionPlan::straight(p->state.heading, cfg.horizon_T);
        result.action_indices[p->state.id] = std::vector<int>(cfg.horizon_T, straight_idx);
    }

    std::set<std::string> seen;
    seen.insert(detail::joint_key(result.action_indices));

    for (int pass = 1; pass <= cfg.max_br_iterations; ++pass) {
        result.passes = pass;
        bool changed = false;
        for (const auto* p : order) {
            std::vector<Trajectory> other_trajs;
            std::vector<SeparationConstraint> others;
            other_trajs.reserve(order.size() - 1);
            for (const auto* q : order) {
                if (q == p) continue;
                other_trajs.push_back(roll_out(q->state, result.plans[q->state.id], cfg));
            }
            std::size_t oi = 0;
            for (const auto* q : order) {
                if (q == p) continue;
                others.push_back({&other_trajs[oi++], required_separation(cfg, *p, *q)});
            }
            BestResponse br = best_response(*p, others, cfg, scene.grid);
            if (br.action_indices != result.action_indices[p->state.id]) changed = true;
            result.plans[p->state.id] = br.plan;
            result.action_indices[p->state.id] = br.action_indices;
            result.evaluations[p->state.id] = br.eval;
        }
        if (!changed) {
            result.converged = true;
            break;
        }
        if (!seen.insert(detail::joint_key(result.action_indices)).second) {
            result.cycle_detected = true;
            break;
        }
    }

    if (result.evaluations.empty()) {
        // Zero-pass budget: evaluate the straight plans as they stand.
        for (const auto* p : order) {
            std::vector<Trajectory> other_trajs;
            std::vector<SeparationConstraint> others;
            for (const auto* q : order) {
                if (q == p) continue;
                other_trajs.push_back(roll_out(q->state, result.plans[q->state.id], cfg));
            }
            std::size_t oi = 0;
            for (const auto* q : order) {
                if (q == p) continue;
                others.push_back({&other_trajs[oi++], required_separation(cfg, *p, *q)});
            }
            result.evaluations[p->state.id] =
                evaluate_plan(*p, result.plans[p->state.id], others, cfg, scene.grid);
        }
    }
    return result;
}

/**
 * @brief Largest unilateral improvement any player could still make.
 *
 * Returns max over players of (current cost - best-response cost) under the
 * penalized objective. A value <= tolerance certifies the joint plan as an
 * equilibrium of the discrete game.
 */
inline double equilibrium_gap(const GameScene& scene,
                              const std::map<AgentId, ActionPlan>& plans,
                              const GameConfig& cfg) {
    std::vector<const PlayerSpec*> order;
    for (const auto& p : scene.players) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [](const PlayerSpec* a, const PlayerSpec* b) { return a->state.id < b->state.id; });

    double gap = 0.0;
    for (const auto* p : order) {
        std::vector<Trajectory> other_trajs;
        std::vector<SeparationConstraint> others;
        for (const auto* q : order) {
            if (q == p) continue;
            other_trajs.push_back(roll_out(q->state, plans.at(q->state.id), cfg));
        }
        std::size_t oi = 0;
        for (const auto* q : order) {
            if (q == p) continue;
            others.push_back({&other_trajs[oi++], required_separation(cfg, *p, *q)});
        }
        const PlanEvaluation current =
            evaluate_plan(*p, plans.at(p->state.id), others, cfg, scene.grid);
        const BestResponse br = best_response(*p, others, cfg, scene.grid);
        gap = std::max(gap, current.penalized() - br.eval.penalized());
    }
    return gap;
}

} // namespace gtnav
