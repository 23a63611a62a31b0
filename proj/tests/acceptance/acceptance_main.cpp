// Acceptance gate: ten end-to-end checks across the game solver, the episode
// simulator, the metric and statistics layers, and the batch runner. Each
// check prints exactly one [PASS]/[FAIL] line; the process exits nonzero if
// any check fails. Tolerances are pinned as named constants below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "gtnav/episode.hpp"
#include "gtnav/metrics.hpp"
#include "gtnav/nash.hpp"
#include "gtnav/runner.hpp"
#include "gtnav/stats.hpp"

#include "../oracles/stats_fixture.hpp"
#include "../support/nash_oracle.hpp"
#include "../support/synthetic.hpp"

using namespace gtnav;

namespace {

/// Equilibrium certificates must be this tight.
constexpr double kEquilibriumTol = 1e-9;
/// Sampled separations may sit below the threshold by at most this much:
/// the planner certifies its own rolled-out prediction while the episode
/// stores the replay interpolation, and the two differ in the last bits.
constexpr double kSeparationSlack = 1e-9;
/// Closed-form metric identities.
constexpr double kIdentityTol = 1e-9;
/// Kinematic step displacement.
constexpr double kKinematicsTol = 1e-12;
/// Statistic and p-value agreement with the reference implementation.
constexpr double kStatisticTol = 1e-6;
constexpr double kPValueTol = 1e-4;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fixed_str(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

std::string sci_str(double v) {
    std::ostringstream out;
    out << std::scientific << std::setprecision(1) << v;
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Trajectory path_of(std::initializer_list<Vec2> points) {
    Trajectory traj;
    traj.dt = 0.5;
    int tick = 0;
    for (const Vec2& p : points) traj.samples.push_back({tick++, p});
    return traj;
}

/// Straight constant-velocity walker between two times.
ReplayTrack line_track(int id, Vec2 start, Vec2 velocity, double t0, double t1) {
    ReplayTrack track;
    track.id = id;
    track.points.push_back({t0, start});
    track.points.push_back({t1, start + (t1 - t0) * velocity});
    return track;
}

/// Corridor grid with 0.2 m cells: x in [0, 12], walls outside |y| < 0.75.
ObstacleGrid corridor_grid() {
    const double cell = 0.2;
    const int w = 60;
    const int h = 24;
    std::ostringstream spec;
    spec << w << ' ' << h << ' ' << cell << " 0.0 -2.4\n";
    for (int r = 0; r < h; ++r) {
        const double yc = 2.4 - cell * (r + 0.5);
        spec << std::string(w, std::abs(yc) < 0.75 ? '0' : '1') << '\n';
    }
    std::istringstream in(spec.str());
    return ObstacleGrid::load(in);
}

/// A slower walker leads the robot down the corridor: swerving past means
/// hugging a wall, so slowing down wins on cost while staying feasible.
EpisodeSetup corridor_setup(const ObstacleGrid& grid) {
    EpisodeSetup setup;
    setup.grid = &grid;
    setup.robot_start = Vec2{0.6, 0.0};
    setup.robot_goal = Vec2{11.4, 0.0};
    setup.robot_speed = 1.0;
    setup.tracks.push_back(line_track(1, {2.1, 0.0}, {0.8, 0.0}, 0.0, 40.0));
    return setup;
}

/// Two walkers cut across the robot's straight line in open space.
EpisodeSetup open_crossing_setup() {
    EpisodeSetup setup;
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{6.0, 0.0};
    setup.robot_speed = 1.0;
    setup.tracks.push_back(line_track(1, {3.0, 3.0}, {0.0, -1.0}, 0.0, 8.0));
    setup.tracks.push_back(line_track(2, {5.0, -3.0}, {0.0, 1.0}, 0.0, 8.0));
    return setup;
}

EpisodeOptions game_options(int tick_cap) {
    EpisodeOptions options;
    options.planner = PlannerKind::GT;
    options.game.collision_substeps = 12;
    options.tick_cap = tick_cap;
    return options;
}

// ---------------------------------------------------------------------------
// 1. Converged game solutions are exact equilibria and match exhaustive
//    best-response enumeration.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
    const auto start = std::chrono::steady_clock::now();
    GameConfig cfg;
    cfg.horizon_T = 2;
    cfg.gamma = default_gamma(2);

    std::mt19937 rng(271828);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> speed(0.5, 1.5);

    const test_support::OracleWorld oracle{&cfg};
    int converged = 0;
    double worst_gap = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 2;
        GameScene scene;
        for (int i = 0; i < n; ++i) {
            PlayerSpec p;
            p.state =
                test_support::make_agent(i, {coord(rng), coord(rng)}, angle(rng), speed(rng));
            p.goal = estimate_goal(p.state, cfg);
            scene.players.push_back(p);
        }
        const NashResult r = solve_nash(scene, cfg);
        if (!r.converged) continue;
        ++converged;

        const double gap = equilibrium_gap(scene, r.plans, cfg);
        worst_gap = std::max(worst_gap, gap);
        if (gap > kEquilibriumTol)
            return {false,
                    "equilibrium gap " + sci_str(gap) + " on trial " + std::to_string(trial)};

        for (const auto& p : scene.players) {
            std::vector<std::vector<Vec2>> others;
            std::vector<double> required;
            for (const auto& q : scene.players) {
                if (q.state.id == p.state.id) continue;
                others.push_back(oracle.positions(q, r.action_indices.at(q.state.id)));
                required.push_back(required_separation(cfg, p, q));
            }
            if (r.action_indices.at(p.state.id) != oracle.exhaustive_best(p, others, required))
                return {false, "agent " + std::to_string(p.state.id) +
                                   " deviates from the exhaustive best response on trial " +
                                   std::to_string(trial)};
        }
    }
    const double secs = seconds_since(start);
    if (converged < 20)
        return {false, "only " + std::to_string(converged) + "/30 scenes converged"};
    if (secs >= 10.0) return {false, "took " + fixed_str(secs, 1) + " s (limit 10 s)"};
    return {true, std::to_string(converged) + "/30 converged, worst equilibrium gap " +
                      sci_str(worst_gap) + ", " + fixed_str(secs, 2) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Whenever every executed decision was feasible, sampled agent pairs stay
//    at least beta apart; closer approaches happen only right after a
//    decision that was flagged infeasible.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
    struct SafetyEpisode {
        std::string name;
        EpisodeSetup setup;
        int tick_cap = 120;
    };

    const ObstacleGrid corridor = corridor_grid();
    std::vector<SafetyEpisode> episodes;
    for (int i = 0; i < 44; ++i) {
        SafetyEpisode e;
        e.name = "crossing_" + std::to_string(i);
        e.setup = test_support::crossing_scene(500 + static_cast<std::uint64_t>(i), 3 + i % 6)
                      .setup();
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "corridor_overtake";
        e.setup = corridor_setup(corridor);
        e.tick_cap = 60;
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "head_on";
        e.setup.robot_start = Vec2{0.0, 0.0};
        e.setup.robot_goal = Vec2{10.0, 0.0};
        e.setup.robot_speed = 1.0;
        e.setup.tracks.push_back(line_track(1, {10.0, 0.0}, {-1.0, 0.0}, 0.0, 20.0));
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "open_crossing";
        e.setup = open_crossing_setup();
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "empty_scene";
        e.setup.robot_start = Vec2{0.0, 0.0};
        e.setup.robot_goal = Vec2{8.0, 0.0};
        e.setup.robot_speed = 1.2;
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "slow_crosser";
        e.setup.robot_start = Vec2{0.0, 0.0};
        e.setup.robot_goal = Vec2{8.0, 0.0};
        e.setup.robot_speed = 1.0;
        e.setup.tracks.push_back(line_track(1, {4.0, 1.5}, {0.0, -0.4}, 0.0, 20.0));
        episodes.push_back(std::move(e));
    }
    {
        SafetyEpisode e;
        e.name = "open_overtake";
        e.setup.robot_start = Vec2{0.0, 0.0};
        e.setup.robot_goal = Vec2{12.0, 0.0};
        e.setup.robot_speed = 1.3;
        e.setup.tracks.push_back(line_track(1, {2.0, 0.0}, {0.8, 0.0}, 0.0, 20.0));
        episodes.push_back(std::move(e));
    }

    int infeasible_total = 0;
    int clean_episodes = 0;
    double clean_min = std::numeric_limits<double>::infinity();
    for (const auto& e : episodes) {
        const EpisodeOptions options = game_options(e.tick_cap);
        const EpisodeResult result = run_episode(e.setup, options);
        const double beta = options.game.beta;

        std::map<int, const EpisodeTickRecord*> decision_at;
        bool all_feasible = true;
        for (const auto& d : result.decisions) {
            decision_at[d.tick] = &d;
            if (!d.planner.feasible()) {
                all_feasible = false;
                ++infeasible_total;
            }
        }
        if (all_feasible) ++clean_episodes;

        for (int tick = 0; tick <= result.final_tick; ++tick) {
            std::vector<Vec2> points;
            if (result.robot_present)
                if (const auto p = result.robot_trajectory.position_at(tick))
                    points.push_back(*p);
            for (const auto& traj : result.walker_trajectories)
                if (const auto p = traj.position_at(tick)) points.push_back(*p);

            double min_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < points.size(); ++i)
                for (std::size_t j = i + 1; j < points.size(); ++j)
                    min_d = std::min(min_d, distance(points[i], points[j]));
            if (!std::isfinite(min_d)) continue;

            if (all_feasible) clean_min = std::min(clean_min, min_d);
            if (min_d < beta - kSeparationSlack) {
                if (tick == 0)
                    return {false, e.name + ": agents start " + fixed_str(min_d, 3) +
                                       " m apart at tick 0"};
                const auto it = decision_at.find(tick - 1);
                if (it == decision_at.end() || it->second->planner.feasible())
                    return {false, e.name + ": separation " + fixed_str(min_d, 3) +
                                       " m at tick " + std::to_string(tick) +
                                       " without an infeasible flag"};
            }
        }
    }
    return {true, std::to_string(episodes.size()) + " episodes, " +
                      std::to_string(clean_episodes) + " fully feasible (closest pair " +
                      fixed_str(clean_min, 3) + " m), " + std::to_string(infeasible_total) +
                      " infeasible ticks"};
}

// ---------------------------------------------------------------------------
// 3. Branch arbitration, judged from serialized episode logs: the corridor
//    run decelerates at a logged cost no higher than the game branch; the
//    open crossing plays the game.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
    const ObstacleGrid grid = corridor_grid();

    const auto logged_rows = [](const EpisodeSetup& setup, int tick_cap) {
        const EpisodeResult result = run_episode(setup, game_options(tick_cap));
        std::ostringstream text;
        write_episode_log(result, text);
        std::istringstream in(text.str());
        return read_episode_log(in).rows;
    };

    int decel_tick = -1;
    double decel_cost = 0.0;
    double nash_cost = 0.0;
    for (const auto& row : logged_rows(corridor_setup(grid), 60)) {
        if (row.agent != kRobotId || row.branch != "decelerate") continue;
        if (row.nash_feasible && row.decel_feasible && std::isfinite(row.nash_cost) &&
            std::isfinite(row.decel_cost) && row.decel_cost <= row.nash_cost) {
            decel_tick = row.tick;
            decel_cost = row.decel_cost;
            nash_cost = row.nash_cost;
            break;
        }
    }
    if (decel_tick < 0)
        return {false, "corridor log never shows deceleration beating a feasible game branch"};

    int game_tick = -1;
    for (const auto& row : logged_rows(open_crossing_setup(), 120)) {
        if (row.agent == kRobotId && row.branch == "nash_game") {
            game_tick = row.tick;
            break;
        }
    }
    if (game_tick < 0) return {false, "open-crossing log never enters the game branch"};

    return {true, "corridor decelerates at tick " + std::to_string(decel_tick) + " (cost " +
                      fixed_str(decel_cost, 3) + " vs game " + fixed_str(nash_cost, 3) +
                      "), crossing plays the game at tick " + std::to_string(game_tick)};
}

// ---------------------------------------------------------------------------
// 4 and 5 share one batch: 20 crossing scenes, both planners.
// ---------------------------------------------------------------------------
struct ContrastBatch {
    std::vector<double> pr_gt, pr_vfh, cpd_gt, cpd_vfh;
    double seconds = 0.0;
    std::string error;
};

ContrastBatch run_contrast_batch() {
    ContrastBatch batch;
    const auto start = std::chrono::steady_clock::now();
    try {
        for (int i = 0; i < 20; ++i) {
            const auto scene =
                test_support::crossing_scene(100 + static_cast<std::uint64_t>(i), 3 + i % 6);
            for (const bool use_vfh : {false, true}) {
                EpisodeOptions options = game_options(120);
                if (use_vfh) options.planner = PlannerKind::VFH;
                const EpisodeResult result = run_episode(scene.setup(), options);
                const double pr = path_regularity(result.robot_trajectory);
                const double cpd = closest_pedestrian_distance(
                    result.robot_trajectory, result.walker_trajectories,
                    scene.arena_diagonal());
                (use_vfh ? batch.pr_vfh : batch.pr_gt).push_back(pr);
                (use_vfh ? batch.cpd_vfh : batch.cpd_gt).push_back(cpd);
            }
        }
    } catch (const std::exception& e) {
        batch.error = e.what();
    }
    batch.seconds = seconds_since(start);
    return batch;
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

/// Brown-Forsythe per-group spread: mean absolute deviation from the median.
double spread_of(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sum = 0.0;
    for (double v : values) sum += std::abs(v - median);
    return sum / static_cast<double>(n);
}

Outcome criterion_4(const ContrastBatch& batch) {
    if (!batch.error.empty()) return {false, "batch failed: " + batch.error};
    if (batch.pr_gt.size() != 20 || batch.pr_vfh.size() != 20 || batch.cpd_gt.size() != 20 ||
        batch.cpd_vfh.size() != 20)
        return {false, "expected 20 samples per planner and metric"};
    if (batch.seconds >= 300.0)
        return {false, "took " + fixed_str(batch.seconds, 1) + " s (limit 300 s)"};

    const double pr_gt = mean_of(batch.pr_gt);
    const double pr_vfh = mean_of(batch.pr_vfh);
    const double cpd_gt = mean_of(batch.cpd_gt);
    const double cpd_vfh = mean_of(batch.cpd_vfh);
    const std::string detail = "mean regularity " + fixed_str(pr_gt, 4) + " vs " +
                               fixed_str(pr_vfh, 4) + ", mean clearance " +
                               fixed_str(cpd_gt, 4) + " vs " + fixed_str(cpd_vfh, 4) + ", " +
                               fixed_str(batch.seconds, 1) + " s";
    if (!(pr_gt > pr_vfh)) return {false, "regularity ordering violated: " + detail};
    if (!(cpd_gt > cpd_vfh)) return {false, "clearance ordering violated: " + detail};
    return {true, detail};
}

Outcome criterion_5(const ContrastBatch& batch) {
    if (!batch.error.empty()) return {false, "batch failed: " + batch.error};
    if (batch.pr_gt.empty() || batch.pr_vfh.empty()) return {false, "no regularity samples"};

    const double gt_spread = spread_of(batch.pr_gt);
    const double vfh_spread = spread_of(batch.pr_vfh);
    const StatResult lv = levene({batch.pr_gt, batch.pr_vfh}, {"game", "histogram"});
    const std::string detail = "regularity spread " + fixed_str(vfh_spread, 5) +
                               " (histogram) vs " + fixed_str(gt_spread, 5) +
                               " (game), test statistic " + fixed_str(lv.statistic, 3) +
                               ", p " + fixed_str(lv.p_value, 3);
    if (!(vfh_spread > gt_spread)) return {false, "spread ordering violated: " + detail};
    return {true, detail};
}

// ---------------------------------------------------------------------------
// 6. Empty scene: the planner drives essentially straight to the goal.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
    EpisodeSetup setup;
    setup.robot_start = Vec2{0.0, 0.0};
    setup.robot_goal = Vec2{10.0, 0.0};
    setup.robot_speed = 1.25;
    const EpisodeResult result = run_episode(setup, game_options(120));

    const double plr = path_length_ratio(result.robot_trajectory);
    const double pr = path_regularity(result.robot_trajectory);
    const std::string detail =
        "length ratio " + fixed_str(plr, 6) + ", regularity " + fixed_str(pr, 6);
    if (!(plr >= 0.999 && pr >= 0.999)) return {false, detail + " (need both >= 0.999)"};
    if (!result.goal_reached) return {false, "goal not reached; " + detail};
    return {true, detail};
}

// ---------------------------------------------------------------------------
// 7. Metric identities on closed-form paths.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
    std::vector<std::string> failures;
    const auto expect = [&](const char* name, double actual, double expected) {
        if (!(std::abs(actual - expected) <= kIdentityTol))
            failures.push_back(std::string(name) + " = " + fixed_str(actual, 12));
    };

    expect("straight length ratio", path_length_ratio(path_of({{0, 0}, {1, 0}, {2, 0}})), 1.0);
    expect("right-angle length ratio",
           path_length_ratio(path_of({{0, 0}, {1, 0}, {1, 1}})), std::sqrt(2.0) / 2.0);
    expect("loop length ratio",
           path_length_ratio(path_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}})), 0.0);

    expect("collinear regularity",
           path_regularity(path_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}})), 1.0);
    expect("single-turn regularity", path_regularity(path_of({{0, 0}, {1, 0}, {1, 1}})), 0.5);
    expect("back-and-forth regularity",
           path_regularity(path_of({{0, 0}, {1, 0}, {0, 0}, {1, 0}})), 0.0);

    {
        const Trajectory robot = path_of({{0, 0}, {0, 0}, {0, 0}, {0, 0}});
        const std::vector<Trajectory> peds{path_of({{3, 4}, {3, 4}, {3, 4}, {3, 4}})};
        expect("static-pair clearance", closest_pedestrian_distance(robot, peds, 20.0), 0.25);
    }
    {
        // One walker far away, the other approaching to 0.5 m at tick 3.
        Trajectory robot;
        robot.dt = 0.5;
        for (int k = 0; k <= 6; ++k)
            robot.samples.push_back({k, {static_cast<double>(k), 0.0}});
        Trajectory far;
        far.dt = 0.5;
        Trajectory near;
        near.dt = 0.5;
        for (int k = 0; k <= 6; ++k) {
            far.samples.push_back({k, {8.0, 8.0}});
            near.samples.push_back({k, {3.0, 2.0 - 0.5 * k}});
        }
        const std::vector<Trajectory> peds{far, near};
        const double cpd = closest_pedestrian_distance(robot, peds, 10.0);
        expect("approach clearance", cpd, 0.05);

        double scan = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 6; ++k)
            for (const Trajectory& ped : peds) {
                const auto rp = robot.position_at(k);
                const auto pp = ped.position_at(k);
                if (rp && pp) scan = std::min(scan, distance(*rp, *pp));
            }
        if (!(std::abs(cpd - scan / 10.0) <= 1e-12))
            failures.push_back("approach clearance disagrees with the exhaustive scan");
    }
    {
        const Trajectory robot = path_of({{0, 0}, {1, 0}});
        const std::vector<Trajectory> peds{path_of({{2, 0}, {1, 0}})};
        expect("coincident clearance", closest_pedestrian_distance(robot, peds, 10.0), 0.0);
    }

    if (!failures.empty()) {
        std::string joined;
        for (const auto& f : failures) joined += (joined.empty() ? "" : "; ") + f;
        return {false, joined};
    }
    return {true, "9 identities within " + sci_str(kIdentityTol)};
}

// ---------------------------------------------------------------------------
// 8. Rank statistics reproduce reference-implementation values.
// ---------------------------------------------------------------------------
Outcome criterion_8() {
    double worst_stat = 0.0;
    double worst_p = 0.0;
    int index = 0;
    for (const auto& ds : stats_fixture::datasets()) {
        const StatResult kw = kruskal_wallis(ds.groups);
        const StatResult lv = levene(ds.groups);
        const StatResult mw = mann_whitney(ds.groups[0], ds.groups[1]);

        const struct {
            const char* name;
            double stat_err;
            double p_err;
        } rows[] = {
            {"rank sum", std::abs(kw.statistic - ds.kw_statistic), std::abs(kw.p_value - ds.kw_p)},
            {"spread", std::abs(lv.statistic - ds.levene_statistic),
             std::abs(lv.p_value - ds.levene_p)},
            {"pairwise rank", std::abs(mw.statistic - ds.mw_u1), std::abs(mw.p_value - ds.mw_p)},
        };
        for (const auto& row : rows) {
            worst_stat = std::max(worst_stat, row.stat_err);
            worst_p = std::max(worst_p, row.p_err);
            if (row.stat_err > kStatisticTol)
                return {false, std::string(row.name) + " statistic off by " +
                                   sci_str(row.stat_err) + " on dataset " +
                                   std::to_string(index)};
            if (row.p_err > kPValueTol)
                return {false, std::string(row.name) + " p-value off by " + sci_str(row.p_err) +
                                   " on dataset " + std::to_string(index)};
        }
        ++index;
    }
    return {true, std::to_string(index) + " datasets, worst statistic error " +
                      sci_str(worst_stat) + ", worst p error " + sci_str(worst_p)};
}

// ---------------------------------------------------------------------------
// 9. Determinism: rerunning a manifest reproduces the metric and stat tables
//    byte for byte, and the seeded bootstrap is bit-stable.
// ---------------------------------------------------------------------------
Outcome criterion_9() {
    namespace fs = std::filesystem;
    struct TempDir {
        fs::path path;
        TempDir() {
            path = fs::temp_directory_path() /
                   ("gtnav_acceptance_" + std::to_string(::getpid()));
            fs::create_directories(path);
        }
        ~TempDir() {
            std::error_code ec;
            fs::remove_all(path, ec);
        }
        void write(const std::string& name, const std::string& content) const {
            std::ofstream out(path / name);
            out << content;
        }
    };

    const TempDir dir;
    std::ostringstream tracks;
    for (int f = 0; f < 17; ++f) {
        const double t = 0.5 * f;
        tracks << f << '\t' << 1 << '\t' << 3.0 << '\t' << 3.0 - t << '\n';
        tracks << f << '\t' << 2 << '\t' << 5.0 << '\t' << -3.0 + t << '\n';
    }
    dir.write("cross_tracks.txt", tracks.str());
    dir.write("cross.scn",
              "name = \"cross\"\n"
              "scale = 1.0\n"
              "frame_dt = 0.5\n"
              "tracks.file = \"cross_tracks.txt\"\n"
              "[world]\n"
              "min = [-1.0, -6.0]\n"
              "max = [9.0, 6.0]\n"
              "[robot]\n"
              "start = [0.0, 0.0]\n"
              "goal = [6.0, 0.0]\n"
              "speed = 1.0\n");
    dir.write("run.cfg",
              "scenarios = [\"cross.scn\"]\n"
              "conditions = [\"HO\", \"GT\", \"VFH\"]\n"
              "seed = 7\n"
              "[run]\n"
              "tick_cap = 120\n");

    const RunManifest manifest = load_manifest((dir.path / "run.cfg").string());
    const auto tables = [](const RunOutput& output) {
        std::ostringstream metrics;
        write_metrics_table(output, metrics);
        std::ostringstream stats;
        const auto batteries = compute_batch_stats(output);
        write_stats_table(batteries, stats);
        return std::pair<std::string, std::string>(metrics.str(), stats.str());
    };
    const auto first = tables(run_manifest(manifest));
    const auto second = tables(run_manifest(manifest));
    if (first.first.empty() || first.first.find("cross") == std::string::npos)
        return {false, "metric table missing the scenario rows"};
    if (first.first != second.first) return {false, "metric tables differ between reruns"};
    if (first.second != second.second) return {false, "stat tables differ between reruns"};

    std::vector<double> samples;
    for (int i = 0; i < 12; ++i) samples.push_back(0.25 * i + 0.1);
    const auto stat = [](std::span<const double> xs) {
        double sum = 0.0;
        for (double x : xs) sum += x;
        return sum / static_cast<double>(xs.size());
    };
    const std::vector<double> draw_a = bootstrap(samples, 8, 200, 99, stat);
    const std::vector<double> draw_b = bootstrap(samples, 8, 200, 99, stat);
    if (draw_a.size() != 200 || draw_a != draw_b)
        return {false, "seeded bootstrap draws are not bit-identical"};

    return {true, "tables identical across reruns (" +
                      std::to_string(first.first.size()) + " + " +
                      std::to_string(first.second.size()) +
                      " bytes), 200 bootstrap replicates bit-identical"};
}

// ---------------------------------------------------------------------------
// 10. Kinematics and cost decomposition.
// ---------------------------------------------------------------------------
Outcome criterion_10() {
    double worst_step = 0.0;
    for (const double heading : {0.0, 0.3, -1.1, kPi / 2, 2.7, -2.2, kPi})
        for (const double speed : {0.0, 0.4, 1.0, 1.6})
            for (const double dt : {0.5, 1.2}) {
                const Vec2 from{0.4, -0.7};
                const Vec2 to = step_kinematics(from, heading, speed, dt);
                worst_step = std::max(worst_step, std::abs(distance(from, to) - speed * dt));
            }
    if (worst_step > kKinematicsTol)
        return {false, "step displacement off by " + sci_str(worst_step)};

    GameConfig cfg;
    PlayerSpec player;
    player.state = test_support::make_agent(0, {0.0, 0.0}, 0.0, 1.0);
    player.goal = Vec2{4.8, 0.0};
    const ActionPlan plan = ActionPlan::straight(0.0, cfg.horizon_T);

    // A counterpart crossing the robot's path makes the violation count
    // nonzero, so the penalized identity is exercised for real.
    const AgentState other = test_support::make_agent(1, {2.4, 0.3}, kPi, 1.0);
    const Trajectory other_traj = roll_out(other, ActionPlan::straight(kPi, cfg.horizon_T), cfg);
    const std::vector<SeparationConstraint> constraints{{&other_traj, cfg.beta}};
    const PlanEvaluation blocked = evaluate_plan(player, plan, constraints, cfg, nullptr);
    if (blocked.cost.total() !=
        blocked.cost.goal + blocked.cost.smooth + blocked.cost.obstacle)
        return {false, "cost total is not the exact sum of its parts"};
    if (blocked.constraints.violations < 1)
        return {false, "constraint fixture failed to produce a violation"};
    if (blocked.penalized() != blocked.cost.total() + 1e6 * blocked.constraints.violations)
        return {false, "penalized objective differs from total plus penalty"};

    // Straight run at the goal distance covered in exactly the horizon:
    // remaining distances 3.6, 2.4, 1.2, 0 weighted by the schedule.
    const PlanEvaluation clean = evaluate_plan(player, plan, {}, cfg, nullptr);
    const Trajectory rolled = roll_out(player.state, plan, cfg);
    double hand_goal = 0.0;
    for (std::size_t t = 1; t < rolled.samples.size(); ++t)
        hand_goal += cfg.gamma[t - 1] * distance(rolled.samples[t].position, player.goal);
    if (std::abs(clean.cost.goal - hand_goal) > 1e-12)
        return {false, "goal term differs from the hand recomputation"};
    if (std::abs(clean.cost.goal - 4.8) > kIdentityTol)
        return {false, "schedule hand sum is " + fixed_str(clean.cost.goal, 12) +
                           ", expected 4.8"};
    if (clean.cost.smooth != 0.0)
        return {false, "straight plan produced a nonzero smoothness term"};

    return {true, "worst step error " + sci_str(worst_step) +
                      ", cost identities exact, schedule hand sum 4.8"};
}

} // namespace

int main() {
    const ContrastBatch batch = run_contrast_batch();

    struct Criterion {
        int number;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, criterion_1},
        {2, criterion_2},
        {3, criterion_3},
        {4, [&] { return criterion_4(batch); }},
        {5, [&] { return criterion_5(batch); }},
        {6, criterion_6},
        {7, criterion_7},
        {8, criterion_8},
        {9, criterion_9},
        {10, criterion_10},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] criterion %d — %s\n", outcome.pass ? "PASS" : "FAIL",
                    criterion.number, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
