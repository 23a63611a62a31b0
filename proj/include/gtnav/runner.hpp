#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gtnav/config.hpp"
#include "gtnav/episode.hpp"
#include "gtnav/metrics.hpp"
#include "gtnav/scenario.hpp"
#include "gtnav/stats.hpp"
#include "gtnav/svg.hpp"

namespace gtnav {

/// Experimental condition: humans only, game-theoretic robot, or VFH robot.
enum class Condition { HO, GT, VFH };

inline const char* condition_name(Condition c) {
    switch (c) {
        case Condition::HO: return "HO";
        case Condition::GT: return "GT";
        case Condition::VFH: return "VFH";
    }
    return "unknown";
}

inline Condition condition_from_name(const std::string& name) {
    if (name == "HO") return Condition::HO;
    if (name == "GT") return Condition::GT;
    if (name == "VFH") return Condition::VFH;
    throw ConfigError("unknown condition '" + name + "' (expected HO, GT, or VFH)");
}

/// One batch of episodes: which scenarios, which conditions, where the
/// artifacts go, and the seed every random choice flows from.
struct RunManifest {
    std::vector<std::string> scenario_paths;
    std::vector<Condition> conditions;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    GameConfig game;
    VfhConfig vfh;
    int tick_cap = 0;
    /// Overrides the scenario robot speed when positive.
    double robot_speed = 0.0;
    bool animate = false;
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const char c : text) {
        hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        hash *= 1099511628211ull;
    }
    return hash;
}

inline void apply_game_overrides(GameConfig& game, const ConfigDoc& doc) {
    game.dt = doc.get_double_or("game.dt", game.dt);
    const int horizon = doc.get_int_or("game.horizon", game.horizon_T);
    if (horizon != game.horizon_T) {
        game.horizon_T = horizon;
        game.gamma = default_gamma(horizon);
    }
    game.beta = doc.get_double_or("game.beta", game.beta);
    game.rho = doc.get_double_or("game.rho", game.rho);
    game.replan_hz = doc.get_double_or("game.replan_hz", game.replan_hz);
    game.max_br_iterations =
        doc.get_int_or("game.max_br_iterations", game.max_br_iterations);
    game.group_heading_tolerance =
        doc.get_double_or("game.group_heading_tolerance", game.group_heading_tolerance);
    game.collision_substeps =
        doc.get_int_or("game.collision_substeps", game.collision_substeps);
    game.goal_tolerance = doc.get_double_or("game.goal_tolerance", game.goal_tolerance);
    if (doc.has("game.gamma")) game.gamma = doc.get_numbers("game.gamma");
    if (doc.has("game.action_set")) game.action_set = doc.get_numbers("game.action_set");
    validate(game);
}

inline void apply_vfh_overrides(VfhConfig& vfh, const ConfigDoc& doc) {
    vfh.active_window_radius =
        doc.get_double_or("vfh.active_window_radius", vfh.active_window_radius);
    vfh.sector_count = doc.get_int_or("vfh.sector_count", vfh.sector_count);
    vfh.threshold_low = doc.get_double_or("vfh.threshold_low", vfh.threshold_low);
    vfh.threshold_high = doc.get_double_or("vfh.threshold_high", vfh.threshold_high);
    vfh.robot_radius = doc.get_double_or("vfh.robot_radius", vfh.robot_radius);
    vfh.safety_margin = doc.get_double_or("vfh.safety_margin", vfh.safety_margin);
    vfh.agent_disc_radius =
        doc.get_double_or("vfh.agent_disc_radius", vfh.agent_disc_radius);
    vfh.wide_valley_span = doc.get_int_or("vfh.wide_valley_span", vfh.wide_valley_span);
    vfh.weight_target = doc.get_double_or("vfh.weight_target", vfh.weight_target);
    vfh.weight_current = doc.get_double_or("vfh.weight_current", vfh.weight_current);
    vfh.weight_previous = doc.get_double_or("vfh.weight_previous", vfh.weight_previous);
    vfh.use_masked_stage = doc.get_bool_or("vfh.use_masked_stage", vfh.use_masked_stage);
    vfh.turning_radius = doc.get_double_or("vfh.turning_radius", vfh.turning_radius);
    validate(vfh);
}

} // namespace detail

/// Build a manifest from a parsed config; scenario paths are resolved
/// relative to base_dir.
inline RunManifest manifest_from_config(const ConfigDoc& doc, const std::string& base_dir) {
    static const std::vector<std::string> allowed = {
        "scenarios",
        "conditions",
        "output_dir",
        "seed",
        "game.dt",
        "game.horizon",
        "game.beta",
        "game.rho",
        "game.replan_hz",
        "game.max_br_iterations",
        "game.group_heading_tolerance",
        "game.collision_substeps",
        "game.goal_tolerance",
        "game.gamma",
        "game.action_set",
        "vfh.active_window_radius",
        "vfh.sector_count",
        "vfh.threshold_low",
        "vfh.threshold_high",
        "vfh.robot_radius",
        "vfh.safety_margin",
        "vfh.agent_disc_radius",
        "vfh.wide_valley_span",
        "vfh.weight_target",
        "vfh.weight_current",
        "vfh.weight_previous",
        "vfh.use_masked_stage",
        "vfh.turning_radius",
        "run.tick_cap",
        "run.robot_speed",
        "run.animate",
    };
    detail::reject_unknown_keys(doc, allowed, "manifest");

    RunManifest manifest;
    if (!doc.has("scenarios")) throw ConfigError("manifest: missing 'scenarios'");
    for (const auto& path : doc.get_strings("scenarios"))
        manifest.scenario_paths.push_back(detail::resolve_path(path, base_dir));
    if (manifest.scenario_paths.empty()) throw ConfigError("manifest: no scenarios listed");

    if (!doc.has("conditions")) throw ConfigError("manifest: missing 'conditions'");
    for (const auto& name : doc.get_strings("conditions"))
        manifest.conditions.push_back(condition_from_name(name));
    if (manifest.conditions.empty()) throw ConfigError("manifest: no conditions listed");

    manifest.output_dir =
        detail::resolve_path(doc.get_string_or("output_dir", "out"), base_dir);
    const double seed = doc.get_double_or("seed", 0.0);
    if (!(seed >= 0.0) || seed != std::floor(seed))
        throw ConfigError("manifest: seed must be a nonnegative integer");
    manifest.seed = static_cast<std::uint64_t>(seed);

    detail::apply_game_overrides(manifest.game, doc);
    detail::apply_vfh_overrides(manifest.vfh, doc);
    manifest.tick_cap = doc.get_int_or("run.tick_cap", 0);
    manifest.robot_speed = doc.get_double_or("run.robot_speed", 0.0);
    manifest.animate = doc.get_bool_or("run.animate", false);
    return manifest;
}

inline RunManifest load_manifest(const std::string& path) {
    const ConfigDoc doc = parse_config_file(path);
    return manifest_from_config(doc, std::filesystem::path(path).parent_path().string());
}

/// Path-quality metrics of one episode, tagged with their provenance.
struct MetricReport {
    std::string scenario;
    Condition condition = Condition::HO;
    /// The agent the metrics describe: the robot, or the HO reference human.
    AgentId agent = 0;
    double plr = std::numeric_limits<double>::quiet_NaN();
    double pr = std::numeric_limits<double>::quiet_NaN();
    double cpd = std::numeric_limits<double>::quiet_NaN();
    bool goal_reached = false;
    int ticks = 0;
    int infeasible_ticks = 0;
};

/// One finished episode with its metrics.
struct EpisodeArtifact {
    std::string scenario_name;
    Condition condition = Condition::HO;
    EpisodeResult episode;
    MetricReport metrics;
};

/// Everything a batch run produced, in scenario-major, condition-minor order.
struct RunOutput {
    std::vector<EpisodeArtifact> episodes;
    std::vector<std::string> warnings;
    int infeasible_ticks_total = 0;
};

/**
 * @brief Seeded choice of the HO reference walker.
 *
 * Eligible walkers span at least 80% of the episode's ticks; the draw among
 * them is seeded, so a fixed seed names a fixed walker. With no eligible
 * walker the longest-spanning one (smallest id on ties) is used.
 */
inline AgentId pick_reference_human(const EpisodeResult& episode, std::uint64_t seed) {
    if (episode.walker_ids.empty())
        throw ConfigError("reference human: episode has no walkers");

    std::vector<std::size_t> order(episode.walker_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return episode.walker_ids[a] < episode.walker_ids[b];
    });

    const double episode_ticks = episode.final_tick + 1;
    std::vector<std::size_t> eligible;
    for (const std::size_t i : order) {
        const Trajectory& traj = episode.walker_trajectories[i];
        if (traj.samples.empty()) continue;
        const double span = traj.last_tick() - traj.first_tick() + 1;
        if (span >= 0.8 * episode_ticks) eligible.push_back(i);
    }

    if (eligible.empty()) {
        std::size_t best = order.front();
        int best_span = -1;
        for (const std::size_t i : order) {
            const Trajectory& traj = episode.walker_trajectories[i];
            if (traj.samples.empty()) continue;
            const int span = traj.last_tick() - traj.first_tick() + 1;
            if (span > best_span) {
                best_span = span;
                best = i;
            }
        }
        return episode.walker_ids[best];
    }

    std::mt19937_64 rng(seed);
    const std::uint64_t pick =
        detail::bounded_draw(rng, static_cast<std::uint64_t>(eligible.size()));
    return episode.walker_ids[eligible[static_cast<std::size_t>(pick)]];
}

/// PLR/PR/CPD for one episode. The subject is the robot under GT/VFH and the
/// seeded reference human under HO; metrics a trajectory cannot support
/// (too short, no co-present pedestrians) come back as NaN.
inline MetricReport compute_episode_metrics(const EpisodeResult& episode,
                                            const std::string& scenario_name,
                                            Condition condition, double arena_diagonal,
                                            std::uint64_t episode_seed) {
    MetricReport report;
    report.scenario = scenario_name;
    report.condition = condition;
    report.goal_reached = episode.goal_reached;
    report.ticks = episode.final_tick;

    const Trajectory* subject = nullptr;
    std::vector<Trajectory> others;
    if (condition == Condition::HO) {
        report.agent = pick_reference_human(episode, episode_seed);
        for (std::size_t i = 0; i < episode.walker_ids.size(); ++i) {
            if (episode.walker_ids[i] == report.agent)
                subject = &episode.walker_trajectories[i];
            else
                others.push_back(episode.walker_trajectories[i]);
        }
    } else {
        report.agent = kRobotId;
        subject = &episode.robot_trajectory;
        others = episode.walker_trajectories;
        for (const auto& d : episode.decisions)
            if (!d.used_vfh && !d.planner.feasible()) ++report.infeasible_ticks;
    }
    if (subject == nullptr) throw ConfigError("metrics: subject trajectory missing");

    try {
        report.plr = path_length_ratio(*subject);
    } catch (const MetricError&) {
    }
    try {
        report.pr = path_regularity(*subject);
    } catch (const MetricError&) {
    }
    try {
        report.cpd = closest_pedestrian_distance(*subject, others, arena_diagonal);
    } catch (const MetricError&) {
    }
    return report;
}

/**
 * @brief Execute the whole batch: every scenario under every condition.
 *
 * Episodes are independent and run on a small worker pool; results are
 * collected by job index, so the output order (and every byte of every
 * artifact) is independent of scheduling.
 */
inline RunOutput run_manifest(const RunManifest& manifest) {
    if (manifest.scenario_paths.empty()) throw ConfigError("manifest: no scenarios");
    if (manifest.conditions.empty()) throw ConfigError("manifest: no conditions");
    validate(manifest.game);
    validate(manifest.vfh);

    std::vector<Scenario> scenarios;
    scenarios.reserve(manifest.scenario_paths.size());
    for (const auto& path : manifest.scenario_paths)
        scenarios.push_back(load_scenario(path));

    struct Job {
        std::size_t scenario_index = 0;
        Condition condition = Condition::HO;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (const Condition c : manifest.conditions) jobs.push_back({s, c});

    for (const Job& job : jobs) {
        const Scenario& scenario = scenarios[job.scenario_index];
        if (job.condition == Condition::HO && scenario.tracks.empty())
            throw ConfigError("scenario '" + scenario.name +
                              "': HO condition needs recorded walkers");
        if (job.condition != Condition::HO && !scenario.has_robot_mission())
            throw ConfigError("scenario '" + scenario.name + "': condition " +
                              condition_name(job.condition) +
                              " needs a robot start and goal");
        if (job.condition != Condition::HO && scenario.tracks.empty() &&
            !(scenario.robot_speed > 0.0) && !(manifest.robot_speed > 0.0))
            throw ConfigError("scenario '" + scenario.name +
                              "': robot speed unresolved for an empty scene");
    }

    std::vector<EpisodeArtifact> artifacts(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                const Job& job = jobs[i];
                const Scenario& scenario = scenarios[job.scenario_index];
                EpisodeSetup setup = scenario.setup();
                if (manifest.robot_speed > 0.0) setup.robot_speed = manifest.robot_speed;

                EpisodeOptions options;
                options.game = manifest.game;
                options.vfh = manifest.vfh;
                options.tick_cap = manifest.tick_cap;
                options.planner = job.condition == Condition::HO ? PlannerKind::ReplayOnly
                                  : job.condition == Condition::GT ? PlannerKind::GT
                                                                   : PlannerKind::VFH;

                EpisodeArtifact artifact;
                artifact.scenario_name = scenario.name;
                artifact.condition = job.condition;
                artifact.episode = run_episode(setup, options);
                const std::uint64_t episode_seed =
                    manifest.seed ^ detail::fnv1a64(scenario.name);
                artifact.metrics = compute_episode_metrics(
                    artifact.episode, scenario.name, job.condition,
                    scenario.arena_diagonal(), episode_seed);
                artifacts[i] = std::move(artifact);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t pool =
        std::min<std::size_t>(jobs.size(), hw == 0 ? 2 : std::min(hw, 8u));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t + 1 < pool; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    RunOutput output;
    output.episodes = std::move(artifacts);
    for (const auto& scenario : scenarios)
        for (const auto& warning : scenario.warnings)
            output.warnings.push_back(scenario.name + ": " + warning);
    for (const auto& artifact : output.episodes)
        output.infeasible_ticks_total += artifact.metrics.infeasible_ticks;
    return output;
}

// ---------------------------------------------------------------------------
// Batch statistics
// ---------------------------------------------------------------------------

/// Per-metric statistical battery over the batch, grouped by condition.
struct MetricBattery {
    std::string metric;
    std::vector<std::string> group_labels;
    std::vector<std::vector<double>> groups;
    std::optional<StatResult> kruskal;
    std::optional<StatResult> spread;
    std::vector<StatResult> posthoc;
    std::vector<std::string> notes;
};

namespace detail {

inline double metric_field(const MetricReport& m, const std::string& name) {
    if (name == "plr") return m.plr;
    if (name == "pr") return m.pr;
    return m.cpd;
}

} // namespace detail

/// Collect each metric's per-condition samples and run the nonparametric
/// battery on them. Conditions with no finite values are dropped; tests that
/// are undefined on the data (degenerate or too small) are skipped with a
/// note instead of failing the run.
inline std::vector<MetricBattery> compute_batch_stats(std::span<const MetricReport> reports) {
    std::vector<MetricBattery> batteries;
    for (const std::string metric : {"plr", "pr", "cpd"}) {
        MetricBattery battery;
        battery.metric = metric;
        for (const Condition c : {Condition::HO, Condition::GT, Condition::VFH}) {
            std::vector<double> values;
            for (const auto& report : reports) {
                if (report.condition != c) continue;
                const double v = detail::metric_field(report, metric);
                if (std::isfinite(v)) values.push_back(v);
            }
            if (!values.empty()) {
                battery.group_labels.push_back(condition_name(c));
                battery.groups.push_back(std::move(values));
            }
        }

        if (battery.groups.size() >= 2) {
            try {
                battery.kruskal = kruskal_wallis(battery.groups, battery.group_labels);
            } catch (const std::exception& e) {
                battery.notes.push_back(std::string("kruskal_wallis skipped: ") + e.what());
            }
            try {
                battery.spread = levene(battery.groups, battery.group_labels);
            } catch (const std::exception& e) {
                battery.notes.push_back(std::string("levene skipped: ") + e.what());
            }
            try {
                battery.posthoc =
                    bonferroni_posthoc(battery.groups, 0.05, battery.group_labels);
            } catch (const std::exception& e) {
                battery.notes.push_back(std::string("posthoc skipped: ") + e.what());
            }
        } else {
            battery.notes.push_back("fewer than 2 conditions with data");
        }
        batteries.push_back(std::move(battery));
    }
    return batteries;
}

inline std::vector<MetricBattery> compute_batch_stats(const RunOutput& output) {
    std::vector<MetricReport> reports;
    reports.reserve(output.episodes.size());
    for (const auto& artifact : output.episodes) reports.push_back(artifact.metrics);
    return compute_batch_stats(reports);
}

// ---------------------------------------------------------------------------
// Artifact files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string tsv_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline std::string episode_stem(const EpisodeArtifact& artifact) {
    return artifact.scenario_name + "_" + condition_name(artifact.condition);
}

/// Percentile of a sorted sample with linear interpolation.
inline double sorted_percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double alpha = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * alpha;
}

} // namespace detail

/// Per-condition mean bars with seeded bootstrap comparison intervals
/// (2.5th to 97.5th percentile of subsample means).
inline std::vector<BarDatum> mean_chart_bars(const MetricBattery& battery,
                                             std::uint64_t seed) {
    std::vector<BarDatum> bars;
    for (std::size_t g = 0; g < battery.groups.size(); ++g) {
        const auto& values = battery.groups[g];
        BarDatum bar;
        bar.label = battery.group_labels[g];
        bar.value = std::accumulate(values.begin(), values.end(), 0.0) /
                    static_cast<double>(values.size());
        if (values.size() >= 3) {
            const std::size_t subset = std::max<std::size_t>(2, values.size() * 4 / 5);
            auto means = bootstrap(
                values, subset, 1000,
                seed ^ detail::fnv1a64(battery.metric + "/" + bar.label),
                [](std::span<const double> chosen) {
                    return std::accumulate(chosen.begin(), chosen.end(), 0.0) /
                           static_cast<double>(chosen.size());
                });
            std::sort(means.begin(), means.end());
            bar.lo = detail::sorted_percentile(means, 0.025);
            bar.hi = detail::sorted_percentile(means, 0.975);
        } else {
            bar.lo = bar.value;
            bar.hi = bar.value;
        }
        bars.push_back(std::move(bar));
    }
    return bars;
}

/// Per-condition mean rank of the pooled sample with a normal-approximation
/// comparison interval, the classic post-KW multiple-comparison display.
inline std::vector<BarDatum> rank_chart_bars(const MetricBattery& battery) {
    std::vector<double> pooled;
    for (const auto& group : battery.groups)
        pooled.insert(pooled.end(), group.begin(), group.end());
    const std::vector<double> ranks = average_ranks(pooled);
    const double n = static_cast<double>(pooled.size());

    std::vector<BarDatum> bars;
    std::size_t offset = 0;
    for (std::size_t g = 0; g < battery.groups.size(); ++g) {
        const std::size_t size = battery.groups[g].size();
        double sum = 0.0;
        for (std::size_t i = 0; i < size; ++i) sum += ranks[offset + i];
        offset += size;

        BarDatum bar;
        bar.label = battery.group_labels[g];
        bar.value = sum / static_cast<double>(size);
        const double half =
            1.96 * std::sqrt(n * (n + 1.0) / 12.0 / static_cast<double>(size));
        bar.lo = bar.value - half;
        bar.hi = bar.value + half;
        bars.push_back(std::move(bar));
    }
    return bars;
}

/// Render the metrics table as tab-separated text with fixed formatting.
inline void write_metrics_table(const RunOutput& output, std::ostream& out) {
    out << "scenario\tcondition\tagent\tplr\tpr\tcpd\tgoal_reached\tticks\t"
           "infeasible_ticks\n";
    for (const auto& artifact : output.episodes) {
        const MetricReport& m = artifact.metrics;
        out << m.scenario << '\t' << condition_name(m.condition) << '\t' << m.agent << '\t'
            << detail::tsv_double(m.plr) << '\t' << detail::tsv_double(m.pr) << '\t'
            << detail::tsv_double(m.cpd) << '\t' << (m.goal_reached ? 1 : 0) << '\t'
            << m.ticks << '\t' << m.infeasible_ticks << '\n';
    }
}

/// Parse a metrics table produced by write_metrics_table.
inline std::vector<MetricReport> read_metrics_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line.rfind("scenario\tcondition\tagent\t", 0) != 0)
        throw ParseError("metrics table: missing header", 1);

    std::vector<MetricReport> reports;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 9)
            throw ParseError("metrics table: expected 9 fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        try {
            MetricReport report;
            report.scenario = fields[0];
            report.condition = condition_from_name(fields[1]);
            report.agent = std::stoi(fields[2]);
            report.plr = detail::parse_log_double(fields[3], line_no);
            report.pr = detail::parse_log_double(fields[4], line_no);
            report.cpd = detail::parse_log_double(fields[5], line_no);
            report.goal_reached = fields[6] == "1";
            report.ticks = std::stoi(fields[7]);
            report.infeasible_ticks = std::stoi(fields[8]);
            reports.push_back(std::move(report));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("metrics table: bad field", line_no);
        }
    }
    return reports;
}

/// Render the statistics report as tab-separated text.
inline void write_stats_table(std::span<const MetricBattery> batteries, std::ostream& out) {
    out << "metric\tmethod\tgroups\tstatistic\tp_value\tdf1\tdf2\tsignificant\n";
    const auto write_row = [&out](const std::string& metric, const StatResult& r) {
        out << metric << '\t' << stat_method_name(r.method) << '\t';
        for (std::size_t i = 0; i < r.groups.size(); ++i) {
            if (i > 0) out << ',';
            out << r.groups[i];
        }
        out << '\t' << detail::tsv_double(r.statistic) << '\t'
            << detail::tsv_double(r.p_value) << '\t' << detail::tsv_double(r.df1) << '\t'
            << detail::tsv_double(r.df2) << '\t' << (r.significant ? 1 : 0) << '\n';
    };
    for (const auto& battery : batteries) {
        if (battery.kruskal) write_row(battery.metric, *battery.kruskal);
        if (battery.spread) write_row(battery.metric, *battery.spread);
        for (const auto& r : battery.posthoc) write_row(battery.metric, r);
        for (const auto& note : battery.notes)
            out << battery.metric << "\tnote\t\tnan\tnan\tnan\tnan\t0\t# " << note << '\n';
    }
}

/// Structured machine-readable summary of the whole run.
inline nlohmann::ordered_json run_summary_json(const RunManifest& manifest,
                                               const RunOutput& output,
                                               std::span<const MetricBattery> batteries) {
    nlohmann::ordered_json summary;
    summary["seed"] = manifest.seed;
    summary["conditions"] = nlohmann::ordered_json::array();
    for (const Condition c : manifest.conditions)
        summary["conditions"].push_back(condition_name(c));
    summary["scenarios"] = manifest.scenario_paths;
    summary["episodes"] = nlohmann::ordered_json::array();
    for (const auto& artifact : output.episodes) {
        const MetricReport& m = artifact.metrics;
        nlohmann::ordered_json row;
        row["scenario"] = m.scenario;
        row["condition"] = condition_name(m.condition);
        row["agent"] = m.agent;
        const auto metric_json = [](double v) {
            return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
        };
        row["plr"] = metric_json(m.plr);
        row["pr"] = metric_json(m.pr);
        row["cpd"] = metric_json(m.cpd);
        row["goal_reached"] = m.goal_reached;
        row["ticks"] = m.ticks;
        row["infeasible_ticks"] = m.infeasible_ticks;
        summary["episodes"].push_back(std::move(row));
    }
    summary["stats"] = nlohmann::ordered_json::array();
    for (const auto& battery : batteries) {
        nlohmann::ordered_json entry;
        entry["metric"] = battery.metric;
        const auto stat_json = [](const StatResult& r) {
            nlohmann::ordered_json j;
            j["method"] = stat_method_name(r.method);
            j["groups"] = r.groups;
            j["statistic"] = r.statistic;
            j["p_value"] = r.p_value;
            j["significant"] = r.significant;
            return j;
        };
        if (battery.kruskal) entry["kruskal_wallis"] = stat_json(*battery.kruskal);
        if (battery.spread) entry["levene"] = stat_json(*battery.spread);
        entry["posthoc"] = nlohmann::ordered_json::array();
        for (const auto& r : battery.posthoc) entry["posthoc"].push_back(stat_json(r));
        if (!battery.notes.empty()) entry["notes"] = battery.notes;
        summary["stats"].push_back(std::move(entry));
    }
    summary["warnings"] = output.warnings;
    summary["infeasible_ticks_total"] = output.infeasible_ticks_total;
    return summary;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

} // namespace detail

/**
 * @brief Render one SVG frame per executive tick from episode log rows.
 *
 * Returns the number of frames written. Files are named frame_0000.svg
 * onward inside dir, which is created if needed.
 */
inline int write_frames(std::span<const EpisodeLogRow> rows, double exec_dt,
                        const Scenario& scenario, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    int last_tick = -1;
    for (const auto& row : rows) last_tick = std::max(last_tick, row.tick);
    for (int tick = 0; tick <= last_tick; ++tick) {
        std::vector<ArrowGlyph> glyphs;
        for (const auto& row : rows) {
            if (row.tick != tick) continue;
            glyphs.push_back({{row.x, row.y}, row.heading});
        }
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.svg", tick);
        char caption[64];
        std::snprintf(caption, sizeof caption, "t = %.1f s", tick * exec_dt);
        const Vec2* goal =
            scenario.robot_goal.has_value() ? &*scenario.robot_goal : nullptr;
        detail::write_text_file(dir / name,
                                render_frame(scenario.world_min, scenario.world_max,
                                             glyphs, scenario.grid ? &*scenario.grid : nullptr,
                                             goal, caption));
    }
    return last_tick + 1;
}

/**
 * @brief Write every artifact of a finished batch under the output directory.
 *
 * Layout: logs/<scenario>_<condition>.log, metrics.tsv, stats.tsv,
 * summary.json, plots/<metric>_mean.svg and plots/<metric>_rank.svg, and,
 * when the manifest asks for animation, frames/<scenario>_<condition>/.
 * All writes happen on the calling thread, in a fixed order.
 */
inline void write_run_artifacts(const RunManifest& manifest, const RunOutput& output) {
    const std::filesystem::path root(manifest.output_dir);
    std::filesystem::create_directories(root / "logs");
    std::filesystem::create_directories(root / "plots");

    for (const auto& artifact : output.episodes) {
        std::ostringstream log;
        write_episode_log(artifact.episode, log);
        detail::write_text_file(root / "logs" / (detail::episode_stem(artifact) + ".log"),
                                log.str());
    }

    const std::vector<MetricBattery> batteries = compute_batch_stats(output);

    std::ostringstream metrics;
    write_metrics_table(output, metrics);
    detail::write_text_file(root / "metrics.tsv", metrics.str());

    std::ostringstream stats;
    write_stats_table(batteries, stats);
    detail::write_text_file(root / "stats.tsv", stats.str());

    detail::write_text_file(root / "summary.json",
                            run_summary_json(manifest, output, batteries).dump(2) + "\n");

    for (const auto& battery : batteries) {
        if (battery.groups.empty()) continue;
        const auto mean_bars = mean_chart_bars(battery, manifest.seed);
        detail::write_text_file(root / "plots" / (battery.metric + "_mean.svg"),
                                render_bar_chart(battery.metric + " by condition",
                                                 "mean with bootstrap interval",
                                                 mean_bars));
        const auto rank_bars = rank_chart_bars(battery);
        detail::write_text_file(root / "plots" / (battery.metric + "_rank.svg"),
                                render_bar_chart(battery.metric + " mean rank",
                                                 "mean rank with comparison interval",
                                                 rank_bars));
    }

    if (manifest.animate) {
        std::vector<Scenario> scenarios;
        for (const auto& path : manifest.scenario_paths)
            scenarios.push_back(load_scenario(path));
        for (const auto& artifact : output.episodes) {
            const Scenario* scenario = nullptr;
            for (const auto& s : scenarios)
                if (s.name == artifact.scenario_name) scenario = &s;
            if (!scenario) continue;
            write_frames(artifact.episode.log, artifact.episode.exec_dt, *scenario,
                         root / "frames" / detail::episode_stem(artifact));
        }
    }
}

} // namespace gtnav
