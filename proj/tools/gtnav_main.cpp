#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gtnav/runner.hpp"

namespace {

using namespace gtnav;

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitRuntime = 4;

std::string format_metric(double v) { return detail::tsv_double(v); }

// ---------------------------------------------------------------------------
// ingest: normalize a raw track recording, optionally re-exporting it
// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "frame_table";
    double scale = 1.0;
    double frame_dt = 1.0;
    std::string output;
    std::string output_format;
};

int cmd_ingest(const IngestArgs& args) {
    const TrackFormat format = track_format_from_name(args.format);
    const IngestResult result =
        ingest_tracks_file(args.input, format, args.scale, args.frame_dt);
    for (const auto& warning : result.warnings)
        std::cerr << "warning: " << warning << '\n';

    double t0 = std::numeric_limits<double>::infinity();
    double t1 = -std::numeric_limits<double>::infinity();
    for (const auto& track : result.tracks) {
        t0 = std::min(t0, track.start_time());
        t1 = std::max(t1, track.end_time());
    }
    std::printf("agents\t%zu\n", result.tracks.size());
    std::printf("base_frame\t%lld\n", static_cast<long long>(result.base_frame));
    if (!result.tracks.empty()) {
        std::printf("time_span\t%s\n", format_metric(t1 - t0).c_str());
        std::printf("mean_speed\t%s\n",
                    format_metric(mean_track_speed(result.tracks)).c_str());
    }

    if (!args.output.empty()) {
        const TrackFormat out_format = args.output_format.empty()
                                           ? format
                                           : track_format_from_name(args.output_format);
        std::ofstream out(args.output, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + args.output + "'");
        // Exported positions are in meters: reading the file back with
        // scale 1 reproduces the ingested tracks.
        write_tracks(out, result.tracks, out_format, 1.0, args.frame_dt,
                     result.base_frame);
        std::printf("wrote\t%s\n", args.output.c_str());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate: load scenario files and report what they contain
// ---------------------------------------------------------------------------

int cmd_validate(const std::vector<std::string>& paths) {
    for (const auto& path : paths) {
        const Scenario scenario = load_scenario(path);
        for (const auto& warning : scenario.warnings)
            std::cerr << "warning: " << scenario.name << ": " << warning << '\n';
        std::printf("ok\t%s\ttracks=%zu\tgrid=%s\trobot=%s\n", scenario.name.c_str(),
                    scenario.tracks.size(), scenario.grid ? "yes" : "no",
                    scenario.has_robot_mission() ? "yes" : "no");
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run: execute a manifest and write its artifacts
// ---------------------------------------------------------------------------

struct RunArgs {
    std::string manifest_path;
    std::string output_dir;
    std::int64_t seed = -1;
    int tick_cap = -1;
    double robot_speed = -1.0;
    bool animate = false;
};

int cmd_run(const RunArgs& args) {
    RunManifest manifest = load_manifest(args.manifest_path);
    if (!args.output_dir.empty()) manifest.output_dir = args.output_dir;
    if (args.seed >= 0) manifest.seed = static_cast<std::uint64_t>(args.seed);
    if (args.tick_cap >= 0) manifest.tick_cap = args.tick_cap;
    if (args.robot_speed >= 0.0) manifest.robot_speed = args.robot_speed;
    if (args.animate) manifest.animate = true;

    const RunOutput output = run_manifest(manifest);
    for (const auto& warning : output.warnings)
        std::cerr << "warning: " << warning << '\n';
    write_run_artifacts(manifest, output);

    for (const auto& artifact : output.episodes) {
        const MetricReport& m = artifact.metrics;
        std::printf("%s\t%s\tgoal=%d\tticks=%d\tplr=%s\tpr=%s\tcpd=%s\n",
                    m.scenario.c_str(), condition_name(m.condition), m.goal_reached ? 1 : 0,
                    m.ticks, format_metric(m.plr).c_str(), format_metric(m.pr).c_str(),
                    format_metric(m.cpd).c_str());
    }
    std::printf("artifacts\t%s\n", manifest.output_dir.c_str());

    if (output.infeasible_ticks_total > 0) {
        std::cerr << "error: " << output.infeasible_ticks_total
                  << " executed tick(s) violated the separation constraint\n";
        return kExitRuntime;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// metrics: per-agent path metrics from episode logs
// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::vector<std::string> logs;
    double arena_diagonal = 0.0;
};

int cmd_metrics(const MetricsArgs& args) {
    std::printf("file\tagent\tplr\tpr\tcpd\n");
    for (const auto& path : args.logs) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open '" + path + "'");
        const ParsedEpisodeLog log = read_episode_log(in);
        const auto trajectories = trajectories_from_log(log);

        double diagonal = args.arena_diagonal;
        if (!(diagonal > 0.0)) {
            Vec2 lo{std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
            Vec2 hi{-std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
            for (const auto& [id, traj] : trajectories)
                for (const auto& sample : traj.samples) {
                    lo.x = std::min(lo.x, sample.position.x);
                    lo.y = std::min(lo.y, sample.position.y);
                    hi.x = std::max(hi.x, sample.position.x);
                    hi.y = std::max(hi.y, sample.position.y);
                }
            diagonal = distance(lo, hi);
        }

        for (std::size_t i = 0; i < trajectories.size(); ++i) {
            double plr = std::numeric_limits<double>::quiet_NaN();
            double pr = std::numeric_limits<double>::quiet_NaN();
            double cpd = std::numeric_limits<double>::quiet_NaN();
            try {
                plr = path_length_ratio(trajectories[i].second);
            } catch (const MetricError&) {
            }
            try {
                pr = path_regularity(trajectories[i].second);
            } catch (const MetricError&) {
            }
            std::vector<Trajectory> others;
            for (std::size_t j = 0; j < trajectories.size(); ++j)
                if (j != i) others.push_back(trajectories[j].second);
            try {
                cpd = closest_pedestrian_distance(trajectories[i].second, others, diagonal);
            } catch (const MetricError&) {
            }
            std::printf("%s\t%d\t%s\t%s\t%s\n", path.c_str(), trajectories[i].first,
                        format_metric(plr).c_str(), format_metric(pr).c_str(),
                        format_metric(cpd).c_str());
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// stats: nonparametric battery over a metrics table
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& metrics_path) {
    std::ifstream in(metrics_path);
    if (!in) throw ConfigError("cannot open '" + metrics_path + "'");
    const std::vector<MetricReport> reports = read_metrics_table(in);
    const auto batteries = compute_batch_stats(reports);
    std::ostringstream out;
    write_stats_table(batteries, out);
    std::fputs(out.str().c_str(), stdout);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// animate: render SVG frames from an episode log
// ---------------------------------------------------------------------------

struct AnimateArgs {
    std::string log_path;
    std::string scenario_path;
    std::string out_dir;
};

int cmd_animate(const AnimateArgs& args) {
    std::ifstream in(args.log_path);
    if (!in) throw ConfigError("cannot open '" + args.log_path + "'");
    const ParsedEpisodeLog log = read_episode_log(in);
    const Scenario scenario = load_scenario(args.scenario_path);
    const int frames = write_frames(log.rows, log.exec_dt, scenario, args.out_dir);
    std::printf("frames\t%d\t%s\n", frames, args.out_dir.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pedestrian-aware robot navigation toolkit"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    CLI::App* ingest = app.add_subcommand("ingest", "normalize a raw track recording");
    ingest->add_option("--input", ingest_args.input, "track file to read")->required();
    ingest->add_option("--format", ingest_args.format,
                       "input layout: frame_table or obsmat");
    ingest->add_option("--scale", ingest_args.scale, "meters per input unit")->required();
    ingest->add_option("--frame-dt", ingest_args.frame_dt, "seconds per frame")->required();
    ingest->add_option("--output", ingest_args.output, "write normalized tracks here");
    ingest->add_option("--output-format", ingest_args.output_format,
                       "layout for --output (defaults to --format)");

    std::vector<std::string> validate_paths;
    CLI::App* validate = app.add_subcommand("validate", "check scenario files");
    validate->add_option("scenarios", validate_paths, "scenario config files")->required();

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "execute a batch manifest");
    run->add_option("manifest", run_args.manifest_path, "manifest config file")->required();
    run->add_option("--output-dir", run_args.output_dir, "override the artifact directory");
    run->add_option("--seed", run_args.seed, "override the manifest seed");
    run->add_option("--tick-cap", run_args.tick_cap, "override the episode tick cap");
    run->add_option("--robot-speed", run_args.robot_speed, "override the robot speed");
    run->add_flag("--animate", run_args.animate, "also render per-tick SVG frames");

    MetricsArgs metrics_args;
    CLI::App* metrics = app.add_subcommand("metrics", "path metrics from episode logs");
    metrics->add_option("logs", metrics_args.logs, "episode log files")->required();
    metrics->add_option("--arena-diagonal", metrics_args.arena_diagonal,
                        "normalization length for proximity (default: log bounding box)");

    std::string stats_path;
    CLI::App* stats = app.add_subcommand("stats", "nonparametric battery over a metrics table");
    stats->add_option("metrics", stats_path, "metrics.tsv file")->required();

    AnimateArgs animate_args;
    CLI::App* animate = app.add_subcommand("animate", "render SVG frames from an episode log");
    animate->add_option("--log", animate_args.log_path, "episode log file")->required();
    animate->add_option("--scenario", animate_args.scenario_path, "scenario config file")
        ->required();
    animate->add_option("--out", animate_args.out_dir, "frame output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_args);
        if (*validate) return cmd_validate(validate_paths);
        if (*run) return cmd_run(run_args);
        if (*metrics) return cmd_metrics(metrics_args);
        if (*stats) return cmd_stats(stats_path);
        if (*animate) return cmd_animate(animate_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const MetricError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const DegenerateDataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnexpected;
    }
    return kExitUnexpected;
}
