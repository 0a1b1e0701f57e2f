/*
 * Copyright 2026 The edgesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// edgesim command-line tool: run, compare, plotdata.
//
// Exit status: 0 success, 1 usage or parse error, 2 runtime error (including
// an interrupted sweep, whose completed runs are still written).

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgesim/runner.hpp"
#include "edgesim/scenario.hpp"

namespace fs = std::filesystem;
using namespace edgesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct RunArgs {
    std::string scenario;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> topology;
    std::vector<int> users;
    std::vector<double> x;
    std::vector<double> proc;
    std::optional<int> reps;
    unsigned jobs = 1;
    std::string format = "csv";
    bool trace = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig configure(const RunArgs& args) {
    ScenarioConfig config = load_scenario(args.scenario);
    if (args.seed) config.seed = *args.seed;
    if (args.topology) {
        if (*args.topology == "both") {
            config.topologies = {TopologyKind::single_site, TopologyKind::multi_site};
        } else {
            const auto kind = parse_topology_kind(*args.topology);
            if (!kind) throw UsageError("unknown topology '" + *args.topology + "'");
            config.topologies = {*kind};
            config.topology.kind = *kind;
        }
    }
    if (!args.users.empty()) config.user_grid = args.users;
    if (!args.x.empty()) config.delay_grid = args.x;
    if (!args.proc.empty()) config.processing_grid = args.proc;
    if (args.reps) config.repetitions = *args.reps;
    validate(config);
    return config;
}

int run_command(const RunArgs& args) {
    const ScenarioConfig config = configure(args);
    const fs::path out = args.out;
    fs::create_directories(out);

    SweepOptions options;
    options.jobs = std::max(1u, args.jobs);
    options.stop = &g_interrupted;
    if (args.trace) {
        options.trace_dir = out / "traces";
        fs::create_directories(*options.trace_dir);
    }

    std::vector<RunPlan> all_plans;
    std::vector<RunResult> all_rows;
    std::size_t planned = 0;
    bool interrupted = false;
    for (const TopologyKind kind : config.topologies) {
        const ScenarioConfig leg = config.for_topology(kind);
        const auto plans = expand_grid(leg);
        planned += plans.size();
        all_plans.insert(all_plans.end(), plans.begin(), plans.end());
        std::cerr << "edgesim: " << to_string(kind) << ": " << plans.size() << " runs\n";

        const SweepOutcome outcome = interrupted ? SweepOutcome{{}, true} : run_plans(leg, plans, options);
        interrupted = interrupted || outcome.interrupted;

        std::vector<RunResult> rows;
        for (const auto& run : outcome.runs) {
            rows.push_back(run.output.result);
            write_run_details(out / "runs" / (std::string(to_string(kind)) + "-" + std::to_string(run.plan.index)),
                              run.output);
        }
        const std::string stem = "results_" + std::string(to_string(kind));
        write_text_file(out / (stem + ".csv"), results_to_csv(rows));
        if (args.format == "json") write_text_file(out / (stem + ".json"), results_to_json(rows));
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }

    write_text_file(out / "results.csv", results_to_csv(all_rows));
    if (args.format == "json") write_text_file(out / "results.json", results_to_json(all_rows));
    write_text_file(out / "aggregate.csv", aggregate_to_csv(aggregate(all_rows)));

    ManifestInfo info;
    info.config = &config;
    info.topologies = config.topologies;
    info.grid_hash = grid_hash(config, all_plans);
    info.planned_runs = planned;
    info.completed_runs = all_rows.size();
    info.interrupted = interrupted;
    info.created_at = utc_timestamp();
    write_text_file(out / "manifest.json", manifest_json(info));

    if (interrupted) {
        std::cerr << "edgesim: interrupted; wrote " << all_rows.size() << " of " << planned << " runs to "
                  << out.string() << "\n";
        return kExitRuntime;
    }
    std::cerr << "edgesim: wrote " << all_rows.size() << " runs to " << out.string() << "\n";
    return kExitOk;
}

int compare_command(const std::string& single_path, const std::string& multi_path) {
    const auto single = read_results_csv(single_path);
    const auto multi = read_results_csv(multi_path);
    std::cout << format_comparison(compare_results(single, multi));
    return kExitOk;
}

int plotdata_command(const std::string& results_path, const std::string& out) {
    const auto rows = read_results_csv(results_path);
    for (const auto& path : write_plotdata(rows, out)) std::cout << path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgesim: discrete-event simulator of single- and multi-site edge serverless clusters"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario grid and write result files");
    run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--seed", run.seed, "Base seed");
    run_cmd->add_option("--topology", run.topology, "single_site, multi_site or both")
        ->check(CLI::IsMember({"single_site", "multi_site", "both"}));
    run_cmd->add_option("--users", run.users, "Comma-separated user counts")->delimiter(',');
    run_cmd->add_option("--x", run.x, "Comma-separated total delays X in ms")->delimiter(',');
    run_cmd->add_option("--proc", run.proc, "Comma-separated processing times in ms")->delimiter(',');
    run_cmd->add_option("--reps", run.reps, "Repetitions per grid point");
    run_cmd->add_option("--jobs", run.jobs, "Parallel runs")->capture_default_str();
    run_cmd->add_option("--format", run.format, "Results format; json also writes JSON mirrors")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    run_cmd->add_flag("--trace", run.trace, "Write one event trace per run under <out>/traces");

    std::string single_path, multi_path;
    auto* compare_cmd = app.add_subcommand("compare", "Compare single-site and multi-site results");
    compare_cmd->add_option("single", single_path, "Single-site results CSV")->required();
    compare_cmd->add_option("multi", multi_path, "Multi-site results CSV")->required();

    std::string plot_input, plot_out = "plotdata";
    auto* plot_cmd = app.add_subcommand("plotdata", "Write per-panel throughput tables");
    plot_cmd->add_option("results", plot_input, "Results CSV")->required();
    plot_cmd->add_option("--out", plot_out, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run_cmd) {
            std::signal(SIGINT, on_sigint);
            return run_command(run);
        }
        if (*compare_cmd) return compare_command(single_path, multi_path);
        if (*plot_cmd) return plotdata_command(plot_input, plot_out);
    } catch (const ScenarioSyntaxError& e) {
        std::cerr << "edgesim: " << run.scenario << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "edgesim: invalid scenario: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "edgesim: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ResultsFormatError& e) {
        std::cerr << "edgesim: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "edgesim: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
