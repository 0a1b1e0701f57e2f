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

/**
 * @file runner.hpp
 * @brief Sweeps over a run grid, result files, and the single/multi comparison.
 *
 * Runs share nothing, so a sweep may use several worker threads. Outputs are
 * always merged in plan order; the files do not depend on the thread count.
 */

#ifndef EDGESIM_RUNNER_HPP
#define EDGESIM_RUNNER_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgesim/loadgen.hpp"
#include "edgesim/scenario.hpp"
#include "edgesim/simulation.hpp"

namespace edgesim {

inline constexpr std::string_view kToolVersion = EDGESIM_VERSION;

struct SweepOptions {
    unsigned jobs = 1;
    SimulationOptions simulation;
    /// When set, each run writes `<topology>-<index>.trace.csv` here.
    std::optional<std::filesystem::path> trace_dir;
    /// Polled between runs; a set flag stops the sweep after the runs in progress.
    const std::atomic<bool>* stop = nullptr;
};

struct CompletedRun {
    RunPlan plan;
    RunOutput output;
};

struct SweepOutcome {
    std::vector<CompletedRun> runs; ///< completed runs, in plan order
    bool interrupted = false;
};

/// Runs `plans` of one topology leg of `config`. Exceptions from a run propagate.
SweepOutcome run_plans(const ScenarioConfig& config, const std::vector<RunPlan>& plans,
                       const SweepOptions& options = {});

// ---------------------------------------------------------------------------
// Results files

/// Malformed results file.
class ResultsFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string results_csv_header();
/// One CSV row without a trailing newline; percentiles are empty without successes.
std::string format_results_row(const RunResult& row);
std::string results_to_csv(const std::vector<RunResult>& rows);
std::string results_to_json(const std::vector<RunResult>& rows);
std::vector<RunResult> parse_results_csv(std::string_view text);
std::vector<RunResult> read_results_csv(const std::filesystem::path& path);

/// Repetitions of one grid point.
struct AggregateRow {
    TopologyKind topology = TopologyKind::single_site;
    double x_total_ms = 0.0;
    int users = 0;
    double processing_ms = 0.0;
    std::size_t runs = 0;
    double throughput_mean = 0.0;
    double throughput_stddev = 0.0; ///< sample stddev; 0 for a single run
    double successes_mean = 0.0;
    double timeouts_mean = 0.0;
    double drops_mean = 0.0;
    std::optional<double> p50_mean_ms; ///< over runs with successes
    std::optional<double> p99_mean_ms;
    double max_ready_mean = 0.0;
};

/// Groups by (topology, x_total, users, processing) in first-seen order.
std::vector<AggregateRow> aggregate(const std::vector<RunResult>& rows);
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

/// FNV-1a over the canonical scenario text and every plan's grid key and seed.
std::uint64_t grid_hash(const ScenarioConfig& config, const std::vector<RunPlan>& plans);

struct ManifestInfo {
    const ScenarioConfig* config = nullptr;
    std::vector<TopologyKind> topologies;
    std::uint64_t grid_hash = 0;
    std::size_t planned_runs = 0;
    std::size_t completed_runs = 0;
    bool interrupted = false;
    std::string created_at; ///< ISO 8601 UTC
};

std::string manifest_json(const ManifestInfo& info);
std::string utc_timestamp();

/// replicas.csv, autoscaler.csv and latency_histogram.csv for one run.
void write_run_details(const std::filesystem::path& dir, const RunOutput& output);

void write_text_file(const std::filesystem::path& path, std::string_view content);

// ---------------------------------------------------------------------------
// Comparison and plot data

struct ComparisonRow {
    double x_total_ms = 0.0;
    int users = 0;
    double processing_ms = 0.0;
    double single_site_rps = 0.0;
    double multi_site_rps = 0.0;
    std::optional<double> ratio; ///< multi / single; absent when single is 0
};

struct RatioBand {
    int users = 0;
    std::size_t points = 0; ///< rows with a ratio
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

struct Comparison {
    std::vector<ComparisonRow> rows; ///< sorted by (users, x_total, processing)
    std::vector<RatioBand> bands;    ///< one per user count, ascending
};

/// The two inputs cover different grid keys.
class GridMismatchError : public std::runtime_error {
public:
    explicit GridMismatchError(std::vector<std::string> missing);
    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

/// Joins on (x_total, users, processing), averaging repetitions.
Comparison compare_results(const std::vector<RunResult>& single_site, const std::vector<RunResult>& multi_site);
std::string format_comparison(const Comparison& comparison);

/**
 * One file per (topology, users), named `throughput_<topology>_u<users>.csv`,
 * with `processing_ms` followed by one throughput column per delay, delays
 * ascending. Repetitions are averaged. Returns the written paths.
 */
std::vector<std::filesystem::path> write_plotdata(const std::vector<RunResult>& rows,
                                                  const std::filesystem::path& dir);

/// Shortest text that reads back to the same double.
std::string format_number(double value);

} // namespace edgesim

#endif // EDGESIM_RUNNER_HPP
