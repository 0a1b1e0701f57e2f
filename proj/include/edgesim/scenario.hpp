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
 * @file scenario.hpp
 * @brief Scenario description, validation and expansion into individual runs.
 *
 * A scenario describes one experiment grid: the cluster topology, the grid of
 * end-to-end delays X, processing times and user counts, plus the function,
 * autoscaler and workload settings shared by every run of the grid.
 *
 * Delays are split per topology:
 *  - single site: the whole delay X sits on the client access link;
 *  - multi site:  the access link and every headnode-worker link get X/2.
 */

#ifndef EDGESIM_SCENARIO_HPP
#define EDGESIM_SCENARIO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgesim/types.hpp"

namespace edgesim {

std::string_view to_string(TopologyKind kind);
std::optional<TopologyKind> parse_topology_kind(std::string_view text);

/// Where new replicas go when scaling up.
enum class PlacementKind : std::uint8_t {
    balanced_headnode_first, ///< fewest replicas first, ties to the lowest node id
    balanced_workers_first,  ///< fewest replicas first, ties to workers before the headnode
};

std::string_view to_string(PlacementKind kind);

struct DelayProfile {
    double x_total_ms = 0.0;
    double access_delay_ms = 0.0; ///< one way, client <-> headnode
    double intra_delay_ms = 0.0;  ///< one way, headnode <-> worker
    double jitter_ms = 0.0;       ///< uniform half-width
    double loss_prob = 0.0;
};

struct TopologySpec {
    TopologyKind kind = TopologyKind::single_site;
    int worker_count = 2;
    bool headnode_hosts_replicas = true;
    PlacementKind placement = PlacementKind::balanced_headnode_first;
};

struct FunctionSpec {
    double processing_time_ms = 0.0; ///< the sleep payload
    double base_overhead_ms = 2.0;
    double cold_start_ms = 800.0;
};

struct AutoscalerConfig {
    int max_replicas = 100;
    int hard_concurrency_limit = 0; ///< 0 means unlimited
    double concurrency_target = 100.0;
    double target_utilization_pct = 70.0;
    double stable_window_s = 60.0;
    double panic_window_pct = 10.0;
    double panic_threshold_pct = 200.0;
    double tick_interval_s = 2.0;
    double scale_to_zero_grace_s = 30.0;

    double panic_window_s() const { return stable_window_s * panic_window_pct / 100.0; }
    /// Per-replica concurrency the autoscaler aims for.
    double effective_target() const { return concurrency_target * target_utilization_pct / 100.0; }
};

struct WorkloadSpec {
    int concurrent_users = 1;
    double duration_s = 300.0;
    double request_timeout_ms = 20000.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    TopologySpec topology;
    /// Topologies a sweep runs; `topology.kind` is the one `expand_grid` uses.
    std::vector<TopologyKind> topologies{TopologyKind::single_site, TopologyKind::multi_site};
    std::vector<double> delay_grid{0.0, 12.5, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0};
    std::vector<double> processing_grid{0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    std::vector<int> user_grid{1, 50, 500};
    double jitter_ms = 0.0;
    double loss_prob = 0.0;
    FunctionSpec function;
    AutoscalerConfig autoscaler;
    WorkloadSpec workload;
    std::uint64_t seed = 1;
    int repetitions = 1;

    /// Copy with `topology.kind` set, as used for one leg of a sweep.
    ScenarioConfig for_topology(TopologyKind kind) const;
};

/// One simulation run of a grid.
struct RunPlan {
    std::size_t index = 0;
    TopologyKind topology = TopologyKind::single_site;
    DelayProfile delays;
    int users = 1;
    double processing_ms = 0.0;
    int repetition = 0;
    std::uint64_t seed = 0;
};

/// Malformed scenario text. Carries a 1-based line and column.
class ScenarioSyntaxError : public std::runtime_error {
public:
    ScenarioSyntaxError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed scenario violating an invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Parses the line-oriented scenario format:
 *
 *     # comment
 *     topology.kind = multi_site
 *     delay.x_total_ms = 0, 12.5, 25
 *     autoscaler.stable_window_s = 60   # trailing comment
 *
 * Unset keys keep the defaults of ScenarioConfig. The result is validated.
 */
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(to_scenario_text(c)) reproduces c.
std::string to_scenario_text(const ScenarioConfig& config);

void validate(const ScenarioConfig& config);

DelayProfile derive_delays(double x_total_ms, TopologyKind kind, double jitter_ms = 0.0,
                           double loss_prob = 0.0);

/// Stateless 64-bit mix of a base seed with an index (splitmix64 finalizer over
/// seed + (index + 1) * golden gamma). Bijective in `index` for a fixed seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Runs ordered delay, then users, then processing time, then repetition.
std::vector<RunPlan> expand_grid(const ScenarioConfig& config);

} // namespace edgesim

#endif // EDGESIM_SCENARIO_HPP
