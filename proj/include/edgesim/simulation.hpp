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
 * @file simulation.hpp
 * @brief One run: a tester, a headnode and workers, driven by closed-loop users.
 *
 * Request path:
 *
 *     tester --access--> headnode --(intra, when forwarded)--> worker
 *     tester <--access-- headnode <--(intra, when forwarded)-- worker
 *
 * The run lasts `duration_s`; it then keeps going for one request timeout so
 * every issued request ends as success, timeout or dropped.
 */

#ifndef EDGESIM_SIMULATION_HPP
#define EDGESIM_SIMULATION_HPP

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <vector>

#include "edgesim/autoscaler.hpp"
#include "edgesim/cluster.hpp"
#include "edgesim/kernel.hpp"
#include "edgesim/loadgen.hpp"
#include "edgesim/network.hpp"
#include "edgesim/scenario.hpp"

namespace edgesim {

struct SimulationOptions {
    bool autoscaler_enabled = true;
    int prewarmed_replicas = 0;
    /// Check replica bookkeeping against the request table after every event (slow).
    bool audit = false;
    /// When set, one `time_us,kind,payload_id` line per processed event.
    std::ostream* trace = nullptr;
};

struct ReplicaTimelinePoint {
    Micros at{0};
    int ready_replicas = 0;
};

struct RunOutput {
    RunResult result;
    std::vector<ReplicaTimelinePoint> replica_timeline;
    std::vector<AutoscalerDecision> decisions;
    std::vector<LatencyBucket> latency_histogram;
    std::uint64_t events_processed = 0;
    std::uint64_t trace_hash = 0;
    std::uint64_t intra_traversals = 0; ///< headnode<->worker message traversals
};

class Simulation {
public:
    Simulation(const ScenarioConfig& config, const RunPlan& plan, SimulationOptions options = {});

    /// Runs to the end of the horizon and summarizes.
    RunOutput run();

    /// Advances to `t` without summarizing, for step-wise inspection.
    void run_until(Micros t);

    Micros horizon() const noexcept { return horizon_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    const ClusterState& cluster() const noexcept { return cluster_; }
    const Autoscaler& autoscaler() const noexcept { return autoscaler_; }
    const LoadGenerator& loadgen() const noexcept { return loadgen_; }
    const RequestTable& requests() const noexcept { return requests_; }
    const Network& network() const noexcept { return network_; }
    std::size_t ingress_backlog() const noexcept { return buffer_.size(); }
    NodeId tester() const noexcept { return tester_; }
    const std::vector<ReplicaTimelinePoint>& replica_timeline() const noexcept { return timeline_; }
    const std::vector<AutoscalerDecision>& decisions() const noexcept { return decisions_; }

    void handle(const Event& ev);

private:
    enum class Message : std::uint32_t {
        request_to_head,
        request_to_replica,
        response_to_head,
        response_to_tester,
        metric_sample,
    };

    void start();
    void issue(UserId user);
    void on_request_at_head(RequestId id);
    void route(RequestId id);
    void dispatch(RequestId id, ReplicaId replica, NodeId node);
    void on_request_at_replica(RequestId id, ReplicaId replica);
    void on_service_complete(RequestId id, ReplicaId replica);
    void on_response_at_head(RequestId id);
    void on_response_at_tester(RequestId id);
    void on_timer(UserId user);
    void on_replica_ready(ReplicaId replica);
    void on_tick();
    void on_sample(std::uint32_t slot);
    void drain_buffer();
    void scale_to(int desired);
    bool send(NodeId from, NodeId to, Message msg, std::uint64_t id, std::uint32_t aux = 0);
    void mark_lost(RequestId id);
    void maybe_release(RequestId id);
    void note_ready_count();
    void audit() const;

    ScenarioConfig config_;
    RunPlan plan_;
    SimulationOptions options_;
    FunctionSpec function_;

    Kernel kernel_;
    Network network_;
    ClusterState cluster_;
    Autoscaler autoscaler_;
    LoadGenerator loadgen_;
    RequestTable requests_;

    NodeId tester_;
    Micros horizon_;
    Micros tick_interval_;
    std::deque<RequestId> buffer_;
    TimeWeightedGauge buffer_gauge_;
    std::vector<ConcurrencySample> samples_in_transit_;
    std::vector<std::uint32_t> free_sample_slots_;

    std::vector<ReplicaTimelinePoint> timeline_;
    std::vector<AutoscalerDecision> decisions_;
    int max_ready_ = 0;
    bool started_ = false;
};

/// Convenience wrapper: builds a Simulation and runs it.
RunOutput simulate(const ScenarioConfig& config, const RunPlan& plan, SimulationOptions options = {});

} // namespace edgesim

#endif // EDGESIM_SIMULATION_HPP
