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
 * @file cluster.hpp
 * @brief Nodes, replicas, ingress routing and replica provisioning.
 *
 * Node 0 is the headnode and runs ingress; workers are nodes 1..N. A replica
 * is `provisioning` until its cold start elapses, then `ready`. Terminating
 * replicas finish what they were given and take nothing new; once empty they
 * are `retired` and stay only as history.
 *
 * Each replica carries two counters:
 *  - `assigned`: routed by the headnode and not yet completed. This is the
 *    ingress proxy's view and drives least-loaded routing and scale-down.
 *  - `in_flight`: requests actually being served on the replica. This is what
 *    the replica reports to the autoscaler.
 */

#ifndef EDGESIM_CLUSTER_HPP
#define EDGESIM_CLUSTER_HPP

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "edgesim/kernel.hpp"
#include "edgesim/request.hpp"
#include "edgesim/scenario.hpp"
#include "edgesim/types.hpp"

namespace edgesim {

enum class NodeRole : std::uint8_t { headnode, worker };

struct Node {
    NodeId id{};
    NodeRole role = NodeRole::worker;
    std::vector<ReplicaId> replicas; ///< provisioning, ready or terminating
};

enum class ReplicaState : std::uint8_t { provisioning, ready, terminating, retired };

std::string_view to_string(ReplicaState state);

/// Integral of an integer level over virtual time.
class TimeWeightedGauge {
public:
    void set(int value, Micros now) noexcept {
        area_ += static_cast<double>(value_) * static_cast<double>((now - last_change_).count());
        last_change_ = now;
        value_ = value;
    }
    void add(int delta, Micros now) noexcept { set(value_ + delta, now); }
    int value() const noexcept { return value_; }

    /// Time average since the previous pull (or since `floor`, whichever is later),
    /// then restarts the window. A zero-length window reports the current level.
    double pull(Micros now, Micros floor = Micros{0}) noexcept {
        set(value_, now);
        const Micros start = std::max(last_pull_, floor);
        const double span = static_cast<double>((now - start).count());
        const double avg = span > 0.0 ? area_ / span : static_cast<double>(value_);
        area_ = 0.0;
        last_pull_ = now;
        return avg;
    }

private:
    int value_ = 0;
    double area_ = 0.0;
    Micros last_change_{0};
    Micros last_pull_{0};
};

struct Replica {
    ReplicaId id{};
    NodeId node{};
    ReplicaState state = ReplicaState::provisioning;
    int in_flight = 0;
    int assigned = 0;
    Micros created_at{0};
    Micros ready_at{0};
    EventHandle ready_event;
    TimeWeightedGauge concurrency;
};

struct ReplicaCounts {
    int ready = 0;
    int provisioning = 0;
    int terminating = 0;
    int active() const noexcept { return ready + provisioning; }
};

struct RoutingAction {
    enum class Kind : std::uint8_t { serve_local, forward, buffer };
    Kind kind = Kind::buffer;
    ReplicaId replica{};
    NodeId node{};
    bool scale_from_zero = false; ///< buffered with no replica ready or starting
};

struct ScaleResult {
    std::vector<ReplicaId> started;
    std::vector<ReplicaId> terminating; ///< draining, still hold requests
    std::vector<ReplicaId> retired;     ///< removed at once
};

class ClusterState;

/// Chooses the node for each new replica.
class PlacementPolicy {
public:
    virtual ~PlacementPolicy() = default;
    virtual NodeId place(const ClusterState& cluster) const = 0;
};

/// Fewest non-terminating replicas wins; ties go to the node earliest in `preference`.
class BalancedPlacement final : public PlacementPolicy {
public:
    explicit BalancedPlacement(std::vector<NodeId> preference) : preference_(std::move(preference)) {}
    NodeId place(const ClusterState& cluster) const override;

private:
    std::vector<NodeId> preference_;
};

std::unique_ptr<PlacementPolicy> make_placement(PlacementKind kind, const TopologySpec& topology);

class ClusterError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ClusterState {
public:
    ClusterState(const TopologySpec& topology, const AutoscalerConfig& autoscaler, const FunctionSpec& function);
    ClusterState(const TopologySpec& topology, const AutoscalerConfig& autoscaler, const FunctionSpec& function,
                 std::unique_ptr<PlacementPolicy> placement);

    static constexpr NodeId headnode() noexcept { return NodeId{0}; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    bool hosts_replicas(NodeId node) const;

    const Replica& replica(ReplicaId id) const;
    /// Replicas that are not retired, in creation order.
    std::vector<ReplicaId> live_replicas() const;
    const std::vector<Replica>& all_replicas() const noexcept { return replicas_; }
    ReplicaCounts counts() const noexcept { return counts_; }
    /// Provisioning plus ready replicas on `node`.
    int active_on(NodeId node) const;

    /**
     * Routing for a request that reached the headnode: the ready replica with
     * the fewest assigned requests (below the hard limit, when one is set),
     * ties to the lowest node id and then the lowest replica id.
     */
    RoutingAction ingress() const;

    void dispatch(ReplicaId id);
    /// Undoes a dispatch whose forward message was lost. Returns true when the replica retired.
    bool abandon(ReplicaId id, Micros now);
    void begin_service(ReplicaId id, Micros now);
    /// Returns true when the replica retired with this completion.
    bool end_service(ReplicaId id, Micros now);

    /**
     * Moves the provisioning+ready count to `desired`. Scale-up places replicas
     * with the placement policy and schedules replica_ready after the cold
     * start. Scale-down picks the fewest requests in service first, ties to the
     * highest replica id; provisioning replicas count as empty.
     */
    ScaleResult apply_scale(int desired, Kernel& kernel);

    void mark_ready(ReplicaId id, Micros now);
    /// A replica that is ready immediately, for pre-warmed runs.
    ReplicaId add_ready_replica(Micros now);

    /// Time-averaged in_flight since the replica's previous report.
    double pull_concurrency(ReplicaId id, Micros now);

    int total_in_flight() const noexcept { return total_in_flight_; }

private:
    Replica& mutable_replica(ReplicaId id);
    ReplicaId create_replica(NodeId node, Micros now);
    void retire(Replica& r);
    void rebuild_routing_order();

    TopologySpec topology_;
    AutoscalerConfig autoscaler_;
    FunctionSpec function_;
    std::unique_ptr<PlacementPolicy> placement_;
    std::vector<Node> nodes_;
    std::vector<Replica> replicas_;
    std::vector<ReplicaId> routing_order_; ///< ready replicas sorted by (node, id)
    ReplicaCounts counts_;
    int total_in_flight_ = 0;
};

Micros service_time(const FunctionSpec& function);

/**
 * Starts service of `request` on a replica: marks it in service, increments the
 * replica's in_flight and schedules service_complete after base overhead plus
 * processing time. Throws ClusterError for a replica that is not serving.
 */
EventHandle serve(RequestRecord& request, ClusterState& cluster, ReplicaId replica, Kernel& kernel,
                  const FunctionSpec& function);

} // namespace edgesim

#endif // EDGESIM_CLUSTER_HPP
