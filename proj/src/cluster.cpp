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

#include "edgesim/cluster.hpp"

#include <limits>
#include <string>

namespace edgesim {

// ---------------------------------------------------------------------------
// Requests

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::pending: return "pending";
    case Outcome::success: return "success";
    case Outcome::timeout: return "timeout";
    case Outcome::dropped: return "dropped";
    }
    return "unknown";
}

void RequestRecord::finish(Outcome terminal, Micros at) {
    if (outcome != Outcome::pending) throw std::logic_error("request already has a terminal outcome");
    if (terminal == Outcome::pending) throw std::logic_error("pending is not a terminal outcome");
    outcome = terminal;
    if (terminal == Outcome::success) completed_at = at;
}

RequestId RequestTable::create(UserId user, Micros issued_at) {
    std::uint32_t slot = 0;
    if (!free_.empty()) {
        slot = free_.back();
        free_.pop_back();
    } else {
        slot = static_cast<std::uint32_t>(slots_.size());
        slots_.emplace_back();
    }
    auto& s = slots_[slot];
    s.used = true;
    const auto id = RequestId{(static_cast<std::uint64_t>(s.generation) << 32) | slot};
    s.record = RequestRecord{};
    s.record.id = id;
    s.record.user = user;
    s.record.issued_at = issued_at;
    ++live_;
    return id;
}

bool RequestTable::contains(RequestId id) const noexcept {
    const auto slot = slot_of(id);
    return slot < slots_.size() && slots_[slot].used && slots_[slot].generation == generation_of(id);
}

RequestRecord& RequestTable::at(RequestId id) {
    if (!contains(id)) throw std::out_of_range("stale or unknown request id");
    return slots_[slot_of(id)].record;
}

const RequestRecord& RequestTable::at(RequestId id) const {
    if (!contains(id)) throw std::out_of_range("stale or unknown request id");
    return slots_[slot_of(id)].record;
}

void RequestTable::release(RequestId id) {
    if (!contains(id)) throw std::out_of_range("release of stale or unknown request id");
    auto& s = slots_[slot_of(id)];
    s.used = false;
    ++s.generation;
    free_.push_back(slot_of(id));
    --live_;
}

// ---------------------------------------------------------------------------
// Placement

NodeId BalancedPlacement::place(const ClusterState& cluster) const {
    NodeId best{};
    int best_count = std::numeric_limits<int>::max();
    for (NodeId node : preference_) {
        const int n = cluster.active_on(node);
        if (n < best_count) {
            best = node;
            best_count = n;
        }
    }
    if (best_count == std::numeric_limits<int>::max()) throw ClusterError("no node can host replicas");
    return best;
}

std::unique_ptr<PlacementPolicy> make_placement(PlacementKind kind, const TopologySpec& topology) {
    std::vector<NodeId> workers;
    for (int w = 1; w <= topology.worker_count; ++w) workers.push_back(NodeId{static_cast<std::uint32_t>(w)});

    std::vector<NodeId> order;
    if (topology.headnode_hosts_replicas && kind == PlacementKind::balanced_headnode_first) {
        order.push_back(ClusterState::headnode());
    }
    order.insert(order.end(), workers.begin(), workers.end());
    if (topology.headnode_hosts_replicas && kind == PlacementKind::balanced_workers_first) {
        order.push_back(ClusterState::headnode());
    }
    return std::make_unique<BalancedPlacement>(std::move(order));
}

// ---------------------------------------------------------------------------
// Cluster

std::string_view to_string(ReplicaState state) {
    switch (state) {
    case ReplicaState::provisioning: return "provisioning";
    case ReplicaState::ready: return "ready";
    case ReplicaState::terminating: return "terminating";
    case ReplicaState::retired: return "retired";
    }
    return "unknown";
}

ClusterState::ClusterState(const TopologySpec& topology, const AutoscalerConfig& autoscaler,
                           const FunctionSpec& function)
    : ClusterState(topology, autoscaler, function, make_placement(topology.placement, topology)) {}

ClusterState::ClusterState(const TopologySpec& topology, const AutoscalerConfig& autoscaler,
                           const FunctionSpec& function, std::unique_ptr<PlacementPolicy> placement)
    : topology_(topology), autoscaler_(autoscaler), function_(function), placement_(std::move(placement)) {
    if (topology.worker_count < 1) throw ClusterError("worker_count must be >= 1");
    nodes_.push_back(Node{headnode(), NodeRole::headnode, {}});
    for (int w = 1; w <= topology.worker_count; ++w) {
        nodes_.push_back(Node{NodeId{static_cast<std::uint32_t>(w)}, NodeRole::worker, {}});
    }
}

bool ClusterState::hosts_replicas(NodeId node) const {
    if (node == headnode()) return topology_.headnode_hosts_replicas;
    return index_of(node) < nodes_.size();
}

const Replica& ClusterState::replica(ReplicaId id) const {
    if (index_of(id) >= replicas_.size()) throw ClusterError("unknown replica id " + std::to_string(index_of(id)));
    return replicas_[index_of(id)];
}

Replica& ClusterState::mutable_replica(ReplicaId id) {
    if (index_of(id) >= replicas_.size()) throw ClusterError("unknown replica id " + std::to_string(index_of(id)));
    return replicas_[index_of(id)];
}

std::vector<ReplicaId> ClusterState::live_replicas() const {
    std::vector<ReplicaId> out;
    for (const auto& r : replicas_)
        if (r.state != ReplicaState::retired) out.push_back(r.id);
    return out;
}

int ClusterState::active_on(NodeId node) const {
    int n = 0;
    for (ReplicaId id : nodes_.at(index_of(node)).replicas) {
        const auto state = replicas_[index_of(id)].state;
        if (state == ReplicaState::provisioning || state == ReplicaState::ready) ++n;
    }
    return n;
}

RoutingAction ClusterState::ingress() const {
    const int limit = autoscaler_.hard_concurrency_limit;
    const Replica* best = nullptr;
    for (ReplicaId id : routing_order_) {
        const Replica& r = replicas_[index_of(id)];
        if (limit > 0 && r.assigned >= limit) continue;
        if (!best || r.assigned < best->assigned) best = &r;
    }
    RoutingAction action;
    if (!best) {
        action.kind = RoutingAction::Kind::buffer;
        action.scale_from_zero = counts_.active() == 0;
        return action;
    }
    action.kind = best->node == headnode() ? RoutingAction::Kind::serve_local : RoutingAction::Kind::forward;
    action.replica = best->id;
    action.node = best->node;
    return action;
}

void ClusterState::dispatch(ReplicaId id) {
    Replica& r = mutable_replica(id);
    if (r.state != ReplicaState::ready) {
        throw ClusterError("dispatch to replica " + std::to_string(index_of(id)) + " in state " +
                           std::string(to_string(r.state)));
    }
    ++r.assigned;
}

bool ClusterState::abandon(ReplicaId id, Micros) {
    Replica& r = mutable_replica(id);
    if (r.assigned <= 0) throw ClusterError("abandon without a matching dispatch");
    --r.assigned;
    if (r.state == ReplicaState::terminating && r.assigned == 0) {
        retire(r);
        return true;
    }
    return false;
}

void ClusterState::begin_service(ReplicaId id, Micros now) {
    Replica& r = mutable_replica(id);
    if (r.state != ReplicaState::ready && r.state != ReplicaState::terminating) {
        throw ClusterError("service on replica " + std::to_string(index_of(id)) + " in state " +
                           std::string(to_string(r.state)));
    }
    ++r.in_flight;
    ++total_in_flight_;
    r.concurrency.set(r.in_flight, now);
}

bool ClusterState::end_service(ReplicaId id, Micros now) {
    Replica& r = mutable_replica(id);
    if (r.in_flight <= 0 || r.assigned <= 0) throw ClusterError("service completion without a request in service");
    --r.in_flight;
    --r.assigned;
    --total_in_flight_;
    r.concurrency.set(r.in_flight, now);
    if (r.state == ReplicaState::terminating && r.assigned == 0) {
        retire(r);
        return true;
    }
    return false;
}

ReplicaId ClusterState::create_replica(NodeId node, Micros now) {
    Replica r;
    r.id = ReplicaId{static_cast<std::uint32_t>(replicas_.size())};
    r.node = node;
    r.state = ReplicaState::provisioning;
    r.created_at = now;
    r.concurrency.set(0, now);
    replicas_.push_back(r);
    nodes_[index_of(node)].replicas.push_back(r.id);
    ++counts_.provisioning;
    return r.id;
}

void ClusterState::retire(Replica& r) {
    if (r.state == ReplicaState::terminating) --counts_.terminating;
    if (r.state == ReplicaState::provisioning) --counts_.provisioning;
    if (r.state == ReplicaState::ready) --counts_.ready;
    r.state = ReplicaState::retired;
    auto& list = nodes_[index_of(r.node)].replicas;
    list.erase(std::remove(list.begin(), list.end(), r.id), list.end());
}

void ClusterState::rebuild_routing_order() {
    routing_order_.clear();
    for (const auto& r : replicas_)
        if (r.state == ReplicaState::ready) routing_order_.push_back(r.id);
    std::sort(routing_order_.begin(), routing_order_.end(), [this](ReplicaId a, ReplicaId b) {
        const auto na = index_of(replicas_[index_of(a)].node);
        const auto nb = index_of(replicas_[index_of(b)].node);
        return na != nb ? na < nb : index_of(a) < index_of(b);
    });
}

ScaleResult ClusterState::apply_scale(int desired, Kernel& kernel) {
    if (desired < 0 || desired > autoscaler_.max_replicas) {
        throw ClusterError("desired replica count " + std::to_string(desired) + " outside [0, " +
                           std::to_string(autoscaler_.max_replicas) + "]");
    }
    ScaleResult result;
    const Micros now = kernel.now();
    int active = counts_.active();

    while (active < desired) {
        const NodeId node = placement_->place(*this);
        const ReplicaId id = create_replica(node, now);
        replicas_[index_of(id)].ready_event =
            kernel.schedule_in(from_ms(function_.cold_start_ms), EventKind::replica_ready, Payload{index_of(id), 0, 0});
        result.started.push_back(id);
        ++active;
    }

    if (active > desired) {
        std::vector<Replica*> candidates;
        for (auto& r : replicas_) {
            if (r.state == ReplicaState::provisioning || r.state == ReplicaState::ready) candidates.push_back(&r);
        }
        std::sort(candidates.begin(), candidates.end(), [](const Replica* a, const Replica* b) {
            const int la = a->state == ReplicaState::provisioning ? 0 : a->in_flight;
            const int lb = b->state == ReplicaState::provisioning ? 0 : b->in_flight;
            return la != lb ? la < lb : index_of(a->id) > index_of(b->id);
        });
        for (Replica* r : candidates) {
            if (active == desired) break;
            if (r->state == ReplicaState::provisioning) {
                kernel.cancel(r->ready_event);
                retire(*r);
                result.retired.push_back(r->id);
            } else if (r->assigned == 0) {
                retire(*r);
                result.retired.push_back(r->id);
            } else {
                --counts_.ready;
                ++counts_.terminating;
                r->state = ReplicaState::terminating;
                result.terminating.push_back(r->id);
            }
            --active;
        }
        rebuild_routing_order();
    }
    return result;
}

void ClusterState::mark_ready(ReplicaId id, Micros now) {
    Replica& r = mutable_replica(id);
    if (r.state != ReplicaState::provisioning) {
        throw ClusterError("replica " + std::to_string(index_of(id)) + " is not provisioning");
    }
    r.state = ReplicaState::ready;
    r.ready_at = now;
    --counts_.provisioning;
    ++counts_.ready;
    rebuild_routing_order();
}

ReplicaId ClusterState::add_ready_replica(Micros now) {
    if (counts_.active() >= autoscaler_.max_replicas) throw ClusterError("replica ceiling reached");
    const ReplicaId id = create_replica(placement_->place(*this), now);
    mark_ready(id, now);
    return id;
}

double ClusterState::pull_concurrency(ReplicaId id, Micros now) {
    Replica& r = mutable_replica(id);
    return r.concurrency.pull(now, r.ready_at);
}

Micros service_time(const FunctionSpec& function) {
    return from_ms(function.base_overhead_ms) + from_ms(function.processing_time_ms);
}

EventHandle serve(RequestRecord& request, ClusterState& cluster, ReplicaId replica, Kernel& kernel,
                  const FunctionSpec& function) {
    cluster.begin_service(replica, kernel.now());
    request.service_start_at = kernel.now();
    request.served_by = replica;
    request.in_service = true;
    return kernel.schedule_in(service_time(function), EventKind::service_complete,
                              Payload{index_of(request.id), index_of(replica), 0});
}

} // namespace edgesim
