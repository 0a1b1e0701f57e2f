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

#include "edgesim/simulation.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

namespace edgesim {

namespace {

FunctionSpec function_for(const ScenarioConfig& config, const RunPlan& plan) {
    FunctionSpec f = config.function;
    f.processing_time_ms = plan.processing_ms;
    return f;
}

WorkloadSpec workload_for(const ScenarioConfig& config, const RunPlan& plan) {
    WorkloadSpec w = config.workload;
    w.concurrent_users = plan.users;
    return w;
}

TopologySpec topology_for(const ScenarioConfig& config, const RunPlan& plan) {
    TopologySpec t = config.topology;
    t.kind = plan.topology;
    return t;
}

} // namespace

Simulation::Simulation(const ScenarioConfig& config, const RunPlan& plan, SimulationOptions options)
    : config_(config.for_topology(plan.topology)),
      plan_(plan),
      options_(options),
      function_(function_for(config, plan)),
      network_(plan.seed, ClusterState::headnode()),
      cluster_(topology_for(config, plan), config.autoscaler, function_),
      autoscaler_(config.autoscaler),
      loadgen_(plan.users, workload_for(config, plan)),
      tester_(NodeId{static_cast<std::uint32_t>(config.topology.worker_count + 1)}),
      horizon_(from_s(config.workload.duration_s) + from_ms(config.workload.request_timeout_ms)),
      tick_interval_(from_s(config.autoscaler.tick_interval_s)) {
    if (function_.base_overhead_ms < 0.0 || function_.processing_time_ms < 0.0) {
        throw std::invalid_argument("service time components must be >= 0");
    }
    if (plan.users > 0 && plan.delays.access_delay_ms <= 0.0 && service_time(function_).count() == 0) {
        throw std::invalid_argument("zero-length closed loop: access delay and service time are both zero");
    }
    if (tick_interval_.count() <= 0) throw std::invalid_argument("tick interval must be positive");

    const auto& d = plan.delays;
    const bool multi = plan.topology == TopologyKind::multi_site;
    for (const auto& node : cluster_.nodes()) network_.add_node(node.id);
    network_.add_node(tester_);
    network_.add_link(Link{tester_, ClusterState::headnode(), d.access_delay_ms, d.jitter_ms, d.loss_prob});
    for (const auto& node : cluster_.nodes()) {
        if (node.role != NodeRole::worker) continue;
        // Co-located nodes get no emulation at all; only multi-site intra links are impaired.
        network_.add_link(Link{ClusterState::headnode(), node.id, multi ? d.intra_delay_ms : 0.0,
                               multi ? d.jitter_ms : 0.0, multi ? d.loss_prob : 0.0});
    }

    if (options_.trace) {
        std::ostream* os = options_.trace;
        kernel_.set_trace_sink([os](const Event& ev) { *os << format_trace_record(ev) << '\n'; });
    }
}

void Simulation::start() {
    started_ = true;
    for (int i = 0; i < options_.prewarmed_replicas; ++i) cluster_.add_ready_replica(Micros{0});
    timeline_.push_back({Micros{0}, cluster_.counts().ready});
    max_ready_ = cluster_.counts().ready;

    loadgen_.start_users(kernel_);
    kernel_.schedule(loadgen_.end(), EventKind::run_end);
    if (options_.autoscaler_enabled && tick_interval_ <= horizon_) {
        kernel_.schedule(tick_interval_, EventKind::autoscaler_tick);
    }
}

void Simulation::run_until(Micros t) {
    if (!started_) start();
    if (options_.audit) {
        kernel_.run_until(t, [this](const Event& ev) {
            handle(ev);
            audit();
        });
    } else {
        kernel_.run_until(t, [this](const Event& ev) { handle(ev); });
    }
}

RunOutput Simulation::run() {
    run_until(horizon_);

    RunOutput out;
    auto& r = out.result;
    r.topology = plan_.topology;
    r.x_total_ms = plan_.delays.x_total_ms;
    r.access_delay_ms = plan_.delays.access_delay_ms;
    r.intra_delay_ms = plan_.delays.intra_delay_ms;
    r.users = plan_.users;
    r.processing_ms = plan_.processing_ms;
    r.seed = plan_.seed;
    r.max_ready_replicas = max_ready_;
    fill_result(r, loadgen_.metrics(), config_.workload.duration_s);

    out.replica_timeline = timeline_;
    out.decisions = decisions_;
    out.latency_histogram = loadgen_.metrics().histogram(5);
    out.events_processed = kernel_.processed();
    out.trace_hash = kernel_.trace_hash();
    for (const auto& node : cluster_.nodes()) {
        if (node.role == NodeRole::worker) out.intra_traversals += network_.traversals(ClusterState::headnode(), node.id);
    }
    return out;
}

void Simulation::handle(const Event& ev) {
    switch (ev.kind) {
    case EventKind::user_issue: issue(UserId{static_cast<std::uint32_t>(ev.payload.id)}); break;
    case EventKind::message_arrival:
        switch (static_cast<Message>(ev.payload.tag)) {
        case Message::request_to_head: on_request_at_head(RequestId{ev.payload.id}); break;
        case Message::request_to_replica: on_request_at_replica(RequestId{ev.payload.id}, ReplicaId{ev.payload.aux}); break;
        case Message::response_to_head: on_response_at_head(RequestId{ev.payload.id}); break;
        case Message::response_to_tester: on_response_at_tester(RequestId{ev.payload.id}); break;
        case Message::metric_sample: on_sample(static_cast<std::uint32_t>(ev.payload.id)); break;
        }
        break;
    case EventKind::service_complete: on_service_complete(RequestId{ev.payload.id}, ReplicaId{ev.payload.aux}); break;
    case EventKind::request_timeout: on_timer(UserId{static_cast<std::uint32_t>(ev.payload.id)}); break;
    case EventKind::replica_ready: on_replica_ready(ReplicaId{static_cast<std::uint32_t>(ev.payload.id)}); break;
    case EventKind::autoscaler_tick: on_tick(); break;
    case EventKind::run_end: loadgen_.stop_all(); break;
    }
}

bool Simulation::send(NodeId from, NodeId to, Message msg, std::uint64_t id, std::uint32_t aux) {
    return network_.send(from, to, kernel_, Payload{id, aux, static_cast<std::uint32_t>(msg)});
}

void Simulation::issue(UserId user) {
    const RequestId id = loadgen_.issue(user, requests_, kernel_);
    if (!send(tester_, ClusterState::headnode(), Message::request_to_head, index_of(id))) mark_lost(id);
}

void Simulation::mark_lost(RequestId id) {
    auto& rec = requests_.at(id);
    rec.lost = true;
    rec.flow_done = true;
    maybe_release(id);
}

void Simulation::maybe_release(RequestId id) {
    const auto& rec = requests_.at(id);
    if (rec.flow_done && rec.outcome != Outcome::pending) requests_.release(id);
}

void Simulation::on_request_at_head(RequestId id) {
    requests_.at(id).ingress_at = kernel_.now();
    route(id);
}

void Simulation::route(RequestId id) {
    const RoutingAction action = cluster_.ingress();
    if (action.kind != RoutingAction::Kind::buffer) {
        dispatch(id, action.replica, action.node);
        return;
    }
    buffer_.push_back(id);
    buffer_gauge_.set(static_cast<int>(buffer_.size()), kernel_.now());
    if (action.scale_from_zero) scale_to(1);
}

void Simulation::dispatch(RequestId id, ReplicaId replica, NodeId node) {
    cluster_.dispatch(replica);
    if (node == ClusterState::headnode()) {
        on_request_at_replica(id, replica);
        return;
    }
    if (!send(ClusterState::headnode(), node, Message::request_to_replica, index_of(id), index_of(replica))) {
        cluster_.abandon(replica, kernel_.now());
        mark_lost(id);
    }
}

void Simulation::on_request_at_replica(RequestId id, ReplicaId replica) {
    serve(requests_.at(id), cluster_, replica, kernel_, function_);
}

void Simulation::on_service_complete(RequestId id, ReplicaId replica) {
    requests_.at(id).in_service = false;
    cluster_.end_service(replica, kernel_.now());
    const NodeId node = cluster_.replica(replica).node;
    const bool delivered = node == ClusterState::headnode()
                               ? send(node, tester_, Message::response_to_tester, index_of(id))
                               : send(node, ClusterState::headnode(), Message::response_to_head, index_of(id));
    if (!delivered) mark_lost(id);
    if (config_.autoscaler.hard_concurrency_limit > 0 && !buffer_.empty()) drain_buffer();
}

void Simulation::on_response_at_head(RequestId id) {
    if (!send(ClusterState::headnode(), tester_, Message::response_to_tester, index_of(id))) mark_lost(id);
}

void Simulation::on_response_at_tester(RequestId id) {
    auto& rec = requests_.at(id);
    rec.flow_done = true;
    const auto next = loadgen_.on_response(rec, kernel_);
    maybe_release(id);
    if (next) issue(*next);
}

void Simulation::on_timer(UserId user) {
    const auto expired = loadgen_.on_timer(user, requests_, kernel_);
    if (!expired) return;
    maybe_release(*expired);
    if (loadgen_.may_issue(kernel_.now())) issue(user);
}

void Simulation::on_replica_ready(ReplicaId replica) {
    cluster_.mark_ready(replica, kernel_.now());
    note_ready_count();
    drain_buffer();
}

void Simulation::drain_buffer() {
    while (!buffer_.empty()) {
        const RoutingAction action = cluster_.ingress();
        if (action.kind == RoutingAction::Kind::buffer) break;
        const RequestId id = buffer_.front();
        buffer_.pop_front();
        buffer_gauge_.set(static_cast<int>(buffer_.size()), kernel_.now());
        dispatch(id, action.replica, action.node);
    }
}

void Simulation::scale_to(int desired) {
    cluster_.apply_scale(desired, kernel_);
    note_ready_count();
}

void Simulation::on_tick() {
    const Micros now = kernel_.now();
    for (ReplicaId id : cluster_.live_replicas()) {
        const Replica& r = cluster_.replica(id);
        if (r.state != ReplicaState::ready) continue;
        const double c = cluster_.pull_concurrency(id, now);
        const ConcurrencySample sample{now, now, id, c};
        if (r.node == ClusterState::headnode()) {
            autoscaler_.record_sample(sample);
            continue;
        }
        std::uint32_t slot = 0;
        if (!free_sample_slots_.empty()) {
            slot = free_sample_slots_.back();
            free_sample_slots_.pop_back();
            samples_in_transit_[slot] = sample;
        } else {
            slot = static_cast<std::uint32_t>(samples_in_transit_.size());
            samples_in_transit_.push_back(sample);
        }
        if (!send(r.node, ClusterState::headnode(), Message::metric_sample, slot)) free_sample_slots_.push_back(slot);
    }
    autoscaler_.record_sample(ConcurrencySample{now, now, kIngressBuffer, buffer_gauge_.pull(now)});

    const auto counts = cluster_.counts();
    const int desired = autoscaler_.desired_replicas(now, counts.ready, counts.provisioning);
    decisions_.push_back(autoscaler_.last_decision());
    if (desired != counts.active()) scale_to(desired);

    if (now + tick_interval_ <= horizon_) kernel_.schedule(now + tick_interval_, EventKind::autoscaler_tick);
}

void Simulation::on_sample(std::uint32_t slot) {
    ConcurrencySample sample = samples_in_transit_.at(slot);
    sample.observed_at = kernel_.now();
    free_sample_slots_.push_back(slot);
    autoscaler_.record_sample(sample);
}

void Simulation::note_ready_count() {
    const int ready = cluster_.counts().ready;
    if (timeline_.empty() || timeline_.back().ready_replicas != ready) {
        timeline_.push_back({kernel_.now(), ready});
    }
    max_ready_ = std::max(max_ready_, ready);
}

void Simulation::audit() const {
    std::size_t in_service = 0;
    std::vector<int> pending_per_user(loadgen_.size(), 0);
    requests_.for_each_live([&](const RequestRecord& rec) {
        if (rec.in_service) ++in_service;
        if (rec.outcome == Outcome::pending) ++pending_per_user[index_of(rec.user)];
        const bool ordered = (!rec.ingress_at || *rec.ingress_at >= rec.issued_at) &&
                             (!rec.service_start_at || (rec.ingress_at && *rec.service_start_at >= *rec.ingress_at)) &&
                             (!rec.completed_at || *rec.completed_at >= rec.issued_at);
        if (!ordered) throw std::logic_error("audit: request timestamps out of lifecycle order");
    });

    int replica_sum = 0;
    for (const auto& r : cluster_.all_replicas()) {
        if (r.in_flight < 0 || r.assigned < r.in_flight) throw std::logic_error("audit: replica counters inconsistent");
        replica_sum += r.in_flight;
    }
    if (static_cast<std::size_t>(replica_sum) != in_service || cluster_.total_in_flight() != replica_sum) {
        throw std::logic_error("audit: in_flight sum " + std::to_string(replica_sum) + " != requests in service " +
                               std::to_string(in_service));
    }
    for (int n : pending_per_user) {
        if (n > 1) throw std::logic_error("audit: user with more than one outstanding request");
    }
    if (cluster_.counts().ready > config_.autoscaler.max_replicas) {
        throw std::logic_error("audit: ready replicas above ceiling");
    }
}

RunOutput simulate(const ScenarioConfig& config, const RunPlan& plan, SimulationOptions options) {
    Simulation sim(config, plan, options);
    return sim.run();
}

} // namespace edgesim
