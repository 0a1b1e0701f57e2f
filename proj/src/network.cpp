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

#include "edgesim/network.hpp"

#include <algorithm>

namespace edgesim {

namespace {

Micros jittered(Micros delay, Micros jitter, RandomStream& stream) {
    const double u = stream.uniform01();
    const double offset = (2.0 * u - 1.0) * static_cast<double>(jitter.count());
    const auto sampled = delay.count() + static_cast<std::int64_t>(std::llround(offset));
    return Micros{std::max<std::int64_t>(0, sampled)};
}

} // namespace

Traversal sample_traversal(const Link& link, RandomStream& stream) {
    if (link.loss_prob > 0.0 && stream.uniform01() < link.loss_prob) return std::nullopt;
    const Micros delay = from_ms(link.one_way_delay_ms);
    if (link.jitter_ms <= 0.0) return delay;
    return jittered(delay, from_ms(link.jitter_ms), stream);
}

Network::Network(std::uint64_t run_seed, NodeId hub) : run_seed_(run_seed), hub_(hub) {}

void Network::add_node(NodeId id) {
    const auto idx = static_cast<std::size_t>(index_of(id));
    if (idx >= dim_) {
        const std::size_t new_dim = idx + 1;
        std::vector<int> grown(new_dim * new_dim, -1);
        for (std::size_t a = 0; a < dim_; ++a)
            for (std::size_t b = 0; b < dim_; ++b) grown[a * new_dim + b] = matrix_[a * dim_ + b];
        matrix_ = std::move(grown);
        dim_ = new_dim;
        present_.resize(new_dim, false);
    }
    present_[idx] = true;
}

bool Network::has_node(NodeId id) const {
    const auto idx = static_cast<std::size_t>(index_of(id));
    return idx < dim_ && present_[idx];
}

void Network::require_node(NodeId id) const {
    if (!has_node(id)) throw NetworkConfigError("unknown node id " + std::to_string(index_of(id)));
}

void Network::add_link(const Link& link) {
    require_node(link.endpoint_a);
    require_node(link.endpoint_b);
    if (link.one_way_delay_ms < 0.0 || link.jitter_ms < 0.0) {
        throw NetworkConfigError("link delay and jitter must be >= 0");
    }
    if (link.loss_prob < 0.0 || link.loss_prob > 1.0) throw NetworkConfigError("loss_prob out of range [0, 1]");

    const auto a = index_of(link.endpoint_a);
    const auto b = index_of(link.endpoint_b);
    const std::string name = "link:" + std::to_string(std::min(a, b)) + "-" + std::to_string(std::max(a, b));
    links_.push_back(LinkState{link, from_ms(link.one_way_delay_ms), from_ms(link.jitter_ms),
                               RandomStream(run_seed_, name), 0});
    const int index = static_cast<int>(links_.size() - 1);
    matrix_[a * dim_ + b] = index;
    matrix_[b * dim_ + a] = index;
}

int Network::link_index(NodeId a, NodeId b) const {
    return matrix_[index_of(a) * dim_ + index_of(b)];
}

const Link* Network::find_link(NodeId a, NodeId b) const {
    if (!has_node(a) || !has_node(b)) return nullptr;
    const int idx = link_index(a, b);
    return idx < 0 ? nullptr : &links_[static_cast<std::size_t>(idx)].spec;
}

Traversal Network::traverse_link(LinkState& link) {
    ++link.traversals;
    const auto& spec = link.spec;
    if (spec.loss_prob > 0.0 && link.stream.uniform01() < spec.loss_prob) return std::nullopt;
    if (link.jitter.count() == 0) return link.delay;
    return jittered(link.delay, link.jitter, link.stream);
}

Traversal Network::traverse(NodeId from, NodeId to) {
    require_node(from);
    require_node(to);
    if (from == to) return Micros{0};
    if (const int idx = link_index(from, to); idx >= 0) return traverse_link(links_[static_cast<std::size_t>(idx)]);

    const int first = link_index(from, hub_);
    const int second = link_index(hub_, to);
    if (first < 0 || second < 0) {
        throw NetworkConfigError("no route from node " + std::to_string(index_of(from)) + " to node " +
                                 std::to_string(index_of(to)));
    }
    const auto leg1 = traverse_link(links_[static_cast<std::size_t>(first)]);
    if (!leg1) return std::nullopt;
    const auto leg2 = traverse_link(links_[static_cast<std::size_t>(second)]);
    if (!leg2) return std::nullopt;
    return *leg1 + *leg2;
}

bool Network::send(NodeId from, NodeId to, Kernel& kernel, Payload payload) {
    const auto delay = traverse(from, to);
    if (!delay) return false;
    kernel.schedule_in(*delay, EventKind::message_arrival, payload);
    return true;
}

std::uint64_t Network::traversals(NodeId a, NodeId b) const {
    const auto* link = find_link(a, b);
    if (!link) return 0;
    return links_[static_cast<std::size_t>(link_index(a, b))].traversals;
}

} // namespace edgesim
