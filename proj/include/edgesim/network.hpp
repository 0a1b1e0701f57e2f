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

#ifndef EDGESIM_NETWORK_HPP
#define EDGESIM_NETWORK_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgesim/kernel.hpp"
#include "edgesim/types.hpp"

namespace edgesim {

/// Symmetric emulated link: the same delay, jitter and loss in both directions.
struct Link {
    NodeId endpoint_a{};
    NodeId endpoint_b{};
    double one_way_delay_ms = 0.0;
    double jitter_ms = 0.0;
    double loss_prob = 0.0;
};

/// Delivery delay, or nullopt when the message is lost.
using Traversal = std::optional<Micros>;

/// Dropped with probability loss_prob, else delay ~ U[delay - jitter, delay + jitter] clamped at 0.
Traversal sample_traversal(const Link& link, RandomStream& stream);

class NetworkConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Nodes joined by links. Node pairs without a direct link are routed through
 * the hub (the headnode), summing the two traversals.
 */
class Network {
public:
    Network(std::uint64_t run_seed, NodeId hub);

    void add_node(NodeId id);
    /// Each link samples from its own random sub-stream.
    void add_link(const Link& link);

    bool has_node(NodeId id) const;
    const Link* find_link(NodeId a, NodeId b) const;

    /// Samples one traversal from `from` to `to`; throws on unknown nodes.
    Traversal traverse(NodeId from, NodeId to);

    /**
     * Schedules a message_arrival carrying `payload` at now + sampled delay.
     * Returns false (and schedules nothing) when the message is lost.
     */
    bool send(NodeId from, NodeId to, Kernel& kernel, Payload payload);

    std::uint64_t traversals(NodeId a, NodeId b) const;

private:
    struct LinkState {
        Link spec;
        Micros delay{0};
        Micros jitter{0};
        RandomStream stream;
        std::uint64_t traversals = 0;
    };

    Traversal traverse_link(LinkState& link);
    int link_index(NodeId a, NodeId b) const;
    void require_node(NodeId id) const;

    std::uint64_t run_seed_;
    NodeId hub_;
    std::vector<bool> present_;
    std::size_t dim_ = 0;
    std::vector<int> matrix_; // dim_ x dim_ link indices, -1 when absent
    std::vector<LinkState> links_;
};

} // namespace edgesim

#endif // EDGESIM_NETWORK_HPP
