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

#ifndef EDGESIM_REQUEST_HPP
#define EDGESIM_REQUEST_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "edgesim/types.hpp"

namespace edgesim {

enum class Outcome : std::uint8_t { pending, success, timeout, dropped };

std::string_view to_string(Outcome outcome);

/// Lifecycle of one client request.
struct RequestRecord {
    RequestId id{};
    UserId user{};
    Micros issued_at{0};
    std::optional<Micros> ingress_at;
    std::optional<Micros> service_start_at;
    std::optional<Micros> completed_at;
    std::optional<ReplicaId> served_by;
    Outcome outcome = Outcome::pending;

    bool lost = false;       ///< a message of this request was dropped
    bool in_service = false; ///< between service start and service completion
    bool flow_done = false;  ///< no message of this request is in flight anymore

    /// Moves pending -> terminal. Throws when already terminal.
    void finish(Outcome terminal, Micros at);
};

/**
 * Slab of live request records. Ids encode slot and generation so a stale id
 * is detected instead of aliasing a recycled slot.
 */
class RequestTable {
public:
    RequestId create(UserId user, Micros issued_at);
    RequestRecord& at(RequestId id);
    const RequestRecord& at(RequestId id) const;
    bool contains(RequestId id) const noexcept;
    void release(RequestId id);
    std::size_t live() const noexcept { return live_; }

    template <class Fn>
    void for_each_live(Fn&& fn) const {
        for (const auto& slot : slots_)
            if (slot.used) fn(slot.record);
    }

private:
    struct Slot {
        RequestRecord record;
        std::uint32_t generation = 0;
        bool used = false;
    };
    static std::uint32_t slot_of(RequestId id) noexcept { return static_cast<std::uint32_t>(index_of(id)); }
    static std::uint32_t generation_of(RequestId id) noexcept {
        return static_cast<std::uint32_t>(index_of(id) >> 32);
    }

    std::vector<Slot> slots_;
    std::vector<std::uint32_t> free_;
    std::size_t live_ = 0;
};

} // namespace edgesim

#endif // EDGESIM_REQUEST_HPP
