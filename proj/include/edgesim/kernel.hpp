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
 * @file kernel.hpp
 * @brief Discrete-event engine: virtual clock, event queue, seeded random streams.
 *
 * Events fire in (fire_at, seq) order, where seq is the insertion counter, so
 * two events scheduled for the same instant fire in the order they were
 * scheduled. A kernel is single-threaded; independent kernels share nothing.
 */

#ifndef EDGESIM_KERNEL_HPP
#define EDGESIM_KERNEL_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edgesim/types.hpp"

namespace edgesim {

enum class EventKind : std::uint8_t {
    message_arrival,
    service_complete,
    autoscaler_tick,
    replica_ready,
    request_timeout,
    user_issue,
    run_end,
};

std::string_view to_string(EventKind kind);

/// Kind-specific reference carried by an event. `id` is what traces report.
struct Payload {
    std::uint64_t id = 0;
    std::uint32_t aux = 0;
    std::uint32_t tag = 0;
};

struct Event {
    Micros fire_at{0};
    std::uint64_t seq = 0;
    EventKind kind = EventKind::run_end;
    Payload payload;
};

struct EventHandle {
    std::uint64_t seq = 0;
};

class Kernel {
public:
    using TraceSink = std::function<void(const Event&)>;

    Micros now() const noexcept { return now_; }

    /// Throws std::logic_error when fire_at lies in the past.
    EventHandle schedule(Micros fire_at, EventKind kind, Payload payload = {});
    EventHandle schedule_in(Micros delay, EventKind kind, Payload payload = {}) {
        return schedule(now_ + delay, kind, payload);
    }

    /// The event will not fire. Only valid for events that have not fired yet.
    void cancel(EventHandle handle);

    /**
     * Processes every event with fire_at <= t_end in (fire_at, seq) order,
     * then leaves the clock at t_end. Returns the number of events handled.
     */
    template <class Handler>
    std::uint64_t run_until(Micros t_end, Handler&& handler) {
        if (t_end < now_) throw std::logic_error("run_until: t_end lies in the past");
        std::uint64_t processed = 0;
        while (has_due(t_end) && !stop_requested_) {
            const Event ev = pop();
            if (!cancelled_.empty() && cancelled_.erase(ev.seq) != 0) continue;
            now_ = ev.fire_at;
            mix_trace(ev);
            if (trace_) trace_(ev);
            handler(ev);
            ++processed;
        }
        if (!stop_requested_) now_ = t_end;
        processed_ += processed;
        return processed;
    }

    /// Makes the current run_until return after the event being handled.
    void request_stop() noexcept { stop_requested_ = true; }

    std::size_t pending() const noexcept { return queued_ - cancelled_.size(); }
    std::uint64_t processed() const noexcept { return processed_; }

    /// Running hash over (fire_at, kind, payload id) of every processed event.
    std::uint64_t trace_hash() const noexcept { return trace_hash_; }

    void set_trace_sink(TraceSink sink) { trace_ = std::move(sink); }

private:
    // Events sharing a fire time live in one bucket, appended in seq order; a
    // 4-ary min-heap orders the distinct times. Deterministic links make many
    // events coincide, so most pushes and pops skip the heap entirely.
    struct Bucket {
        std::vector<Event> events;
        std::size_t head = 0;
    };
    struct TimeSlot {
        Micros at;
        std::uint32_t bucket;
    };

    bool has_due(Micros t_end) const noexcept { return !times_.empty() && times_.front().at <= t_end; }
    Event pop();
    std::uint32_t bucket_for(Micros at);
    void times_push(TimeSlot slot);
    void times_pop();
    void mix_trace(const Event& ev) noexcept;

    Micros now_{0};
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t trace_hash_ = 0xcbf29ce484222325ull;
    bool stop_requested_ = false;
    std::vector<TimeSlot> times_;
    std::vector<Bucket> buckets_;
    std::vector<std::uint32_t> free_buckets_;
    std::unordered_map<std::int64_t, std::uint32_t> bucket_of_;
    Micros cached_at_{-1};
    std::uint32_t cached_bucket_ = 0;
    std::size_t queued_ = 0;
    std::unordered_set<std::uint64_t> cancelled_;
    TraceSink trace_;
};

/// One `time_us,kind,payload_id` line.
std::string format_trace_record(const Event& ev);

/**
 * Reproducible uniform stream. Each consumer takes its own named sub-stream
 * derived from the run seed, so adding a consumer leaves the others unchanged.
 */
class RandomStream {
public:
    RandomStream(std::uint64_t run_seed, std::string_view name);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::uint64_t next_u64() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace edgesim

#endif // EDGESIM_KERNEL_HPP
