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

#include "edgesim/kernel.hpp"

#include <algorithm>

#include "edgesim/scenario.hpp"

namespace edgesim {

namespace {

constexpr std::size_t kArity = 4;

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::message_arrival: return "message_arrival";
    case EventKind::service_complete: return "service_complete";
    case EventKind::autoscaler_tick: return "autoscaler_tick";
    case EventKind::replica_ready: return "replica_ready";
    case EventKind::request_timeout: return "request_timeout";
    case EventKind::user_issue: return "user_issue";
    case EventKind::run_end: return "run_end";
    }
    return "unknown";
}

EventHandle Kernel::schedule(Micros fire_at, EventKind kind, Payload payload) {
    if (fire_at < now_) {
        throw std::logic_error("schedule: event at " + std::to_string(fire_at.count()) +
                               "us is before now (" + std::to_string(now_.count()) + "us)");
    }
    const std::uint64_t seq = next_seq_++;
    buckets_[bucket_for(fire_at)].events.push_back(Event{fire_at, seq, kind, payload});
    ++queued_;
    return EventHandle{seq};
}

void Kernel::cancel(EventHandle handle) {
    if (handle.seq >= next_seq_) throw std::logic_error("cancel: unknown event handle");
    cancelled_.insert(handle.seq);
}

std::uint32_t Kernel::bucket_for(Micros at) {
    if (at == cached_at_) return cached_bucket_;
    auto [it, inserted] = bucket_of_.try_emplace(at.count(), 0);
    if (inserted) {
        if (free_buckets_.empty()) {
            it->second = static_cast<std::uint32_t>(buckets_.size());
            buckets_.emplace_back();
        } else {
            it->second = free_buckets_.back();
            free_buckets_.pop_back();
        }
        times_push(TimeSlot{at, it->second});
    }
    cached_at_ = at;
    cached_bucket_ = it->second;
    return it->second;
}

void Kernel::times_push(TimeSlot slot) {
    times_.push_back(slot);
    std::size_t hole = times_.size() - 1;
    while (hole > 0) {
        const std::size_t parent = (hole - 1) / kArity;
        if (times_[parent].at <= slot.at) break;
        times_[hole] = times_[parent];
        hole = parent;
    }
    times_[hole] = slot;
}

void Kernel::times_pop() {
    const TimeSlot last = times_.back();
    times_.pop_back();
    const std::size_t n = times_.size();
    if (n == 0) return;
    std::size_t hole = 0;
    for (;;) {
        const std::size_t first = hole * kArity + 1;
        if (first >= n) break;
        const std::size_t end = std::min(first + kArity, n);
        std::size_t best = first;
        for (std::size_t c = first + 1; c < end; ++c) {
            if (times_[c].at < times_[best].at) best = c;
        }
        if (times_[best].at >= last.at) break;
        times_[hole] = times_[best];
        hole = best;
    }
    times_[hole] = last;
}

Event Kernel::pop() {
    const TimeSlot top = times_.front();
    Bucket& bucket = buckets_[top.bucket];
    const Event ev = bucket.events[bucket.head++];
    --queued_;
    if (bucket.head == bucket.events.size()) {
        bucket.events.clear();
        bucket.head = 0;
        bucket_of_.erase(top.at.count());
        free_buckets_.push_back(top.bucket);
        if (cached_at_ == top.at) cached_at_ = Micros{-1};
        times_pop();
    }
    return ev;
}

void Kernel::mix_trace(const Event& ev) noexcept {
    auto mix = [this](std::uint64_t v) {
        trace_hash_ ^= v;
        trace_hash_ *= 0x100000001b3ull;
    };
    mix(static_cast<std::uint64_t>(ev.fire_at.count()));
    mix(static_cast<std::uint64_t>(ev.kind));
    mix(ev.payload.id);
}

std::string format_trace_record(const Event& ev) {
    std::string out = std::to_string(ev.fire_at.count());
    out += ',';
    out += to_string(ev.kind);
    out += ',';
    out += std::to_string(ev.payload.id);
    return out;
}

RandomStream::RandomStream(std::uint64_t run_seed, std::string_view name)
    : engine_(mix_seed(run_seed ^ fnv1a(name), 0)) {}

} // namespace edgesim
