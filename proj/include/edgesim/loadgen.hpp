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
 * @file loadgen.hpp
 * @brief Closed-loop virtual users and per-run metrics.
 *
 * Every user keeps exactly one request outstanding: it issues at t = 0 and
 * again as soon as its previous request succeeds or times out, until the
 * configured duration has passed. Throughput counts successes only and
 * divides by the configured duration.
 */

#ifndef EDGESIM_LOADGEN_HPP
#define EDGESIM_LOADGEN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edgesim/kernel.hpp"
#include "edgesim/request.hpp"
#include "edgesim/scenario.hpp"
#include "edgesim/types.hpp"

namespace edgesim {

struct VirtualUser {
    enum class State : std::uint8_t { awaiting_response, stopped };

    UserId id{};
    std::uint64_t requests_issued = 0;
    State state = State::stopped;
    std::optional<RequestId> outstanding;
    Micros deadline{0};        ///< timeout of the outstanding request
    bool timer_armed = false;  ///< a request_timeout event for this user is queued
};

struct LatencyPercentiles {
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
};

struct RunResult {
    TopologyKind topology = TopologyKind::single_site;
    double x_total_ms = 0.0;
    double access_delay_ms = 0.0;
    double intra_delay_ms = 0.0;
    int users = 0;
    double processing_ms = 0.0;
    double duration_s = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t drops = 0;
    double throughput_rps = 0.0;
    std::optional<LatencyPercentiles> latency; ///< absent without successes
    int max_ready_replicas = 0;
    std::uint64_t seed = 0;

    // Diagnostics, not part of the results file.
    double mean_in_flight = 0.0;  ///< time-averaged outstanding requests over the duration
    double mean_latency_ms = 0.0; ///< over successes
};

/// Histogram row of success latencies.
struct LatencyBucket {
    int bucket_ms = 0; ///< lower edge
    std::uint64_t count = 0;
};

/// Streaming aggregation of request outcomes. Latencies are kept as exact
/// microsecond counts, so percentiles do not depend on bucketing.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(Micros duration) : duration_(duration) {}

    void record_success(Micros latency);
    void record_timeout() noexcept { ++timeouts_; }
    void record_drop() noexcept { ++drops_; }

    /// Outstanding-request level change; only [0, duration] is integrated.
    void outstanding_delta(int delta, Micros now) noexcept;

    std::uint64_t successes() const noexcept { return successes_; }
    std::uint64_t timeouts() const noexcept { return timeouts_; }
    std::uint64_t drops() const noexcept { return drops_; }

    double throughput_rps() const noexcept;
    double mean_latency_ms() const noexcept;
    double mean_in_flight() const noexcept;
    /// Nearest-rank percentile of success latencies, in ms. Requires a success.
    double percentile_ms(double p) const;
    std::optional<LatencyPercentiles> percentiles() const;
    std::vector<LatencyBucket> histogram(int bucket_width_ms = 5) const;

private:
    std::vector<std::pair<std::int64_t, std::uint64_t>> sorted_latencies() const;

    Micros duration_;
    std::uint64_t successes_ = 0;
    std::uint64_t timeouts_ = 0;
    std::uint64_t drops_ = 0;
    double latency_sum_us_ = 0.0;
    std::unordered_map<std::int64_t, std::uint64_t> latency_counts_;
    std::int64_t last_latency_ = -1;
    std::uint64_t* last_count_ = nullptr;

    int outstanding_ = 0;
    Micros last_change_{0};
    double outstanding_area_ = 0.0;
};

/// Summary of finished records; throughput = successes / duration.
RunResult summarize(std::span<const RequestRecord> records, const WorkloadSpec& workload);

/// Fills the counters and latency fields of `result` from `metrics`.
void fill_result(RunResult& result, const MetricsAccumulator& metrics, double duration_s);

/**
 * Closed-loop throughput with one pre-warmed replica of unlimited concurrency
 * and deterministic links: users * 1000 / (rtt + processing + overhead) req/s.
 */
double analytic_closed_loop_oracle(int users, double rtt_ms, double proc_ms, double overhead_ms);

/**
 * The users of one run. Request timeouts are timer events per user: while a
 * user's request completes in time, the queued timer is moved forward to the
 * next deadline instead of firing, which matches cancelling each request's
 * timeout without leaving cancelled events in the queue.
 */
class LoadGenerator {
public:
    LoadGenerator(int users, const WorkloadSpec& workload);

    /// One user_issue event per user at t = 0.
    void start_users(Kernel& kernel);

    /// Creates the next request for `user` and arms its timeout.
    RequestId issue(UserId user, RequestTable& table, Kernel& kernel);

    /// True when the user may issue again at `now`.
    bool may_issue(Micros now) const noexcept { return now < end_; }

    /**
     * Response reached the client. Returns the user to re-issue for, if any.
     * Late responses (request already timed out) change nothing.
     */
    std::optional<UserId> on_response(RequestRecord& request, Kernel& kernel);

    /**
     * Timer fired for `user`. Returns the timed-out request, if any; the caller
     * then re-issues when may_issue() allows. Re-arms the timer for a newer request.
     */
    std::optional<RequestId> on_timer(UserId user, RequestTable& table, Kernel& kernel);

    void stop_all() noexcept;

    const VirtualUser& user(UserId id) const { return users_.at(index_of(id)); }
    std::size_t size() const noexcept { return users_.size(); }
    MetricsAccumulator& metrics() noexcept { return metrics_; }
    const MetricsAccumulator& metrics() const noexcept { return metrics_; }
    Micros end() const noexcept { return end_; }
    Micros timeout() const noexcept { return timeout_; }

private:
    void arm(VirtualUser& u, Kernel& kernel);
    void clear_outstanding(VirtualUser& u, Micros now);

    std::vector<VirtualUser> users_;
    Micros end_;
    Micros timeout_;
    MetricsAccumulator metrics_;
};

} // namespace edgesim

#endif // EDGESIM_LOADGEN_HPP
