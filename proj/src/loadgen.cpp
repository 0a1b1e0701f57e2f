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

#include "edgesim/loadgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgesim {

// ---------------------------------------------------------------------------
// MetricsAccumulator

void MetricsAccumulator::record_success(Micros latency) {
    ++successes_;
    const auto us = latency.count();
    latency_sum_us_ += static_cast<double>(us);
    if (us == last_latency_) {
        ++*last_count_;
        return;
    }
    auto& count = latency_counts_[us];
    ++count;
    last_latency_ = us;
    last_count_ = &count;
}

void MetricsAccumulator::outstanding_delta(int delta, Micros now) noexcept {
    const Micros t = std::min(now, duration_);
    if (t > last_change_) {
        outstanding_area_ += static_cast<double>(outstanding_) * static_cast<double>((t - last_change_).count());
        last_change_ = t;
    }
    outstanding_ += delta;
}

double MetricsAccumulator::throughput_rps() const noexcept {
    const double d = to_s(duration_);
    return d > 0.0 ? static_cast<double>(successes_) / d : 0.0;
}

double MetricsAccumulator::mean_latency_ms() const noexcept {
    return successes_ ? latency_sum_us_ / static_cast<double>(successes_) / 1000.0 : 0.0;
}

double MetricsAccumulator::mean_in_flight() const noexcept {
    const double span = static_cast<double>(duration_.count());
    if (span <= 0.0) return 0.0;
    const double tail = static_cast<double>(outstanding_) * static_cast<double>((duration_ - last_change_).count());
    return (outstanding_area_ + tail) / span;
}

std::vector<std::pair<std::int64_t, std::uint64_t>> MetricsAccumulator::sorted_latencies() const {
    std::vector<std::pair<std::int64_t, std::uint64_t>> sorted(latency_counts_.begin(), latency_counts_.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

double MetricsAccumulator::percentile_ms(double p) const {
    if (successes_ == 0) throw std::logic_error("percentile of an empty latency set");
    if (p <= 0.0 || p > 100.0) throw std::invalid_argument("percentile must lie in (0, 100]");
    const auto rank = static_cast<std::uint64_t>(std::ceil(p / 100.0 * static_cast<double>(successes_)));
    std::uint64_t seen = 0;
    for (const auto& [us, count] : sorted_latencies()) {
        seen += count;
        if (seen >= rank) return static_cast<double>(us) / 1000.0;
    }
    return static_cast<double>(sorted_latencies().back().first) / 1000.0;
}

std::optional<LatencyPercentiles> MetricsAccumulator::percentiles() const {
    if (successes_ == 0) return std::nullopt;
    return LatencyPercentiles{percentile_ms(50.0), percentile_ms(95.0), percentile_ms(99.0)};
}

std::vector<LatencyBucket> MetricsAccumulator::histogram(int bucket_width_ms) const {
    if (bucket_width_ms <= 0) throw std::invalid_argument("bucket width must be positive");
    const std::int64_t width_us = static_cast<std::int64_t>(bucket_width_ms) * 1000;
    std::vector<LatencyBucket> out;
    for (const auto& [us, count] : sorted_latencies()) {
        const int bucket = static_cast<int>(us / width_us) * bucket_width_ms;
        if (out.empty() || out.back().bucket_ms != bucket) out.push_back({bucket, 0});
        out.back().count += count;
    }
    return out;
}

// ---------------------------------------------------------------------------

void fill_result(RunResult& result, const MetricsAccumulator& metrics, double duration_s) {
    result.duration_s = duration_s;
    result.successes = metrics.successes();
    result.timeouts = metrics.timeouts();
    result.drops = metrics.drops();
    result.throughput_rps = metrics.throughput_rps();
    result.latency = metrics.percentiles();
    result.mean_latency_ms = metrics.mean_latency_ms();
    result.mean_in_flight = metrics.mean_in_flight();
}

RunResult summarize(std::span<const RequestRecord> records, const WorkloadSpec& workload) {
    MetricsAccumulator metrics(from_s(workload.duration_s));
    for (const auto& r : records) {
        switch (r.outcome) {
        case Outcome::success:
            if (!r.completed_at) throw std::invalid_argument("successful request without completion time");
            metrics.record_success(*r.completed_at - r.issued_at);
            break;
        case Outcome::timeout: metrics.record_timeout(); break;
        case Outcome::dropped: metrics.record_drop(); break;
        case Outcome::pending: break;
        }
    }
    RunResult result;
    result.users = workload.concurrent_users;
    fill_result(result, metrics, workload.duration_s);
    return result;
}

double analytic_closed_loop_oracle(int users, double rtt_ms, double proc_ms, double overhead_ms) {
    const double cycle = rtt_ms + proc_ms + overhead_ms;
    if (cycle <= 0.0) throw std::invalid_argument("closed-loop cycle must be positive");
    return static_cast<double>(users) * 1000.0 / cycle;
}

// ---------------------------------------------------------------------------
// LoadGenerator

LoadGenerator::LoadGenerator(int users, const WorkloadSpec& workload)
    : end_(from_s(workload.duration_s)),
      timeout_(from_ms(workload.request_timeout_ms)),
      metrics_(from_s(workload.duration_s)) {
    if (users < 0) throw std::invalid_argument("user count must be >= 0");
    users_.resize(static_cast<std::size_t>(users));
    for (std::size_t i = 0; i < users_.size(); ++i) users_[i].id = UserId{static_cast<std::uint32_t>(i)};
}

void LoadGenerator::start_users(Kernel& kernel) {
    for (const auto& u : users_) kernel.schedule(Micros{0}, EventKind::user_issue, Payload{index_of(u.id), 0, 0});
}

void LoadGenerator::arm(VirtualUser& u, Kernel& kernel) {
    if (u.timer_armed) return;
    kernel.schedule(u.deadline, EventKind::request_timeout, Payload{index_of(u.id), 0, 0});
    u.timer_armed = true;
}

void LoadGenerator::clear_outstanding(VirtualUser& u, Micros now) {
    u.outstanding.reset();
    u.state = VirtualUser::State::stopped;
    metrics_.outstanding_delta(-1, now);
}

RequestId LoadGenerator::issue(UserId user, RequestTable& table, Kernel& kernel) {
    auto& u = users_.at(index_of(user));
    if (u.outstanding) throw std::logic_error("user already has an outstanding request");
    const Micros now = kernel.now();
    const RequestId id = table.create(user, now);
    u.outstanding = id;
    u.state = VirtualUser::State::awaiting_response;
    u.deadline = now + timeout_;
    ++u.requests_issued;
    metrics_.outstanding_delta(+1, now);
    arm(u, kernel);
    return id;
}

std::optional<UserId> LoadGenerator::on_response(RequestRecord& request, Kernel& kernel) {
    if (request.outcome != Outcome::pending) return std::nullopt;
    const Micros now = kernel.now();
    request.finish(Outcome::success, now);
    metrics_.record_success(now - request.issued_at);
    auto& u = users_.at(index_of(request.user));
    clear_outstanding(u, now);
    if (!may_issue(now)) return std::nullopt;
    return request.user;
}

std::optional<RequestId> LoadGenerator::on_timer(UserId user, RequestTable& table, Kernel& kernel) {
    auto& u = users_.at(index_of(user));
    u.timer_armed = false;
    if (!u.outstanding) return std::nullopt;
    const Micros now = kernel.now();
    if (u.deadline > now) {
        arm(u, kernel);
        return std::nullopt;
    }
    const RequestId id = *u.outstanding;
    auto& record = table.at(id);
    if (record.lost) {
        record.finish(Outcome::dropped, now);
        metrics_.record_drop();
    } else {
        record.finish(Outcome::timeout, now);
        metrics_.record_timeout();
    }
    clear_outstanding(u, now);
    return id;
}

void LoadGenerator::stop_all() noexcept {
    for (auto& u : users_)
        if (!u.outstanding) u.state = VirtualUser::State::stopped;
}

} // namespace edgesim
