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

#include "edgesim/autoscaler.hpp"

#include <algorithm>
#include <cmath>

namespace edgesim {

namespace {

// Absorbs rounding in sums of time averages, e.g. 140.00000000001 / 70.
int ceil_ratio(double value, double target) {
    const double q = value / target;
    return static_cast<int>(std::ceil(q - 1e-9));
}

} // namespace

std::string_view to_string(AutoscalerMode mode) {
    return mode == AutoscalerMode::stable ? "stable" : "panic";
}

void WindowedAggregate::evict(Micros now) {
    const Micros cutoff = now - window_;
    buckets_.erase(buckets_.begin(), buckets_.upper_bound(cutoff));
}

double WindowedAggregate::average() const {
    if (buckets_.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [at, value] : buckets_) sum += value;
    return sum / static_cast<double>(buckets_.size());
}

Autoscaler::Autoscaler(const AutoscalerConfig& config)
    : config_(config), stable_(from_s(config.stable_window_s)), panic_(from_s(config.panic_window_s())) {}

void Autoscaler::record_sample(const ConcurrencySample& sample) {
    stable_.add(sample.measured_at, sample.concurrency);
    panic_.add(sample.measured_at, sample.concurrency);
    stable_.evict(sample.observed_at);
    panic_.evict(sample.observed_at);
}

double Autoscaler::stable_average(Micros now) {
    stable_.evict(now);
    return stable_.average();
}

double Autoscaler::panic_average(Micros now) {
    panic_.evict(now);
    return panic_.average();
}

int Autoscaler::desired_replicas(Micros now, int ready, int provisioning) {
    const double target = config_.effective_target();
    const double stable_avg = stable_average(now);
    const double panic_avg = panic_average(now);
    const int current = ready + provisioning;

    const bool panic_condition =
        panic_avg >= config_.panic_threshold_pct / 100.0 * static_cast<double>(std::max(ready, 1)) * target;
    if (panic_condition) {
        if (mode_ == AutoscalerMode::stable) {
            mode_ = AutoscalerMode::panic;
            panic_entered_at_ = now;
        }
        last_panic_condition_ = now;
    } else if (mode_ == AutoscalerMode::panic && now - last_panic_condition_ >= from_s(config_.stable_window_s)) {
        mode_ = AutoscalerMode::stable;
        panic_entered_at_.reset();
    }

    int result = mode_ == AutoscalerMode::panic ? std::max(ceil_ratio(panic_avg, target), current)
                                                : ceil_ratio(stable_avg, target);

    if (stable_avg > 0.0) {
        zero_since_.reset();
    } else if (!zero_since_) {
        zero_since_ = now;
    }
    if (result == 0 && current > 0) {
        const bool grace_elapsed = zero_since_ && now - *zero_since_ >= from_s(config_.scale_to_zero_grace_s);
        if (!grace_elapsed) result = 1;
    }

    result = std::clamp(result, 0, config_.max_replicas);
    current_desired_ = result;
    last_ = AutoscalerDecision{now, mode_, stable_avg, panic_avg, ready, result};
    return result;
}

} // namespace edgesim
