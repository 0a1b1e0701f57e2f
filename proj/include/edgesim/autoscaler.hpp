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
 * @file autoscaler.hpp
 * @brief Concurrency autoscaler with a stable and a panic window.
 *
 * Replicas report their average concurrency at every tick. Reports are
 * bucketed by the time they were measured; a window's average is the sum of
 * all reports in it divided by the number of measurement instants it holds.
 * A report that is still in transit when the autoscaler evaluates is simply
 * missing from the newest bucket, which is how link delay turns into stale,
 * low readings.
 *
 * With T = concurrency_target * target_utilization / 100:
 *   stable_desired = ceil(stable_avg / T), panic_desired = ceil(panic_avg / T)
 *   panic starts when panic_avg >= panic_threshold/100 * max(ready, 1) * T
 *   and ends after a full stable window without that condition.
 * In panic the result never drops below the current replica count. Zero is
 * allowed only after the stable average has stayed at zero for the grace period.
 */

#ifndef EDGESIM_AUTOSCALER_HPP
#define EDGESIM_AUTOSCALER_HPP

#include <map>
#include <optional>
#include <string_view>

#include "edgesim/scenario.hpp"
#include "edgesim/types.hpp"

namespace edgesim {

/// Pseudo replica id for the ingress buffer's report.
inline constexpr ReplicaId kIngressBuffer{0xFFFFFFFFu};

struct ConcurrencySample {
    Micros observed_at{0}; ///< headnode receipt time
    Micros measured_at{0}; ///< replica-local measurement time
    ReplicaId replica{};
    double concurrency = 0.0;
};

enum class AutoscalerMode : std::uint8_t { stable, panic };

std::string_view to_string(AutoscalerMode mode);

/// Sum of reports per measurement instant over a sliding time window.
class WindowedAggregate {
public:
    explicit WindowedAggregate(Micros window) : window_(window) {}

    void add(Micros measured_at, double value) { buckets_[measured_at] += value; }
    /// Drops buckets measured at or before now - window.
    void evict(Micros now);
    /// Mean of the bucket sums; 0 when empty.
    double average() const;
    std::size_t buckets() const noexcept { return buckets_.size(); }
    Micros window() const noexcept { return window_; }

private:
    Micros window_;
    std::map<Micros, double> buckets_;
};

struct AutoscalerDecision {
    Micros at{0};
    AutoscalerMode mode = AutoscalerMode::stable;
    double stable_avg = 0.0;
    double panic_avg = 0.0;
    int ready = 0;
    int desired = 0;
};

class Autoscaler {
public:
    explicit Autoscaler(const AutoscalerConfig& config);

    void record_sample(const ConcurrencySample& sample);

    /**
     * Evaluates both windows at `now` and returns the replica count to aim for,
     * within [0, max_replicas]. `provisioning` replicas count towards the
     * current size for the no-scale-down-in-panic rule and the scale-to-zero hold.
     */
    int desired_replicas(Micros now, int ready, int provisioning = 0);

    AutoscalerMode mode() const noexcept { return mode_; }
    std::optional<Micros> panic_entered_at() const noexcept { return panic_entered_at_; }
    int current_desired() const noexcept { return current_desired_; }
    const AutoscalerDecision& last_decision() const noexcept { return last_; }

    double stable_average(Micros now);
    double panic_average(Micros now);
    const AutoscalerConfig& config() const noexcept { return config_; }

private:
    AutoscalerConfig config_;
    WindowedAggregate stable_;
    WindowedAggregate panic_;
    AutoscalerMode mode_ = AutoscalerMode::stable;
    std::optional<Micros> panic_entered_at_;
    Micros last_panic_condition_{0};
    std::optional<Micros> zero_since_;
    int current_desired_ = 0;
    AutoscalerDecision last_;
};

} // namespace edgesim

#endif // EDGESIM_AUTOSCALER_HPP
