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

// Shared helpers for the test binaries: seeded generators for property tests
// and small scenario builders.

#ifndef EDGESIM_TESTS_SUPPORT_HPP
#define EDGESIM_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "edgesim/scenario.hpp"

namespace edgesim::testing {

/// Deterministic case generator; each property test owns one with a fixed seed.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }
    /// Multiple of `step` in [lo, hi].
    double grid_value(double lo, double hi, double step) {
        const int steps = static_cast<int>((hi - lo) / step);
        return lo + step * integer(0, steps);
    }
    template <class T>
    const T& pick(const std::vector<T>& values) {
        return values.at(static_cast<std::size_t>(integer(0, static_cast<int>(values.size()) - 1)));
    }

private:
    std::mt19937_64 engine_;
};

/// One-run plan with deterministic links.
inline RunPlan make_plan(TopologyKind kind, double x_total_ms, int users, double processing_ms,
                         std::uint64_t seed = 11) {
    RunPlan plan;
    plan.topology = kind;
    plan.delays = derive_delays(x_total_ms, kind);
    plan.users = users;
    plan.processing_ms = processing_ms;
    plan.seed = seed;
    return plan;
}

inline ScenarioConfig short_config(double duration_s, double timeout_ms = 20000.0) {
    ScenarioConfig config;
    config.workload.duration_s = duration_s;
    config.workload.request_timeout_ms = timeout_ms;
    return config;
}

} // namespace edgesim::testing

#endif // EDGESIM_TESTS_SUPPORT_HPP
