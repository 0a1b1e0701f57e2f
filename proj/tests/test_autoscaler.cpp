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


#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edgesim/autoscaler.hpp"
#include "support.hpp"

using namespace edgesim;

namespace {

ConcurrencySample at(double seconds, double concurrency, std::uint32_t replica = 0) {
    return ConcurrencySample{from_s(seconds), from_s(seconds), ReplicaId{replica}, concurrency};
}

} // namespace

TEST_SUITE("autoscaler") {

TEST_CASE("single sample average") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(1, 70));
    CHECK(a.stable_average(from_s(1)) == doctest::Approx(70));
    CHECK(a.panic_average(from_s(1)) == doctest::Approx(70));
}

TEST_CASE("stable window evicts a sample 61 s later") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(10, 30));
    a.record_sample(at(71, 90));
    CHECK(a.stable_average(from_s(71)) == doctest::Approx(90));

    WindowedAggregate w(from_s(60));
    w.add(from_s(10), 30);
    w.evict(from_s(69));
    CHECK(w.buckets() == 1);
    w.evict(from_s(70)); // exactly one window old
    CHECK(w.buckets() == 0);
}

TEST_CASE("panic window is ten percent of the stable window") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(0, 100));
    a.record_sample(at(5, 20));
    CHECK(a.panic_average(from_s(5)) == doctest::Approx(60));
    CHECK(a.panic_average(from_s(6)) == doctest::Approx(20));
    CHECK(a.stable_average(from_s(6)) == doctest::Approx(60));
}

TEST_CASE("samples measured at the same instant add up") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(2, 70, 0));
    a.record_sample(at(2, 70, 1));
    CHECK(a.stable_average(from_s(2)) == doctest::Approx(140));
    CHECK(a.desired_replicas(from_s(2), 2) == 2);
}

TEST_CASE("stable mode: ceil of average over target") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(2, 70));
    CHECK(a.desired_replicas(from_s(2), 1) == 1);
    CHECK(a.mode() == AutoscalerMode::stable);

    Autoscaler b{AutoscalerConfig{}};
    b.record_sample(at(2, 71));
    CHECK(b.desired_replicas(from_s(2), 2) == 2);
}

TEST_CASE("panic entered at twice the capacity of the ready replicas") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(2, 150));
    CHECK(a.desired_replicas(from_s(2), 1) == 3);
    CHECK(a.mode() == AutoscalerMode::panic);
    REQUIRE(a.panic_entered_at());
    CHECK(*a.panic_entered_at() == from_s(2));

    Autoscaler b{AutoscalerConfig{}};
    b.record_sample(at(2, 139));
    b.desired_replicas(from_s(2), 1);
    CHECK(b.mode() == AutoscalerMode::stable);
}

TEST_CASE("ceiling clamps huge load") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(2, 10000));
    CHECK(a.desired_replicas(from_s(2), 100) == 100);
    Autoscaler b{AutoscalerConfig{}};
    b.record_sample(at(2, 10000));
    CHECK(b.desired_replicas(from_s(2), 1) == 100);
}

TEST_CASE("scale to zero only after the grace period") {
    Autoscaler a{AutoscalerConfig{}};
    CHECK(a.desired_replicas(from_s(2), 1) == 1); // zero load starts the grace clock
    CHECK(a.desired_replicas(from_s(30), 1) == 1);
    CHECK(a.desired_replicas(from_s(32), 1) == 0);
    // from zero with no load, stay at zero
    CHECK(a.desired_replicas(from_s(34), 0) == 0);
}

TEST_CASE("panic never lowers the replica count and exits after a calm stable window") {
    Autoscaler a{AutoscalerConfig{}};
    a.record_sample(at(2, 300));
    CHECK(a.desired_replicas(from_s(2), 1) == 5);
    // load drops sharply; still in panic, the count holds at the current size
    a.record_sample(at(10, 10));
    CHECK(a.desired_replicas(from_s(10), 5) == 5);
    CHECK(a.mode() == AutoscalerMode::panic);
    // provisioning replicas count as current size too
    CHECK(a.desired_replicas(from_s(12), 3, 2) == 5);
    // calm for a full stable window after the last panic condition at t=2
    a.record_sample(at(61, 10));
    CHECK(a.desired_replicas(from_s(61), 5) == 5);
    CHECK(a.mode() == AutoscalerMode::panic);
    CHECK(a.desired_replicas(from_s(62), 5) == 1);
    CHECK(a.mode() == AutoscalerMode::stable);
    CHECK_FALSE(a.panic_entered_at());
}

TEST_CASE("property: output within range, panic never below current") {
    testing::Gen gen(4242);
    for (int trial = 0; trial < 200; ++trial) {
        AutoscalerConfig cfg;
        cfg.max_replicas = gen.integer(1, 120);
        Autoscaler a(cfg);
        int ready = gen.integer(0, cfg.max_replicas);
        double t = 0.0;
        for (int step = 0; step < 100; ++step) {
            t += 2.0;
            const int reporters = gen.integer(0, 3);
            for (int r = 0; r < reporters; ++r) {
                const double lag = gen.coin() ? 0.0 : gen.real(0, 1.0);
                const double load = gen.coin(0.2) ? 0.0 : gen.real(0, 2000);
                a.record_sample(ConcurrencySample{from_s(t), from_s(t - lag), ReplicaId{static_cast<std::uint32_t>(r)},
                                                  load});
            }
            const int provisioning = gen.integer(0, cfg.max_replicas - ready);
            const int desired = a.desired_replicas(from_s(t), ready, provisioning);
            REQUIRE(desired >= 0);
            REQUIRE(desired <= cfg.max_replicas);
            REQUIRE(a.current_desired() == desired);
            REQUIRE(a.panic_entered_at().has_value() == (a.mode() == AutoscalerMode::panic));
            if (a.mode() == AutoscalerMode::panic) REQUIRE(desired >= std::min(ready, cfg.max_replicas));
            ready = std::min(desired, cfg.max_replicas);
        }
    }
}

TEST_CASE("steady load settles at ceil(load / target)") {
    testing::Gen gen(9);
    for (int trial = 0; trial < 100; ++trial) {
        AutoscalerConfig cfg;
        Autoscaler a(cfg);
        const double load = gen.real(1, 9000);
        int ready = 1;
        for (int tick = 1; tick <= 200; ++tick) {
            a.record_sample(at(2.0 * tick, load));
            ready = a.desired_replicas(from_s(2.0 * tick), ready);
        }
        const int expected = std::min(static_cast<int>(std::ceil(load / 70.0 - 1e-9)), cfg.max_replicas);
        CHECK(ready == expected);
    }
}

} // TEST_SUITE
