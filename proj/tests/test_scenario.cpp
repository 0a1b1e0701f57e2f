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

#include <set>
#include <unordered_set>

#include "edgesim/scenario.hpp"
#include "support.hpp"

using namespace edgesim;

TEST_SUITE("scenario") {

TEST_CASE("three-point delay grid and multi-site topology") {
    const auto c = parse_scenario("delay.x_total_ms = 0,12.5,25\ntopology.kind = multi_site\n");
    CHECK(c.delay_grid == std::vector<double>{0.0, 12.5, 25.0});
    CHECK(c.topology.kind == TopologyKind::multi_site);
    CHECK(c.topologies == std::vector<TopologyKind>{TopologyKind::multi_site});
}

TEST_CASE("omitted autoscaler block takes the documented defaults") {
    const auto c = parse_scenario("scenario.name = bare\n");
    CHECK(c.autoscaler.max_replicas == 100);
    CHECK(c.autoscaler.hard_concurrency_limit == 0);
    CHECK(c.autoscaler.target_utilization_pct == 70.0);
    CHECK(c.autoscaler.stable_window_s == 60.0);
    CHECK(c.autoscaler.panic_window_pct == 10.0);
    CHECK(c.autoscaler.panic_window_s() == doctest::Approx(6.0));
    CHECK(c.autoscaler.effective_target() == doctest::Approx(70.0));
    CHECK(c.workload.duration_s == 300.0);
    CHECK(c.workload.request_timeout_ms == 20000.0);
    CHECK(c.user_grid == std::vector<int>{1, 50, 500});
}

TEST_CASE("loss probability above one is a validation error") {
    try {
        parse_scenario("delay.loss_prob = 1.5\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("loss_prob out of range") != std::string::npos);
    }
}

TEST_CASE("syntax errors carry line and column") {
    SUBCASE("bad number") {
        try {
            parse_scenario("# header\ndelay.jitter_ms = abc\n");
            FAIL("expected a syntax error");
        } catch (const ScenarioSyntaxError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() == 19);
        }
    }
    SUBCASE("unknown key") { CHECK_THROWS_AS(parse_scenario("delay.bogus = 1\n"), ScenarioSyntaxError); }
    SUBCASE("duplicate key") {
        CHECK_THROWS_AS(parse_scenario("run.seed = 1\nrun.seed = 2\n"), ScenarioSyntaxError);
    }
    SUBCASE("missing equals sign") { CHECK_THROWS_AS(parse_scenario("run.seed 1\n"), ScenarioSyntaxError); }
    SUBCASE("unknown topology") {
        CHECK_THROWS_AS(parse_scenario("topology.kind = ring\n"), ScenarioSyntaxError);
    }
}

TEST_CASE("comments, blank lines, CRLF and a byte-order mark are accepted") {
    const auto c = parse_scenario("\xEF\xBB\xBF# comment\r\n\r\nrun.seed = 9   # trailing\r\ngrid.users = 3\r\n");
    CHECK(c.seed == 9);
    CHECK(c.user_grid == std::vector<int>{3});
}

TEST_CASE("other validation failures name the invariant") {
    CHECK_THROWS_WITH_AS(parse_scenario("function.base_overhead_ms = 0\n"), doctest::Contains("base_overhead_ms"),
                         ValidationError);
    CHECK_THROWS_AS(parse_scenario("grid.users = 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("delay.x_total_ms = -1\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("autoscaler.max_replicas = 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_scenario("run.repetitions = 0\n"), ValidationError);
}

TEST_CASE("canonical text round-trips") {
    testing::Gen gen(0x5eed);
    for (int i = 0; i < 200; ++i) {
        ScenarioConfig c;
        c.name = "case" + std::to_string(i);
        c.topologies = gen.coin() ? std::vector<TopologyKind>{TopologyKind::single_site, TopologyKind::multi_site}
                                  : std::vector<TopologyKind>{gen.coin() ? TopologyKind::single_site
                                                                         : TopologyKind::multi_site};
        c.topology.kind = c.topologies.front();
        c.topology.worker_count = gen.integer(1, 6);
        c.topology.headnode_hosts_replicas = gen.coin();
        c.delay_grid = {gen.real(0, 1000), gen.grid_value(0, 800, 12.5)};
        c.processing_grid = {gen.real(0, 100)};
        c.user_grid = {gen.integer(1, 1000), gen.integer(1, 5)};
        c.jitter_ms = gen.real(0, 10);
        c.loss_prob = gen.real(0, 1);
        c.function.base_overhead_ms = gen.real(0.001, 5);
        c.function.cold_start_ms = gen.real(0, 2000);
        c.autoscaler.max_replicas = gen.integer(1, 200);
        c.autoscaler.concurrency_target = gen.real(1, 200);
        c.workload.duration_s = gen.real(1, 600);
        c.seed = static_cast<std::uint64_t>(gen.integer(0, 1 << 30)) << 20;
        c.repetitions = gen.integer(1, 10);

        const auto back = parse_scenario(to_scenario_text(c));
        CHECK(to_scenario_text(back) == to_scenario_text(c));
        CHECK(back.delay_grid == c.delay_grid);
        CHECK(back.loss_prob == c.loss_prob);
        CHECK(back.seed == c.seed);
        CHECK(back.topologies == c.topologies);
    }
}

TEST_CASE("delay split per topology") {
    const auto s = derive_delays(25, TopologyKind::single_site);
    CHECK(s.access_delay_ms == 25.0);
    CHECK(s.intra_delay_ms == 0.0);
    const auto m = derive_delays(25, TopologyKind::multi_site);
    CHECK(m.access_delay_ms == 12.5);
    CHECK(m.intra_delay_ms == 12.5);
    const auto z = derive_delays(0, TopologyKind::multi_site);
    CHECK(z.access_delay_ms == 0.0);
    CHECK(z.intra_delay_ms == 0.0);
    CHECK_THROWS_AS(derive_delays(-1, TopologyKind::single_site), std::invalid_argument);
}

TEST_CASE("property: delay split invariants hold for random X") {
    testing::Gen gen(17);
    for (int i = 0; i < 10000; ++i) {
        const double x = gen.coin(0.1) ? gen.grid_value(0, 800, 12.5) : gen.real(0, 1e6);
        const auto s = derive_delays(x, TopologyKind::single_site);
        CHECK(s.x_total_ms == x);
        CHECK(s.intra_delay_ms == 0.0);
        CHECK(s.access_delay_ms == x);
        const auto m = derive_delays(x, TopologyKind::multi_site);
        CHECK(m.access_delay_ms == m.intra_delay_ms);
        CHECK(m.access_delay_ms + m.intra_delay_ms == x);
    }
}

TEST_CASE("grid expansion cardinality and order") {
    ScenarioConfig c;
    c.delay_grid = {0};
    c.user_grid = {1};
    c.processing_grid = {1, 2};
    CHECK(expand_grid(c).size() == 2);

    const ScenarioConfig defaults;
    const auto plans = expand_grid(defaults);
    CHECK(plans.size() == 192);
    // delay outermost, then users, then processing, then repetition
    CHECK(plans[0].delays.x_total_ms == 0.0);
    CHECK(plans[0].users == 1);
    CHECK(plans[1].processing_ms == 1.0);
    CHECK(plans[8].users == 50);
    CHECK(plans[24].delays.x_total_ms == 12.5);
    for (std::size_t i = 0; i < plans.size(); ++i) CHECK(plans[i].index == i);

    ScenarioConfig reps = c;
    reps.repetitions = 3;
    const auto rp = expand_grid(reps);
    REQUIRE(rp.size() == 6);
    CHECK(rp[0].repetition == 0);
    CHECK(rp[2].repetition == 2);
    CHECK(rp[3].processing_ms == 2.0);
}

TEST_CASE("grid expansion is pure") {
    const ScenarioConfig c;
    const auto a = expand_grid(c);
    const auto b = expand_grid(c);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].users == b[i].users);
        CHECK(a[i].delays.x_total_ms == b[i].delays.x_total_ms);
        CHECK(a[i].processing_ms == b[i].processing_ms);
    }
    ScenarioConfig other = c;
    other.seed = 2;
    CHECK(expand_grid(other)[0].seed != a[0].seed);
}

TEST_CASE("per-run seeds are distinct for a million indices") {
    for (std::uint64_t base : {0ull, 1ull, 0xFFFFFFFFFFFFFFFFull}) {
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(1'000'000);
        for (std::uint64_t i = 0; i < 1'000'000; ++i) seen.insert(mix_seed(base, i));
        CHECK(seen.size() == 1'000'000);
    }
}

TEST_CASE("for_topology sets the leg") {
    const ScenarioConfig c;
    CHECK(c.for_topology(TopologyKind::multi_site).topology.kind == TopologyKind::multi_site);
    const auto plans = expand_grid(c.for_topology(TopologyKind::multi_site));
    CHECK(plans.front().delays.intra_delay_ms == 0.0);
    CHECK(plans.back().delays.intra_delay_ms == 400.0);
}

} // TEST_SUITE
