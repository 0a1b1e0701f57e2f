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

#include "edgesim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace edgesim {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    char prev = 0;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
        if (!ok || (c == '.' && prev == '.')) return false;
        prev = c;
    }
    return true;
}

/// A value token and its 1-based column in the source line.
struct Token {
    std::string_view text;
    std::size_t column;
};

std::vector<Token> split_list(std::string_view value, std::size_t column) {
    std::vector<Token> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        const auto raw = value.substr(start, comma == std::string_view::npos ? value.npos : comma - start);
        const auto lead = raw.find_first_not_of(" \t");
        const std::size_t offset = lead == std::string_view::npos ? 0 : lead;
        out.push_back({trim(raw), column + start + offset});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const Token& tok, std::size_t line) {
    double v = 0.0;
    const char* begin = tok.text.data();
    const char* end = begin + tok.text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (tok.text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ScenarioSyntaxError(line, tok.column,
                                  "expected a number, got '" + std::string(tok.text) + "'");
    }
    return v;
}

std::int64_t parse_int(const Token& tok, std::size_t line) {
    std::int64_t v = 0;
    const char* begin = tok.text.data();
    const char* end = begin + tok.text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (tok.text.empty() || ec != std::errc{} || ptr != end) {
        throw ScenarioSyntaxError(line, tok.column,
                                  "expected an integer, got '" + std::string(tok.text) + "'");
    }
    return v;
}

std::uint64_t parse_u64(const Token& tok, std::size_t line) {
    std::uint64_t v = 0;
    const char* begin = tok.text.data();
    const char* end = begin + tok.text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (tok.text.empty() || ec != std::errc{} || ptr != end) {
        throw ScenarioSyntaxError(line, tok.column,
                                  "expected an unsigned integer, got '" + std::string(tok.text) + "'");
    }
    return v;
}

int parse_count(const Token& tok, std::size_t line) {
    const auto v = parse_int(tok, line);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ScenarioSyntaxError(line, tok.column, "integer out of range");
    }
    return static_cast<int>(v);
}

bool parse_bool(const Token& tok, std::size_t line) {
    if (tok.text == "true" || tok.text == "yes" || tok.text == "1") return true;
    if (tok.text == "false" || tok.text == "no" || tok.text == "0") return false;
    throw ScenarioSyntaxError(line, tok.column, "expected true or false, got '" + std::string(tok.text) + "'");
}

using Setter = std::function<void(ScenarioConfig&, const std::vector<Token>&, std::size_t line)>;

const Token& single(const std::vector<Token>& toks, std::size_t line) {
    if (toks.size() != 1) throw ScenarioSyntaxError(line, toks[1].column, "expected a single value");
    return toks.front();
}

Setter number(double& (*field)(ScenarioConfig&)) {
    return [field](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
        field(c) = parse_double(single(t, line), line);
    };
}

Setter count(int& (*field)(ScenarioConfig&)) {
    return [field](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
        field(c) = parse_count(single(t, line), line);
    };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"scenario.name",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.name = std::string(single(t, line).text);
         }},
        {"topology.kind",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             const auto& tok = single(t, line);
             if (tok.text == "both") {
                 c.topologies = {TopologyKind::single_site, TopologyKind::multi_site};
             } else if (auto kind = parse_topology_kind(tok.text)) {
                 c.topologies = {*kind};
             } else {
                 throw ScenarioSyntaxError(line, tok.column,
                                           "unknown topology '" + std::string(tok.text) +
                                               "' (single_site, multi_site or both)");
             }
             c.topology.kind = c.topologies.front();
         }},
        {"topology.worker_count", count([](ScenarioConfig& c) -> int& { return c.topology.worker_count; })},
        {"topology.headnode_hosts_replicas",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.topology.headnode_hosts_replicas = parse_bool(single(t, line), line);
         }},
        {"topology.placement",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             const auto& tok = single(t, line);
             if (tok.text == "balanced_headnode_first") {
                 c.topology.placement = PlacementKind::balanced_headnode_first;
             } else if (tok.text == "balanced_workers_first") {
                 c.topology.placement = PlacementKind::balanced_workers_first;
             } else {
                 throw ScenarioSyntaxError(line, tok.column, "unknown placement '" + std::string(tok.text) + "'");
             }
         }},
        {"delay.x_total_ms",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.delay_grid.clear();
             for (const auto& tok : t) c.delay_grid.push_back(parse_double(tok, line));
         }},
        {"delay.jitter_ms", number([](ScenarioConfig& c) -> double& { return c.jitter_ms; })},
        {"delay.loss_prob", number([](ScenarioConfig& c) -> double& { return c.loss_prob; })},
        {"grid.processing_ms",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.processing_grid.clear();
             for (const auto& tok : t) c.processing_grid.push_back(parse_double(tok, line));
         }},
        {"grid.users",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.user_grid.clear();
             for (const auto& tok : t) c.user_grid.push_back(parse_count(tok, line));
         }},
        {"function.base_overhead_ms",
         number([](ScenarioConfig& c) -> double& { return c.function.base_overhead_ms; })},
        {"function.cold_start_ms", number([](ScenarioConfig& c) -> double& { return c.function.cold_start_ms; })},
        {"autoscaler.max_replicas", count([](ScenarioConfig& c) -> int& { return c.autoscaler.max_replicas; })},
        {"autoscaler.hard_concurrency_limit",
         count([](ScenarioConfig& c) -> int& { return c.autoscaler.hard_concurrency_limit; })},
        {"autoscaler.concurrency_target",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.concurrency_target; })},
        {"autoscaler.target_utilization_pct",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.target_utilization_pct; })},
        {"autoscaler.stable_window_s",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.stable_window_s; })},
        {"autoscaler.panic_window_pct",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.panic_window_pct; })},
        {"autoscaler.panic_threshold_pct",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.panic_threshold_pct; })},
        {"autoscaler.tick_interval_s",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.tick_interval_s; })},
        {"autoscaler.scale_to_zero_grace_s",
         number([](ScenarioConfig& c) -> double& { return c.autoscaler.scale_to_zero_grace_s; })},
        {"workload.duration_s", number([](ScenarioConfig& c) -> double& { return c.workload.duration_s; })},
        {"workload.request_timeout_ms",
         number([](ScenarioConfig& c) -> double& { return c.workload.request_timeout_ms; })},
        {"run.seed",
         [](ScenarioConfig& c, const std::vector<Token>& t, std::size_t line) {
             c.seed = parse_u64(single(t, line), line);
         }},
        {"run.repetitions", count([](ScenarioConfig& c) -> int& { return c.repetitions; })},
    };
    return table;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <class T, class Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += fmt(values[i]);
    }
    return out;
}

void require(bool cond, const char* message) {
    if (!cond) throw ValidationError(message);
}

} // namespace

std::string_view to_string(TopologyKind kind) {
    return kind == TopologyKind::single_site ? "single_site" : "multi_site";
}

std::optional<TopologyKind> parse_topology_kind(std::string_view text) {
    if (text == "single_site") return TopologyKind::single_site;
    if (text == "multi_site") return TopologyKind::multi_site;
    return std::nullopt;
}

std::string_view to_string(PlacementKind kind) {
    return kind == PlacementKind::balanced_headnode_first ? "balanced_headnode_first"
                                                          : "balanced_workers_first";
}

ScenarioConfig ScenarioConfig::for_topology(TopologyKind kind) const {
    ScenarioConfig copy = *this;
    copy.topology.kind = kind;
    return copy;
}

ScenarioSyntaxError::ScenarioSyntaxError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig config;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;

    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const auto raw = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;

        const auto eq = line.find('=');
        const auto key_start = line.find_first_not_of(" \t");
        if (eq == std::string_view::npos) {
            throw ScenarioSyntaxError(line_no, key_start + 1, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (!valid_key(key)) {
            throw ScenarioSyntaxError(line_no, key_start + 1, "malformed key '" + std::string(key) + "'");
        }
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ScenarioSyntaxError(line_no, key_start + 1, "unknown key '" + std::string(key) + "'");
        }
        if (!seen.insert(std::string(key)).second) {
            throw ScenarioSyntaxError(line_no, key_start + 1, "duplicate key '" + std::string(key) + "'");
        }

        const auto value = line.substr(eq + 1);
        auto tokens = split_list(value, eq + 2);
        for (const auto& tok : tokens) {
            if (tok.text.empty()) throw ScenarioSyntaxError(line_no, tok.column, "empty value");
        }
        it->second(config, tokens, line_no);
    }

    validate(config);
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string to_scenario_text(const ScenarioConfig& c) {
    std::ostringstream out;
    const auto& a = c.autoscaler;
    std::string kinds = c.topologies.size() == 2 ? "both" : std::string(to_string(c.topologies.front()));
    out << "scenario.name = " << c.name << '\n'
        << "topology.kind = " << kinds << '\n'
        << "topology.worker_count = " << c.topology.worker_count << '\n'
        << "topology.headnode_hosts_replicas = " << (c.topology.headnode_hosts_replicas ? "true" : "false") << '\n'
        << "topology.placement = " << to_string(c.topology.placement) << '\n'
        << "delay.x_total_ms = " << join(c.delay_grid, format_double) << '\n'
        << "delay.jitter_ms = " << format_double(c.jitter_ms) << '\n'
        << "delay.loss_prob = " << format_double(c.loss_prob) << '\n'
        << "grid.processing_ms = " << join(c.processing_grid, format_double) << '\n'
        << "grid.users = " << join(c.user_grid, [](int v) { return std::to_string(v); }) << '\n'
        << "function.base_overhead_ms = " << format_double(c.function.base_overhead_ms) << '\n'
        << "function.cold_start_ms = " << format_double(c.function.cold_start_ms) << '\n'
        << "autoscaler.max_replicas = " << a.max_replicas << '\n'
        << "autoscaler.hard_concurrency_limit = " << a.hard_concurrency_limit << '\n'
        << "autoscaler.concurrency_target = " << format_double(a.concurrency_target) << '\n'
        << "autoscaler.target_utilization_pct = " << format_double(a.target_utilization_pct) << '\n'
        << "autoscaler.stable_window_s = " << format_double(a.stable_window_s) << '\n'
        << "autoscaler.panic_window_pct = " << format_double(a.panic_window_pct) << '\n'
        << "autoscaler.panic_threshold_pct = " << format_double(a.panic_threshold_pct) << '\n'
        << "autoscaler.tick_interval_s = " << format_double(a.tick_interval_s) << '\n'
        << "autoscaler.scale_to_zero_grace_s = " << format_double(a.scale_to_zero_grace_s) << '\n'
        << "workload.duration_s = " << format_double(c.workload.duration_s) << '\n'
        << "workload.request_timeout_ms = " << format_double(c.workload.request_timeout_ms) << '\n'
        << "run.seed = " << c.seed << '\n'
        << "run.repetitions = " << c.repetitions << '\n';
    return out.str();
}

void validate(const ScenarioConfig& c) {
    require(!c.topologies.empty(), "at least one topology required");
    require(c.topology.worker_count >= 1, "worker_count must be >= 1");

    require(!c.delay_grid.empty(), "delay grid must not be empty");
    require(!c.processing_grid.empty(), "processing grid must not be empty");
    require(!c.user_grid.empty(), "user grid must not be empty");
    for (double x : c.delay_grid) require(x >= 0.0, "x_total_ms must be >= 0");
    for (double p : c.processing_grid) require(p >= 0.0, "processing_time_ms must be >= 0");
    for (int u : c.user_grid) require(u >= 1, "concurrent_users must be >= 1");

    require(c.jitter_ms >= 0.0, "jitter_ms must be >= 0");
    require(c.loss_prob >= 0.0 && c.loss_prob <= 1.0, "loss_prob out of range [0, 1]");

    require(c.function.processing_time_ms >= 0.0, "processing_time_ms must be >= 0");
    require(c.function.base_overhead_ms > 0.0, "base_overhead_ms must be > 0");
    require(c.function.cold_start_ms >= 0.0, "cold_start_ms must be >= 0");

    const auto& a = c.autoscaler;
    require(a.max_replicas >= 1, "max_replicas must be >= 1");
    require(a.hard_concurrency_limit >= 0, "hard_concurrency_limit must be >= 0");
    require(a.concurrency_target > 0.0, "concurrency_target must be > 0");
    require(a.target_utilization_pct > 0.0 && a.target_utilization_pct <= 100.0,
            "target_utilization_pct out of range (0, 100]");
    require(a.panic_threshold_pct >= 100.0, "panic_threshold_pct must be >= 100");
    require(a.stable_window_s > 0.0, "stable_window_s must be > 0");
    require(a.panic_window_pct > 0.0 && a.panic_window_pct <= 100.0, "panic_window_pct out of range (0, 100]");
    require(a.tick_interval_s > 0.0, "tick_interval_s must be > 0");
    require(a.scale_to_zero_grace_s >= 0.0, "scale_to_zero_grace_s must be >= 0");

    require(c.workload.concurrent_users >= 1, "concurrent_users must be >= 1");
    require(c.workload.duration_s > 0.0, "duration_s must be > 0");
    require(c.workload.request_timeout_ms > 0.0, "request_timeout_ms must be > 0");
    require(c.repetitions >= 1, "repetitions must be >= 1");
}

DelayProfile derive_delays(double x_total_ms, TopologyKind kind, double jitter_ms, double loss_prob) {
    if (!(x_total_ms >= 0.0)) throw std::invalid_argument("x_total_ms must be >= 0");
    DelayProfile d;
    d.x_total_ms = x_total_ms;
    d.jitter_ms = jitter_ms;
    d.loss_prob = loss_prob;
    if (kind == TopologyKind::single_site) {
        d.access_delay_ms = x_total_ms;
        d.intra_delay_ms = 0.0;
    } else {
        d.access_delay_ms = x_total_ms / 2.0;
        d.intra_delay_ms = x_total_ms / 2.0;
    }
    return d;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + (index + 1) * kGoldenGamma;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<RunPlan> expand_grid(const ScenarioConfig& config) {
    validate(config);
    std::vector<RunPlan> plans;
    plans.reserve(config.delay_grid.size() * config.user_grid.size() * config.processing_grid.size() *
                  static_cast<std::size_t>(config.repetitions));
    for (double x : config.delay_grid) {
        const auto delays = derive_delays(x, config.topology.kind, config.jitter_ms, config.loss_prob);
        for (int users : config.user_grid) {
            for (double proc : config.processing_grid) {
                for (int rep = 0; rep < config.repetitions; ++rep) {
                    RunPlan plan;
                    plan.index = plans.size();
                    plan.topology = config.topology.kind;
                    plan.delays = delays;
                    plan.users = users;
                    plan.processing_ms = proc;
                    plan.repetition = rep;
                    plan.seed = mix_seed(config.seed, plan.index);
                    plans.push_back(plan);
                }
            }
        }
    }
    return plans;
}

} // namespace edgesim
