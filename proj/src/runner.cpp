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

#include "edgesim/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace edgesim {

namespace fs = std::filesystem;

std::string format_number(double value) {
    if (value == 0.0) return "0"; // also folds -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

RunOutput run_one(const ScenarioConfig& config, const RunPlan& plan, const SweepOptions& options) {
    SimulationOptions sim = options.simulation;
    std::ofstream trace;
    if (options.trace_dir) {
        const fs::path path = *options.trace_dir / (std::string(to_string(plan.topology)) + "-" +
                                                    std::to_string(plan.index) + ".trace.csv");
        trace.open(path, std::ios::binary);
        if (!trace) throw std::runtime_error("cannot open trace file " + path.string());
        trace << "time_us,kind,payload_id\n";
        sim.trace = &trace;
    }
    return simulate(config, plan, sim);
}

} // namespace

SweepOutcome run_plans(const ScenarioConfig& config, const std::vector<RunPlan>& plans, const SweepOptions& options) {
    std::vector<std::optional<RunOutput>> slots(plans.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto stopping = [&] { return failed.load() || (options.stop && options.stop->load()); };
    auto worker = [&] {
        for (;;) {
            if (stopping()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= plans.size()) return;
            try {
                slots[i] = run_one(config, plans[i], options);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(plans.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    SweepOutcome outcome;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (slots[i]) {
            outcome.runs.push_back({plans[i], std::move(*slots[i])});
        } else {
            outcome.interrupted = true;
        }
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Results files

namespace {

constexpr std::string_view kResultsHeader =
    "topology,x_total_ms,access_delay_ms,intra_delay_ms,users,processing_ms,duration_s,successes,timeouts,drops,"
    "throughput_rps,p50_ms,p95_ms,p99_ms,max_ready_replicas,seed";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

template <class T>
T parse_field(std::string_view text, std::size_t line, std::string_view column) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ResultsFormatError("line " + std::to_string(line) + ": bad " + std::string(column) + " '" +
                                 std::string(text) + "'");
    }
    return value;
}

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

} // namespace

std::string results_csv_header() { return std::string(kResultsHeader); }

std::string format_results_row(const RunResult& r) {
    std::string out;
    out.reserve(160);
    auto field = [&out](std::string_view v) {
        if (!out.empty()) out += ',';
        out += v;
    };
    field(to_string(r.topology));
    field(format_number(r.x_total_ms));
    field(format_number(r.access_delay_ms));
    field(format_number(r.intra_delay_ms));
    field(std::to_string(r.users));
    field(format_number(r.processing_ms));
    field(format_number(r.duration_s));
    field(std::to_string(r.successes));
    field(std::to_string(r.timeouts));
    field(std::to_string(r.drops));
    field(format_number(r.throughput_rps));
    field(r.latency ? format_number(r.latency->p50_ms) : "");
    out += ',';
    if (r.latency) out += format_number(r.latency->p95_ms);
    out += ',';
    if (r.latency) out += format_number(r.latency->p99_ms);
    field(std::to_string(r.max_ready_replicas));
    field(std::to_string(r.seed));
    return out;
}

std::string results_to_csv(const std::vector<RunResult>& rows) {
    std::string out = results_csv_header() + "\n";
    for (const auto& r : rows) {
        out += format_results_row(r);
        out += '\n';
    }
    return out;
}

std::string results_to_json(const std::vector<RunResult>& rows) {
    auto doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["topology"] = to_string(r.topology);
        o["x_total_ms"] = r.x_total_ms;
        o["access_delay_ms"] = r.access_delay_ms;
        o["intra_delay_ms"] = r.intra_delay_ms;
        o["users"] = r.users;
        o["processing_ms"] = r.processing_ms;
        o["duration_s"] = r.duration_s;
        o["successes"] = r.successes;
        o["timeouts"] = r.timeouts;
        o["drops"] = r.drops;
        o["throughput_rps"] = r.throughput_rps;
        o["p50_ms"] = r.latency ? nlohmann::ordered_json(r.latency->p50_ms) : nlohmann::ordered_json(nullptr);
        o["p95_ms"] = r.latency ? nlohmann::ordered_json(r.latency->p95_ms) : nlohmann::ordered_json(nullptr);
        o["p99_ms"] = r.latency ? nlohmann::ordered_json(r.latency->p99_ms) : nlohmann::ordered_json(nullptr);
        o["max_ready_replicas"] = r.max_ready_replicas;
        o["seed"] = r.seed;
        doc.push_back(std::move(o));
    }
    return doc.dump(2) + "\n";
}

std::vector<RunResult> parse_results_csv(std::string_view text) {
    std::vector<RunResult> rows;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const std::string_view line = trim_cr(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kResultsHeader) throw ResultsFormatError("line 1: unexpected results header");
            header_seen = true;
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 16) {
            throw ResultsFormatError("line " + std::to_string(line_no) + ": expected 16 fields, got " +
                                     std::to_string(f.size()));
        }
        RunResult r;
        const auto kind = parse_topology_kind(f[0]);
        if (!kind) throw ResultsFormatError("line " + std::to_string(line_no) + ": unknown topology");
        r.topology = *kind;
        r.x_total_ms = parse_field<double>(f[1], line_no, "x_total_ms");
        r.access_delay_ms = parse_field<double>(f[2], line_no, "access_delay_ms");
        r.intra_delay_ms = parse_field<double>(f[3], line_no, "intra_delay_ms");
        r.users = parse_field<int>(f[4], line_no, "users");
        r.processing_ms = parse_field<double>(f[5], line_no, "processing_ms");
        r.duration_s = parse_field<double>(f[6], line_no, "duration_s");
        r.successes = parse_field<std::uint64_t>(f[7], line_no, "successes");
        r.timeouts = parse_field<std::uint64_t>(f[8], line_no, "timeouts");
        r.drops = parse_field<std::uint64_t>(f[9], line_no, "drops");
        r.throughput_rps = parse_field<double>(f[10], line_no, "throughput_rps");
        const bool any = !f[11].empty() || !f[12].empty() || !f[13].empty();
        if (any) {
            r.latency = LatencyPercentiles{parse_field<double>(f[11], line_no, "p50_ms"),
                                           parse_field<double>(f[12], line_no, "p95_ms"),
                                           parse_field<double>(f[13], line_no, "p99_ms")};
        }
        r.max_ready_replicas = parse_field<int>(f[14], line_no, "max_ready_replicas");
        r.seed = parse_field<std::uint64_t>(f[15], line_no, "seed");
        rows.push_back(r);
    }
    if (!header_seen) throw ResultsFormatError("empty results file");
    return rows;
}

std::vector<RunResult> read_results_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_results_csv(ss.str());
    } catch (const ResultsFormatError& e) {
        throw ResultsFormatError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Aggregates

namespace {

using PointKey = std::tuple<int, double, int, double>;

PointKey key_of(const RunResult& r) {
    return {static_cast<int>(r.topology), r.x_total_ms, r.users, r.processing_ms};
}

struct Moments {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    void add(double v) {
        ++n;
        sum += v;
        sum_sq += v * v;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double sample_stddev() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return var > 0.0 ? std::sqrt(var) : 0.0;
    }
};

} // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunResult>& rows) {
    struct Acc {
        AggregateRow row;
        Moments thr, succ, tout, drop, p50, p99, ready;
    };
    std::vector<Acc> accs;
    std::map<PointKey, std::size_t> index;
    for (const auto& r : rows) {
        auto [it, inserted] = index.try_emplace(key_of(r), accs.size());
        if (inserted) {
            Acc a;
            a.row.topology = r.topology;
            a.row.x_total_ms = r.x_total_ms;
            a.row.users = r.users;
            a.row.processing_ms = r.processing_ms;
            accs.push_back(a);
        }
        Acc& a = accs[it->second];
        a.thr.add(r.throughput_rps);
        a.succ.add(static_cast<double>(r.successes));
        a.tout.add(static_cast<double>(r.timeouts));
        a.drop.add(static_cast<double>(r.drops));
        a.ready.add(r.max_ready_replicas);
        if (r.latency) {
            a.p50.add(r.latency->p50_ms);
            a.p99.add(r.latency->p99_ms);
        }
    }
    std::vector<AggregateRow> out;
    out.reserve(accs.size());
    for (auto& a : accs) {
        a.row.runs = a.thr.n;
        a.row.throughput_mean = a.thr.mean();
        a.row.throughput_stddev = a.thr.sample_stddev();
        a.row.successes_mean = a.succ.mean();
        a.row.timeouts_mean = a.tout.mean();
        a.row.drops_mean = a.drop.mean();
        if (a.p50.n) a.row.p50_mean_ms = a.p50.mean();
        if (a.p99.n) a.row.p99_mean_ms = a.p99.mean();
        a.row.max_ready_mean = a.ready.mean();
        out.push_back(a.row);
    }
    return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "topology,x_total_ms,users,processing_ms,runs,throughput_mean,throughput_stddev,"
                      "successes_mean,timeouts_mean,drops_mean,p50_mean_ms,p99_mean_ms,max_ready_mean\n";
    for (const auto& r : rows) {
        out += to_string(r.topology);
        for (const std::string& v :
             {format_number(r.x_total_ms), std::to_string(r.users), format_number(r.processing_ms), std::to_string(r.runs),
              format_number(r.throughput_mean), format_number(r.throughput_stddev), format_number(r.successes_mean),
              format_number(r.timeouts_mean), format_number(r.drops_mean),
              r.p50_mean_ms ? format_number(*r.p50_mean_ms) : std::string(),
              r.p99_mean_ms ? format_number(*r.p99_mean_ms) : std::string(), format_number(r.max_ready_mean)}) {
            out += ',';
            out += v;
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest and per-run files

std::uint64_t grid_hash(const ScenarioConfig& config, const std::vector<RunPlan>& plans) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    mix(to_scenario_text(config));
    for (const auto& p : plans) {
        mix(to_string(p.topology));
        mix(format_number(p.delays.x_total_ms));
        mix(std::to_string(p.users));
        mix(format_number(p.processing_ms));
        mix(std::to_string(p.repetition));
        mix(std::to_string(p.seed));
        mix("\n");
    }
    return h;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_json(const ManifestInfo& info) {
    if (!info.config) throw std::invalid_argument("manifest needs a scenario");
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(info.grid_hash));
    nlohmann::ordered_json doc;
    doc["tool"] = "edgesim";
    doc["tool_version"] = kToolVersion;
    doc["scenario_name"] = info.config->name;
    doc["seed"] = info.config->seed;
    doc["grid_hash"] = hash;
    auto topologies = nlohmann::ordered_json::array();
    for (auto t : info.topologies) topologies.push_back(to_string(t));
    doc["topologies"] = topologies;
    doc["planned_runs"] = info.planned_runs;
    doc["completed_runs"] = info.completed_runs;
    doc["interrupted"] = info.interrupted;
    doc["created_at"] = info.created_at;
    doc["scenario"] = to_scenario_text(*info.config);
    return doc.dump(2) + "\n";
}

void write_text_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_run_details(const fs::path& dir, const RunOutput& output) {
    std::string replicas = "time_us,ready_replicas\n";
    for (const auto& p : output.replica_timeline) {
        replicas += std::to_string(p.at.count()) + "," + std::to_string(p.ready_replicas) + "\n";
    }
    std::string decisions = "time_us,mode,stable_avg,panic_avg,ready,desired\n";
    for (const auto& d : output.decisions) {
        decisions += std::to_string(d.at.count()) + "," + std::string(to_string(d.mode)) + "," +
                     format_number(d.stable_avg) + "," + format_number(d.panic_avg) + "," + std::to_string(d.ready) +
                     "," + std::to_string(d.desired) + "\n";
    }
    std::string histogram = "bucket_ms,count\n";
    for (const auto& b : output.latency_histogram) {
        histogram += std::to_string(b.bucket_ms) + "," + std::to_string(b.count) + "\n";
    }
    write_text_file(dir / "replicas.csv", replicas);
    write_text_file(dir / "autoscaler.csv", decisions);
    write_text_file(dir / "latency_histogram.csv", histogram);
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

using GridKey = std::tuple<int, double, double>; // users, x_total, processing

std::string describe(const GridKey& k) {
    return "x_total_ms=" + format_number(std::get<1>(k)) + " users=" + std::to_string(std::get<0>(k)) +
           " processing_ms=" + format_number(std::get<2>(k));
}

std::map<GridKey, Moments> mean_throughput(const std::vector<RunResult>& rows) {
    std::map<GridKey, Moments> out;
    for (const auto& r : rows) out[{r.users, r.x_total_ms, r.processing_ms}].add(r.throughput_rps);
    return out;
}

} // namespace

GridMismatchError::GridMismatchError(std::vector<std::string> missing)
    : std::runtime_error([&] {
          std::string msg = "result grids differ; missing keys:";
          for (const auto& m : missing) msg += "\n  " + m;
          return msg;
      }()),
      missing_(std::move(missing)) {}

Comparison compare_results(const std::vector<RunResult>& single_site, const std::vector<RunResult>& multi_site) {
    const auto single = mean_throughput(single_site);
    const auto multi = mean_throughput(multi_site);

    std::vector<std::string> missing;
    for (const auto& [k, m] : single)
        if (!multi.count(k)) missing.push_back("multi_site: " + describe(k));
    for (const auto& [k, m] : multi)
        if (!single.count(k)) missing.push_back("single_site: " + describe(k));
    if (!missing.empty()) throw GridMismatchError(std::move(missing));

    Comparison out;
    std::map<int, Moments> band_moments;
    std::map<int, std::pair<double, double>> band_range;
    for (const auto& [k, s] : single) {
        ComparisonRow row;
        row.users = std::get<0>(k);
        row.x_total_ms = std::get<1>(k);
        row.processing_ms = std::get<2>(k);
        row.single_site_rps = s.mean();
        row.multi_site_rps = multi.at(k).mean();
        if (row.single_site_rps > 0.0) {
            row.ratio = row.multi_site_rps / row.single_site_rps;
            band_moments[row.users].add(*row.ratio);
            auto [it, fresh] = band_range.try_emplace(row.users, *row.ratio, *row.ratio);
            if (!fresh) {
                it->second.first = std::min(it->second.first, *row.ratio);
                it->second.second = std::max(it->second.second, *row.ratio);
            }
        }
        out.rows.push_back(row);
    }
    for (const auto& [users, m] : band_moments) {
        const auto& range = band_range.at(users);
        out.bands.push_back(RatioBand{users, m.n, range.first, m.mean(), range.second});
    }
    return out;
}

std::string format_comparison(const Comparison& c) {
    std::string out = "x_total_ms,users,processing_ms,single_site_rps,multi_site_rps,ratio,flag\n";
    for (const auto& r : c.rows) {
        out += format_number(r.x_total_ms) + "," + std::to_string(r.users) + "," + format_number(r.processing_ms) + "," +
               format_number(r.single_site_rps) + "," + format_number(r.multi_site_rps) + ",";
        if (r.ratio) {
            out += format_number(*r.ratio) + ",";
        } else {
            out += ",no-throughput";
        }
        out += '\n';
    }
    for (const auto& b : c.bands) {
        char line[160];
        std::snprintf(line, sizeof line, "# band users=%d points=%zu ratio_min=%.4f ratio_mean=%.4f ratio_max=%.4f\n",
                      b.users, b.points, b.min, b.mean, b.max);
        out += line;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Plot data

std::vector<fs::path> write_plotdata(const std::vector<RunResult>& rows, const fs::path& dir) {
    struct Panel {
        std::set<double> delays;
        std::set<double> processing;
        std::map<std::pair<double, double>, Moments> cells; // (processing, delay)
    };
    std::map<std::pair<int, int>, Panel> panels; // (topology, users)
    for (const auto& r : rows) {
        Panel& p = panels[{static_cast<int>(r.topology), r.users}];
        p.delays.insert(r.x_total_ms);
        p.processing.insert(r.processing_ms);
        p.cells[{r.processing_ms, r.x_total_ms}].add(r.throughput_rps);
    }

    std::vector<fs::path> written;
    for (const auto& [key, p] : panels) {
        const auto topology = static_cast<TopologyKind>(key.first);
        std::string text = "processing_ms";
        for (double x : p.delays) text += ",x_" + format_number(x);
        text += '\n';
        for (double proc : p.processing) {
            text += format_number(proc);
            for (double x : p.delays) {
                text += ',';
                const auto it = p.cells.find({proc, x});
                if (it != p.cells.end()) text += format_number(it->second.mean());
            }
            text += '\n';
        }
        const fs::path path =
            dir / ("throughput_" + std::string(to_string(topology)) + "_u" + std::to_string(key.second) + ".csv");
        write_text_file(path, text);
        written.push_back(path);
    }
    return written;
}

} // namespace edgesim
