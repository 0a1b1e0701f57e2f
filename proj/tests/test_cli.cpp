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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = EDGESIM_TEST_TMP;
const fs::path kScenarios = EDGESIM_SCENARIO_DIR;

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = std::string("\"") + EDGESIM_CLI_PATH + "\" " + args;
    cmd += stdout_file.empty() ? " >/dev/null" : " >\"" + stdout_file.string() + "\"";
    cmd += " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh(const std::string& name) {
    const fs::path dir = kTmp / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

const std::string kOneRow = " --users 1 --x 25 --proc 0 --topology single_site";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("a one-point override produces one row and the detail files") {
    const auto out = fresh("one");
    const auto scenario = (kScenarios / "default.scenario").string();
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + out.string() + "\"" + kOneRow) == 0);
    const auto results = slurp(out / "results_single_site.csv");
    CHECK(line_count(results) == 2);
    CHECK(results.find("\nsingle_site,25,25,0,1,0,300,") != std::string::npos);
    CHECK(fs::exists(out / "results.csv"));
    CHECK(fs::exists(out / "aggregate.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK_FALSE(fs::exists(out / "results_multi_site.csv"));
    CHECK(fs::exists(out / "runs" / "single_site-0" / "replicas.csv"));
    CHECK(fs::exists(out / "runs" / "single_site-0" / "autoscaler.csv"));
    CHECK(fs::exists(out / "runs" / "single_site-0" / "latency_histogram.csv"));
}

TEST_CASE("reruns are byte-identical apart from the manifest timestamp") {
    const auto a = fresh("rerun-a");
    const auto b = fresh("rerun-b");
    const auto scenario = (kScenarios / "quick.scenario").string();
    const std::string common = " --x 0,25 --proc 0,8 --users 1,50";
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + a.string() + "\"" + common) == 0);
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + b.string() + "\" --jobs 2" + common) == 0);
    for (const char* name : {"results.csv", "results_single_site.csv", "results_multi_site.csv", "aggregate.csv"})
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
    CHECK(line_count(slurp(a / "results.csv")) == 1 + 2 * 8);
}

TEST_CASE("JSON format writes mirrors next to the CSV files") {
    const auto out = fresh("json");
    const auto scenario = (kScenarios / "default.scenario").string();
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + out.string() + "\" --format json" + kOneRow) == 0);
    CHECK(fs::exists(out / "results_single_site.csv"));
    CHECK(slurp(out / "results_single_site.json").find("\"users\": 1") != std::string::npos);
}

TEST_CASE("trace files are written on request") {
    const auto out = fresh("trace");
    const auto scenario = (kScenarios / "default.scenario").string();
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + out.string() + "\" --trace" + kOneRow) == 0);
    CHECK(slurp(out / "traces" / "single_site-0.trace.csv").rfind("time_us,kind,payload_id\n0,user_issue,0\n", 0) == 0);
}

TEST_CASE("bad input exits with status 1") {
    const auto dir = fresh("bad");
    const auto bad = dir / "bad.scenario";
    std::ofstream(bad) << "scenario.name = bad\nworkload.duration_s = ten\n";
    CHECK(run_cli("run \"" + bad.string() + "\" --out \"" + (dir / "out").string() + "\"") == 1);
    const auto invalid = dir / "invalid.scenario";
    std::ofstream(invalid) << "workload.duration_s = -5\n";
    CHECK(run_cli("run \"" + invalid.string() + "\" --out \"" + (dir / "out").string() + "\"") == 1);
    CHECK(run_cli("run \"" + (dir / "missing.scenario").string() + "\"") != 0);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("run \"" + bad.string() + "\" --topology ring") == 1);
}

TEST_CASE("compare and plotdata consume run output") {
    const auto out = fresh("cmp");
    const auto scenario = (kScenarios / "quick.scenario").string();
    REQUIRE(run_cli("run \"" + scenario + "\" --out \"" + out.string() + "\" --x 0,25 --proc 0 --users 1") == 0);
    const auto report = out / "compare.txt";
    REQUIRE(run_cli("compare \"" + (out / "results_single_site.csv").string() + "\" \"" +
                        (out / "results_multi_site.csv").string() + "\"",
                    report) == 0);
    const auto text = slurp(report);
    CHECK(text.find("# band users=1") != std::string::npos);

    REQUIRE(run_cli("plotdata \"" + (out / "results.csv").string() + "\" --out \"" + (out / "plot").string() + "\"") ==
            0);
    CHECK(fs::exists(out / "plot" / "throughput_single_site_u1.csv"));
    CHECK(fs::exists(out / "plot" / "throughput_multi_site_u1.csv"));

    // A truncated results file is a format error.
    const auto broken = out / "broken.csv";
    std::ofstream(broken) << "topology,x\n";
    CHECK(run_cli("compare \"" + broken.string() + "\" \"" + (out / "results_multi_site.csv").string() + "\"") == 1);
}

} // TEST_SUITE
