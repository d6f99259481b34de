// Copyright 2026 the spectral_clt authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Release gate: runs the full battery once in-process and asserts each check,
// then spawns the CLI suite in quick mode to verify byte-identical output
// across reruns and worker counts.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sclt/acceptance.hpp"

#ifndef SPECTRAL_CLT_BIN
#error "SPECTRAL_CLT_BIN must point at the CLI binary"
#endif

namespace {

struct BatteryRun {
    std::vector<sclt::CriterionResult> results;
    std::string printed;
};

const BatteryRun& battery() {
    static const BatteryRun run = [] {
        sclt::BatteryOptions opt;
        opt.seed_base = 1;
        opt.quick = false;
        opt.workers = sclt::resolve_workers(0);
        std::ostringstream os;
        BatteryRun out;
        out.results = sclt::run_acceptance_battery(opt, os);
        out.printed = os.str();
        return out;
    }();
    return run;
}

const sclt::CriterionResult& criterion(int id) {
    for (const sclt::CriterionResult& r : battery().results) {
        if (r.id == id) return r;
    }
    FAIL("criterion id missing from battery results: " << id);
    static const sclt::CriterionResult none{};
    return none;
}

void check_criterion(int id) {
    const sclt::CriterionResult& r = criterion(id);
    INFO("criterion " << r.id << " " << r.name << ": " << r.detail);
    REQUIRE(r.pass);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

int spawn_quick_suite(const std::string& out_path, int workers) {
    const std::string cmd = std::string(SPECTRAL_CLT_BIN) + " suite --quick --workers " +
                            std::to_string(workers) + " > " + out_path + " 2> /dev/null";
    return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("battery reports all ten checks with one line each") {
    REQUIRE(battery().results.size() == 10);
    for (int id = 1; id <= 10; ++id) {
        const sclt::CriterionResult& r = criterion(id);
        const std::string expect = "ACCEPTANCE " + std::to_string(id) + " " + r.name +
                                   ": " + (r.pass ? "PASS" : "FAIL") + " (" + r.detail +
                                   ")\n";
        INFO("missing line: " << expect);
        REQUIRE(battery().printed.find(expect) != std::string::npos);
    }
    REQUIRE(battery().printed.find("ACCEPTANCE SUMMARY: ") != std::string::npos);
}

TEST_CASE("release check 1: fixed-frequency limit law") { check_criterion(1); }

TEST_CASE("release check 2: cross-frequency decorrelation") { check_criterion(2); }

TEST_CASE("release check 3: periodogram exponential law") { check_criterion(3); }

TEST_CASE("release check 4: annealed mixture law") { check_criterion(4); }

TEST_CASE("release check 5: path-maximum identity") { check_criterion(5); }

TEST_CASE("release check 6: variance convergence ladder") { check_criterion(6); }

TEST_CASE("release check 7: predictor-norm decay") { check_criterion(7); }

TEST_CASE("release check 8: low-frequency pole calibration") { check_criterion(8); }

TEST_CASE("release check 9: spectral coefficient identities") { check_criterion(9); }

TEST_CASE("release check 10: determinism and transform cross-check") {
    check_criterion(10);
}

TEST_CASE("quick suite output is byte-identical across reruns and workers") {
    const std::string p1 = "/tmp/sclt_suite_run1.txt";
    const std::string p2 = "/tmp/sclt_suite_run2.txt";
    const std::string p3 = "/tmp/sclt_suite_run3.txt";
    const int s1 = spawn_quick_suite(p1, 1);
    const int s2 = spawn_quick_suite(p2, 1);
    const int s3 = spawn_quick_suite(p3, 4);
    REQUIRE(s1 != -1);
    REQUIRE(s1 == s2);
    REQUIRE(s1 == s3);
    const std::string out1 = slurp(p1);
    REQUIRE(out1.find("ACCEPTANCE 1 ") != std::string::npos);
    REQUIRE(out1.find("ACCEPTANCE SUMMARY: ") != std::string::npos);
    REQUIRE(out1 == slurp(p2));
    REQUIRE(out1 == slurp(p3));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
    std::remove(p3.c_str());
}
