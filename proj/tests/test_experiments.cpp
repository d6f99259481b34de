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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sclt/experiments.hpp"

namespace {

sclt::ExperimentConfig small_fixed_cfg(std::uint64_t seed) {
    sclt::ExperimentConfig cfg;
    cfg.process = sclt::preset_ma1();
    cfg.n = 256;
    cfg.replicates = 200;
    cfg.thetas = {2.0};
    cfg.master_seed = seed;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("frequency validation names the excluded points") {
    REQUIRE_THROWS_WITH(sclt::validate_theta(0.0),
                        Catch::Matchers::ContainsSubstring("theta=0 excluded"));
    REQUIRE_THROWS_WITH(sclt::validate_theta(sclt::kPi),
                        Catch::Matchers::ContainsSubstring("theta=pi excluded"));
    REQUIRE_THROWS_WITH(sclt::validate_theta(sclt::kTwoPi),
                        Catch::Matchers::ContainsSubstring("theta=0 excluded"));
    REQUIRE_THROWS_AS(sclt::validate_theta(-1.0), sclt::ConfigError);
    REQUIRE_THROWS_AS(sclt::validate_theta(7.0), sclt::ConfigError);
    REQUIRE_NOTHROW(sclt::validate_theta(2.0));
}

TEST_CASE("config validation enforces scale floors and ladder shapes") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(1);
    cfg.replicates = 99;
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);
    cfg = small_fixed_cfg(1);
    cfg.n = 15;
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);

    cfg = small_fixed_cfg(1);
    cfg.kind = sclt::ExperimentKind::variance_convergence;
    cfg.n = 96;  // not 64 * 2^k
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);
    cfg.n = 256;
    REQUIRE_NOTHROW(sclt::validate_config(cfg));

    cfg = small_fixed_cfg(1);
    cfg.kind = sclt::ExperimentKind::invariance_identity;
    cfg.n = 257;
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);

    cfg = small_fixed_cfg(1);
    cfg.kind = sclt::ExperimentKind::cross_freq;
    cfg.thetas = {2.0, 2.0};
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);

    cfg = small_fixed_cfg(1);
    cfg.kind = sclt::ExperimentKind::variance_convergence;
    cfg.n = 256;
    cfg.samples_path = "/tmp/should_not_matter.csv";
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);

    cfg = small_fixed_cfg(1);
    cfg.tolerances["no_such_knob"] = 1.0;
    REQUIRE_THROWS_AS(sclt::validate_config(cfg), sclt::ConfigError);
}

TEST_CASE("fixed-frequency runs are reproducible and worker-count invariant") {
    const sclt::ExperimentConfig cfg = small_fixed_cfg(5);
    const sclt::Report a = sclt::run_fixed_freq_clt(cfg, 1);
    const sclt::Report b = sclt::run_fixed_freq_clt(cfg, 1);
    const sclt::Report c = sclt::run_fixed_freq_clt(cfg, 3);
    REQUIRE(a.statistics == b.statistics);
    REQUIRE(a.statistics == c.statistics);
    REQUIRE(a.verdicts == c.verdicts);
    const sclt::ExperimentConfig other = small_fixed_cfg(6);
    const sclt::Report d = sclt::run_fixed_freq_clt(other, 1);
    REQUIRE(a.statistics != d.statistics);
}

TEST_CASE("fixed-frequency report carries the advertised keys") {
    const sclt::Report r = sclt::run_fixed_freq_clt(small_fixed_cfg(2), 2);
    REQUIRE(r.kind == "fixed_freq_clt");
    for (const char* key :
         {"th0.theta", "th0.g_half", "th0.mean_re", "th0.mean_im", "th0.var_re",
          "th0.var_im", "th0.corr", "th0.ks_re", "th0.ks_im", "th0.mean_band",
          "th0.corr_band", "th0.ks_band"}) {
        REQUIRE(r.statistics.count(key) == 1);
    }
    for (const char* key : {"th0.mean_re_ok", "th0.mean_im_ok", "th0.var_re_ok",
                            "th0.var_im_ok", "th0.corr_ok", "th0.ks_re_ok",
                            "th0.ks_im_ok"}) {
        REQUIRE(r.verdicts.count(key) == 1);
    }
    REQUIRE(r.statistics.at("th0.g_half") ==
            Catch::Approx(0.5 * (1.25 + std::cos(2.0))).epsilon(1e-14));
}

TEST_CASE("doubling the filter scales variances by four exactly") {
    sclt::ExperimentConfig unit = small_fixed_cfg(7);
    unit.process = sclt::LinearSpec{{1.0}, sclt::Innovation::gaussian};
    sclt::ExperimentConfig doubled = small_fixed_cfg(7);
    doubled.process = sclt::LinearSpec{{2.0}, sclt::Innovation::gaussian};
    const sclt::Report a = sclt::run_fixed_freq_clt(unit, 1);
    const sclt::Report b = sclt::run_fixed_freq_clt(doubled, 1);
    REQUIRE(b.statistics.at("th0.var_re") ==
            Catch::Approx(4.0 * a.statistics.at("th0.var_re")).epsilon(1e-10));
    REQUIRE(b.statistics.at("th0.var_im") ==
            Catch::Approx(4.0 * a.statistics.at("th0.var_im")).epsilon(1e-10));
    // The standardized samples are bit-identical, so the KS distances are too.
    REQUIRE(a.statistics.at("th0.ks_re") == b.statistics.at("th0.ks_re"));
    REQUIRE(a.statistics.at("th0.ks_im") == b.statistics.at("th0.ks_im"));
}

TEST_CASE("gaussian functional falls back to a pilot variance oracle") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(3);
    cfg.process = sclt::GaussianFunctionalSpec{0.5, sclt::Nonlinearity::sign, 0.0};
    cfg.replicates = 100;
    const sclt::Report r = sclt::run_fixed_freq_clt(cfg, 2);
    bool pilot_note = false;
    for (const std::string& note : r.notes) {
        if (note.find("pilot") != std::string::npos) pilot_note = true;
    }
    REQUIRE(pilot_note);
    REQUIRE(r.statistics.at("th0.g_half") > 0.0);
}

TEST_CASE("cross-frequency overload mirrors the config form") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(11);
    cfg.thetas = {1.0, 2.0};
    const sclt::Report a = sclt::run_cross_frequency(cfg, 1);
    sclt::ExperimentConfig bare = small_fixed_cfg(11);
    bare.thetas = {};
    const sclt::Report b = sclt::run_cross_frequency(bare, 1.0, 2.0, 1);
    REQUIRE(a.statistics == b.statistics);
    for (const char* key : {"corr.re1_re2", "corr.re1_im2", "corr.im1_re2",
                            "corr.im1_im2", "corr.re1_im1", "corr.re2_im2"}) {
        REQUIRE(a.statistics.count(key) == 1);
    }
    REQUIRE(a.verdicts.size() == 4);  // only the cross pairs are gated
}

TEST_CASE("annealed runs require a closed-form limit and stay reproducible") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(13);
    cfg.thetas = {};
    cfg.replicates = 300;
    const sclt::Report a = sclt::run_annealed(cfg, 3);
    const sclt::Report b = sclt::run_annealed(cfg, 1);
    REQUIRE(a.statistics == b.statistics);
    REQUIRE(a.statistics.count("ks") == 1);
    REQUIRE(a.statistics.count("ks_band") == 1);
    REQUIRE(std::abs(a.statistics.at("mean")) <= 0.2);

    cfg.process = sclt::GaussianFunctionalSpec{0.3, sclt::Nonlinearity::sign, 0.0};
    REQUIRE_THROWS_AS(sclt::run_annealed(cfg, 1), sclt::ConfigError);
}

TEST_CASE("periodogram rejects frequencies where the limit vanishes") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(17);
    cfg.process = sclt::LinearSpec{{1.0, 0.0, 1.0}, sclt::Innovation::gaussian};
    cfg.thetas = {0.5 * sclt::kPi};  // transfer function zero
    REQUIRE_THROWS_WITH(sclt::run_periodogram_chi2(cfg, 1),
                        Catch::Matchers::ContainsSubstring("degenerate frequency"));
    cfg.thetas = {2.0};
    REQUIRE_NOTHROW(sclt::run_periodogram_chi2(cfg, 1));
}

TEST_CASE("zero paths give a zero invariance functional row") {
    const std::vector<double> zeros(64, 0.0);
    const std::vector<double> row = sclt::detail::invariance_max_sq_row(zeros, 16);
    REQUIRE(row.size() == 15);
    for (double v : row) REQUIRE(v == 0.0);
}

TEST_CASE("invariance functional row matches the signed max-prefix definition") {
    const std::vector<double> x = {0.5, -1.0, 2.0, 0.25, -0.75};
    const int n_grid = 8;
    const std::vector<double> row = sclt::detail::invariance_max_sq_row(x, n_grid);
    for (int j = 1; j < n_grid; ++j) {
        const double theta = sclt::kTwoPi * j / n_grid;
        // Independent evaluation: running signed maximum of the cosine sums,
        // candidates m = 1..n only.
        double sum = 0.0;
        double best = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            sum += x[k] * std::cos(static_cast<double>(k + 1) * theta);
            if (k == 0 || sum > best) best = sum;
        }
        REQUIRE(row[static_cast<std::size_t>(j - 1)] ==
                Catch::Approx(best * best).margin(1e-12));
    }
}

TEST_CASE("invariance report is deterministic and notes the origin exclusion") {
    sclt::ExperimentConfig cfg;
    cfg.process = sclt::preset_iid_gauss();
    cfg.n = 128;
    cfg.replicates = 100;
    cfg.n_grid = 16;
    cfg.master_seed = 3;
    const sclt::Report a = sclt::run_invariance_identity(cfg, 2);
    const sclt::Report b = sclt::run_invariance_identity(cfg, 1);
    REQUIRE(a.statistics == b.statistics);
    REQUIRE(a.statistics.count("ratio") == 1);
    REQUIRE(a.statistics.at("c0") == 1.0);
    bool noted = false;
    for (const std::string& note : a.notes) {
        if (note.find("theta=0") != std::string::npos) noted = true;
    }
    REQUIRE(noted);
}

TEST_CASE("variance ladder matches exact values at small scale") {
    sclt::ExperimentConfig cfg;
    cfg.process = sclt::preset_ma1();
    cfg.n = 256;
    cfg.replicates = 400;
    cfg.thetas = {2.0};
    cfg.master_seed = 1;
    const sclt::Report r = sclt::run_variance_convergence(cfg, 2);
    for (const char* key : {"th0.n64.mc", "th0.n64.se", "th0.n64.cesaro",
                            "th0.n128.mc", "th0.n256.mc", "th0.gap_first",
                            "th0.gap_last"}) {
        REQUIRE(r.statistics.count(key) == 1);
    }
    REQUIRE(r.verdicts.at("th0.gap_shrinks_ok"));
    // Exact finite-n values for the two-term filter.
    REQUIRE(r.statistics.at("th0.n64.cesaro") ==
            Catch::Approx(1.25 + 2.0 * (1.0 - 1.0 / 64.0) * 0.5 * std::cos(2.0))
                .epsilon(1e-12));

    cfg.process = sclt::GaussianFunctionalSpec{0.4, sclt::Nonlinearity::cube, 0.0};
    REQUIRE_THROWS_AS(sclt::run_variance_convergence(cfg, 1), sclt::ConfigError);
}

TEST_CASE("diagnostics ladder reports constant predictor norm for ma1") {
    sclt::ExperimentConfig cfg;
    cfg.process = sclt::preset_ma1();
    cfg.n = 1024;
    cfg.thetas = {2.0};
    const sclt::Report r = sclt::run_regularity_diag(cfg, 1);
    REQUIRE(r.statistics.at("th0.n16.norm") == Catch::Approx(0.25).margin(1e-13));
    REQUIRE(r.statistics.at("th0.n1024.norm") == Catch::Approx(0.25).margin(1e-13));
    REQUIRE(r.verdicts.at("th0.quarter_ok"));
    REQUIRE(r.verdicts.at("th0.linear_decay_ok"));
}

TEST_CASE("diagnostics ladder bounds the chain predictor norm") {
    sclt::ExperimentConfig cfg;
    cfg.process = sclt::preset_two_state(0.25);
    cfg.n = 1024;
    cfg.thetas = {0.5 * sclt::kPi};
    const sclt::Report r = sclt::run_regularity_diag(cfg, 1);
    REQUIRE(r.statistics.at("th0.bound") == Catch::Approx(4.0).margin(1e-12));
    REQUIRE(r.verdicts.at("th0.bound_ok"));
    REQUIRE(r.verdicts.at("th0.quarter_ok"));
}

TEST_CASE("sample export writes the documented csv layout") {
    const std::string path = "/tmp/sclt_test_samples.csv";
    std::remove(path.c_str());
    sclt::ExperimentConfig cfg = small_fixed_cfg(19);
    cfg.replicates = 100;
    cfg.samples_path = path;
    const sclt::Report r = sclt::run_fixed_freq_clt(cfg, 2);
    REQUIRE(r.samples_written == path);
    std::istringstream is(slurp(path));
    std::string line;
    std::getline(is, line);
    REQUIRE(line == "replicate,theta,re,im,periodogram");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        double rep, theta, re, im, pg;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &rep, &theta, &re,
                            &im, &pg) == 5);
        REQUIRE(pg == Catch::Approx((re * re + im * im) / (sclt::kTwoPi * 256.0))
                          .epsilon(1e-12));
    }
    REQUIRE(rows == 100);
    std::remove(path.c_str());
}

TEST_CASE("samples are byte-identical across worker counts") {
    const std::string p1 = "/tmp/sclt_test_samples_w1.csv";
    const std::string p4 = "/tmp/sclt_test_samples_w4.csv";
    sclt::ExperimentConfig cfg = small_fixed_cfg(23);
    cfg.replicates = 100;
    cfg.samples_path = p1;
    sclt::run_fixed_freq_clt(cfg, 1);
    cfg.samples_path = p4;
    sclt::run_fixed_freq_clt(cfg, 4);
    REQUIRE(slurp(p1) == slurp(p4));
    std::remove(p1.c_str());
    std::remove(p4.c_str());
}

TEST_CASE("annealed frequency draws avoid the degenerate points") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(29);
    cfg.thetas = {};
    cfg.replicates = 500;
    cfg.n = 64;
    const std::string path = "/tmp/sclt_test_annealed.csv";
    cfg.samples_path = path;
    sclt::run_annealed(cfg, 2);
    std::istringstream is(slurp(path));
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double rep, theta, re, im, pg;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &rep, &theta, &re,
                            &im, &pg) == 5);
        REQUIRE(theta > 1e-6);
        REQUIRE(theta < sclt::kTwoPi - 1e-6);
        REQUIRE(std::abs(theta - sclt::kPi) > 1e-6);
    }
    std::remove(path.c_str());
}

TEST_CASE("experiment dispatch requires a kind") {
    sclt::ExperimentConfig cfg = small_fixed_cfg(31);
    REQUIRE_THROWS_AS(sclt::run_experiment(cfg, 1), sclt::ConfigError);
    cfg.kind = sclt::ExperimentKind::fixed_freq_clt;
    REQUIRE_NOTHROW(sclt::run_experiment(cfg, 1));
}
