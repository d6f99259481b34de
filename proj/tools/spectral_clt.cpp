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

// Command-line front end. Exit codes: 0 success (all verdicts pass),
// 1 experiment ran but a verdict failed, 2 configuration or usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sclt/acceptance.hpp"
#include "sclt/config.hpp"
#include "sclt/experiments.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::uint64_t seed = 0;
    int workers = 1;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
};

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--override", opts.overrides,
                    "dotted-path config override key=value (repeatable)");
    opts.out_opt = cmd->add_option("--out", opts.out_path, "output path (default stdout)");
    opts.seed_opt = cmd->add_option("--seed", opts.seed, "master seed override");
    cmd->add_option("--workers", opts.workers,
                    "worker threads, 0 = hardware concurrency (default 1)")
        ->envname("SPECTRAL_CLT_WORKERS");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw sclt::ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw sclt::ConfigError("cannot open output path: " + path);
    os << text;
}

sclt::ExperimentConfig build_config(const CommonOpts& opts,
                                    std::optional<sclt::ExperimentKind> forced_kind) {
    std::string text = "{}";
    if (!opts.config_path.empty()) text = read_file(opts.config_path);
    nlohmann::json doc = sclt::load_config_document(text);
    for (const std::string& kv : opts.overrides) sclt::apply_override_to_json(doc, kv);
    if (forced_kind.has_value()) {
        const std::string tag = sclt::kind_tag(*forced_kind);
        if (doc.contains("kind") && doc["kind"].is_string() &&
            doc["kind"].get<std::string>() != tag) {
            throw sclt::ConfigError("config kind '" + doc["kind"].get<std::string>() +
                                    "' does not match subcommand '" + tag + "'");
        }
        doc["kind"] = tag;
    }
    sclt::ExperimentConfig cfg = sclt::config_from_json(doc);
    if (opts.seed_opt != nullptr && opts.seed_opt->count() > 0) {
        cfg.master_seed = opts.seed;
    }
    if (opts.out_opt != nullptr && opts.out_opt->count() > 0) {
        cfg.out_path = opts.out_path;
    }
    return cfg;
}

int run_experiment_command(const CommonOpts& opts, sclt::ExperimentKind kind) {
    const sclt::ExperimentConfig cfg = build_config(opts, kind);
    const int workers = sclt::resolve_workers(opts.workers);
    const sclt::Report report = sclt::run_experiment(cfg, workers);
    write_text(cfg.out_path, sclt::report_to_json(report, cfg).dump(2) + "\n");
    std::cerr << report.kind << ": " << (report.all_pass() ? "PASS" : "FAIL") << " ("
              << report.verdicts.size() << " checks)\n";
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral_clt: stationary-process Fourier transforms, closed-form "
                 "spectral limits, and Monte Carlo checks of their limit laws"};
    app.require_subcommand(1);

    CommonOpts generate_opts;
    std::uint64_t generate_replicate = 0;
    CLI::App* cmd_generate =
        app.add_subcommand("generate", "simulate one path, write index,value CSV");
    add_common_options(cmd_generate, generate_opts);
    cmd_generate->add_option("--replicate", generate_replicate,
                             "replicate id to generate (default 0)");

    CommonOpts spectrum_opts;
    CLI::App* cmd_spectrum = app.add_subcommand(
        "spectrum", "closed-form spectral limit on a uniform grid, theta,g CSV");
    add_common_options(cmd_spectrum, spectrum_opts);

    struct ExperimentCommand {
        const char* name;
        const char* help;
        sclt::ExperimentKind kind;
        CommonOpts opts;
        CLI::App* cmd = nullptr;
    };
    std::vector<ExperimentCommand> experiment_commands = {
        {"clt", "per-frequency limit-law check of S_n(theta)/sqrt(n)",
         sclt::ExperimentKind::fixed_freq_clt, {}, nullptr},
        {"cross", "decorrelation check across two frequencies",
         sclt::ExperimentKind::cross_freq, {}, nullptr},
        {"annealed", "mixture limit law at a uniformly drawn frequency",
         sclt::ExperimentKind::annealed, {}, nullptr},
        {"periodogram", "periodogram chi-squared(2) limit check",
         sclt::ExperimentKind::periodogram_chi2, {}, nullptr},
        {"invariance", "path-maximum identity over a frequency grid",
         sclt::ExperimentKind::invariance_identity, {}, nullptr},
        {"variance", "E|S_n|^2/n convergence ladder against exact values",
         sclt::ExperimentKind::variance_convergence, {}, nullptr},
        {"diag", "predictor-norm regularity diagnostics",
         sclt::ExperimentKind::regularity_diag, {}, nullptr},
    };
    for (ExperimentCommand& ec : experiment_commands) {
        ec.cmd = app.add_subcommand(ec.name, ec.help);
        add_common_options(ec.cmd, ec.opts);
    }

    CommonOpts suite_opts;
    bool suite_quick = false;
    CLI::App* cmd_suite =
        app.add_subcommand("suite", "full release battery, one line per check");
    add_common_options(cmd_suite, suite_opts);
    cmd_suite->add_flag("--quick", suite_quick, "reduced Monte Carlo scales");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_generate->parsed()) {
            const sclt::ExperimentConfig cfg = build_config(generate_opts, std::nullopt);
            const sclt::Path path = sclt::gen_path(
                cfg.process, cfg.n, sclt::derive_seed(cfg.master_seed, generate_replicate));
            std::ostringstream csv;
            sclt::write_path_csv(csv, path);
            write_text(cfg.out_path, csv.str());
            return 0;
        }
        if (cmd_spectrum->parsed()) {
            const sclt::ExperimentConfig cfg = build_config(spectrum_opts, std::nullopt);
            std::ostringstream csv;
            sclt::write_spectrum_csv(csv, cfg.process, cfg.grid);
            write_text(cfg.out_path, csv.str());
            return 0;
        }
        for (const ExperimentCommand& ec : experiment_commands) {
            if (ec.cmd->parsed()) return run_experiment_command(ec.opts, ec.kind);
        }
        if (cmd_suite->parsed()) {
            sclt::BatteryOptions battery;
            battery.quick = suite_quick;
            battery.workers = sclt::resolve_workers(suite_opts.workers);
            if (suite_opts.seed_opt->count() > 0) battery.seed_base = suite_opts.seed;
            const std::vector<sclt::CriterionResult> results =
                sclt::run_acceptance_battery(battery, std::cout);
            if (suite_opts.out_opt->count() > 0) {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const sclt::CriterionResult& r : results) {
                    nlohmann::ordered_json item;
                    item["id"] = r.id;
                    item["name"] = r.name;
                    item["pass"] = r.pass;
                    item["detail"] = r.detail;
                    arr.push_back(item);
                }
                write_text(suite_opts.out_path, arr.dump(2) + "\n");
            }
            for (const sclt::CriterionResult& r : results) {
                if (!r.pass) return 1;
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
}
