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

#ifndef SCLT_CONFIG_HPP
#define SCLT_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sclt/common.hpp"
#include "sclt/experiments.hpp"
#include "sclt/process.hpp"
#include "sclt/spectral.hpp"

// JSON configuration parsing (strict: unknown keys are errors), dotted-path
// overrides, and report serialization.

namespace sclt {

namespace detail {

inline void check_keys(const nlohmann::json& obj,
                       std::initializer_list<const char*> allowed,
                       const std::string& where) {
    std::vector<std::string> unknown;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (const char* name : allowed) {
            if (it.key() == name) {
                found = true;
                break;
            }
        }
        if (!found) unknown.push_back(it.key());
    }
    if (unknown.empty()) return;
    std::sort(unknown.begin(), unknown.end());
    std::string msg = "unknown key(s) in " + where + ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        if (i > 0) msg += ", ";
        msg += unknown[i];
    }
    throw ConfigError(msg);
}

inline double get_finite_double(const nlohmann::json& value, const std::string& where) {
    if (!value.is_number()) throw ConfigError(where + " must be a number");
    const double x = value.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where + " must be finite");
    return x;
}

inline std::uint64_t get_nonneg_integer(const nlohmann::json& value,
                                        const std::string& where) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(value.get<std::int64_t>());
    }
    throw ConfigError(where + " must be a nonnegative integer");
}

inline std::vector<double> get_double_array(const nlohmann::json& value,
                                            const std::string& where) {
    if (!value.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(get_finite_double(value[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

/// Solves pi Q = pi, sum(pi) = 1 by Gaussian elimination with partial
/// pivoting on (Q^T - I) with the last row replaced by the normalization.
inline std::vector<double> solve_stationary(const std::vector<std::vector<double>>& q) {
    const std::size_t m = q.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i + 1 < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) a[i][j] = q[j][i] - (i == j ? 1.0 : 0.0);
    }
    for (std::size_t j = 0; j < m; ++j) a[m - 1][j] = 1.0;
    a[m - 1][m] = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < m; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        }
        if (std::abs(a[pivot][col]) < 1e-12) {
            throw ConfigError("transition matrix has no unique stationary distribution "
                              "(chain is reducible)");
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t row = 0; row < m; ++row) {
            if (row == col) continue;
            const double factor = a[row][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t j = col; j <= m; ++j) a[row][j] -= factor * a[col][j];
        }
    }
    std::vector<double> pi(m);
    for (std::size_t i = 0; i < m; ++i) {
        pi[i] = a[i][m] / a[i][i];
        if (!(pi[i] > 0.0)) {
            throw ConfigError("stationary probability of state " + std::to_string(i) +
                              " is not positive (chain is reducible)");
        }
    }
    return pi;
}

}  // namespace detail

/// Parses a process preset name. Recognized: "iid_gauss", "ma1", "slow_decay",
/// "two_state(p)" with p in (0, 1).
inline ProcessSpec parse_process_preset(const std::string& name,
                                        std::size_t* slow_decay_J) {
    if (slow_decay_J != nullptr) *slow_decay_J = 0;
    if (name == "iid_gauss") return preset_iid_gauss();
    if (name == "ma1") return preset_ma1();
    if (name == "slow_decay") {
        const LinearSpec spec = preset_slow_decay();
        if (slow_decay_J != nullptr) *slow_decay_J = spec.coeffs.size() - 1;
        return spec;
    }
    const std::string prefix = "two_state(";
    if (name.size() > prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0 &&
        name.back() == ')') {
        const std::string arg = name.substr(prefix.size(), name.size() - prefix.size() - 1);
        double p = 0.0;
        std::size_t used = 0;
        try {
            p = std::stod(arg, &used);
        } catch (const std::exception&) {
            throw ConfigError("two_state preset: cannot parse flip probability from '" +
                              arg + "'");
        }
        if (used != arg.size()) {
            throw ConfigError("two_state preset: cannot parse flip probability from '" +
                              arg + "'");
        }
        if (!(p > 0.0 && p < 1.0)) {
            throw ConfigError("two_state preset requires flip probability in (0, 1), got " +
                              format_double(p));
        }
        return preset_two_state(p);
    }
    throw ConfigError("unknown process preset: " + name +
                      " (expected iid_gauss, ma1, slow_decay, or two_state(p))");
}

inline ProcessSpec parse_process_json(const nlohmann::json& obj,
                                      std::size_t* slow_decay_J) {
    if (slow_decay_J != nullptr) *slow_decay_J = 0;
    if (obj.is_string()) return parse_process_preset(obj.get<std::string>(), slow_decay_J);
    if (!obj.is_object()) throw ConfigError("process must be a preset name or an object");
    if (!obj.contains("kind") || !obj["kind"].is_string()) {
        throw ConfigError("process object requires a string 'kind'");
    }
    const std::string kind = obj["kind"].get<std::string>();
    if (kind == "linear") {
        detail::check_keys(obj, {"kind", "coeffs", "named", "J", "innovation"}, "process");
        LinearSpec spec;
        const bool has_coeffs = obj.contains("coeffs");
        const bool has_named = obj.contains("named");
        if (has_coeffs == has_named) {
            throw ConfigError("linear process requires exactly one of 'coeffs' or 'named'");
        }
        if (has_coeffs) {
            if (obj.contains("J")) throw ConfigError("'J' only applies to named filters");
            spec.coeffs = detail::get_double_array(obj["coeffs"], "process.coeffs");
        } else {
            const std::string named = obj["named"].get<std::string>();
            if (named != "slow_decay") {
                throw ConfigError("unknown named filter: " + named);
            }
            std::size_t j_trunc = 100'000;
            if (obj.contains("J")) {
                j_trunc = static_cast<std::size_t>(
                    detail::get_nonneg_integer(obj["J"], "process.J"));
            }
            spec.coeffs = slow_decay_coeffs(j_trunc);
            if (slow_decay_J != nullptr) *slow_decay_J = j_trunc;
        }
        if (obj.contains("innovation")) {
            const std::string innov = obj["innovation"].get<std::string>();
            if (innov == "gaussian") {
                spec.innovation = Innovation::gaussian;
            } else if (innov == "rademacher") {
                spec.innovation = Innovation::rademacher;
            } else {
                throw ConfigError("unknown innovation: " + innov +
                                  " (expected gaussian or rademacher)");
            }
        }
        validate(spec);
        return spec;
    }
    if (kind == "markov") {
        detail::check_keys(obj, {"kind", "transition", "stationary", "f"}, "process");
        if (!obj.contains("transition") || !obj["transition"].is_array()) {
            throw ConfigError("markov process requires a 'transition' matrix");
        }
        if (!obj.contains("f")) throw ConfigError("markov process requires an observable 'f'");
        MarkovSpec spec;
        for (std::size_t i = 0; i < obj["transition"].size(); ++i) {
            spec.transition.push_back(detail::get_double_array(
                obj["transition"][i], "transition row " + std::to_string(i)));
        }
        spec.f = detail::get_double_array(obj["f"], "process.f");
        if (obj.contains("stationary")) {
            spec.stationary = detail::get_double_array(obj["stationary"], "process.stationary");
        } else {
            if (spec.transition.empty()) {
                throw ConfigError("markov transition matrix must be nonempty");
            }
            for (std::size_t i = 0; i < spec.transition.size(); ++i) {
                if (spec.transition[i].size() != spec.transition.size()) {
                    throw ConfigError("markov transition row " + std::to_string(i) +
                                      " has wrong length");
                }
            }
            spec.stationary = detail::solve_stationary(spec.transition);
        }
        validate(spec);
        return spec;
    }
    if (kind == "gaussian_functional") {
        detail::check_keys(obj, {"kind", "phi", "h", "centering"}, "process");
        if (!obj.contains("phi")) throw ConfigError("gaussian_functional requires 'phi'");
        if (!obj.contains("h") || !obj["h"].is_string()) {
            throw ConfigError("gaussian_functional requires a string 'h'");
        }
        GaussianFunctionalSpec spec;
        spec.phi = detail::get_finite_double(obj["phi"], "process.phi");
        const std::string h = obj["h"].get<std::string>();
        if (h == "sign") {
            spec.h = Nonlinearity::sign;
        } else if (h == "cube") {
            spec.h = Nonlinearity::cube;
        } else {
            throw ConfigError("unknown nonlinearity: " + h + " (expected sign or cube)");
        }
        if (obj.contains("centering")) {
            spec.centering = detail::get_finite_double(obj["centering"], "process.centering");
        }
        validate(spec);
        return spec;
    }
    throw ConfigError("unknown process kind: " + kind +
                      " (expected linear, markov, or gaussian_functional)");
}

/// Parses raw JSON text into a document; malformed input reports the byte
/// offset of the failure.
inline nlohmann::json load_config_document(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config is not valid JSON (error at byte " +
                          std::to_string(e.byte) + "): " + e.what());
    }
}

/// Applies a dotted-path override "a.b.c=value" to a config document. The
/// value is parsed as JSON when possible and treated as a string otherwise.
inline void apply_override_to_json(nlohmann::json& doc, const std::string& override_kv) {
    const std::size_t eq = override_kv.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must have the form key=value, got '" + override_kv + "'");
    }
    const std::string path = override_kv.substr(0, eq);
    const std::string value_text = override_kv.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(value_text);
    } catch (const nlohmann::json::parse_error&) {
        value = value_text;  // bare words stay strings
    }
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        const std::string part = path.substr(start, dot - start);
        if (part.empty()) throw ConfigError("override path has an empty segment: " + path);
        if (!node->is_object() && !node->is_null()) {
            throw ConfigError("override path " + path + " traverses a non-object value");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    detail::check_keys(doc,
                       {"kind", "process", "n", "replicates", "thetas", "master_seed",
                        "tolerances", "grid", "n_grid", "out", "samples_csv"},
                       "config");
    ExperimentConfig cfg;
    if (doc.contains("kind")) {
        if (!doc["kind"].is_string()) throw ConfigError("kind must be a string");
        const std::string tag = doc["kind"].get<std::string>();
        const auto kind = kind_from_tag(tag);
        if (!kind.has_value()) {
            throw ConfigError(
                "unknown experiment kind: " + tag +
                " (expected fixed_freq_clt, cross_freq, annealed, periodogram_chi2, "
                "invariance_identity, variance_convergence, or regularity_diag)");
        }
        cfg.kind = kind;
    }
    if (doc.contains("process")) {
        cfg.process = parse_process_json(doc["process"], &cfg.slow_decay_J);
    }

    // Kind-dependent defaults for fields the config leaves out.
    if (cfg.kind.has_value()) {
        switch (*cfg.kind) {
            case ExperimentKind::fixed_freq_clt:
                cfg.n = 4096, cfg.replicates = 2000, cfg.thetas = {2.0};
                break;
            case ExperimentKind::cross_freq:
                cfg.n = 1024, cfg.replicates = 2000, cfg.thetas = {1.0, 2.0};
                break;
            case ExperimentKind::annealed:
                cfg.n = 4096, cfg.replicates = 4000, cfg.thetas = {};
                break;
            case ExperimentKind::periodogram_chi2:
                cfg.n = 1024, cfg.replicates = 2000, cfg.thetas = {2.0};
                break;
            case ExperimentKind::invariance_identity:
                cfg.n = 2048, cfg.replicates = 500, cfg.thetas = {};
                break;
            case ExperimentKind::variance_convergence:
                cfg.n = 4096, cfg.replicates = 2000, cfg.thetas = {2.0};
                break;
            case ExperimentKind::regularity_diag:
                cfg.n = 4096, cfg.replicates = 2000, cfg.thetas = {1.0, 2.0};
                break;
        }
    } else {
        cfg.thetas = {2.0};
    }

    if (doc.contains("n")) {
        cfg.n = static_cast<std::size_t>(detail::get_nonneg_integer(doc["n"], "n"));
    }
    if (doc.contains("replicates")) {
        cfg.replicates =
            static_cast<std::size_t>(detail::get_nonneg_integer(doc["replicates"], "replicates"));
    }
    if (doc.contains("thetas")) {
        cfg.thetas = detail::get_double_array(doc["thetas"], "thetas");
    }
    if (doc.contains("master_seed")) {
        cfg.master_seed = detail::get_nonneg_integer(doc["master_seed"], "master_seed");
    }
    if (doc.contains("grid")) {
        cfg.grid = static_cast<int>(detail::get_nonneg_integer(doc["grid"], "grid"));
        if (cfg.grid < 2) throw ConfigError("grid must be >= 2");
    }
    if (doc.contains("n_grid")) {
        cfg.n_grid = static_cast<int>(detail::get_nonneg_integer(doc["n_grid"], "n_grid"));
    }
    if (doc.contains("tolerances")) {
        if (!doc["tolerances"].is_object()) {
            throw ConfigError("tolerances must be an object of positive numbers");
        }
        for (auto it = doc["tolerances"].begin(); it != doc["tolerances"].end(); ++it) {
            cfg.tolerances[it.key()] =
                detail::get_finite_double(it.value(), "tolerances." + it.key());
        }
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) throw ConfigError("out must be a string path");
        cfg.out_path = doc["out"].get<std::string>();
    }
    if (doc.contains("samples_csv")) {
        if (!doc["samples_csv"].is_string()) {
            throw ConfigError("samples_csv must be a string path");
        }
        cfg.samples_path = doc["samples_csv"].get<std::string>();
    }
    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    return config_from_json(load_config_document(text));
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << is.rdbuf();
    return parse_config(buffer.str());
}

// ---------------------------------------------------------------------------
// Serialization back out.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json process_echo_json(const ProcessSpec& process,
                                                std::size_t slow_decay_J) {
    nlohmann::ordered_json out;
    if (const auto* linear = std::get_if<LinearSpec>(&process)) {
        out["kind"] = "linear";
        if (slow_decay_J > 0) {
            out["named"] = "slow_decay";
            out["J"] = slow_decay_J;
        } else {
            out["coeffs"] = linear->coeffs;
        }
        out["innovation"] =
            linear->innovation == Innovation::gaussian ? "gaussian" : "rademacher";
        return out;
    }
    if (const auto* markov = std::get_if<MarkovSpec>(&process)) {
        out["kind"] = "markov";
        out["transition"] = markov->transition;
        out["stationary"] = markov->stationary;
        out["f"] = markov->f;
        return out;
    }
    const auto& gf = std::get<GaussianFunctionalSpec>(process);
    out["kind"] = "gaussian_functional";
    out["phi"] = gf.phi;
    out["h"] = gf.h == Nonlinearity::sign ? "sign" : "cube";
    return out;
}

inline nlohmann::ordered_json config_echo_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json out;
    if (cfg.kind.has_value()) out["kind"] = kind_tag(*cfg.kind);
    out["process"] = process_echo_json(cfg.process, cfg.slow_decay_J);
    out["n"] = cfg.n;
    out["replicates"] = cfg.replicates;
    out["thetas"] = cfg.thetas;
    out["master_seed"] = cfg.master_seed;
    if (cfg.kind == ExperimentKind::invariance_identity) out["n_grid"] = cfg.n_grid;
    nlohmann::ordered_json tol;
    for (const auto& [name, value] : cfg.tolerances) tol[name] = value;
    out["tolerances"] = tol;
    return out;
}

inline nlohmann::ordered_json report_to_json(const Report& report,
                                             const ExperimentConfig& cfg) {
    nlohmann::ordered_json out;
    out["kind"] = report.kind;
    out["config"] = config_echo_json(cfg);
    nlohmann::ordered_json stats;
    for (const auto& [name, value] : report.statistics) stats[name] = value;
    out["statistics"] = stats;
    nlohmann::ordered_json verdicts;
    for (const auto& [name, ok] : report.verdicts) verdicts[name] = ok;
    out["verdicts"] = verdicts;
    out["pass"] = report.all_pass();
    out["notes"] = report.notes;
    out["samples_written"] = report.samples_written;
    return out;
}

/// Closed-form spectral limit on the uniform grid theta_j = 2 pi j / grid,
/// written as "theta,g" CSV.
inline void write_spectrum_csv(std::ostream& os, const ProcessSpec& process, int grid) {
    const auto model = SpectralModel::try_make(process);
    if (!model) {
        throw ConfigError("spectrum requires a process with a closed-form spectral "
                          "limit (linear or markov)");
    }
    if (grid < 2) throw ConfigError("grid must be >= 2");
    os << "theta,g\n";
    for (int j = 0; j < grid; ++j) {
        const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(grid);
        os << format_double(theta) << ',' << format_double(model->g(theta)) << '\n';
    }
}

}  // namespace sclt

#endif  // SCLT_CONFIG_HPP
