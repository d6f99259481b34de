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

#ifndef SCLT_PROCESS_HPP
#define SCLT_PROCESS_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sclt/common.hpp"
#include "sclt/fourier.hpp"
#include "sclt/rng.hpp"

namespace sclt {

enum class Innovation { gaussian, rademacher };

/// Causal finite filter X_k = sum_{j=0}^{J} a_j eps_{k-j} driven by i.i.d.
/// mean-0 variance-1 innovations.
struct LinearSpec {
    std::vector<double> coeffs;  // a_0..a_J
    Innovation innovation = Innovation::gaussian;
};

/// Finite-state reversible chain xi_k with observable X_k = f(xi_k).
struct MarkovSpec {
    std::vector<std::vector<double>> transition;  // row-stochastic Q
    std::vector<double> stationary;               // pi
    std::vector<double> f;                        // centered observable
};

enum class Nonlinearity { sign, cube };

/// Instantaneous nonlinearity of a stationary AR(1) Gaussian sequence:
/// Y_k = phi Y_{k-1} + eps_k, X_k = h(Y_k) - centering.
struct GaussianFunctionalSpec {
    double phi = 0.0;
    Nonlinearity h = Nonlinearity::sign;
    // Mean of h under the stationary N(0, 1/(1-phi^2)) law; both supported h
    // are odd functions of a symmetric variable, so the analytic value is 0.
    double centering = 0.0;
};

using ProcessSpec = std::variant<LinearSpec, MarkovSpec, GaussianFunctionalSpec>;

/// One finite realization X_1..X_n plus the provenance needed to regenerate
/// it bit-exactly.
struct Path {
    std::vector<double> values;
    std::shared_ptr<const ProcessSpec> spec;
    std::uint64_t seed = 0;

    std::size_t size() const { return values.size(); }
};

// ---------------------------------------------------------------------------
// Validation. Each violated invariant produces a distinct, named error.
// ---------------------------------------------------------------------------

inline void validate(const LinearSpec& spec) {
    if (spec.coeffs.empty()) {
        throw ConfigError("linear spec: coefficient list must be nonempty");
    }
    bool any_nonzero = false;
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j) {
        if (!std::isfinite(spec.coeffs[j])) {
            throw ConfigError("linear spec: coefficient " + std::to_string(j) +
                              " is not finite");
        }
        if (spec.coeffs[j] != 0.0) any_nonzero = true;
    }
    if (!any_nonzero) {
        throw ConfigError("linear spec: at least one coefficient must be nonzero");
    }
}

inline void validate(const MarkovSpec& spec) {
    const std::size_t s = spec.transition.size();
    if (s == 0) throw ConfigError("markov spec: transition matrix must be nonempty");
    if (s > 64) {
        throw ConfigError("markov spec: at most 64 states supported, got " +
                          std::to_string(s));
    }
    for (std::size_t i = 0; i < s; ++i) {
        if (spec.transition[i].size() != s) {
            throw ConfigError("markov spec: transition row " + std::to_string(i) +
                              " has length " + std::to_string(spec.transition[i].size()) +
                              ", expected " + std::to_string(s));
        }
        double row_sum = 0.0;
        for (double q : spec.transition[i]) {
            if (!(q >= 0.0) || !std::isfinite(q)) {
                throw ConfigError("markov spec: transition row " + std::to_string(i) +
                                  " has a negative or non-finite entry");
            }
            row_sum += q;
        }
        if (std::abs(row_sum - 1.0) > 1e-12) {
            throw ConfigError("markov spec: transition row " + std::to_string(i) +
                              " sums to " + std::to_string(row_sum) +
                              ", expected 1 within 1e-12");
        }
    }
    if (spec.stationary.size() != s || spec.f.size() != s) {
        throw ConfigError("markov spec: stationary vector and observable must have "
                          "one entry per state");
    }
    double pi_sum = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        if (!(spec.stationary[i] > 0.0)) {
            throw ConfigError("markov spec: stationary probability " + std::to_string(i) +
                              " must be positive");
        }
        pi_sum += spec.stationary[i];
    }
    if (std::abs(pi_sum - 1.0) > 1e-12) {
        throw ConfigError("markov spec: stationary vector sums to " +
                          std::to_string(pi_sum) + ", expected 1 within 1e-12");
    }
    for (std::size_t j = 0; j < s; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < s; ++i) col += spec.stationary[i] * spec.transition[i][j];
        if (std::abs(col - spec.stationary[j]) > 1e-10) {
            throw ConfigError("markov spec: stationary vector is not invariant "
                              "(|pi Q - pi| > 1e-10 at state " + std::to_string(j) + ")");
        }
    }
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double flow_ij = spec.stationary[i] * spec.transition[i][j];
            const double flow_ji = spec.stationary[j] * spec.transition[j][i];
            if (std::abs(flow_ij - flow_ji) > 1e-10) {
                throw ConfigError("markov spec: detailed balance violated between states " +
                                  std::to_string(i) + " and " + std::to_string(j) +
                                  " (|pi_i Q_ij - pi_j Q_ji| > 1e-10)");
            }
        }
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < s; ++i) mean += spec.stationary[i] * spec.f[i];
    if (std::abs(mean) > 1e-10) {
        throw ConfigError("markov spec: observable is not centered "
                          "(sum pi_i f_i = " + std::to_string(mean) +
                          ", expected 0 within 1e-10)");
    }
}

inline void validate(const GaussianFunctionalSpec& spec) {
    if (!(std::abs(spec.phi) < 1.0)) {
        throw ConfigError("gaussian functional spec: ar1 coefficient must satisfy |phi| < 1");
    }
    // Analytic mean of both supported nonlinearities is 0 (odd h, symmetric law).
    if (std::abs(spec.centering) > 1e-12) {
        throw ConfigError("gaussian functional spec: centering must equal the analytic "
                          "mean of h (0 for sign and cube)");
    }
}

inline void validate(const ProcessSpec& spec) {
    std::visit([](const auto& s) { validate(s); }, spec);
}

// ---------------------------------------------------------------------------
// Generators. Pure functions of (spec, n, seed).
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> sample_innovations(Innovation kind, std::uint64_t seed,
                                              std::size_t count) {
    return kind == Innovation::gaussian ? sample_standard_normals(seed, count)
                                        : sample_rademacher(seed, count);
}

/// Direct convolution X_k = sum_j a_j eps_{k-j}; eps holds eps_{1-J}..eps_n.
inline std::vector<double> filter_direct(const std::vector<double>& coeffs,
                                         const std::vector<double>& eps, std::size_t n) {
    const std::size_t jmax = coeffs.size() - 1;
    std::vector<double> out(n);
    for (std::size_t k = 1; k <= n; ++k) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j <= jmax; ++j) {
            acc += static_cast<long double>(coeffs[j]) *
                   static_cast<long double>(eps[k - 1 + jmax - j]);
        }
        out[k - 1] = static_cast<double>(acc);
    }
    return out;
}

/// Same filter via FFT linear convolution; used when the direct cost
/// (J+1)*n would dominate. Accuracy ~1e-12 relative, which is irrelevant
/// against Monte Carlo noise; determinism holds because the route is a pure
/// function of (J, n).
inline std::vector<double> filter_fft(const std::vector<double>& coeffs,
                                      const std::vector<double>& eps, std::size_t n) {
    const std::size_t jmax = coeffs.size() - 1;
    const std::size_t full = coeffs.size() + eps.size() - 1;
    std::size_t size = 1;
    while (size < full) size <<= 1;
    std::vector<Complex> fa(size, Complex(0.0, 0.0));
    std::vector<Complex> fb(size, Complex(0.0, 0.0));
    for (std::size_t j = 0; j < coeffs.size(); ++j) fa[j] = Complex(coeffs[j], 0.0);
    for (std::size_t t = 0; t < eps.size(); ++t) fb[t] = Complex(eps[t], 0.0);
    fft_pos_inplace(fa);
    fft_pos_inplace(fb);
    for (std::size_t i = 0; i < size; ++i) fa[i] = std::conj(fa[i] * fb[i]);
    fft_pos_inplace(fa);
    std::vector<double> out(n);
    const double inv = 1.0 / static_cast<double>(size);
    // fa now holds the forward transform of conj(A*B); conjugating and
    // scaling by 1/size inverts the transform, and only the real part is
    // needed. conv[m] = sum_j a_j eps[m-j]; X_k sits at m = k - 1 + jmax.
    for (std::size_t k = 1; k <= n; ++k) {
        out[k - 1] = fa[k - 1 + jmax].real() * inv;
    }
    return out;
}

inline constexpr std::size_t kDirectFilterOpsLimit = 4'000'000;

}  // namespace detail

/// X_k = sum_{j=0}^{J} a_j eps_{k-j}, k = 1..n, with the J pre-period
/// innovations drawn first so the output is exactly stationary (no burn-in).
inline Path gen_linear(const LinearSpec& spec, std::size_t n, std::uint64_t seed) {
    validate(spec);
    if (n == 0) throw ConfigError("gen_linear: n must be positive");
    const std::size_t jmax = spec.coeffs.size() - 1;
    const std::vector<double> eps =
        detail::sample_innovations(spec.innovation, seed, n + jmax);
    Path path;
    path.values = (spec.coeffs.size() * n <= detail::kDirectFilterOpsLimit)
                      ? detail::filter_direct(spec.coeffs, eps, n)
                      : detail::filter_fft(spec.coeffs, eps, n);
    path.spec = std::make_shared<const ProcessSpec>(spec);
    path.seed = seed;
    return path;
}

/// xi_0 ~ pi (exact stationarity), xi_k from row xi_{k-1} by inverse CDF on
/// the uniform stream; X_k = f(xi_k) for k = 1..n.
inline Path gen_markov(const MarkovSpec& spec, std::size_t n, std::uint64_t seed) {
    validate(spec);
    if (n == 0) throw ConfigError("gen_markov: n must be positive");
    const std::size_t s = spec.transition.size();
    std::vector<double> pi_cdf(s);
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
        acc += spec.stationary[i];
        pi_cdf[i] = acc;
    }
    std::vector<std::vector<double>> row_cdf(s, std::vector<double>(s));
    for (std::size_t i = 0; i < s; ++i) {
        acc = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            acc += spec.transition[i][j];
            row_cdf[i][j] = acc;
        }
    }
    const auto pick = [s](const std::vector<double>& cdf, double u) {
        for (std::size_t j = 0; j + 1 < s; ++j) {
            if (u < cdf[j]) return j;
        }
        return s - 1;
    };
    SplitMix64 rng(seed);
    std::size_t state = pick(pi_cdf, rng.next_double());
    Path path;
    path.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        state = pick(row_cdf[state], rng.next_double());
        path.values[k] = spec.f[state];
    }
    path.spec = std::make_shared<const ProcessSpec>(spec);
    path.seed = seed;
    return path;
}

/// Y_0 ~ N(0, 1/(1-phi^2)) (exact stationary start), Y_k = phi Y_{k-1} +
/// eps_k; X_k = h(Y_k) - centering for k = 1..n.
inline Path gen_gaussian_functional(const GaussianFunctionalSpec& spec, std::size_t n,
                                    std::uint64_t seed) {
    validate(spec);
    if (n == 0) throw ConfigError("gen_gaussian_functional: n must be positive");
    NormalSampler sampler(seed);
    const double sigma0 = 1.0 / std::sqrt(1.0 - spec.phi * spec.phi);
    double y = sigma0 * sampler.next();
    Path path;
    path.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        y = spec.phi * y + sampler.next();
        const double h = spec.h == Nonlinearity::sign ? (y < 0.0 ? -1.0 : (y > 0.0 ? 1.0 : 0.0))
                                                      : y * y * y;
        path.values[k] = h - spec.centering;
    }
    path.spec = std::make_shared<const ProcessSpec>(spec);
    path.seed = seed;
    return path;
}

/// Dispatch over the spec variant.
inline Path gen_path(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
    return std::visit(
        [&](const auto& s) -> Path {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LinearSpec>) return gen_linear(s, n, seed);
            if constexpr (std::is_same_v<T, MarkovSpec>) return gen_markov(s, n, seed);
            if constexpr (std::is_same_v<T, GaussianFunctionalSpec>) {
                return gen_gaussian_functional(s, n, seed);
            }
        },
        spec);
}

// ---------------------------------------------------------------------------
// Stock specs.
// ---------------------------------------------------------------------------

/// Coefficients a_0 = a_1 = 1, a_j = j^{-1/2}/ln j for 2 <= j <= J. The
/// square-summable tail beyond J carries energy ~ 1/ln J (integral bound),
/// reported by slow_decay_tail_energy.
inline std::vector<double> slow_decay_coeffs(std::size_t J) {
    if (J < 2) throw ConfigError("slow decay coefficients: truncation J must be >= 2");
    std::vector<double> a(J + 1);
    a[0] = 1.0;
    a[1] = 1.0;
    for (std::size_t j = 2; j <= J; ++j) {
        const double dj = static_cast<double>(j);
        a[j] = 1.0 / (std::sqrt(dj) * std::log(dj));
    }
    return a;
}

/// Approximate truncation energy sum_{j>J} a_j^2 ≈ integral_J^inf dx/(x ln^2 x)
/// = 1/ln J.
inline double slow_decay_tail_energy(std::size_t J) {
    return 1.0 / std::log(static_cast<double>(J));
}

inline LinearSpec preset_iid_gauss() { return LinearSpec{{1.0}, Innovation::gaussian}; }

inline LinearSpec preset_ma1() { return LinearSpec{{1.0, 0.5}, Innovation::gaussian}; }

inline LinearSpec preset_slow_decay(std::size_t J = 100'000) {
    return LinearSpec{slow_decay_coeffs(J), Innovation::gaussian};
}

/// Symmetric two-state chain with switch probability p, observable (+1, -1).
/// Second transition eigenvalue: 1 - 2p.
inline MarkovSpec preset_two_state(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("two_state preset: switch probability must lie in (0, 1)");
    }
    MarkovSpec spec;
    spec.transition = {{1.0 - p, p}, {p, 1.0 - p}};
    spec.stationary = {0.5, 0.5};
    spec.f = {1.0, -1.0};
    return spec;
}

// ---------------------------------------------------------------------------
// Export.
// ---------------------------------------------------------------------------

/// Shortest-exact decimal formatting used by every CSV writer; %.17g strings
/// round-trip doubles and are locale-independent under the default C locale.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_path_csv(std::ostream& os, const Path& path) {
    os << "index,value\n";
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        os << (k + 1) << ',' << format_double(path.values[k]) << '\n';
    }
}

}  // namespace sclt

#endif  // SCLT_PROCESS_HPP
