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

#ifndef SCLT_SPECTRAL_HPP
#define SCLT_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sclt/common.hpp"
#include "sclt/fourier.hpp"
#include "sclt/process.hpp"

// Closed-form spectral quantities. Normalization: g(theta) is the limit of
// E|S_n(theta)|^2 / n; the spectral density proper is g(theta)/(2 pi), and
// the autocovariances satisfy c_j = (1/2pi) integral_0^{2pi} g e^{ij theta}.

namespace sclt {

// ---------------------------------------------------------------------------
// Linear (finite-filter) models.
// ---------------------------------------------------------------------------

/// Transfer function A(e^{i theta}) = sum_{j=0}^{J} a_j e^{ij theta},
/// Horner-evaluated in long double.
inline Complex linear_transfer(std::span<const double> coeffs, double theta) {
    if (coeffs.empty()) {
        throw std::invalid_argument("linear_transfer: coefficient list must be nonempty");
    }
    const long double th = static_cast<long double>(theta);
    const long double zr = std::cos(th);
    const long double zi = std::sin(th);
    long double ar = static_cast<long double>(coeffs.back());
    long double ai = 0.0L;
    for (std::size_t j = coeffs.size() - 1; j-- > 0;) {
        const long double nr = ar * zr - ai * zi + static_cast<long double>(coeffs[j]);
        const long double ni = ar * zi + ai * zr;
        ar = nr;
        ai = ni;
    }
    return {static_cast<double>(ar), static_cast<double>(ai)};
}

/// g(theta) = |A(e^{i theta})|^2.
inline double linear_g(std::span<const double> coeffs, double theta) {
    const Complex a = linear_transfer(coeffs, theta);
    return a.real() * a.real() + a.imag() * a.imag();
}

/// Autocovariances c_j = sum_k a_k a_{k+j}, j = 0..maxlag (zero beyond the
/// filter length).
inline std::vector<double> linear_autocov(std::span<const double> coeffs,
                                          std::size_t maxlag) {
    if (coeffs.empty()) {
        throw std::invalid_argument("linear_autocov: coefficient list must be nonempty");
    }
    std::vector<double> c(maxlag + 1, 0.0);
    for (std::size_t j = 0; j <= maxlag && j < coeffs.size(); ++j) {
        long double acc = 0.0L;
        for (std::size_t k = 0; k + j < coeffs.size(); ++k) {
            acc += static_cast<long double>(coeffs[k]) *
                   static_cast<long double>(coeffs[k + j]);
        }
        c[j] = static_cast<double>(acc);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Exact finite-n variance.
// ---------------------------------------------------------------------------

struct CesaroResult {
    double value = 0.0;
    // Set when covs does not cover lags 0..n-1; the missing lags were
    // treated as zero (exact for truncated filters, approximate otherwise).
    bool lags_truncated = false;
};

/// E|S_n(theta)|^2 / n = sum_{|j|<n} (1 - |j|/n) c_j e^{ij theta}, computed in
/// the manifestly real cosine form c_0 + 2 sum_{j>=1} (1-j/n) c_j cos(j theta)
/// (the imaginary part cancels pairwise by c_{-j} = c_j).
inline CesaroResult cesaro_variance(std::span<const double> covs, std::size_t n,
                                    double theta) {
    if (n < 1) throw std::invalid_argument("cesaro_variance: n must be >= 1");
    if (covs.empty()) {
        throw std::invalid_argument("cesaro_variance: need at least the lag-0 covariance");
    }
    CesaroResult result;
    result.lags_truncated = covs.size() < n;
    const long double th = static_cast<long double>(theta);
    const long double cs = std::cos(th);
    const long double sn = std::sin(th);
    long double pc = 1.0L;  // cos(j theta)
    long double ps = 0.0L;  // sin(j theta)
    long double acc = static_cast<long double>(covs[0]);
    const std::size_t top = std::min<std::size_t>(n - 1, covs.size() - 1);
    for (std::size_t j = 1; j <= top; ++j) {
        const long double npc = pc * cs - ps * sn;
        const long double nps = pc * sn + ps * cs;
        pc = npc;
        ps = nps;
        const long double w =
            1.0L - static_cast<long double>(j) / static_cast<long double>(n);
        acc += 2.0L * w * static_cast<long double>(covs[j]) * pc;
    }
    result.value = static_cast<double>(acc);
    return result;
}

// ---------------------------------------------------------------------------
// Predictor norms: ||E(S_n(theta) | F_0)||^2, the squared L2 norm of the best
// predictor of the transform given the time-0 past. The n-normalized value
// tending to 0 certifies that the past predicts an asymptotically negligible
// share of S_n, the regularity diagnostic used by the experiments module.
// ---------------------------------------------------------------------------

/// Linear model: sum_{m=0}^{J-1} | sum_{l=1}^{min(n, J-m)} a_{l+m} e^{il theta} |^2.
/// Evaluated in O(J) via prefix sums U_k = sum_{t=1}^{k} a_t e^{it theta}:
/// the inner sum for block m equals e^{-im theta} (U_{min(J, m+n)} - U_m),
/// and the phase drops under |.|^2.
inline double linear_prediction_norm_sq(std::span<const double> coeffs, double theta,
                                        std::size_t n) {
    if (coeffs.empty()) {
        throw std::invalid_argument(
            "linear_prediction_norm_sq: coefficient list must be nonempty");
    }
    if (n < 1) throw std::invalid_argument("linear_prediction_norm_sq: n must be >= 1");
    const std::size_t jmax = coeffs.size() - 1;
    if (jmax == 0) return 0.0;
    const long double th = static_cast<long double>(theta);
    const long double cs = std::cos(th);
    const long double sn = std::sin(th);
    std::vector<long double> ure(jmax + 1), uim(jmax + 1);
    long double pc = 1.0L, ps = 0.0L, re = 0.0L, im = 0.0L;
    ure[0] = 0.0L;
    uim[0] = 0.0L;
    for (std::size_t t = 1; t <= jmax; ++t) {
        const long double npc = pc * cs - ps * sn;
        const long double nps = pc * sn + ps * cs;
        pc = npc;
        ps = nps;
        re += static_cast<long double>(coeffs[t]) * pc;
        im += static_cast<long double>(coeffs[t]) * ps;
        ure[t] = re;
        uim[t] = im;
    }
    long double total = 0.0L;
    for (std::size_t m = 0; m < jmax; ++m) {
        const std::size_t hi = std::min(jmax, m + n);
        const long double dr = ure[hi] - ure[m];
        const long double di = uim[hi] - uim[m];
        total += dr * dr + di * di;
    }
    return static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver for small symmetric matrices.
// ---------------------------------------------------------------------------

struct SymmetricEigen {
    std::vector<double> values;
    // vectors[i] is the orthonormal eigenvector for values[i].
    std::vector<std::vector<double>> vectors;
};

/// Cyclic Jacobi rotations; sweeps until every off-diagonal entry is below
/// 1e-12 in magnitude. Intended for S <= 64.
inline SymmetricEigen jacobi_eigen(std::vector<std::vector<double>> a) {
    const std::size_t s = a.size();
    for (const auto& row : a) {
        if (row.size() != s) {
            throw std::invalid_argument("jacobi_eigen: matrix must be square");
        }
    }
    std::vector<std::vector<double>> v(s, std::vector<double>(s, 0.0));
    for (std::size_t i = 0; i < s; ++i) v[i][i] = 1.0;
    constexpr double kOffDiagTol = 1e-12;
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < s; ++p) {
            for (std::size_t q = p + 1; q < s; ++q) off = std::max(off, std::abs(a[p][q]));
        }
        if (off < kOffDiagTol) break;
        for (std::size_t p = 0; p < s; ++p) {
            for (std::size_t q = p + 1; q < s; ++q) {
                if (std::abs(a[p][q]) < kOffDiagTol) continue;
                const double apq = a[p][q];
                const double tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < s; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < s; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < s; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - sn * vkq;
                    v[k][q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen out;
    out.values.resize(s);
    out.vectors.assign(s, std::vector<double>(s));
    for (std::size_t i = 0; i < s; ++i) {
        out.values[i] = a[i][i];
        for (std::size_t k = 0; k < s; ++k) out.vectors[i][k] = v[k][i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Markov spectral decomposition.
// ---------------------------------------------------------------------------

/// Spectral measure of the observable with respect to the transition
/// operator: eigenvalue/weight pairs (lambda_i, w_i) with sum w_i = c_0 =
/// sum_i pi_i f_i^2. Weights below 1e-14 c_0 are zeroed.
struct MarkovSpectrum {
    std::vector<double> eigenvalues;  // descending, in [-1, 1]
    std::vector<double> weights;      // w_i >= 0, sum = c0
    double c0 = 0.0;
};

/// Similarity-symmetrize M = D^{1/2} Q D^{-1/2} (D = diag pi; symmetric by
/// detailed balance), eigendecompose with Jacobi rotations, and project the
/// pi-weighted observable onto the eigenbasis. Rejects observables carrying
/// spectral weight on |lambda| = 1: their variance never averages out, so no
/// per-frequency limit exists for them (nonergodic observable).
inline MarkovSpectrum markov_spectrum(const MarkovSpec& spec) {
    validate(spec);
    const std::size_t s = spec.transition.size();
    std::vector<double> sqrt_pi(s);
    for (std::size_t i = 0; i < s; ++i) sqrt_pi[i] = std::sqrt(spec.stationary[i]);
    std::vector<std::vector<double>> m(s, std::vector<double>(s));
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
            m[i][j] = sqrt_pi[i] * spec.transition[i][j] / sqrt_pi[j];
        }
    }
    // Detailed balance makes m symmetric up to ~1e-10; fold the residue.
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i + 1; j < s; ++j) {
            const double sym = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = sym;
            m[j][i] = sym;
        }
    }
    SymmetricEigen eig = jacobi_eigen(std::move(m));

    double c0 = 0.0;
    for (std::size_t i = 0; i < s; ++i) c0 += spec.stationary[i] * spec.f[i] * spec.f[i];

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return eig.values[a] > eig.values[b];
    });

    MarkovSpectrum spectrum;
    spectrum.c0 = c0;
    spectrum.eigenvalues.reserve(s);
    spectrum.weights.reserve(s);
    const double weight_floor = 1e-14 * std::max(c0, 1.0);
    for (std::size_t idx : order) {
        const double lambda = std::clamp(eig.values[idx], -1.0, 1.0);
        double proj = 0.0;
        for (std::size_t k = 0; k < s; ++k) {
            proj += eig.vectors[idx][k] * sqrt_pi[k] * spec.f[k];
        }
        double w = proj * proj;
        if (w < weight_floor) w = 0.0;
        if (w > 0.0 && std::abs(lambda) >= 1.0 - 1e-9) {
            throw ConfigError(
                "markov spectrum: nonergodic observable (spectral weight " +
                std::to_string(w) + " on eigenvalue with |lambda| = 1)");
        }
        spectrum.eigenvalues.push_back(lambda);
        spectrum.weights.push_back(w);
    }
    return spectrum;
}

/// g(theta) = sum_i w_i (1 - lambda_i^2) / (1 - 2 lambda_i cos theta +
/// lambda_i^2). Nonnegative; its Fourier coefficients reproduce
/// c_j = sum_i w_i lambda_i^j.
inline double markov_g(const MarkovSpectrum& spectrum, double theta) {
    const double ct = std::cos(theta);
    double g = 0.0;
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double w = spectrum.weights[i];
        if (w <= 0.0) continue;
        const double l = spectrum.eigenvalues[i];
        if (std::abs(l) >= 1.0 - 1e-9) {
            throw ConfigError("markov_g: spectral weight on |lambda| = 1 "
                              "(nonergodic observable)");
        }
        g += w * (1.0 - l * l) / (1.0 - 2.0 * l * ct + l * l);
    }
    return g;
}

/// c_j = sum_i w_i lambda_i^j for j = 0..maxlag.
inline std::vector<double> markov_autocov(const MarkovSpectrum& spectrum,
                                          std::size_t maxlag) {
    std::vector<double> c(maxlag + 1, 0.0);
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double w = spectrum.weights[i];
        if (w <= 0.0) continue;
        double p = 1.0;
        for (std::size_t j = 0; j <= maxlag; ++j) {
            c[j] += w * p;
            p *= spectrum.eigenvalues[i];
        }
    }
    return c;
}

/// ||E(S_n(theta)|F_0)||^2 = sum_i w_i |sum_{k=1}^n (lambda_i e^{i theta})^k|^2,
/// with the geometric sum in closed form z(1 - z^n)/(1 - z). For every theta
/// with cos^2 theta < 1 the value is bounded by 4 c_0 / (1 - cos^2 theta),
/// since |1 - lambda e^{i theta}|^2 >= sin^2 theta over lambda in [-1, 1].
inline double markov_prediction_norm_sq(const MarkovSpectrum& spectrum, double theta,
                                        std::size_t n) {
    if (n < 1) throw std::invalid_argument("markov_prediction_norm_sq: n must be >= 1");
    double total = 0.0;
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double w = spectrum.weights[i];
        if (w <= 0.0) continue;
        const double l = spectrum.eigenvalues[i];
        if (l == 0.0) continue;
        const std::complex<double> z = std::polar(std::abs(l), theta + (l < 0.0 ? kPi : 0.0));
        const std::complex<double> one_minus_z = 1.0 - z;
        if (std::norm(one_minus_z) < 1e-30) {
            // Unreachable for ergodic spectra (|lambda| < 1 strictly); kept as
            // a safe direct evaluation.
            std::complex<double> sum = 0.0;
            std::complex<double> zk = 1.0;
            for (std::size_t k = 1; k <= n; ++k) {
                zk *= z;
                sum += zk;
            }
            total += w * std::norm(sum);
            continue;
        }
        const double rn = std::pow(std::abs(l), static_cast<double>(n));
        const std::complex<double> zn =
            std::polar(rn, static_cast<double>(n) * (theta + (l < 0.0 ? kPi : 0.0)));
        const std::complex<double> geo = z * (1.0 - zn) / one_minus_z;
        total += w * std::norm(geo);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Quadrature on [0, 2pi].
// ---------------------------------------------------------------------------

/// Periodic trapezoid rule: integral_0^{2pi} f ≈ (2pi/npts) sum_k f(2pi k/npts).
/// Spectrally accurate for smooth periodic integrands. With exclude_origin the
/// k = 0 node is dropped (used for integrands with a pole at theta = 0, e.g.
/// the slow-decay model); the omitted node mass is f(0)·2pi/npts.
inline double trapezoid_0_2pi(const std::function<double(double)>& f, int npts,
                              bool exclude_origin = false) {
    if (npts < 2) throw std::invalid_argument("trapezoid_0_2pi: need at least 2 nodes");
    CompensatedSum sum;
    for (int k = exclude_origin ? 1 : 0; k < npts; ++k) {
        sum.add(f(kTwoPi * static_cast<double>(k) / static_cast<double>(npts)));
    }
    return sum.value() * kTwoPi / static_cast<double>(npts);
}

/// (1/2pi) integral_0^{2pi} g(theta) e^{ij theta} d theta, the lag-j
/// autocovariance when g is a spectral limit function. 4096 nodes by default.
inline Complex spectral_fourier_coeff(const std::function<double(double)>& g, int lag,
                                      int npts = 4096, bool exclude_origin = false) {
    if (npts < 2) throw std::invalid_argument("spectral_fourier_coeff: need at least 2 nodes");
    CompensatedSum re;
    CompensatedSum im;
    for (int k = exclude_origin ? 1 : 0; k < npts; ++k) {
        const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(npts);
        const double v = g(theta);
        re.add(v * std::cos(static_cast<double>(lag) * theta));
        im.add(v * std::sin(static_cast<double>(lag) * theta));
    }
    const double inv = 1.0 / static_cast<double>(npts);
    return {re.value() * inv, im.value() * inv};
}

// ---------------------------------------------------------------------------
// Unified closed-form provider.
// ---------------------------------------------------------------------------

/// Closed-form spectral quantities for a process spec. Linear specs carry
/// their filter; Markov specs their spectral decomposition. Gaussian
/// functionals have no closed form here (try_make returns nullopt).
class SpectralModel {
public:
    static std::optional<SpectralModel> try_make(const ProcessSpec& spec) {
        if (const auto* linear = std::get_if<LinearSpec>(&spec)) {
            validate(*linear);
            return SpectralModel(*linear);
        }
        if (const auto* markov = std::get_if<MarkovSpec>(&spec)) {
            return SpectralModel(markov_spectrum(*markov));
        }
        return std::nullopt;
    }

    double g(double theta) const {
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            return linear_g(linear->coeffs, theta);
        }
        return markov_g(std::get<MarkovSpectrum>(provider_), theta);
    }

    double c0() const {
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            return linear_autocov(linear->coeffs, 0)[0];
        }
        return std::get<MarkovSpectrum>(provider_).c0;
    }

    std::vector<double> autocov(std::size_t maxlag) const {
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            return linear_autocov(linear->coeffs, maxlag);
        }
        return markov_autocov(std::get<MarkovSpectrum>(provider_), maxlag);
    }

    CesaroResult cesaro(std::size_t n, double theta) const {
        if (n < 1) throw std::invalid_argument("cesaro: n must be >= 1");
        std::size_t maxlag = n - 1;
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            // Lags beyond the filter length are exactly zero; no need to
            // materialize them.
            maxlag = std::min(maxlag, linear->coeffs.size() - 1);
        }
        const std::vector<double> covs = autocov(maxlag);
        CesaroResult r = cesaro_variance(covs, n, theta);
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            // The shortened lag list is exact for a finite filter.
            r.lags_truncated = linear->coeffs.size() < n;
        }
        return r;
    }

    double prediction_norm_sq(double theta, std::size_t n) const {
        if (const auto* linear = std::get_if<LinearSpec>(&provider_)) {
            return linear_prediction_norm_sq(linear->coeffs, theta, n);
        }
        return markov_prediction_norm_sq(std::get<MarkovSpectrum>(provider_), theta, n);
    }

    bool is_linear() const { return std::holds_alternative<LinearSpec>(provider_); }

    /// Short-range linear filter (moving average of small order): the
    /// absolute Cesaro-gap tolerance |cesaro(n) - g| <= 2 c_0 q / n is only
    /// meaningful for these.
    bool is_short_filter() const {
        const auto* linear = std::get_if<LinearSpec>(&provider_);
        return linear != nullptr && linear->coeffs.size() <= 64;
    }

    const LinearSpec* linear() const { return std::get_if<LinearSpec>(&provider_); }
    const MarkovSpectrum* markov() const { return std::get_if<MarkovSpectrum>(&provider_); }

private:
    explicit SpectralModel(LinearSpec linear) : provider_(std::move(linear)) {}
    explicit SpectralModel(MarkovSpectrum spectrum) : provider_(std::move(spectrum)) {}

    std::variant<LinearSpec, MarkovSpectrum> provider_;
};

/// ||X_0||^2 for any supported spec (closed form exists for all three
/// families; for the Gaussian functionals, sign -> 1 and cube -> 15 sigma^6
/// with sigma^2 = 1/(1-phi^2), by the Gaussian moment E Y^6 = 15 sigma^6).
inline double closed_form_c0(const ProcessSpec& spec) {
    if (const auto* gf = std::get_if<GaussianFunctionalSpec>(&spec)) {
        validate(*gf);
        if (gf->h == Nonlinearity::sign) return 1.0;
        const double var = 1.0 / (1.0 - gf->phi * gf->phi);
        return 15.0 * var * var * var;
    }
    return SpectralModel::try_make(spec)->c0();
}

}  // namespace sclt

#endif  // SCLT_SPECTRAL_HPP
