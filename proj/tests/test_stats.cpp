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

#include <array>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sclt/rng.hpp"
#include "sclt/spectral.hpp"
#include "sclt/stats.hpp"

TEST_CASE("normal cdf matches the series expansion") {
    for (double x = -3.5; x <= 3.5; x += 0.07) {
        REQUIRE(sclt::normal_cdf(x) ==
                Catch::Approx(oracle::normal_cdf_ref(x)).margin(5e-13));
    }
    REQUIRE(sclt::normal_cdf(0.0) == 0.5);
    REQUIRE(sclt::normal_cdf(1.959963984540054) == Catch::Approx(0.975).margin(1e-12));
    REQUIRE(sclt::normal_cdf(-1.959963984540054) == Catch::Approx(0.025).margin(1e-12));
    for (double x : {-2.0, -0.5, 0.9, 3.1}) {
        REQUIRE(sclt::normal_cdf(x) + sclt::normal_cdf(-x) ==
                Catch::Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("chi squared 2 cdf is the exponential law") {
    for (double x : {0.0, 0.1, 1.0, 2.0, 5.0, 40.0}) {
        REQUIRE(sclt::chi2_2_cdf(x) ==
                Catch::Approx(oracle::chi2_2_cdf_ref(x)).margin(1e-15));
    }
    REQUIRE(sclt::chi2_2_cdf(2.0 * std::log(2.0)) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE_THROWS_AS(sclt::chi2_2_cdf(-0.1), std::invalid_argument);
}

TEST_CASE("ks statistic matches hand-computed small cases") {
    const auto uniform = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    // Two points at the quartiles of U(0,1): D = 0.25.
    REQUIRE(sclt::ks_statistic(std::vector<double>{0.25, 0.75}, uniform) ==
            Catch::Approx(0.25).margin(1e-15));
    // Single point at 0.3: sup is max(0.3 - 0, 1 - 0.3) = 0.7.
    REQUIRE(sclt::ks_statistic(std::vector<double>{0.3}, uniform) ==
            Catch::Approx(0.7).margin(1e-15));
    // Perfectly placed mid-quantiles: D = 1/(2R).
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back((static_cast<double>(i) + 0.5) / 10.0);
    REQUIRE(sclt::ks_statistic(grid, uniform) == Catch::Approx(0.05).margin(1e-15));
    // Order must not matter.
    REQUIRE(sclt::ks_statistic(std::vector<double>{0.75, 0.25}, uniform) ==
            Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("ks rejection rate under the null sits near the nominal level") {
    // 400 uniform datasets of size 1000 against the true CDF; D sqrt(R)
    // exceeds 1.358 with probability ~5%.
    const auto uniform = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    sclt::SplitMix64 master(2718);
    int rejections = 0;
    const int datasets = 400;
    for (int d = 0; d < datasets; ++d) {
        sclt::SplitMix64 g(master.next_u64());
        std::vector<double> sample(1000);
        for (double& v : sample) v = g.next_double();
        const double scaled =
            sclt::ks_statistic(sample, uniform) * std::sqrt(1000.0);
        rejections += scaled > sclt::kKolmogorov5Percent ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / datasets;
    REQUIRE(rate >= 0.02);
    REQUIRE(rate <= 0.09);
}

TEST_CASE("moment summary matches hand computation") {
    const std::vector<std::array<double, 2>> pts = {
        {1.0, 2.0}, {3.0, 6.0}, {5.0, 4.0}};
    const sclt::MomentSummary2D m = sclt::sample_moments_2d(pts);
    REQUIRE(m.mean[0] == Catch::Approx(3.0).margin(1e-15));
    REQUIRE(m.mean[1] == Catch::Approx(4.0).margin(1e-15));
    REQUIRE(m.cov[0][0] == Catch::Approx(4.0).margin(1e-14));   // ((-2)^2+0+2^2)/2
    REQUIRE(m.cov[1][1] == Catch::Approx(4.0).margin(1e-14));
    REQUIRE(m.cov[0][1] == Catch::Approx(2.0).margin(1e-14));   // ((-2)(-2)+0+0)/2
    REQUIRE(m.correlation() == Catch::Approx(0.5).margin(1e-14));
    REQUIRE_THROWS_AS(
        sclt::sample_moments_2d(std::vector<std::array<double, 2>>{{1.0, 1.0}}),
        std::invalid_argument);
}

TEST_CASE("moment summary handles degenerate spread") {
    const std::vector<std::array<double, 2>> pts = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
    const sclt::MomentSummary2D m = sclt::sample_moments_2d(pts);
    REQUIRE(m.cov[0][0] == 0.0);
    REQUIRE(m.correlation() == 0.0);
}

TEST_CASE("moment summary calibrates on correlated gaussian pairs") {
    const double rho = 0.6;
    const std::size_t n = 200000;
    sclt::NormalSampler s(314);
    std::vector<std::array<double, 2>> pts(n);
    for (auto& p : pts) {
        const double z1 = s.next();
        const double z2 = s.next();
        p = {z1, rho * z1 + std::sqrt(1.0 - rho * rho) * z2};
    }
    const sclt::MomentSummary2D m = sclt::sample_moments_2d(pts);
    const double band = 5.0 / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(m.mean[0]) <= band);
    REQUIRE(std::abs(m.mean[1]) <= band);
    REQUIRE(std::abs(m.cov[0][0] - 1.0) <= 2.0 * band);
    REQUIRE(std::abs(m.cov[1][1] - 1.0) <= 2.0 * band);
    REQUIRE(std::abs(m.correlation() - rho) <= 2.0 * band);
}

TEST_CASE("constant spectral limit collapses the mixture to one gaussian") {
    const sclt::AnnealedMixture mixture([](double) { return 1.0; });
    for (double x : {-2.0, -0.3, 0.0, 0.8, 2.5}) {
        // Component variance g/2 = 1/2.
        REQUIRE(mixture.cdf(x) ==
                Catch::Approx(sclt::normal_cdf(x / std::sqrt(0.5))).margin(1e-9));
    }
}

TEST_CASE("mixture cdf agrees with an independent dense-grid evaluation") {
    const auto g = [](double theta) { return 1.25 + std::cos(theta); };
    for (double x : {-1.5, -0.4, 0.0, 0.2, 1.0, 2.2}) {
        REQUIRE(sclt::annealed_mixture_cdf(g, x) ==
                Catch::Approx(oracle::mixture_cdf_ref(g, x, 65536)).margin(5e-4));
    }
}

TEST_CASE("mixture cdf is a proper distribution function") {
    const auto g = [](double theta) { return 2.0 + 2.0 * std::cos(theta); };  // zero at pi
    const sclt::AnnealedMixture mixture(g);
    double prev = 0.0;
    for (double x = -4.0; x <= 4.0; x += 0.05) {
        const double c = mixture.cdf(x);
        REQUIRE(c >= prev - 1e-15);
        REQUIRE(c >= 0.0);
        REQUIRE(c <= 1.0);
        prev = c;
    }
    REQUIRE(mixture.cdf(-8.0) <= 1e-3);
    REQUIRE(mixture.cdf(8.0) >= 1.0 - 1e-3);
    // The degenerate component at theta = pi contributes a step at 0.
    REQUIRE(mixture.cdf(1e-9) - mixture.cdf(-1e-9) >= 0.0);
}

TEST_CASE("degenerate spectral limit gives a unit step") {
    const sclt::AnnealedMixture mixture([](double) { return 0.0; });
    REQUIRE(mixture.cdf(-1e-12) == 0.0);
    REQUIRE(mixture.cdf(0.0) == 1.0);
    REQUIRE(mixture.cdf(5.0) == 1.0);
}
