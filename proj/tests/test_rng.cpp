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
#include <set>

#include "oracles.hpp"
#include "sclt/rng.hpp"

namespace {

struct Moments {
    double mean;
    double var;
    double skew;
    double excess_kurtosis;
};

Moments sample_moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    long double m1 = 0.0L;
    for (double v : x) m1 += v;
    const double mean = static_cast<double>(m1) / n;
    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (double v : x) {
        const long double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double var = static_cast<double>(m2) / n;
    const double sd = std::sqrt(var);
    return {mean, var, static_cast<double>(m3) / n / (sd * sd * sd),
            static_cast<double>(m4) / n / (var * var) - 3.0};
}

}  // namespace

TEST_CASE("splitmix stream matches the reference generator") {
    for (std::uint64_t seed :
         {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{42},
          std::uint64_t{0xDEADBEEFULL}, (std::uint64_t{1} << 63) + 5}) {
        sclt::SplitMix64 g(seed);
        oracle::SplitMixRef ref(seed);
        for (int i = 0; i < 1000; ++i) {
            REQUIRE(g.next_u64() == ref.next());
        }
    }
}

TEST_CASE("seed zero produces the published first output") {
    sclt::SplitMix64 g(0);
    REQUIRE(g.next_u64() == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("uniform doubles are the top 53 bits scaled into [0,1)") {
    sclt::SplitMix64 g(7);
    oracle::SplitMixRef ref(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = g.next_double();
        REQUIRE(u == ref.next_unit());
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("derived seeds are the first output of the offset stream") {
    REQUIRE(sclt::derive_seed(0, 0) == 0xE220A8397B1DCDAFULL);
    for (std::uint64_t master : {std::uint64_t{0}, std::uint64_t{1},
                                 std::uint64_t{987654321}}) {
        for (std::uint64_t r : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{2},
                                std::uint64_t{999}, std::uint64_t{1} << 40}) {
            oracle::SplitMixRef ref(master + r * 0x9E3779B97F4A7C15ULL);
            REQUIRE(sclt::derive_seed(master, r) == ref.next());
        }
    }
}

TEST_CASE("derived seeds from one master are pairwise distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 20000; ++r) seen.insert(sclt::derive_seed(1, r));
    REQUIRE(seen.size() == 20000);
}

TEST_CASE("normal sampler moments match the standard normal") {
    const std::size_t n = 400000;
    const auto x = sclt::sample_standard_normals(99, n);
    const Moments m = sample_moments(x);
    const double rn = std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(m.mean) <= 4.0 / rn);
    REQUIRE(std::abs(m.var - 1.0) <= 4.0 * std::sqrt(2.0) / rn);
    REQUIRE(std::abs(m.skew) <= 4.0 * std::sqrt(6.0) / rn);
    REQUIRE(std::abs(m.excess_kurtosis) <= 4.0 * std::sqrt(24.0) / rn);
}

TEST_CASE("normal sampler tail frequencies are calibrated") {
    const std::size_t n = 400000;
    const auto x = sclt::sample_standard_normals(123, n);
    std::size_t beyond = 0;
    for (double v : x) beyond += std::abs(v) > 1.959963984540054 ? 1 : 0;
    const double frac = static_cast<double>(beyond) / static_cast<double>(n);
    const double band = 4.0 * std::sqrt(0.05 * 0.95 / static_cast<double>(n));
    REQUIRE(std::abs(frac - 0.05) <= band);
}

TEST_CASE("normal stream extension preserves the prefix") {
    const auto a = sclt::sample_standard_normals(5, 100);
    const auto b = sclt::sample_standard_normals(5, 101);
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("interleaved uniform draws advance the same stream") {
    sclt::NormalSampler s(31);
    sclt::SplitMix64 g(31);
    REQUIRE(s.next_u64() == g.next_u64());
    REQUIRE(s.next_double() == g.next_double());
}

TEST_CASE("rademacher draws are signs of the raw stream") {
    const std::size_t n = 100000;
    const auto x = sclt::sample_rademacher(77, n);
    oracle::SplitMixRef ref(77);
    long double sum = 0.0L;
    for (double v : x) {
        const double expected = (ref.next() >> 63) ? 1.0 : -1.0;
        REQUIRE(v == expected);
        sum += v;
    }
    REQUIRE(std::abs(static_cast<double>(sum)) / static_cast<double>(n) <=
            4.0 / std::sqrt(static_cast<double>(n)));
}
