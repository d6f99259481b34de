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

#ifndef SCLT_RNG_HPP
#define SCLT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace sclt {

/// SplitMix64: 64-bit state, one output per step. Chosen because the whole
/// generator is three lines, so every language binding and test oracle can
/// reproduce streams exactly.
class SplitMix64 {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += kGamma);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Per-replicate seed: the first SplitMix64 output of the state
/// master + replicate_id * kGamma. Replicate r therefore gets the (r+1)-th
/// output of a SplitMix64 seeded with `master`, so streams for distinct
/// replicates never overlap and the derivation is order-free.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate_id) {
    SplitMix64 g(master + replicate_id * SplitMix64::kGamma);
    return g.next_u64();
}

/// Standard normal sampler using the Marsaglia polar method on top of a
/// SplitMix64 stream. The polar method yields pairs; the spare is cached so
/// consecutive calls consume the underlying stream deterministically.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.next_double() - 1.0;
            v = 2.0 * rng_.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Access to the underlying uniform stream. Draining uniforms interleaves
    /// with the normal stream; callers that need both should document the
    /// draw order.
    std::uint64_t next_u64() { return rng_.next_u64(); }
    double next_double() { return rng_.next_double(); }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// n standard normals from the given seed, in draw order.
inline std::vector<double> sample_standard_normals(std::uint64_t seed, std::size_t n) {
    NormalSampler s(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = s.next();
    return out;
}

/// n independent +/-1 values (sign bit of each u64), mean 0 and variance 1.
inline std::vector<double> sample_rademacher(std::uint64_t seed, std::size_t n) {
    SplitMix64 g(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = (g.next_u64() >> 63) ? 1.0 : -1.0;
    return out;
}

}  // namespace sclt

#endif  // SCLT_RNG_HPP
