#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace caresim {

// Counter-based substream RNG. Each stream is keyed by (seed, label) and
// produces a fixed sequence indexed by its draw counter, so draws taken from
// one stream never shift the values produced by another. That property is
// what makes common-random-number policy comparisons work: a policy lever
// that adds draws to the allocation stream leaves mortality, fertility etc.
// untouched.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::string_view streamId)
        : key_(derive_key(seed, streamId)) {}

    // SplitMix64 output function over key + counter*odd-constant.
    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (counter_++) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
        // Rejection sampling kills the modulo bias; the loop terminates fast
        // since the acceptance region always covers more than half the range.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via Box-Muller. One pair of uniforms per draw; the
    // second value is discarded to keep the draw-to-counter mapping simple.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Geometric number of weeks >= 1 with the given mean.
    int geometric_weeks(double meanWeeks) {
        if (meanWeeks <= 1.0) return 1;
        const double p = 1.0 / meanWeeks;
        double u = uniform01();
        if (u >= 1.0) u = 1.0 - 0x1.0p-53;
        int k = 1 + static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
        return k < 1 ? 1 : k;
    }

    // Categorical draw over non-negative weights; returns the chosen index.
    // Zero-weight entries are never selected. Total weight must be positive.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: total weight must be > 0");
        double u = uniform01() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            if (u < weights[i]) return i;
            u -= weights[i];
        }
        // Floating-point underflow on the last subtraction: return the last
        // positive-weight entry.
        for (std::size_t i = weights.size(); i-- > 0;) {
            if (weights[i] > 0.0) return i;
        }
        throw std::logic_error("categorical: unreachable");
    }

    std::uint64_t draws_taken() const { return counter_; }

private:
    static std::uint64_t derive_key(std::uint64_t seed, std::string_view streamId) {
        // FNV-1a over the label, mixed with the seed through SplitMix64.
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : streamId) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        std::uint64_t z = seed ^ h;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// The named substreams used by a simulation run, one per stochastic process.
struct RngSet {
    RngStream seeding;
    RngStream mortality;
    RngStream fertility;
    RngStream partnership;
    RngStream divorce;
    RngStream relocation;
    RngStream allocation;
    RngStream health;
    RngStream education;
    RngStream employment;
    RngStream wealth;

    explicit RngSet(std::uint64_t seed)
        : seeding(seed, "seeding"),
          mortality(seed, "mortality"),
          fertility(seed, "fertility"),
          partnership(seed, "partnership"),
          divorce(seed, "divorce"),
          relocation(seed, "relocation"),
          allocation(seed, "allocation"),
          health(seed, "health"),
          education(seed, "education"),
          employment(seed, "employment"),
          wealth(seed, "wealth") {}
};

} // namespace caresim
