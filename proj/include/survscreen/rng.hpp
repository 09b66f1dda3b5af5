#pragma once

// Deterministic replicate-level random streams. Each (master_seed,
// scenario_id, replicate_index) triple is hashed through a SplitMix64 mixing
// chain into an independent xoshiro256++ state, so streams can be created in
// any order, on any worker, and still reproduce the same draws.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace survscreen {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) { return splitmix64_next(z); }

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// Single-owner random stream (xoshiro256++, 256-bit state). Never share one
// instance between concurrent tasks; hand it off instead.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : stream_id_(stream_id) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64_next(sm);
    }

    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe under log().
    double uniform_open01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Unbiased integer on [0, bound) by rejection.
    std::uint64_t uniform_int(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_int: bound must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return draw % bound;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t stream_id_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Collision-resistant substream for one (scenario, replicate) cell. The hash
// chain makes the result independent of creation order and worker count.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t scenario_id,
                               std::uint64_t replicate_index) {
    std::uint64_t h = detail::mix64(master_seed);
    h = detail::mix64(h ^ scenario_id);
    h = detail::mix64(h ^ replicate_index);
    const std::uint64_t stream_id = (scenario_id << 32) ^ replicate_index;
    return RngStream(h, stream_id);
}

}  // namespace survscreen
