#pragma once
// Seedable xoshiro256++ stream with hand-rolled uniform/normal draws so that
// results are identical across platforms and standard library versions.
// Every stochastic operation in the library takes one of these explicitly.

#include <cstdint>

#include "rctgan/grad/tensor.hpp"

namespace rctgan {

namespace detail {
inline uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t s = seed;
        for (auto& w : state_) w = detail::splitmix64(s);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    int uniform_int(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                                 static_cast<unsigned __int128>(n)) >> 64);
    }

    // Box-Muller; second draw cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Gumbel(0,1); used by the generator's discrete-slice activation.
    double gumbel() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(-std::log(u) + 1e-300);
    }

    // Derive a statistically independent stream; deterministic in (this seed, key).
    Rng split(uint64_t key) const {
        uint64_t s = state_[0] ^ (state_[3] + 0x632be59bd9b4e019ULL * (key + 1));
        return Rng(detail::splitmix64(s));
    }

    Tensor2 normal_matrix(int rows, int cols) {
        Tensor2 t(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t(r, c) = normal();
        return t;
    }

    Tensor2 uniform_matrix(int rows, int cols, double lo, double hi) {
        Tensor2 t(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) t(r, c) = uniform(lo, hi);
        return t;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4] = {};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stable seed mixing for experiment cells: hash(seed, a, b, c).
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = seed;
    detail::splitmix64(s);
    s ^= 0x100000001b3ULL * (a + 1);
    detail::splitmix64(s);
    s ^= 0x100000001b3ULL * (b + 1);
    detail::splitmix64(s);
    s ^= 0x100000001b3ULL * (c + 1);
    return detail::splitmix64(s);
}

}  // namespace rctgan
