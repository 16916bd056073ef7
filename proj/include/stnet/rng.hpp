#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Pinned random stream construction so any implementation, in any language,
// reproduces identical draws:
//
//   splitmix64 step:  z  = (state += 0x9E3779B97F4A7C15)
//                     z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//                     z ^= z >> 27;  z *= 0x94D049BB133111EB
//                     return z ^ (z >> 31)
//
//   stream(seed, scope, id): state0 = mix(mix(seed ^ fnv1a64(scope)) ^ id)
//   where mix(x) is one splitmix64 step from state x, and fnv1a64 is the
//   64-bit FNV-1a hash (offset 14695981039346656037, prime 1099511628211).
//
//   next_u64  = one splitmix64 step
//   next_unit = (next_u64 >> 11) * 2^-53                (uniform in [0,1))
//   next_below(n) = next_u64 % n
//   gaussians use Box-Muller on two next_unit draws.

namespace stnet {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::string_view scope, std::uint64_t id) {
        std::uint64_t s = seed ^ fnv1a64(scope);
        std::uint64_t t = s;
        s = splitmix64_step(t) ^ id;
        state_ = splitmix64_step(s);
    }

    std::uint64_t next_u64() { return splitmix64_step(state_); }

    // Uniform in [0,1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    // Uniform integer in [0, n). Modulo construction, documented above.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller; consumes exactly two draws.
    double next_gaussian() {
        double u = next_unit();
        double v = next_unit();
        if (u <= 0.0) u = 0x1p-53;
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

  private:
    std::uint64_t state_ = 0;
};

}  // namespace stnet
