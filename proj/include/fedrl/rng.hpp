#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fedrl {

// One master seed fans out into independent named streams so that runs
// sharing a seed consume identical environment randomness regardless of
// what the agents do (common-random-numbers discipline). A stream name
// is hashed with FNV-1a and mixed into the master seed via splitmix64.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    return splitmix64(splitmix64(master) ^ fnv1a64(stream));
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view stream) {
    return std::mt19937_64(derive_seed(master, stream));
}

inline double uniform01(std::mt19937_64& g) {
    // 53-bit mantissa uniform in [0,1)
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline int uniform_int(std::mt19937_64& g, int n) {
    // unbiased enough for n << 2^64; avoids libstdc++ distribution quirks
    return static_cast<int>(g() % static_cast<std::uint64_t>(n));
}

// Box-Muller: self-contained so generated traces do not depend on the
// standard library's normal_distribution implementation.
class NormalSampler {
public:
    double operator()(std::mt19937_64& g) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01(g);
        } while (u1 <= 0.0);
        const double u2 = uniform01(g);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fedrl
