#pragma once

#include <cmath>
#include <cstdint>

namespace mfjump {

// Counter-based generator (splitmix64 finalizer over a strided counter).
// A stream is a pure function of (key, counter), so per-path streams derived
// with derive_stream(master, path) are independent of scheduling order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key), ctr_(0) {}

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on (0,1]; never returns 0 so log() is safe
    double next_u01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // standard normal, cacheless Box-Muller (two uniforms per draw)
    double next_normal() {
        const double u1 = next_u01();
        const double u2 = next_u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // exact Poisson(mean) by Knuth's product-of-uniforms inversion
    int next_poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_u01();
        } while (p > limit);
        return k - 1;
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// seed_path = mix(master_seed, path_index); stable under any thread schedule
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index + 0x5851F42D4C957F2DULL));
}

} // namespace mfjump
