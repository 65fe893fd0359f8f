#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace elliptica {

// splitmix64: tiny, well-studied, and bit-identical on every platform.
// std::mt19937_64 would do for same-binary reruns, but the real-valued
// distributions in <random> are implementation-defined, and the suite
// promises byte-identical reports.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    std::complex<double> complex_in_rect(double re_lo, double re_hi,
                                         double im_lo, double im_hi) {
        double re = uniform(re_lo, re_hi);
        double im = uniform(im_lo, im_hi);
        return {re, im};
    }

    /// Pick index in [0, n).
    std::size_t pick_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Per-sample stream seed: mixes the plan seed, the check id and the
/// sample index so samples are independent of worker scheduling.
inline std::uint64_t derive_seed(std::uint64_t plan_seed, std::string_view check_id,
                                 std::uint64_t sample_index) {
    std::uint64_t h = fnv1a_hash(check_id);
    std::uint64_t x = plan_seed ^ (h + 0x9e3779b97f4a7c15ULL + (sample_index << 1));
    Rng mix(x);
    mix.next_u64();
    return mix.next_u64();
}

}
