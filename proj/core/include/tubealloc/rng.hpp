#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tubealloc {

// All randomness in the project flows through this wrapper so that results are
// reproducible bit-for-bit across platforms and across reimplementations.
//
// The engine is std::mt19937_64 (the standard 64-bit Mersenne Twister, fully
// specified by the C++ standard). Derived draws use only the raw 64-bit output:
// std::uniform_int_distribution and friends are never used because their
// algorithms are implementation-defined.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform-ish draw in [0, n); plain modulo, documented and deterministic.
    // The modulo bias is irrelevant for the simulation uses here.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // 53-bit mantissa draw in [0, 1).
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    void fill_bytes(std::span<std::uint8_t> out) {
        std::size_t i = 0;
        while (i < out.size()) {
            std::uint64_t w = next_u64();
            for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
                out[i] = static_cast<std::uint8_t>(w & 0xff);
                w >>= 8;
            }
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace tubealloc
