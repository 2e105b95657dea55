#pragma once

#include <cstdint>

#include "tubealloc/codec.hpp"
#include "tubealloc/errors.hpp"

namespace tubealloc::capacity {

// Encoding density as the exact rational bits/bases; capacity accounting is
// integer-only throughout.
struct Density {
    std::uint32_t bits = 0;
    std::uint32_t bases = 1;
};

inline Density density_of(codec::Scheme s) {
    const auto t = codec::traits(s);
    return {static_cast<std::uint32_t>(t.block_in_bits),
            static_cast<std::uint32_t>(t.block_out_bases)};
}

struct CapacityParams {
    std::size_t payload_len = codec::kDefaultPayloadLen;
    Density density{8, 5};
    std::uint64_t parallel_factor = 1'550'000;  // strands per primer pair
    std::size_t library_size = 0;

    void validate() const {
        if (payload_len == 0 || density.bits == 0 || density.bases == 0 ||
            parallel_factor == 0 || library_size == 0)
            throw Error("capacity parameters must be strictly positive");
        if (density.bits > 2 * density.bases)
            throw Error("encoding density cannot exceed 2 bits/base");
    }
};

// Whole bytes per strand times strands per pair:
//   floor(payload_len * density / 8) * parallel_factor.
inline std::uint64_t pair_capacity_bytes(const CapacityParams& p) {
    const std::uint64_t bytes_per_strand =
        (static_cast<std::uint64_t>(p.payload_len) * p.density.bits) / (8ULL * p.density.bases);
    return bytes_per_strand * p.parallel_factor;
}

// floor(usable_primers / 2) pairs, each at pair capacity.
inline std::uint64_t tube_capacity_bytes(std::size_t usable_primers, const CapacityParams& p) {
    if (usable_primers > p.library_size)
        throw Error("usable primer count exceeds the library size");
    return (static_cast<std::uint64_t>(usable_primers) / 2) * pair_capacity_bytes(p);
}

}  // namespace tubealloc::capacity
