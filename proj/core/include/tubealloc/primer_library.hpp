#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tubealloc/bases.hpp"

namespace tubealloc::primer {

// PCR tag sequence. Design rules enforced here: GC fraction within
// [0.45, 0.55] and no homopolymer run longer than 3.
struct Primer {
    std::uint32_t id = 0;
    BaseSeq bases;
};

bool validate_primer(const Primer& p);

// Immutable after construction; regeneration from (seed, size, primer_len) is
// bit-identical (see generate_library for the exact draw procedure).
struct PrimerLibrary {
    std::uint64_t seed = 0;
    std::size_t primer_len = 0;
    std::vector<Primer> primers;

    std::size_t size() const noexcept { return primers.size(); }
};

inline constexpr std::size_t kDefaultLibrarySize = 28000;
inline constexpr std::size_t kDefaultPrimerLen = 20;

// Rejection-samples `size` distinct primers satisfying validate_primer.
//
// Draw procedure (normative for reimplementations): the generator is
// std::mt19937_64 seeded with `seed`. Each candidate primer consumes
// ceil(primer_len / 32) fresh 64-bit words; base i of the candidate is bits
// [2i, 2i+2) of word i/32, counted from the least significant bit. Candidates
// failing the design rules or duplicating an accepted primer are discarded.
// Throws GenerationExhausted after 10^9 draws.
PrimerLibrary generate_library(std::uint64_t seed, std::size_t size = kDefaultLibrarySize,
                               std::size_t primer_len = kDefaultPrimerLen);

// Plain-text persistence:
//   #primerlib v1 seed=<u64> size=<n> len=<k>
//   <id>\t<bases>
// Round-trips bit-exactly. Throws IoFailure / FormatError(line).
void save_library(const PrimerLibrary& lib, const std::filesystem::path& path);
PrimerLibrary load_library(const std::filesystem::path& path);

}  // namespace tubealloc::primer
