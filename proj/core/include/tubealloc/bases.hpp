#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tubealloc/errors.hpp"

namespace tubealloc {

// The four DNA bases in the canonical order A < C < G < T. The numeric codes
// double as 2-bit packing values everywhere in the project.
enum class Base : std::uint8_t { A = 0, C = 1, G = 2, T = 3 };

using BaseSeq = std::vector<Base>;

inline char to_char(Base b) {
    static constexpr char k[4] = {'A', 'C', 'G', 'T'};
    return k[static_cast<std::uint8_t>(b)];
}

Base base_from_char(char c);  // throws MalformedSequence on anything but ACGT

std::string to_string(std::span<const Base> seq);
BaseSeq seq_from_string(std::string_view text);

inline bool is_gc(Base b) { return b == Base::C || b == Base::G; }

std::size_t gc_count(std::span<const Base> seq);

// Length of the longest run of one repeated base; 0 for the empty sequence.
std::size_t max_homopolymer_run(std::span<const Base> seq);

// Packs up to 32 bases into a little-endian 2-bit code: base i sits at bits [2i, 2i+2).
std::uint64_t pack_code(std::span<const Base> seq);

}  // namespace tubealloc
