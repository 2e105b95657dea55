#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tubealloc/bases.hpp"

namespace tubealloc::codec {

enum class Scheme { Rotation, Blawat, Grass, CacLite };

// Exact per-block accounting: block_in_bits consumed per block_out_bases emitted.
// The quotient is the encoding density in bits per base.
struct SchemeTraits {
    int block_in_bits;
    int block_out_bases;
};

constexpr SchemeTraits traits(Scheme s) {
    switch (s) {
        case Scheme::Rotation: return {19, 12};  // 19/12 ~ 1.583 bits/base
        case Scheme::Blawat: return {8, 5};      // 1.6 bits/base
        case Scheme::Grass: return {16, 9};      // 16/9 ~ 1.778 bits/base
        case Scheme::CacLite: return {3, 3};     // 1.0 bit/base
    }
    return {0, 0};
}

std::string_view scheme_name(Scheme s);
Scheme scheme_from_name(std::string_view name);  // rotation|blawat|grass|cac

// Rotation code: binary -> ternary blocks of 19 bits -> 12 trits, each trit
// selecting one of the three bases different from the previously emitted base
// (candidates in A<C<G<T order). Output never repeats a base twice in a row.
// The bit stream carries a self-terminating pad (a 1 bit then zeros) so the
// decoder recovers the exact byte length without metadata.
BaseSeq encode_rotation(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> decode_rotation(std::span<const Base> seq);

// Blawat code: one byte -> five bases. Bases 1,2,4,5 carry the byte's four bit
// pairs, base 3 breaks 1-2-3 homopolymers and records whether base 5 was
// rotated to differ from the next block's first base.
BaseSeq encode_blawat(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> decode_blawat(std::span<const Base> seq);

// Grass code: 16-bit blocks -> three GF(47) digits -> three triplets from the
// canonical 47-entry triplet table (second base != third base). A trailing odd
// byte becomes a short two-digit block of six bases.
BaseSeq encode_grass(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> decode_grass(std::span<const Base> seq);

// CAC-lite: 3 bits -> one of four candidate DNA triplets, chosen to avoid
// homopolymer runs > 3, keep GC near 1/2 and avoid repeating recent context.
// Decoding only needs (triplet index) mod 8, so the choice is free.
BaseSeq encode_cac_lite(std::span<const std::uint8_t> data, int context_window = 17);
std::vector<std::uint8_t> decode_cac_lite(std::span<const Base> seq);

BaseSeq encode(Scheme s, std::span<const std::uint8_t> data);
std::vector<std::uint8_t> decode(Scheme s, std::span<const Base> seq);

// One DNA strand's data-bearing payload, fixed length, plus its position
// within the owning chunk.
struct PayloadFrame {
    BaseSeq payload;
    std::uint32_t chunk_id = 0;
    std::uint32_t strand_index = 0;
};

inline constexpr std::size_t kDefaultPayloadLen = 200;

// Cuts an encoded sequence into consecutive payload_len frames; the final
// frame is padded with the repeating cycle ACGT. payload_len must be >= 12 so
// a collision window always fits.
std::vector<PayloadFrame> frame_payloads(const BaseSeq& seq, std::uint32_t chunk_id,
                                         std::size_t payload_len = kDefaultPayloadLen);

}  // namespace tubealloc::codec
