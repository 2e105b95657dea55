#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tubealloc/errors.hpp"

namespace tubealloc::rs {

// RS(255,239) over GF(256) with primitive polynomial x^8+x^4+x^3+x^2+1 (0x11d),
// generator element alpha = 2 and generator-polynomial roots alpha^0..alpha^15.
// Sixteen parity bytes per 239 data bytes, correcting up to 8 byte errors per
// codeword. The final block of a stream is encoded as a shortened code so the
// output length is minimal and data-dependent.
inline constexpr std::size_t kDataBytes = 239;
inline constexpr std::size_t kParityBytes = 16;
inline constexpr std::size_t kBlockBytes = kDataBytes + kParityBytes;
inline constexpr std::size_t kMaxCorrectable = kParityBytes / 2;

// Systematic layout: each codeword is its data bytes followed by 16 parity bytes.
std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> data);

// Inverse of rs_encode. Corrects up to 8 byte errors per codeword and throws
// UncorrectableCodeword(block index) beyond that (when detectable).
std::vector<std::uint8_t> rs_decode(std::span<const std::uint8_t> code);

// Parity of a single block of at most 239 bytes; exposed for tests.
std::vector<std::uint8_t> block_parity(std::span<const std::uint8_t> block);

}  // namespace tubealloc::rs
