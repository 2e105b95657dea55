#include "tubealloc/codec_tables.hpp"

#include <cstdio>

#include "tubealloc/codec.hpp"
#include "tubealloc/errors.hpp"

namespace tubealloc::codec {

namespace {

std::array<std::array<Base, 3>, 47> build_grass_triplets() {
    std::array<std::array<Base, 3>, 47> out{};
    std::size_t n = 0;
    for (std::uint8_t a = 0; a < 4; ++a)
        for (std::uint8_t b = 0; b < 4; ++b)
            for (std::uint8_t c = 0; c < 4; ++c) {
                if (b == c) continue;
                if (n == 47) return out;  // drop the lexicographically last valid triplet
                out[n++] = {static_cast<Base>(a), static_cast<Base>(b), static_cast<Base>(c)};
            }
    return out;
}

std::array<std::int8_t, 64> build_grass_inverse() {
    std::array<std::int8_t, 64> inv{};
    inv.fill(-1);
    const auto& table = grass_triplets();
    for (std::size_t d = 0; d < table.size(); ++d) {
        const auto& t = table[d];
        const std::size_t key = (static_cast<std::size_t>(t[0]) << 4) |
                                (static_cast<std::size_t>(t[1]) << 2) |
                                static_cast<std::size_t>(t[2]);
        inv[key] = static_cast<std::int8_t>(d);
    }
    return inv;
}

}  // namespace

const std::array<std::array<Base, 3>, 47>& grass_triplets() {
    static const auto table = build_grass_triplets();
    return table;
}

int grass_digit(Base a, Base b, Base c) {
    static const auto inv = build_grass_inverse();
    const std::size_t key = (static_cast<std::size_t>(a) << 4) |
                            (static_cast<std::size_t>(b) << 2) | static_cast<std::size_t>(c);
    return inv[key];
}

std::string blawat_table_text() {
    std::string out;
    out.reserve(256 * 10);
    for (unsigned b = 0; b < 256; ++b) {
        const std::uint8_t byte = static_cast<std::uint8_t>(b);
        const BaseSeq block = encode_blawat(std::span<const std::uint8_t>(&byte, 1));
        char hex[4];
        std::snprintf(hex, sizeof hex, "%02x", b);
        out += hex;
        out += '\t';
        out += to_string(block);
        out += '\n';
    }
    return out;
}

std::string grass_triplet_text() {
    std::string out;
    out.reserve(47 * 8);
    const auto& table = grass_triplets();
    for (std::size_t d = 0; d < table.size(); ++d) {
        out += std::to_string(d);
        out += '\t';
        out += to_string(table[d]);
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void verify_builtin_tables() {
    if (fnv1a64(blawat_table_text()) != kBlawatTableHash)
        throw FormatError("blawat code table does not match its frozen hash");
    if (fnv1a64(grass_triplet_text()) != kGrassTripletHash)
        throw FormatError("grass triplet table does not match its frozen hash");
}

}  // namespace tubealloc::codec
