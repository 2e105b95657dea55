#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tubealloc/bases.hpp"

namespace tubealloc::codec {

// The 47 canonical Grass triplets: all triplets whose second base differs from
// the third, in lexicographic A<C<G<T order, minus the lexicographically last
// one (48 qualify, 47 are kept as GF(47) digits).
const std::array<std::array<Base, 3>, 47>& grass_triplets();

// Digit for a triplet, or -1 when the triplet is not in the canonical table.
int grass_digit(Base a, Base b, Base c);

// Canonical text renderings of the code tables, matching the golden files
// shipped under tables/. One record per line; see the README for the format.
std::string blawat_table_text();   // 256 lines: "<byte hex>\t<5 bases>"
std::string grass_triplet_text();  // 47 lines: "<digit>\t<3 bases>"

std::uint64_t fnv1a64(std::string_view text);

// Frozen content hashes of the canonical table texts.
inline constexpr std::uint64_t kBlawatTableHash = 0x24cc18e93efcaeecULL;
inline constexpr std::uint64_t kGrassTripletHash = 0x37b5d92619461a4eULL;

// Recomputes the table texts and compares their hashes against the frozen
// constants; throws FormatError on any mismatch. Cheap, run at CLI startup.
void verify_builtin_tables();

}  // namespace tubealloc::codec
