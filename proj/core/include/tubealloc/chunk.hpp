#pragma once

#include <cstdint>

#include "tubealloc/bitset.hpp"

namespace tubealloc::alloc {

// A fixed-size unit of digital data together with the primers its encoded
// payloads collide with. byte_len may be smaller than the configured chunk
// size for the final chunk of a file.
struct Chunk {
    std::uint32_t chunk_id = 0;
    std::uint32_t file_id = 0;
    std::uint32_t byte_len = 0;
    CollisionSet collisions;
};

}  // namespace tubealloc::alloc
