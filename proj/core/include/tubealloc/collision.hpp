#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tubealloc/bases.hpp"
#include "tubealloc/bitset.hpp"
#include "tubealloc/chunk.hpp"
#include "tubealloc/codec.hpp"
#include "tubealloc/primer_library.hpp"

namespace tubealloc::collision {

// A primer collides with a payload when some primer window of window_len bases
// is within max_edits Levenshtein edits of some payload substring.
struct CollisionParams {
    std::size_t window_len = 12;
    std::size_t max_edits = 2;

    void validate() const {
        if (window_len < 1) throw Error("window_len must be at least 1");
        if (max_edits >= window_len) throw Error("max_edits must be smaller than window_len");
        if (window_len > 26) throw Error("window_len above 26 is not supported");
    }
};

// Normative collision predicate: dynamic programming over every primer window
// against the payload, free start/end on the payload side. Every faster
// detector must agree with this exactly.
bool collides_oracle(std::span<const Base> primer, std::span<const Base> payload,
                     const CollisionParams& params = {});

// Minimum edit distance between `pattern` and any substring of `text`,
// capped at limit+1. Exposed for tests.
std::size_t min_substring_edits(std::span<const Base> pattern, std::span<const Base> text,
                                std::size_t limit);

struct SeedEntry {
    std::uint32_t primer;
    std::uint16_t pos;
};

// Candidate generator over the primer library. Holds
//   - the k-mer seed table with k = floor(window_len / (max_edits + 1)),
//     per the pigeonhole principle: any match within max_edits preserves one
//     exact k-mer part of the window at a bounded offset;
//   - deletion-variant tables of every primer window (all ways of deleting up
//     to max_edits bases), which drive the production detector.
// Candidates are always verified with the full DP; the index only narrows the
// search, it never decides a collision by itself.
class CollisionIndex {
public:
    CollisionIndex() = default;

    const CollisionParams& params() const { return params_; }
    std::size_t kmer_len() const { return kmer_len_; }
    std::size_t library_size() const { return library_size_; }
    std::size_t primer_len() const { return primer_len_; }

    std::span<const SeedEntry> seed_bucket(std::uint64_t kmer_code) const {
        return {seed_entries_.data() + seed_starts_[kmer_code],
                seed_starts_[kmer_code + 1] - seed_starts_[kmer_code]};
    }

    std::span<const Base> primer_window(std::uint32_t primer, std::size_t wstart) const {
        return {primer_bases_.data() + primer * primer_len_ + wstart, params_.window_len};
    }

    friend CollisionIndex build_collision_index(const primer::PrimerLibrary& lib,
                                                const CollisionParams& params);

private:
    friend class ContextCache;

    struct Posting {
        std::uint32_t primer;
        std::uint16_t wstart;
        std::uint16_t pad = 0;
    };

    // Open-addressing map from packed variant code to a postings range, with a
    // direct-addressed presence bitmap in front of it.
    struct VariantTable {
        std::size_t s_len = 0;
        std::vector<std::uint64_t> bitmap;
        std::vector<std::uint64_t> keys;   // empty slots hold kEmptyKey
        std::vector<std::uint32_t> range;  // parallel to keys, index into starts
        std::vector<std::uint32_t> starts; // CSR over postings
        std::vector<Posting> postings;
        std::uint64_t slot_mask = 0;

        static constexpr std::uint64_t kEmptyKey = ~0ULL;

        bool maybe_contains(std::uint64_t code) const {
            return (bitmap[code >> 6] >> (code & 63)) & 1u;
        }
        std::span<const Posting> find(std::uint64_t code) const;
        void build(std::vector<std::pair<std::uint64_t, Posting>>& items, std::size_t s_len);
    };

    CollisionParams params_;
    std::size_t kmer_len_ = 0;
    std::size_t library_size_ = 0;
    std::size_t primer_len_ = 0;
    std::vector<Base> primer_bases_;          // all primers, concatenated
    std::vector<std::uint32_t> seed_starts_;  // 4^k + 1
    std::vector<SeedEntry> seed_entries_;
    std::vector<VariantTable> variant_tables_;  // one per S length in [W-e, W]
};

CollisionIndex build_collision_index(const primer::PrimerLibrary& lib,
                                     const CollisionParams& params = {});

// Per-thread scratch for the production detector: memoizes the primer set per
// payload context (window_len + max_edits bases) so repeated contexts across
// frames are answered with one hash lookup. Bound to one index.
class ContextCache {
public:
    explicit ContextCache(const CollisionIndex& index);

    void accumulate_payload(std::span<const Base> payload, CollisionSet& out);

    std::size_t distinct_contexts() const { return used_; }

private:
    std::span<const std::uint32_t> context_set(std::span<const Base> context);
    std::span<const std::uint32_t> compute_context_set(std::span<const Base> context);

    const CollisionIndex* index_;
    std::size_t context_len_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> vals_;  // 0 = empty set, else arena offset
    std::vector<std::uint32_t> arena_; // [count, ids...]; offset 0 unused
    std::size_t used_ = 0;

    // Small per-context memo of already verified (primer, window) candidates,
    // plus a per-primer membership stamp, both invalidated by epoch.
    std::vector<std::uint64_t> seen_;
    std::vector<std::uint32_t> seen_epoch_;
    std::vector<std::uint32_t> member_epoch_;
    std::uint32_t epoch_ = 0;
    std::vector<std::uint32_t> ids_tmp_;

    void grow();
    static constexpr std::uint64_t kUnset = ~0ULL;
    static constexpr std::size_t kMaxSlots = std::size_t(1) << 25;
};

// Union of colliding primers over all frames of one chunk. All frames must
// share one chunk_id. Exact agreement with collides_oracle over every
// (primer, frame) pair is part of the contract and is enforced by tests.
CollisionSet chunk_collision_set(std::span<const codec::PayloadFrame> frames,
                                 const CollisionIndex& index, ContextCache& cache);

// Convenience overload with a fresh cache (small inputs, tests).
CollisionSet chunk_collision_set(std::span<const codec::PayloadFrame> frames,
                                 const CollisionIndex& index);

// Seed-table-only detector (k-mer candidates + DP verification), kept as an
// independently-implemented cross-check of the production path.
CollisionSet chunk_collision_set_direct(std::span<const codec::PayloadFrame> frames,
                                        const CollisionIndex& index);

// Binary collision-set dump, schema CSET v1 (see README for the exact layout).
void write_collision_dump(const std::filesystem::path& path, std::size_t library_size,
                          std::span<const alloc::Chunk> chunks);
std::pair<std::size_t, std::vector<alloc::Chunk>> read_collision_dump(
    const std::filesystem::path& path);

}  // namespace tubealloc::collision
